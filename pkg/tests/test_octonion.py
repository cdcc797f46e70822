import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from twistcal import octonion as oc

octs = arrays(np.float64, 8, elements=st.floats(-3, 3, allow_nan=False))


def test_basis_and_terms():
    assert np.array_equal(oc.from_terms(one=2.0, ie=-1.0), [2, 0, 0, 0, 0, -1, 0, 0])
    assert oc.real_part(oc.basis("1")) == 1.0
    with pytest.raises((KeyError, ValueError)):
        oc.basis("q")


def test_imaginary_units_square_to_minus_one():
    for lab in oc.BASIS_LABELS[1:]:
        b = oc.basis(lab)
        assert np.array_equal(oc.multiply(b, b), -oc.basis("1"))


def test_quaternion_subalgebra():
    i, j, k = oc.basis("i"), oc.basis("j"), oc.basis("k")
    assert np.array_equal(oc.multiply(i, j), k)
    assert np.array_equal(oc.multiply(j, i), -k)


@settings(max_examples=60, deadline=None)
@given(octs, octs)
def test_norm_is_multiplicative(a, b):
    assert oc.norm(oc.multiply(a, b)) == pytest.approx(oc.norm(a) * oc.norm(b), rel=1e-10, abs=1e-10)


@settings(max_examples=60, deadline=None)
@given(octs, octs)
def test_alternative_laws(a, b):
    assert np.allclose(oc.associator(a, a, b), 0, atol=1e-10)
    assert np.allclose(oc.associator(a, b, b), 0, atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(octs, octs, octs)
def test_associator_alternating(a, b, c):
    assert np.allclose(oc.associator(a, b, c), -oc.associator(b, a, c), atol=1e-9)
    assert np.allclose(oc.associator(a, b, c), oc.associator(b, c, a), atol=1e-9)


def test_associator_nonzero_outside_quaternions():
    i, j, e = oc.basis("i"), oc.basis("j"), oc.basis("e")
    assert oc.norm(oc.associator(i, j, e)) == pytest.approx(2.0)


def test_conjugation_reverses_products():
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=(2, 8))
    lhs = oc.conjugate(oc.multiply(a, b))
    rhs = oc.multiply(oc.conjugate(b), oc.conjugate(a))
    assert np.allclose(lhs, rhs)


def test_left_matrix_matches_multiply():
    rng = np.random.default_rng(1)
    a, b = rng.normal(size=(2, 8))
    assert np.allclose(oc.left_matrix(a) @ b, oc.multiply(a, b))


def test_fourfold_vanishes_on_quaternions():
    one, i, j, k = (oc.basis(x) for x in ("1", "i", "j", "k"))
    assert np.allclose(oc.fourfold_imaginary(one, i, j, k), 0, atol=1e-14)


def test_fourfold_nonzero_on_generic_plane():
    one, i, j, e = (oc.basis(x) for x in ("1", "i", "j", "e"))
    assert oc.norm(oc.fourfold_imaginary(one, i, j, e)) > 0.5


@settings(max_examples=30, deadline=None)
@given(octs, octs, octs, octs)
def test_fourfold_is_alternating(a, b, c, d):
    try:
        x = oc.fourfold_imaginary(a, b, c, d)
    except ValueError:
        return  # degenerate input
    y = oc.fourfold_imaginary(b, a, c, d)
    assert np.allclose(x, -y, atol=1e-8 * (1 + oc.norm(x)))


def test_clifford_act_requires_he_argument():
    with pytest.raises(ValueError):
        oc.clifford_act(oc.basis("i"), oc.basis("1"))
    out = oc.clifford_act(oc.basis("e"), oc.basis("1"))
    assert oc.norm(out) == pytest.approx(1.0)


def test_format_table_rows():
    lines = oc.format_table().splitlines()
    assert len(lines) == 9
    assert lines[2].split() == ["i", "i", "-1", "k", "-j", "ie", "-e", "-ke", "je"]
