import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twistcal import invariants as inv


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.integers(0, 10_000))
def test_sym_polys_match_characteristic_polynomial(p, seed):
    M = np.random.default_rng(seed).normal(size=(p, p))
    coeffs = np.poly(M)  # det(xI - M) = sum (-1)^k sigma_k x^(p-k)
    expected = np.array([(-1) ** k * coeffs[k] for k in range(p + 1)])
    assert np.allclose(inv.sym_polys(M), expected, atol=1e-9)


def test_sym_polys_trace_and_det():
    M = np.array([[1.0, 2.0, 0.0], [0.5, -1.0, 3.0], [2.0, 0.0, 4.0]])
    s = inv.sym_polys(M)
    assert s[0] == 1.0
    assert s[1] == pytest.approx(np.trace(M))
    assert s[3] == pytest.approx(np.linalg.det(M))


def test_char_expansion():
    rng = np.random.default_rng(2)
    M = rng.normal(size=(4, 4))
    t = 0.3 - 0.7j
    assert inv.char_expansion(M, t) == pytest.approx(np.linalg.det(np.eye(4) + t * M))


def test_sigma_s_derivatives_by_finite_differences():
    rng = np.random.default_rng(4)
    A, B = rng.normal(size=(2, 3, 3))
    h = 1e-4
    for j in range(4):
        d = inv.sigma_s_derivatives(A, B, j)
        fd = (inv.sym_polys(B + h * A) - inv.sym_polys(B - h * A)) / (2 * h) if j == 1 else None
        if j == 0:
            assert np.allclose(d, inv.sym_polys(B))
        elif j == 1:
            assert np.allclose(d, fd, atol=1e-6)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(0, 10_000))
def test_identity_residual_small(p, seed):
    rng = np.random.default_rng(seed)
    A, B = rng.normal(size=(2, p, p))
    for t in (1j, -1j):
        try:
            for j in range(p + 1):
                assert inv.lemma_residual(A, B, j, t) < 1e-9
        except inv.SingularShiftError:
            pass


def test_singular_shift_rejected():
    B = np.diag([1.0, 2.0])
    with pytest.raises(inv.SingularShiftError):
        inv.lemma_residual(np.eye(2), B, 1, -1.0)


def test_fuzz_reports_worst_case():
    worst = inv.lemma_fuzz(50, 4, seed=1)
    assert set(worst) >= {"residual", "p", "j", "t", "checks"}
    assert worst["residual"] < 1e-9
    assert inv.lemma_fuzz(50, 4, seed=1) == worst
