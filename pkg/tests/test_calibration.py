import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from twistcal import calibration as cal
from twistcal import octonion as oc

seeds = st.integers(0, 100_000)


def _complex_to_real(Z):
    """Columns of a complex n x k matrix as real 2n-vectors (x, xi)."""
    return np.vstack([Z.real, Z.imag]).T


def test_real_plane_is_special_lagrangian_phase_zero():
    n = 3
    vs = np.hstack([np.eye(n), np.zeros((n, n))])
    assert cal.sl_residual(vs, 0.0) < 1e-15
    assert cal.sl_residual(vs, 0.4) > 0.1


def test_imaginary_plane_phase():
    n = 2
    vs = np.hstack([np.zeros((n, n)), np.eye(n)])
    assert cal.sl_residual(vs, np.pi) < 1e-15  # i^2 = -1


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), seeds)
def test_unitary_image_has_phase_trace(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n, n))
    A = A + A.T
    vs = _complex_to_real(expm(1j * A))
    assert cal.sl_residual(vs, float(np.trace(A))) < 1e-9


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_sl_residual_frame_invariant(seed):
    rng = np.random.default_rng(seed)
    vs = rng.normal(size=(3, 6))
    M = rng.normal(size=(3, 3)) + 3 * np.eye(3)
    M *= np.sign(np.linalg.det(M))
    a = cal.sl_components(vs, 0.3)
    b = cal.sl_components(M @ vs, 0.3)
    assert a["phase"] == pytest.approx(b["phase"], abs=1e-9)
    assert a["lagrangian"] == pytest.approx(b["lagrangian"], abs=1e-9)


def test_symplectic_pairing():
    v = np.array([1.0, 0.0, 0.0, 0.0])
    w = np.array([0.0, 0.0, 1.0, 0.0])
    assert cal.symplectic_eval(v, w) == 1.0
    assert cal.symplectic_eval(w, v) == -1.0


def test_degenerate_frame_rejected():
    with pytest.raises(cal.DegenerateFrameError):
        cal.associative_residual(np.eye(7)[0], np.eye(7)[0], np.eye(7)[1])


def test_phi_on_imaginary_quaternions():
    e = np.eye(7)
    assert cal.g2_phi_eval(e[0], e[1], e[2]) == 1.0
    assert cal.associative_residual(e[0], e[1], e[2]) < 1e-15
    assert cal.coassociative_residual(e[3:7]) < 1e-15


def test_phi_agrees_with_octonion_product():
    rng = np.random.default_rng(7)
    for _ in range(20):
        u, v, w = rng.normal(size=(3, 7))
        prod = oc.multiply(cal.g2_to_octonion(v), cal.g2_to_octonion(w))
        assert cal.g2_phi_eval(u, v, w) == pytest.approx(cal.g2_to_octonion(u) @ prod)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_associator_phi_volume_identity(seed):
    u, v, w = np.random.default_rng(seed).normal(size=(3, 7))
    vol2 = np.linalg.det(np.array([u, v, w]) @ np.array([u, v, w]).T)
    assoc = oc.associator(*(cal.g2_to_octonion(x) for x in (u, v, w)))
    assert cal.g2_phi_eval(u, v, w) ** 2 + 0.25 * assoc @ assoc == pytest.approx(vol2, rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_phi_is_a_calibration(seed):
    Q = cal.orthonormal_basis(np.random.default_rng(seed).normal(size=(3, 7)))
    assert abs(cal.g2_phi_eval(*Q)) <= 1.0 + 1e-12


def test_coassociative_generic_plane_fails():
    e = np.eye(7)
    assert cal.coassociative_residual([e[0], e[1], e[3], e[5]]) > 0.5
    assert max(cal.coassociative_triples([e[0], e[1], e[3], e[5]])) == pytest.approx(1.0)


def test_cayley_planes():
    e = np.eye(8)
    assert cal.cayley_residual(e[:4]) < 1e-14
    assert cal.cayley_residual(e[4:]) < 1e-14
    assert cal.cayley_residual([e[0], e[1], e[2], e[4]]) > 0.5


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_cayley_residual_frame_invariant(seed):
    rng = np.random.default_rng(seed)
    V = rng.normal(size=(4, 8))
    M = rng.normal(size=(4, 4)) + 4 * np.eye(4)
    assert cal.cayley_residual(M @ V) == pytest.approx(cal.cayley_residual(V), rel=1e-7, abs=1e-9)


def test_residual_dispatch():
    e = np.eye(7)
    out = cal.residual_for("associative", e[:3])
    assert out == {"residual": pytest.approx(0.0, abs=1e-15)}
    with pytest.raises(ValueError):
        cal.residual_for("hyperkahler", e[:3])
