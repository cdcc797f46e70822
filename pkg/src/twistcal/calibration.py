"""Calibration structures evaluated on frames of ambient vectors.

Coordinate conventions:

* SL:    R^{2n} = (x^1..x^n, xi_1..xi_n), z = x + i xi.
* G2:    R^7 = (a1, a2, a3, x1..x4), fibre first; embedded in Im O as
         a1 i + a2 j + a3 k + x1 e + x2 ie + x3 je + x4 ke.
* Spin7: R^8 = (s0..s3, x1..x4), spinor first; embedded in O as
         s0 + s1 i + s2 j + s3 k + x1 e + x2 ie + x3 je + x4 ke.

All residuals are normalised so that they are unchanged by rescaling or
orthonormally reframing the arguments.
"""
from __future__ import annotations

from itertools import combinations

import numpy as np

from . import octonion as oc

DEGENERACY_TOL = 1e-12


class DegenerateFrameError(ValueError):
    pass


GEOMETRY_DIMS = {"G2": 7, "Spin7": 8}


def _frame(vs, dim=None) -> np.ndarray:
    V = np.atleast_2d(np.asarray(vs, dtype=float))
    if dim is not None and V.shape[1] != dim:
        raise ValueError(f"expected vectors of length {dim}, got {V.shape[1]}")
    return V


def gram_volume(vs) -> float:
    V = _frame(vs)
    det = np.linalg.det(V @ V.T)
    return float(np.sqrt(max(det, 0.0)))


def _checked_volume(V) -> float:
    vol = gram_volume(V)
    scale = float(np.prod(np.linalg.norm(V, axis=1)))
    if vol < DEGENERACY_TOL * max(scale, 1.0) or vol == 0.0:
        raise DegenerateFrameError(f"degenerate frame (Gram volume {vol:.3e})")
    return vol


def orthonormal_basis(vs) -> np.ndarray:
    """Rows spanning the same space, orthonormal, via QR."""
    V = _frame(vs)
    _checked_volume(V)
    Q, _ = np.linalg.qr(V.T)
    return Q.T


# -- special Lagrangian --------------------------------------------------------

def symplectic_eval(v, w) -> float:
    """omega = sum_k dx^k ^ dxi_k."""
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if v.shape != w.shape or v.shape[0] % 2:
        raise ValueError("symplectic_eval needs two vectors of equal even length")
    n = v.shape[0] // 2
    return float(v[:n] @ w[n:] - w[:n] @ v[n:])


def symplectic_matrix(vs) -> np.ndarray:
    V = _frame(vs)
    n = V.shape[1] // 2
    X, Y = V[:, :n], V[:, n:]
    return X @ Y.T - Y @ X.T


def holo_volume_eval(vs) -> complex:
    """Omega = dz^1 ^ ... ^ dz^n on n vectors."""
    V = _frame(vs)
    n = V.shape[1] // 2
    if V.shape[0] != n:
        raise ValueError(f"need exactly {n} vectors, got {V.shape[0]}")
    Z = V[:, :n] + 1j * V[:, n:]
    return complex(np.linalg.det(Z.T))


def sl_components(vs, theta: float) -> dict:
    """Phase and Lagrangian parts of the SL residual on an orthonormalised frame."""
    Q = orthonormal_basis(vs)
    phase = abs((np.exp(-1j * theta) * holo_volume_eval(Q)).imag)
    W = symplectic_matrix(Q)
    lag = float(np.sqrt(np.sum(np.triu(W, 1) ** 2)))
    return {"phase": float(phase), "lagrangian": lag}


def sl_residual(vs, theta: float) -> float:
    """Zero iff span(vs) is special Lagrangian with phase e^{i theta}."""
    c = sl_components(vs, theta)
    return c["phase"] + c["lagrangian"]


# -- G2 ------------------------------------------------------------------------

# (indices, sign) of the terms of phi, coordinates (a1, a2, a3, x1, x2, x3, x4)
PHI_TERMS = (
    ((0, 1, 2), 1.0),
    ((0, 3, 4), 1.0), ((0, 5, 6), -1.0),
    ((1, 3, 5), 1.0), ((1, 6, 4), -1.0),
    ((2, 3, 6), 1.0), ((2, 4, 5), -1.0),
)


def _phi_tensor() -> np.ndarray:
    T = np.zeros((7, 7, 7))
    perms = (((0, 1, 2), 1), ((1, 2, 0), 1), ((2, 0, 1), 1),
             ((1, 0, 2), -1), ((0, 2, 1), -1), ((2, 1, 0), -1))
    for idx, sgn in PHI_TERMS:
        for perm, ps in perms:
            T[idx[perm[0]], idx[perm[1]], idx[perm[2]]] += sgn * ps
    return T


PHI = _phi_tensor()


def g2_phi_eval(u, v, w) -> float:
    return float(np.einsum("abc,a,b,c->", PHI, u, v, w))


def g2_to_octonion(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (7,):
        raise ValueError(f"G2 vectors have 7 coordinates, got {v.shape}")
    return np.concatenate([[0.0], v])


def spin7_to_octonion(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (8,):
        raise ValueError(f"Spin7 vectors have 8 coordinates, got {v.shape}")
    return v.copy()


def associative_residual(u, v, w) -> float:
    """|[u, v, w]| / vol, zero iff the triple spans an associative 3-plane."""
    V = _frame([u, v, w], 7)
    vol = _checked_volume(V)
    a, b, c = (g2_to_octonion(r) for r in V)
    return float(np.linalg.norm(oc.associator(a, b, c))) / vol


def coassociative_residual(vs) -> float:
    """Norm of phi restricted to the span of four vectors.

    Computed on an orthonormal basis of the span as the root sum of squares
    over the four triples, so the value does not depend on the frame.
    """
    V = _frame(vs, 7)
    if V.shape[0] != 4:
        raise ValueError(f"need 4 vectors, got {V.shape[0]}")
    Q = orthonormal_basis(V)
    vals = [g2_phi_eval(*Q[list(t)]) for t in combinations(range(4), 3)]
    return float(np.sqrt(np.sum(np.square(vals))))


def coassociative_triples(vs) -> list[float]:
    """|phi(triple)| / vol(triple) for the four triples of the given frame."""
    V = _frame(vs, 7)
    out = []
    for t in combinations(range(4), 3):
        sub = V[list(t)]
        out.append(abs(g2_phi_eval(*sub)) / _checked_volume(sub))
    return out


def cayley_residual(vs) -> float:
    """|Im(v1 x v2 x v3 x v4)| / vol, zero iff the span is a Cayley 4-plane."""
    V = _frame(vs, 8)
    if V.shape[0] != 4:
        raise ValueError(f"need 4 vectors, got {V.shape[0]}")
    vol = _checked_volume(V)
    return float(np.linalg.norm(oc.fourfold_imaginary(*V))) / vol


def residual_for(geometry: str, vs, theta: float = 0.0) -> dict:
    """Dispatch to the residual of a geometry; returns named components."""
    if geometry == "SL":
        comp = sl_components(vs, theta)
        return {"residual": comp["phase"] + comp["lagrangian"], **comp}
    if geometry == "associative":
        return {"residual": associative_residual(*vs)}
    if geometry == "coassociative":
        return {"residual": coassociative_residual(vs)}
    if geometry == "cayley":
        return {"residual": cayley_residual(vs)}
    raise ValueError(f"unknown geometry {geometry!r}")
