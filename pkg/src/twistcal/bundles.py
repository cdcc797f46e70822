"""Frame fields of the anti-self-dual 2-forms and negative spinors along a surface in R^4.

For an oriented orthonormal frame f = (e1, e2, nu1, nu2) of R^4,

    w1 = f1^f2 - f3^f4,   w2 = f1^f3 - f4^f2,   w3 = f1^f4 - f2^f3

span the anti-self-dual forms.  They are stored as coordinates against the
same three forms built from the standard basis, which makes (w1, w2, w3) an
orthonormal triple in R^3.  Spinors live in H = span{1, i, j, k}.
"""
from __future__ import annotations

import numpy as np

from . import octonion as oc
from .immersion import FramePoint


def wedge(a, b) -> np.ndarray:
    return np.outer(a, b) - np.outer(b, a)


def asd_coordinates(W: np.ndarray) -> np.ndarray:
    """Coordinates of the anti-self-dual part of a 2-form given as a matrix."""
    return 0.5 * np.array([W[0, 1] - W[2, 3], W[0, 2] - W[3, 1], W[0, 3] - W[1, 2]])


def omega_matrices(f) -> list[np.ndarray]:
    f1, f2, f3, f4 = f
    return [wedge(f1, f2) - wedge(f3, f4),
            wedge(f1, f3) - wedge(f4, f2),
            wedge(f1, f4) - wedge(f2, f3)]


def omega_frame(fp: FramePoint) -> np.ndarray:
    """Rows w1, w2, w3 in fibre coordinates."""
    _require_surface(fp)
    return np.array([asd_coordinates(W) for W in omega_matrices(fp.frame)])


def omega_frame_derivatives(fp: FramePoint) -> np.ndarray:
    """d_{e_k} w_a by the product rule on the analytic frame derivatives; shape (2, 3, 3)."""
    _require_surface(fp)
    f = fp.frame
    out = np.zeros((fp.e.shape[0], 3, 3))
    pairs = [((0, 1), (2, 3)), ((0, 2), (3, 1)), ((0, 3), (1, 2))]
    for k in range(fp.e.shape[0]):
        df = np.vstack([fp.de[k], fp.dnu[k]])
        for a, ((i, j), (m, n)) in enumerate(pairs):
            W = (wedge(df[i], f[j]) + wedge(f[i], df[j])
                 - wedge(df[m], f[n]) - wedge(f[m], df[n]))
            out[k, a] = asd_coordinates(W)
    return out


def structure_coefficients(fp: FramePoint):
    """(P, Q, kappa) with d_{e_i} w1 = P_i w2 + Q_i w3, d_{e_i} w2 = -P_i w1 + kappa_i w3.

    P and Q come from the second fundamental form; kappa is the difference of
    the normal and tangent connection forms and vanishes in adapted frames.
    """
    _require_surface(fp)
    A1, A2 = fp.A[0], fp.A[1]
    P = A2[:, 0] - A1[:, 1]
    Q = -A1[:, 0] - A2[:, 1]
    kappa = fp.normal_connection() - fp.tangent_connection()
    return P, Q, kappa


def _require_surface(fp: FramePoint):
    if fp.e.shape != (2, 4):
        raise ValueError("anti-self-dual frames need a surface in R^4")


# -- spinors -------------------------------------------------------------------

def tangent_octonion(v) -> np.ndarray:
    """R^4 vector as an element of He = span{e, ie, je, ke}."""
    out = np.zeros(8)
    out[4:] = v
    return out


def quaternion_from_imaginary(a) -> np.ndarray:
    """(a1, a2, a3) -> a1 i + a2 j + a3 k in (1, i, j, k) coordinates."""
    return np.concatenate([[0.0], np.asarray(a, dtype=float)])


def complex_structure_spinor(e1, e2) -> np.ndarray:
    """j_L = e1 (e2 . 1) as a quaternion (first four octonion coordinates)."""
    one = oc.basis("1")
    s = oc.clifford_act(tangent_octonion(e1), oc.clifford_act(tangent_octonion(e2), one))
    return s[:4]


def quaternion_multiply(a, b) -> np.ndarray:
    return oc.multiply(np.concatenate([a, np.zeros(4)]), np.concatenate([b, np.zeros(4)]))[:4]


def spinor_frame(fp: FramePoint) -> np.ndarray:
    """Rows q1..q4: 1, j_L, the image of w2, and j_L q3."""
    _require_surface(fp)
    jl = complex_structure_spinor(fp.e[0], fp.e[1])
    om = omega_frame(fp)
    q3 = quaternion_from_imaginary(om[1])
    q4 = quaternion_multiply(jl, q3)
    return np.array([[1.0, 0.0, 0.0, 0.0], jl, q3, q4])


def spinor_frame_derivatives(fp: FramePoint) -> np.ndarray:
    """d_{e_k} q_j from the structure coefficients; shape (2, 4, 4)."""
    q = spinor_frame(fp)
    P, Q, kappa = structure_coefficients(fp)
    out = np.zeros((2, 4, 4))
    for k in range(2):
        out[k, 1] = P[k] * q[2] + Q[k] * q[3]
        out[k, 2] = -P[k] * q[1] + kappa[k] * q[3]
        out[k, 3] = -Q[k] * q[1] - kappa[k] * q[2]
    return out
