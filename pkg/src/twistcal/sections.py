"""Section-side conditions: holomorphic and parallel sections, harmonic 1-forms.

Sections are given by coordinates against orthonormal frame fields of a
subbundle of the fibre; covariant derivatives are projections of ordinary
derivatives of the ambient-valued section.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from . import bundles as bd
from .fields import TabulatedField, as_field
from .immersion import Immersion, OneFormOnL, adapted_frame, one_form_calculus

DEFAULT_STEP = 1e-5


@dataclass(frozen=True, eq=False)
class BundleFrameField:
    """Orthonormal frame fields of a rank-1 or rank-2 subbundle.

    ``kind`` selects the fields: "E" (w1), "F" (w2, w3), "V" (q3, q4), or
    "constant" with fixed ``vectors``.  For rank 2 the complex structure maps
    the first field to the second.  ``angle`` rotates a rank-2 pair.
    """

    kind: str
    imm: Immersion | None = None
    vectors: np.ndarray | None = None
    angle: float = 0.0

    @property
    def rank(self) -> int:
        if self.kind == "constant":
            return len(self.vectors)
        return 1 if self.kind == "E" else 2

    def at(self, u) -> np.ndarray:
        if self.kind == "constant":
            rows = np.array(self.vectors, dtype=float)
        else:
            fp = adapted_frame(self.imm, u)
            if self.kind in ("E", "F"):
                om = bd.omega_frame(fp)
                rows = om[:1] if self.kind == "E" else om[1:]
            elif self.kind == "V":
                rows = bd.spinor_frame(fp)[2:]
            else:
                raise ValueError(f"unknown bundle kind {self.kind!r}")
        if self.angle and rows.shape[0] == 2:
            c, s = math.cos(self.angle), math.sin(self.angle)
            rows = np.array([c * rows[0] + s * rows[1], -s * rows[0] + c * rows[1]])
        return rows

    def rotated(self, angle: float) -> "BundleFrameField":
        return BundleFrameField(self.kind, self.imm, self.vectors, self.angle + angle)


def lambda2_frames(imm) -> BundleFrameField:
    return BundleFrameField("F", imm)


def line_frame(imm) -> BundleFrameField:
    return BundleFrameField("E", imm)


def spinor_frames(imm) -> BundleFrameField:
    return BundleFrameField("V", imm)


def constant_frames(vectors) -> BundleFrameField:
    return BundleFrameField("constant", None, np.array(vectors, dtype=float))


def _section(frames, coeffs, u) -> np.ndarray:
    rows = frames.at(u)
    return sum(f.value(u) * r for f, r in zip(coeffs, rows))


def section_derivatives(imm, frames, coeffs, u, step=DEFAULT_STEP):
    """Derivatives of the ambient section along e_1..e_p (one Richardson level)."""
    u = np.asarray(u, dtype=float)
    rows = []
    for m in range(len(u)):
        quot = []
        for h in (step, step / 2):
            up, dn = u.copy(), u.copy()
            up[m] += h
            dn[m] -= h
            quot.append((_section(frames, coeffs, up) - _section(frames, coeffs, dn)) / (2 * h))
        rows.append((4 * quot[1] - quot[0]) / 3)
    C = adapted_frame(imm, u).chart_jacobian
    return C.T @ np.array(rows)


def dbar_residual(imm, frames: BundleFrameField, alpha, beta, u, step=DEFAULT_STEP) -> float:
    """|pi(d_{e1} sigma) + J pi(d_{e2} sigma)| for sigma = alpha s2 + beta s3."""
    if imm.p != 2:
        raise ValueError("dbar_residual needs a 2-dimensional base")
    alpha = as_field(alpha, imm.variables)
    beta = as_field(beta, imm.variables)
    d = section_derivatives(imm, frames, (alpha, beta), u, step)
    s = frames.at(u)
    proj = d @ s.T  # proj[i] = coordinates of pi(d_{e_i} sigma) in (s2, s3)
    j_second = np.array([-proj[1, 1], proj[1, 0]])
    return float(np.linalg.norm(proj[0] + j_second))


def parallel_residual(imm, frame: BundleFrameField, gamma, u, step=DEFAULT_STEP) -> float:
    """sum_i |pi_E(d_{e_i}(gamma s1))|."""
    if imm.p != 2 or imm.n != 4:
        raise ValueError("parallel_residual needs a surface in R^4")
    gamma = as_field(gamma, imm.variables)
    d = section_derivatives(imm, frame, (gamma,), u, step)
    s1 = frame.at(u)[0]
    return float(np.sum(np.abs(d @ s1)))


def harmonic_residual(imm: Immersion, mu: OneFormOnL, grid) -> dict:
    closed = 0.0
    coclosed = 0.0
    for u in np.atleast_2d(grid):
        calc = one_form_calculus(imm, mu, u)
        closed = max(closed, float(np.max(np.abs(calc.dmu))))
        coclosed = max(coclosed, abs(float(np.trace(calc.B))))
    return {"closedness": closed, "coclosedness": coclosed}


# -- y-independent family ------------------------------------------------------

def holomorphic_rates(imm: Immersion, x: float, y: float = 0.0) -> np.ndarray:
    """Matrix R with (alpha, beta)' = R (alpha, beta) for y-independent sections.

    Derived from the frame-corrected Cauchy-Riemann equations when the
    coefficients depend on the first base coordinate only and the chart is
    conformal.
    """
    fp = adapted_frame(imm, [x, y])
    _, _, kappa = bd.structure_coefficients(fp)
    r = 1.0 / fp.chart_jacobian[0, 0]  # |dx/du^1|
    k1, k2 = kappa
    return r * np.array([[k2, k1], [-k1, k2]])


def exp_graph_rate(x: float) -> float:
    """Scalar rate of the exp-graph family, -2 e^{2x} / (1 + e^{2x})."""
    return -2.0 * math.exp(2 * x) / (1.0 + math.exp(2 * x))


@dataclass(frozen=True)
class YFamily:
    x: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray

    def fields(self, n_vars: int = 2):
        return (TabulatedField(self.x, self.alpha, 0, n_vars),
                TabulatedField(self.x, self.beta, 0, n_vars))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "alpha", "beta"])
        for row in zip(self.x, self.alpha, self.beta):
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


def _rk4(rhs, y0, xs):
    out = np.empty((len(xs), len(y0)))
    out[0] = y0
    y = np.array(y0, dtype=float)
    for k in range(len(xs) - 1):
        x, h = xs[k], xs[k + 1] - xs[k]
        k1 = rhs(x, y)
        k2 = rhs(x + h / 2, y + h / 2 * k1)
        k3 = rhs(x + h / 2, y + h / 2 * k2)
        k4 = rhs(x + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[k + 1] = y
    return out


def solve_y_independent_family(imm: Immersion | None, alpha0: float, beta0: float,
                               x_range=(-1.0, 1.0), step: float = 1e-3) -> YFamily:
    """Classical RK4 from x = 0 in both directions.

    With ``imm`` the rates come from the frame connection of the immersion
    along y = 0; with ``imm=None`` the closed-form exp-graph rate is used.
    """
    lo, hi = x_range
    if not lo <= 0.0 <= hi:
        raise ValueError("x_range must contain the initial point x = 0")
    n_neg = int(round(-lo / step))
    n_pos = int(round(hi / step))
    if imm is None:
        def rhs(x, y):
            return exp_graph_rate(x) * y
    else:
        def rhs(x, y):
            return holomorphic_rates(imm, x) @ y
    y0 = np.array([alpha0, beta0], dtype=float)
    fwd = _rk4(rhs, y0, step * np.arange(0, n_pos + 1))
    bwd = _rk4(rhs, y0, -step * np.arange(0, n_neg + 1))
    xs = step * np.arange(-n_neg, n_pos + 1)
    vals = np.vstack([bwd[:0:-1], fwd])
    return YFamily(xs, vals[:, 0], vals[:, 1])


def exp_family_closed_form(x, C: float, K: float):
    """alpha = C / (1 + e^{2x}), beta = K / (1 + e^{2x})."""
    w = 1.0 / (1.0 + np.exp(2 * np.asarray(x, dtype=float)))
    return C * w, K * w
