"""Twisted subbundles: ambient immersions, tangent frames by two routes, verdicts.

Each spec describes a submanifold swept out by translating the fibres of a
bundle over an immersed base by a section:

* ``SLTwist``      conormal bundle of L^p in R^n shifted by a 1-form mu,
                   inside T*R^n = C^n.
* ``AssocTwist``   line bundle spanned by w1, shifted by alpha w2 + beta w3,
                   inside the anti-self-dual 2-forms R^7.
* ``CoassocTwist`` plane bundle span{w2, w3}, shifted by gamma w1.
* ``CayleyTwist``  span{q1, q2} of negative spinors shifted by
                   alpha q3 + beta q4, inside R^8.

The numeric route differentiates the ambient map by central differences in
the base (exact in the fibre, where it is affine); the closed-form route
assembles the same tangent vectors from the second fundamental form together
with derivatives of the twisting section.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import partial
from typing import ClassVar, Sequence

import numpy as np
from scipy.linalg import subspace_angles

from . import bundles as bd
from . import calibration as cal
from .fields import as_field
from .immersion import (GeometryError, Immersion, OneFormOnL, adapted_frame,
                        one_form_ambient, one_form_calculus)
from .invariants import sym_polys
from .parallel import ordered_map
from .report import ResidualReport, SampleRecord, summarize

DEFAULT_STEP = 1e-5
DEFAULT_RICHARDSON = 1
DEFAULT_TOL = 1e-6


class DifferencingError(GeometryError):
    pass


def _require_surface_in_r4(imm: Immersion, kind: str):
    if imm.p != 2 or imm.n != 4:
        raise ValueError(f"{kind} twists need a surface in R^4, got p = {imm.p}, n = {imm.n}")


@dataclass(frozen=True, eq=False)
class SLTwist:
    imm: Immersion
    mu: OneFormOnL
    theta: float
    geometry: ClassVar[str] = "SL"

    def __post_init__(self):
        if tuple(self.mu.variables) != tuple(self.imm.variables):
            raise ValueError("1-form and immersion must use the same variables")

    @property
    def fibre_dim(self) -> int:
        return self.imm.q

    @property
    def phase_offset(self) -> float:
        """phi = pi q / 2 - theta."""
        return 0.5 * math.pi * self.imm.q - self.theta


@dataclass(frozen=True, eq=False)
class AssocTwist:
    imm: Immersion
    alpha: object
    beta: object
    geometry: ClassVar[str] = "associative"
    fibre_dim: ClassVar[int] = 1

    def __post_init__(self):
        _require_surface_in_r4(self.imm, "associative")
        object.__setattr__(self, "alpha", as_field(self.alpha, self.imm.variables))
        object.__setattr__(self, "beta", as_field(self.beta, self.imm.variables))


@dataclass(frozen=True, eq=False)
class CoassocTwist:
    imm: Immersion
    gamma: object
    geometry: ClassVar[str] = "coassociative"
    fibre_dim: ClassVar[int] = 2

    def __post_init__(self):
        _require_surface_in_r4(self.imm, "coassociative")
        object.__setattr__(self, "gamma", as_field(self.gamma, self.imm.variables))


@dataclass(frozen=True, eq=False)
class CayleyTwist:
    imm: Immersion
    alpha: object
    beta: object
    geometry: ClassVar[str] = "cayley"
    fibre_dim: ClassVar[int] = 2

    def __post_init__(self):
        _require_surface_in_r4(self.imm, "Cayley")
        object.__setattr__(self, "alpha", as_field(self.alpha, self.imm.variables))
        object.__setattr__(self, "beta", as_field(self.beta, self.imm.variables))


TwistSpec = SLTwist | AssocTwist | CoassocTwist | CayleyTwist


@dataclass(frozen=True)
class TwistedPoint:
    u: tuple
    t: tuple


@dataclass(frozen=True)
class TwistedFrame:
    """E: pushforwards of the orthonormal base directions; F: fibre directions."""

    E: np.ndarray
    F: np.ndarray
    geometry: str

    @property
    def vectors(self) -> np.ndarray:
        return np.vstack([self.E, self.F])


def ambient_dim(spec) -> int:
    if isinstance(spec, SLTwist):
        return 2 * spec.imm.n
    return 8 if isinstance(spec, CayleyTwist) else 7


def assemble(spec, base, fibre) -> np.ndarray:
    """Ambient coordinates: (x, xi) for SL, fibre-first otherwise."""
    if isinstance(spec, SLTwist):
        return np.concatenate([base, fibre])
    return np.concatenate([fibre, base])


def _parts(spec, u, fp=None):
    """(base point, fibre offset, fibre basis rows) at u; h(u, t) is affine in t."""
    imm = spec.imm
    if fp is None:
        fp = adapted_frame(imm, u)
    if isinstance(spec, SLTwist):
        return fp.x, one_form_ambient(imm, spec.mu, u), fp.nu
    if isinstance(spec, (AssocTwist, CoassocTwist)):
        om = bd.omega_frame(fp)
        if isinstance(spec, AssocTwist):
            off = spec.alpha.value(u) * om[1] + spec.beta.value(u) * om[2]
            return fp.x, off, om[:1]
        return fp.x, spec.gamma.value(u) * om[0], om[1:]
    q = bd.spinor_frame(fp)
    off = spec.alpha.value(u) * q[2] + spec.beta.value(u) * q[3]
    return fp.x, off, q[:2]


class AmbientMap:
    """h(u, t) for a twist spec."""

    def __init__(self, spec):
        self.spec = spec

    def __call__(self, u, t) -> np.ndarray:
        base, off, basis = _parts(self.spec, np.asarray(u, dtype=float))
        t = np.asarray(t, dtype=float).reshape(-1)
        if t.shape[0] != basis.shape[0]:
            raise ValueError(f"expected {basis.shape[0]} fibre coordinates, got {t.shape[0]}")
        return assemble(self.spec, base, off + t @ basis)


def build_ambient_immersion(spec) -> AmbientMap:
    return AmbientMap(spec)


# -- numeric route -------------------------------------------------------------

def _flat_parts(spec, u) -> np.ndarray:
    base, off, basis = _parts(spec, u)
    return np.concatenate([base, off, basis.ravel()])


def _central(spec, u, m, h) -> np.ndarray:
    up = np.array(u, dtype=float)
    dn = np.array(u, dtype=float)
    up[m] += h
    dn[m] -= h
    d = (_flat_parts(spec, up) - _flat_parts(spec, dn)) / (2.0 * h)
    if not np.all(np.isfinite(d)):
        raise DifferencingError(f"non-finite difference quotient along u{m + 1}", u)
    return d


def coordinate_derivatives(spec, u, step=DEFAULT_STEP, richardson=DEFAULT_RICHARDSON):
    """d/du^m of the flattened parts, with ``richardson`` extrapolation levels."""
    rows = []
    for m in range(spec.imm.p):
        table = [_central(spec, u, m, step / 2**k) for k in range(richardson + 1)]
        for level in range(1, richardson + 1):
            f = 4.0**level
            table = [(f * table[k + 1] - table[k]) / (f - 1.0) for k in range(len(table) - 1)]
        rows.append(table[0])
    return np.array(rows)


def numeric_frames(spec, u, ts, step=DEFAULT_STEP, richardson=DEFAULT_RICHARDSON,
                   fp=None) -> list[TwistedFrame]:
    u = np.asarray(u, dtype=float)
    if fp is None:
        fp = adapted_frame(spec.imm, u)
    base, off, basis = _parts(spec, u, fp)
    nb, no = base.size, off.size
    dcoord = coordinate_derivatives(spec, u, step, richardson)
    dframe = fp.chart_jacobian.T @ dcoord  # along e_i
    dbase = dframe[:, :nb]
    doff = dframe[:, nb:nb + no]
    dbasis = dframe[:, nb + no:].reshape(-1, *basis.shape)
    F = np.array([assemble(spec, np.zeros(nb), b) for b in basis])
    frames = []
    for t in ts:
        t = np.asarray(t, dtype=float)
        E = np.array([assemble(spec, dbase[i], doff[i] + t @ dbasis[i])
                      for i in range(spec.imm.p)])
        frames.append(TwistedFrame(E, F, spec.geometry))
    return frames


# -- closed-form route ---------------------------------------------------------

def _frame_gradient(field, u, C):
    val, grad = field.jet(u)
    return val, C.T @ grad


def sl_closed_vectors(fp, A_nu, covariant, normal_part):
    """E_i = (e_i, sum_l (A_nu + nabla mu)_il e_l + sum_a W_ia nu_a), F_a = (0, nu_a)."""
    n = fp.x.size
    E = np.hstack([fp.e, (A_nu + covariant) @ fp.e + normal_part @ fp.nu])
    F = np.hstack([np.zeros((fp.nu.shape[0], n)), fp.nu])
    return E, F


def associative_coefficients(fp, alpha, beta, t1):
    """(a, b, c) with E_i = e_i + a_i w1 + b_i w2 + c_i w3.

    ``alpha``/``beta`` are (value, frame gradient) pairs.  In an adapted frame
    kappa = 0 and these reduce to the textbook coefficients.
    """
    P, Q, kappa = bd.structure_coefficients(fp)
    (al, dal), (be, dbe) = alpha, beta
    a = -al * P - be * Q
    b = t1 * P + dal - be * kappa
    c = t1 * Q + dbe + al * kappa
    return a, b, c


def coassociative_coefficients(fp, gamma, t2, t3):
    P, Q, kappa = bd.structure_coefficients(fp)
    g, dg = gamma
    a = dg - t2 * P - t3 * Q
    b = g * P - t3 * kappa
    c = g * Q + t2 * kappa
    return a, b, c


def closed_frame(spec, u, t, fp=None) -> TwistedFrame:
    u = np.asarray(u, dtype=float)
    t = np.asarray(t, dtype=float).reshape(-1)
    imm = spec.imm
    if fp is None:
        fp = adapted_frame(imm, u)
    C = fp.chart_jacobian
    if isinstance(spec, SLTwist):
        calc = one_form_calculus(imm, spec.mu, u, fp)
        A_nu = fp.shape_operator(t)
        normal_part = -np.einsum("aim,m->ia", fp.A, calc.values)
        E, F = sl_closed_vectors(fp, A_nu, calc.covariant, normal_part)
        return TwistedFrame(E, F, spec.geometry)
    if isinstance(spec, (AssocTwist, CoassocTwist)):
        om = bd.omega_frame(fp)
        if isinstance(spec, AssocTwist):
            a, b, c = associative_coefficients(
                fp, _frame_gradient(spec.alpha, u, C), _frame_gradient(spec.beta, u, C), t[0])
            fib = [om[0]]
        else:
            a, b, c = coassociative_coefficients(fp, _frame_gradient(spec.gamma, u, C), t[0], t[1])
            fib = [om[1], om[2]]
        E = np.array([np.concatenate([a[i] * om[0] + b[i] * om[1] + c[i] * om[2], fp.e[i]])
                      for i in range(2)])
        F = np.array([np.concatenate([w, np.zeros(4)]) for w in fib])
        return TwistedFrame(E, F, spec.geometry)
    q = bd.spinor_frame(fp)
    dq = bd.spinor_frame_derivatives(fp)
    al, dal = _frame_gradient(spec.alpha, u, C)
    be, dbe = _frame_gradient(spec.beta, u, C)
    E = []
    for i in range(2):
        s = (t[0] * dq[i, 0] + t[1] * dq[i, 1] + dal[i] * q[2] + dbe[i] * q[3]
             + al * dq[i, 2] + be * dq[i, 3])
        E.append(np.concatenate([s, fp.e[i]]))
    F = np.array([np.concatenate([q[0], np.zeros(4)]), np.concatenate([q[1], np.zeros(4)])])
    return TwistedFrame(np.array(E), F, spec.geometry)


def twisted_frame(spec, pt: TwistedPoint, route: str = "numeric", step=DEFAULT_STEP,
                  richardson=DEFAULT_RICHARDSON) -> TwistedFrame:
    if len(pt.t) != spec.fibre_dim:
        raise ValueError(f"{spec.geometry} points need {spec.fibre_dim} fibre coordinates")
    if route == "closed_form":
        return closed_frame(spec, pt.u, pt.t)
    if route == "numeric":
        return numeric_frames(spec, pt.u, [pt.t], step, richardson)[0]
    raise ValueError(f"unknown route {route!r}; use 'closed_form' or 'numeric'")


def max_principal_angle(a: TwistedFrame, b: TwistedFrame) -> float:
    return float(np.max(subspace_angles(a.vectors.T, b.vectors.T)))


def route_agreement(spec, u, t, step=DEFAULT_STEP, richardson=DEFAULT_RICHARDSON) -> float:
    pt = TwistedPoint(tuple(u), tuple(t))
    return max_principal_angle(twisted_frame(spec, pt, "closed_form"),
                               twisted_frame(spec, pt, "numeric", step, richardson))


# -- special Lagrangian conditions --------------------------------------------

def lagrangian_matrix(frame: TwistedFrame) -> np.ndarray:
    return cal.symplectic_matrix(frame.vectors)


def lagrangian_residual(spec: SLTwist, grid, fibre_samples=None, step=DEFAULT_STEP,
                        richardson=DEFAULT_RICHARDSON) -> float:
    """Max over samples of sum_{a<b} |omega(v_a, v_b)| on the pushforward frame."""
    if not isinstance(spec, SLTwist):
        raise TypeError("lagrangian_residual needs an SLTwist")
    if fibre_samples is None:
        fibre_samples = [tuple([0.0] * spec.fibre_dim)]
    worst = 0.0
    for u in np.atleast_2d(grid):
        for fr in numeric_frames(spec, u, fibre_samples, step, richardson):
            W = lagrangian_matrix(fr)
            worst = max(worst, float(np.sum(np.abs(np.triu(W, 1)))))
    return worst


def _alt_sum(sig, start):
    return sum(((-1) ** ((k - start) // 2)) * sig[k] for k in range(start, len(sig), 2))


def sl_theorem_terms(A, B, phi) -> np.ndarray:
    """Raw gaps of the p + 1 conditions (complex), before normalisation."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    p = A.shape[0]
    eye = np.eye(p)
    plus = A @ np.linalg.inv(eye + 1j * B)
    minus = A @ np.linalg.inv(eye - 1j * B)
    sp, sm = sym_polys(plus), sym_polys(minus)
    out = np.zeros(p + 1, dtype=complex)
    out[0] = (np.exp(1j * phi) * np.linalg.det(eye + 1j * B)).imag
    for j in range(1, p + 1):
        out[j] = sp[j] - (-1) ** j * sm[j]
    return out


def sl_theorem_residual(A, B, phi) -> np.ndarray:
    """Normalised residuals of the SL conditions for (A, B) at phase offset phi.

    phi = pi q / 2 - theta.  Entry 0 is the B-only phase condition, entry j
    compares sigma_j(A (I + iB)^-1) with (-1)^j sigma_j(A (I - iB)^-1).
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    p = A.shape[0]
    eye = np.eye(p)
    raw = sl_theorem_terms(A, B, phi)
    sp = sym_polys(A @ np.linalg.inv(eye + 1j * B))
    sm = sym_polys(A @ np.linalg.inv(eye - 1j * B))
    out = np.empty(p + 1)
    out[0] = abs(raw[0]) / (1.0 + abs(np.linalg.det(eye + 1j * B)))
    for j in range(1, p + 1):
        out[j] = abs(raw[j]) / (1.0 + abs(sp[j]) + abs(sm[j]))
    return out


def scaling_polynomial(A, B, phi, s) -> float:
    """f(s) = Im(e^{i phi} det(I + i(sA + B)))."""
    p = np.asarray(A).shape[0]
    M = np.eye(p) + 1j * (s * np.asarray(A, dtype=float) + np.asarray(B, dtype=float))
    return float((np.exp(1j * phi) * np.linalg.det(M)).imag)


def scaling_polynomial_max(A, B, phi, s_samples) -> float:
    return max(abs(scaling_polynomial(A, B, phi, s)) for s in s_samples)


def sl_scaling_scan(spec: SLTwist, u, normal_direction, s_samples) -> float:
    fp = adapted_frame(spec.imm, u)
    calc = one_form_calculus(spec.imm, spec.mu, u, fp)
    A = fp.shape_operator(normal_direction)
    return scaling_polynomial_max(A, calc.B, spec.phase_offset, s_samples)


def sl_special_case_residuals(A, B, phi) -> dict:
    """Residuals of the j = 0, 1, p conditions in the eigenbasis of B.

    j0 is the imaginary part of e^{i phi} det(I + iB) written through the
    alternating sums of sigma_k(B); j1 = |sum_k A_kk / (1 + lambda_k^2)|.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    p = A.shape[0]
    sig = sym_polys(B).real
    even = _alt_sum(sig, 0)  # 1 - s2 + s4 - ...
    odd = _alt_sum(sig, 1)  # s1 - s3 + ...
    j0 = abs(math.sin(phi) * even + math.cos(phi) * odd)
    lam, V = np.linalg.eigh(0.5 * (B + B.T))
    Ahat = V.T @ A @ V
    j1 = abs(float(np.sum(np.diag(Ahat) / (1.0 + lam**2))))
    d = np.linalg.det(A)
    jp = abs(np.exp(2j * phi) * d - (-1) ** p * d)
    return {"j0": float(j0), "j1": j1, "jp": float(jp)}


# -- verdicts --------------------------------------------------------------------

def default_fibre_samples(dim: int, seed: int = 0) -> list[tuple]:
    """{-1, 0, 1} per fibre coordinate plus one seeded random point."""
    pts = [tuple(float(v) for v in p) for p in itertools.product((-1.0, 0.0, 1.0), repeat=dim)]
    rng = np.random.default_rng(seed)
    pts.append(tuple(float(v) for v in rng.uniform(-1.0, 1.0, size=dim)))
    return pts


def base_grid(box=((-0.5, 0.5), (-0.5, 0.5)), resolution=(5, 5)) -> np.ndarray:
    """Tensor grid in C order (last coordinate fastest)."""
    axes = [np.linspace(lo, hi, n) for (lo, hi), n in zip(box, resolution)]
    return np.array(list(itertools.product(*axes)))


def _check_fibre_samples(spec, fibre_samples):
    ts = [tuple(float(c) for c in np.atleast_1d(t)) for t in fibre_samples]
    if not ts:
        raise ValueError("fibre_samples must not be empty")
    for t in ts:
        if len(t) != spec.fibre_dim:
            raise ValueError(
                f"{spec.geometry} fibre samples need {spec.fibre_dim} coordinates, got {len(t)}")
    if len(set(ts)) < 3:
        raise ValueError("fibre_samples must contain at least 3 distinct fibre points")
    return ts


def sample_residuals(spec, u, ts, step=DEFAULT_STEP, richardson=DEFAULT_RICHARDSON):
    """Residual records for every fibre sample over one base point."""
    u = tuple(float(c) for c in u)
    try:
        frames = numeric_frames(spec, u, ts, step, richardson)
    except (GeometryError, cal.DegenerateFrameError, ValueError, ArithmeticError) as err:
        return [SampleRecord(u, t, None, {}, str(err)) for t in ts]
    out = []
    theta = getattr(spec, "theta", 0.0)
    for t, fr in zip(ts, frames):
        try:
            comp = cal.residual_for(spec.geometry, fr.vectors, theta)
        except cal.DegenerateFrameError as err:
            out.append(SampleRecord(u, t, None, {}, str(err)))
            continue
        total = comp.pop("residual")
        out.append(SampleRecord(u, t, float(total), {k: float(v) for k, v in comp.items()}))
    return out


def calibration_verdict(spec, grid, fibre_samples, tol=DEFAULT_TOL, step=DEFAULT_STEP,
                        richardson=DEFAULT_RICHARDSON, jobs=1, name="custom",
                        expected=None) -> ResidualReport:
    """Evaluate the calibration residual on the numeric-route frame at every sample."""
    ts = _check_fibre_samples(spec, fibre_samples)
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    fn = partial(sample_residuals, spec, ts=ts, step=step, richardson=richardson)
    per_u = ordered_map(fn, [tuple(u) for u in grid], jobs)
    records = [r for block in per_u for r in block]
    return summarize(records, tol, name, spec.geometry, expected=expected)
