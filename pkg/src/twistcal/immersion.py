"""Adapted frames, second fundamental forms and 1-form calculus for immersions.

Sign convention: A^a_ij = -<d^2x(e_i, e_j), nu_a>, so A^nu(w) is the tangential
part of the derivative of nu along w.  A graph over its tangent plane with
upward normal has A = -Hess.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import expr as ex
from .invariants import sym_polys

RANK_TOL = 1e-8
NORMAL_SEED_TOL = 1e-6


class GeometryError(RuntimeError):
    """A sample point where the geometry cannot be evaluated."""

    def __init__(self, message: str, u=None):
        self.u = None if u is None else tuple(float(c) for c in u)
        where = "" if u is None else f" at u = {list(self.u)}"
        super().__init__(message + where)


class RankError(GeometryError):
    pass


def _parse_all(texts, variables, params):
    declared = tuple(variables) + tuple(params or {})
    nodes = []
    for text in texts:
        node = text if isinstance(text, ex.Expr) else ex.parse(text, declared)
        if params:
            node = ex.substitute(node, dict(params))
        nodes.append(node)
    return tuple(nodes)


@dataclass(frozen=True, eq=False)
class Immersion:
    """x: R^p -> R^n given by one expression per ambient coordinate."""

    variables: tuple
    components: tuple
    _compiled: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "components", tuple(self.components))
        if len(self.variables) < 1 or len(self.components) <= len(self.variables):
            raise ValueError(
                f"need 1 <= p < n, got p = {len(self.variables)}, n = {len(self.components)}")
        object.__setattr__(self, "_compiled",
                           tuple(ex.CompiledExpr(c, self.variables) for c in self.components))

    @classmethod
    def from_strings(cls, components: Sequence, variables: Sequence[str], params=None):
        return cls(tuple(variables), _parse_all(components, variables, params))

    @property
    def p(self) -> int:
        return len(self.variables)

    @property
    def n(self) -> int:
        return len(self.components)

    @property
    def q(self) -> int:
        return self.n - self.p

    def _point(self, u) -> dict:
        return dict(zip(self.variables, (float(c) for c in u)))

    def point(self, u) -> np.ndarray:
        vals = [float(c) for c in u]
        return np.array([f(vals) for f in self._compiled])

    def jacobian(self, u):
        """(x, J) with J[:, i] = dx/du^i."""
        pt = self._point(u)
        x = np.empty(self.n)
        J = np.empty((self.n, self.p))
        for a, comp in enumerate(self.components):
            x[a], J[a] = ex.eval_jet1(comp, pt, self.variables)
        return x, J

    def jets(self, u):
        """(x, J, H) with H[:, i, j] = d^2x/du^i du^j."""
        pt = self._point(u)
        x = np.empty(self.n)
        J = np.empty((self.n, self.p))
        H = np.empty((self.n, self.p, self.p))
        for a, comp in enumerate(self.components):
            jet = ex.eval_jet2(comp, pt, self.variables)
            x[a], J[a], H[a] = jet.value, jet.gradient, jet.hessian
        return x, J, H

    def reparametrized(self, new_variables, mapping: Mapping) -> "Immersion":
        """Compose with u = phi(w); ``mapping`` sends old names to expressions in w."""
        subs = {k: (v if isinstance(v, ex.Expr) else ex.parse(v, new_variables))
                for k, v in mapping.items()}
        return Immersion(tuple(new_variables),
                         tuple(ex.substitute(c, subs) for c in self.components))


@dataclass(frozen=True, eq=False)
class OneFormOnL:
    """mu = sum_i mu_i du^i with coefficient expressions in the base variables."""

    variables: tuple
    coefficients: tuple

    @classmethod
    def from_strings(cls, coefficients: Sequence, variables: Sequence[str], params=None):
        if len(coefficients) != len(variables):
            raise ValueError(
                f"1-form needs {len(variables)} coefficients, got {len(coefficients)}")
        return cls(tuple(variables), _parse_all(coefficients, variables, params))

    @classmethod
    def zero(cls, variables):
        return cls(tuple(variables), tuple(ex.Num(0.0) for _ in variables))

    def jet(self, u):
        """(values, grads) with grads[i, k] = d mu_i / du^k."""
        pt = dict(zip(self.variables, (float(c) for c in u)))
        vals = np.empty(len(self.coefficients))
        grads = np.empty((len(self.coefficients), len(self.variables)))
        for i, c in enumerate(self.coefficients):
            vals[i], grads[i] = ex.eval_jet1(c, pt, self.variables)
        return vals, grads


@dataclass(frozen=True, eq=False)
class FramePoint:
    """Orthonormal adapted frame at one parameter value.

    ``e`` and ``nu`` hold vectors as rows.  ``de[k, i]`` is the derivative of
    e_i along e_k, likewise ``dnu[k, a]``.
    """

    u: np.ndarray
    x: np.ndarray
    e: np.ndarray
    nu: np.ndarray
    chart_jacobian: np.ndarray
    A: np.ndarray
    g: np.ndarray
    jacobian: np.ndarray
    hessian: np.ndarray
    de: np.ndarray
    dnu: np.ndarray

    @property
    def frame(self) -> np.ndarray:
        return np.vstack([self.e, self.nu])

    def shape_operator(self, c) -> np.ndarray:
        """A^nu for nu = sum_a c_a nu_a."""
        return np.tensordot(np.asarray(c, dtype=float), self.A, axes=1)

    def tangent_connection(self) -> np.ndarray:
        """tau[k] = <d_{e_k} e_1, e_2> (surfaces)."""
        return self.de[:, 0] @ self.e[1]

    def normal_connection(self) -> np.ndarray:
        """n[k] = <d_{e_k} nu_1, nu_2> (codimension two)."""
        return self.dnu[:, 0] @ self.nu[1]


def _project_out(basis, dbasis, w, dw):
    """Modified Gram-Schmidt step with forward derivatives.

    dbasis[b] and dw have a leading axis over coordinate directions.
    """
    for b, db in zip(basis, dbasis):
        c = b @ w
        dc = db @ w + dw @ b
        w = w - c * b
        dw = dw - np.outer(dc, b) - c * db
    return w, dw


def _normalise(w, dw):
    r = float(np.linalg.norm(w))
    v = w / r
    dr = dw @ v
    return r, v, (dw - np.outer(dr, v)) / r


def _normal_seed_order(p: int, n: int):
    return list(range(p, n)) + list(range(p))


def adapted_frame(imm: Immersion, u) -> FramePoint:
    """Gram-Schmidt frame at u with analytic first derivatives of the frame."""
    u = np.asarray(u, dtype=float)
    p, n = imm.p, imm.n
    x, J, H = imm.jets(u)
    sv = np.linalg.svd(J, compute_uv=False)
    if sv[-1] <= RANK_TOL:
        raise RankError(
            f"immersion Jacobian has rank < {p} (smallest singular value {sv[-1]:.3e})", u)

    # coordinate-direction derivatives: leading axis m = d/du^m
    tangents, dtangents = [], []
    R = np.zeros((p, p))
    for i in range(p):
        w, dw = J[:, i].copy(), H[:, i, :].T.copy()
        for k, (b, db) in enumerate(zip(tangents, dtangents)):
            R[k, i] = b @ w
            w, dw = _project_out([b], [db], w, dw)
        r = float(np.linalg.norm(w))
        if r < RANK_TOL:
            raise RankError(f"Gram-Schmidt breakdown on tangent {i + 1} (pivot {r:.3e})", u)
        r, v, dv = _normalise(w, dw)
        R[i, i] = r
        tangents.append(v)
        dtangents.append(dv)

    normals, dnormals = [], []
    for idx in _normal_seed_order(p, n):
        if len(normals) == n - p:
            break
        w = np.zeros(n)
        w[idx] = 1.0
        dw = np.zeros((p, n))
        w, dw = _project_out(tangents + normals, dtangents + dnormals, w, dw)
        if np.linalg.norm(w) < NORMAL_SEED_TOL:
            continue
        _, v, dv = _normalise(w, dw)
        normals.append(v)
        dnormals.append(dv)
    if len(normals) != n - p:
        raise GeometryError("could not complete the normal frame", u)

    e = np.array(tangents)
    nu = np.array(normals)
    de_coord = np.array(dtangents)  # (i, m, :)
    dnu_coord = np.array(dnormals)
    if np.linalg.det(np.vstack([e, nu])) < 0:
        nu[-1] *= -1.0
        dnu_coord[-1] *= -1.0

    C = np.linalg.inv(R)  # e = J @ C
    de = np.einsum("mk,imn->kin", C, de_coord)
    dnu = np.einsum("mk,amn->kan", C, dnu_coord)
    fp = FramePoint(u=u, x=x, e=e, nu=nu, chart_jacobian=C, A=np.zeros((n - p, p, p)),
                    g=J.T @ J, jacobian=J, hessian=H, de=de, dnu=dnu)
    object.__setattr__(fp, "A", second_fundamental_forms(fp))
    return fp


def second_fundamental_forms(fp: FramePoint, imm: Immersion | None = None) -> np.ndarray:
    """A[a, i, j] = -<d^2x(e_i, e_j), nu_a>, symmetrised."""
    C = fp.chart_jacobian
    hess_frame = np.einsum("nml,mi,lj->nij", fp.hessian, C, C)
    A = -np.einsum("an,nij->aij", fp.nu, hess_frame)
    return 0.5 * (A + A.transpose(0, 2, 1))


# -- normal sampling and classification ---------------------------------------

def normal_directions(q: int, count: int = 64) -> np.ndarray:
    """Deterministic unit vectors spread over the unit sphere in R^q."""
    if q == 1:
        return np.array([[1.0], [-1.0]])
    if q == 2:
        ang = 2 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(ang), np.sin(ang)])
    if q == 3:
        k = np.arange(count) + 0.5
        z = 1 - 2 * k / count
        phi = np.pi * (1 + 5**0.5) * k
        r = np.sqrt(1 - z * z)
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    rng = np.random.default_rng(20240917 + q)
    pts = rng.normal(size=(count, q))
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def _superminimal_pair(A_nu, A_perp) -> float:
    return abs(A_nu[0, 1] - A_perp[0, 0]) + abs(A_nu[1, 1] - A_perp[0, 1])


def superminimal_residuals(A: np.ndarray) -> tuple[float, float]:
    """(negative, positive) residuals at one point of a surface in R^4.

    The negative pairing uses (nu, nu_perp) in {(nu_1, nu_2), (nu_2, -nu_1)};
    the positive one is the same with the normal orientation reversed.
    """
    A1, A2 = A[0], A[1]
    neg = _superminimal_pair(A1, A2) + _superminimal_pair(A2, -A1)
    pos = _superminimal_pair(A2, A1) + _superminimal_pair(A1, -A2)
    return neg, pos


def classify_point(fp: FramePoint, normals=None) -> dict:
    A = fp.A
    q, p = A.shape[0], A.shape[1]
    if normals is None:
        normals = normal_directions(q)
    minimal = float(np.max(np.abs(np.trace(A, axis1=1, axis2=2))))
    austere = 0.0
    for c in normals:
        sig = sym_polys(fp.shape_operator(c))
        austere = max(austere, float(sum(abs(sig[j]) for j in range(1, p + 1, 2))))
    out = {"minimal": minimal, "austere": austere}
    if p == 2 and p + q == 4:
        out["superminimal_neg"], out["superminimal_pos"] = superminimal_residuals(A)
    return out


def classify_residuals(imm: Immersion, grid) -> dict:
    """Max over the grid of the minimal / austere / superminimal residuals."""
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    normals = normal_directions(imm.q)
    keys = ["minimal", "austere"]
    if imm.p == 2 and imm.n == 4:
        keys += ["superminimal_pos", "superminimal_neg"]
    out = {k: 0.0 for k in keys}
    for u in grid:
        vals = classify_point(adapted_frame(imm, u), normals)
        for k in keys:
            out[k] = max(out[k], vals[k])
    return out


def superminimal_check(imm: Immersion, grid) -> dict:
    if imm.p != 2 or imm.n != 4:
        raise ValueError(f"superminimal residuals need p = 2, n = 4; got p = {imm.p}, n = {imm.n}")
    res = classify_residuals(imm, grid)
    return {"superminimal_pos": res["superminimal_pos"],
            "superminimal_neg": res["superminimal_neg"]}


# -- 1-form calculus -----------------------------------------------------------

@dataclass(frozen=True)
class OneFormCalculus:
    B: np.ndarray
    dmu: np.ndarray
    codifferential: float
    covariant: np.ndarray  # N[i, j] = (nabla_{e_i} mu)(e_j)
    values: np.ndarray  # mu(e_i)
    ambient: np.ndarray  # mu as an ambient covector
    curl: np.ndarray  # coordinate curl transported to the frame


def christoffel(J: np.ndarray, H: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Gamma[m, k, l] of the induced metric from analytic immersion jets."""
    dg = np.einsum("nki,nj->kij", H, J)
    dg = dg + dg.transpose(0, 2, 1)  # dg[k, i, j] = d_k g_ij
    ginv = np.linalg.inv(g)
    lower = 0.5 * (dg.transpose(1, 0, 2) + dg.transpose(1, 2, 0) - dg)  # [r, k, l]
    return np.einsum("mr,rkl->mkl", ginv, lower)


def one_form_calculus(imm: Immersion, mu: OneFormOnL, u, fp: FramePoint | None = None):
    if fp is None:
        fp = adapted_frame(imm, u)
    if np.linalg.cond(fp.g) > 1e12:
        raise GeometryError("induced metric is degenerate", u)
    vals, grads = mu.jet(u)
    gam = christoffel(fp.jacobian, fp.hessian, fp.g)
    cov = grads.T - np.einsum("mkl,m->kl", gam, vals)  # (nabla_k mu)_l
    C = fp.chart_jacobian
    N = C.T @ cov @ C
    B = 0.5 * (N + N.T)
    curl = grads.T - grads  # d_k mu_l - d_l mu_k
    ginv = np.linalg.inv(fp.g)
    ambient = fp.jacobian @ (ginv @ vals)
    return OneFormCalculus(B=B, dmu=N - N.T, codifferential=-float(np.trace(B)), covariant=N,
                           values=C.T @ vals, ambient=ambient, curl=C.T @ curl @ C)


def one_form_ambient(imm: Immersion, mu: OneFormOnL, u) -> np.ndarray:
    """mu pushed to an ambient covector: sum mu_i g^ij dx/du^j."""
    _, J = imm.jacobian(u)
    vals, _ = mu.jet(u)
    return J @ np.linalg.solve(J.T @ J, vals)
