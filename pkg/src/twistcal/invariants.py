"""Elementary symmetric polynomials of small matrices and the s-derivative identity.

sigma_k(M) is the coefficient of t^k in det(I + tM), i.e. the sum of the
k x k principal minors of M.
"""
from __future__ import annotations

import math
from functools import lru_cache
from itertools import combinations

import numpy as np

MAX_DIM = 8
COND_LIMIT = 1e12


class SingularShiftError(ValueError):
    """I + tB is singular or too badly conditioned to invert."""


@lru_cache(maxsize=None)
def _minor_indices(p: int, k: int) -> np.ndarray:
    return np.array(list(combinations(range(p), k)), dtype=np.intp)


def sym_polys(M) -> np.ndarray:
    """Return [sigma_0, ..., sigma_p] of a p x p matrix (complex dtype)."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    p = M.shape[0]
    if p > MAX_DIM:
        raise ValueError(f"matrix dimension {p} exceeds {MAX_DIM}")
    out = np.zeros(p + 1, dtype=complex)
    out[0] = 1.0
    for k in range(1, p + 1):
        idx = _minor_indices(p, k)
        # stack all k x k principal submatrices, one batched LU
        subs = M[idx[:, :, None], idx[:, None, :]]
        out[k] = np.linalg.det(subs).sum()
    return out


def char_expansion(M, t) -> complex:
    """Evaluate sum_k t^k sigma_k(M)."""
    sig = sym_polys(M)
    return complex(np.polyval(sig[::-1], t))


@lru_cache(maxsize=None)
def _sample_points(p: int) -> np.ndarray:
    pts = [0.0]
    m = 1
    while len(pts) < p + 1:
        pts.append(float(m))
        if len(pts) < p + 1:
            pts.append(float(-m))
        m += 1
    return np.array(pts)


@lru_cache(maxsize=None)
def _vandermonde_inverse(p: int) -> np.ndarray:
    s = _sample_points(p)
    V = np.vander(s, p + 1, increasing=True)
    return np.linalg.inv(V)


def sigma_s_coefficients(A, B) -> np.ndarray:
    """Polynomial coefficients c[k, m] with sigma_k(B + sA) = sum_m c[k, m] s^m.

    sigma_k(B + sA) has degree at most k <= p in s, so p + 1 samples
    at s = 0, 1, -1, 2, ... determine it.
    """
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    p = A.shape[0]
    svals = _sample_points(p)
    samples = np.array([sym_polys(B + s * A) for s in svals])  # (s, k)
    return (_vandermonde_inverse(p) @ samples).T


def sigma_s_derivatives(A, B, j: int) -> np.ndarray:
    """d^j/ds^j at s = 0 of sigma_k(B + sA) for k = 0..p."""
    A = np.asarray(A)
    p = A.shape[0]
    if not 0 <= j <= p:
        raise ValueError(f"derivative order {j} outside 0..{p}")
    coef = sigma_s_coefficients(A, B)
    return coef[:, j] * math.factorial(j)


def _shift_inverse(B, t) -> tuple[np.ndarray, complex]:
    B = np.asarray(B, dtype=complex)
    shifted = np.eye(B.shape[0]) + t * B
    if np.linalg.cond(shifted) > COND_LIMIT:
        raise SingularShiftError(f"I + tB is singular for t = {t}")
    return np.linalg.inv(shifted), complex(np.linalg.det(shifted))


def lemma_sides(A, B, j: int, t: complex, coef=None) -> tuple[complex, complex]:
    """Both sides of the s-derivative identity.

    left  = sum_k t^k d^j/ds^j sigma_k(B + sA)|_0
    right = j! t^j det(I + tB) sigma_j(A (I + tB)^-1)
    """
    A = np.asarray(A, dtype=complex)
    p = A.shape[0]
    if not 0 <= j <= p:
        raise ValueError(f"derivative order {j} outside 0..{p}")
    if coef is None:
        coef = sigma_s_coefficients(A, B)
    derivs = coef[:, j] * math.factorial(j)
    left = complex(np.sum(derivs * t ** np.arange(p + 1)))
    inv, det = _shift_inverse(B, t)
    right = math.factorial(j) * t**j * det * sym_polys(A @ inv)[j]
    return left, complex(right)


def lemma_residual(A, B, j: int, t: complex, coef=None) -> float:
    """Normalised gap between the two sides of the s-derivative identity."""
    left, right = lemma_sides(A, B, j, t, coef=coef)
    return abs(left - right) / (1.0 + max(abs(left), abs(right)))


def random_shift(rng: np.random.Generator, B, cond_max: float = 1e6):
    """Random complex t of modulus <= 1 with I + tB well conditioned."""
    B = np.asarray(B)
    while True:
        t = complex(rng.normal(), rng.normal())
        t /= max(1.0, abs(t))
        if np.linalg.cond(np.eye(B.shape[0]) + t * B) < cond_max:
            return t


def lemma_fuzz(trials: int, max_p: int, seed: int) -> dict:
    """Randomised check of the identity over (A, B, j, t).

    Each trial draws real Gaussian A, B of size p in 1..max_p and checks all
    j with t in {i, -i, random}.  Returns the worst case.
    """
    rng = np.random.default_rng(seed)
    worst = {"residual": 0.0, "p": None, "j": None, "t": None, "trial": None}
    count = 0
    for trial in range(trials):
        p = int(rng.integers(1, max_p + 1))
        A = rng.normal(size=(p, p))
        B = rng.normal(size=(p, p))
        coef = sigma_s_coefficients(A, B)
        shifts = [1j, -1j, random_shift(rng, B)]
        for t in shifts:
            try:
                _shift_inverse(B, t)
            except SingularShiftError:
                continue
            for j in range(p + 1):
                r = lemma_residual(A, B, j, t, coef=coef)
                count += 1
                if r > worst["residual"]:
                    worst = {"residual": r, "p": p, "j": j, "t": t, "trial": trial}
    worst["checks"] = count
    return worst
