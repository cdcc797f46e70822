"""Octonion arithmetic on the basis (1, i, j, k, e, ie, je, ke).

An octonion is a length-8 float array of coefficients in that order.  The
product is the bilinear extension of a fixed signed-permutation table, so
basis products are exact.
"""
from __future__ import annotations

import numpy as np

BASIS_LABELS = ("1", "i", "j", "k", "e", "ie", "je", "ke")

# row x column, read as (row)(column)
_TABLE_ROWS = (
    "1   i   j   k   e   ie  je  ke",
    "i  -1   k  -j   ie -e  -ke  je",
    "j  -k  -1   i   je  ke -e  -ie",
    "k   j  -i  -1   ke -je  ie -e",
    "e  -ie -je -ke -1   i   j   k",
    "ie  e  -ke  je -i  -1  -k   j",
    "je  ke  e  -ie -j   k  -1  -i",
    "ke -je  ie  e  -k  -j   i  -1",
)


def _build_table():
    index = np.zeros((8, 8), dtype=np.int64)
    sign = np.zeros((8, 8), dtype=np.int64)
    for a, row in enumerate(_TABLE_ROWS):
        for b, tok in enumerate(row.split()):
            sign[a, b] = -1 if tok.startswith("-") else 1
            index[a, b] = BASIS_LABELS.index(tok.lstrip("-"))
    return index, sign


PRODUCT_INDEX, PRODUCT_SIGN = _build_table()

# structure constants c[a, b, :] = basis_a * basis_b
_STRUCTURE = np.zeros((8, 8, 8))
for _a in range(8):
    for _b in range(8):
        _STRUCTURE[_a, _b, PRODUCT_INDEX[_a, _b]] = PRODUCT_SIGN[_a, _b]
_STRUCTURE_FLAT = _STRUCTURE.reshape(8, 64)

_CONJ = np.array([1.0, -1, -1, -1, -1, -1, -1, -1])

FOURFOLD_PIVOT_TOL = 1e-12
CLIFFORD_TOL = 1e-12


def basis(label: str) -> np.ndarray:
    """Unit octonion for a basis label such as ``"je"``."""
    out = np.zeros(8)
    out[BASIS_LABELS.index(label)] = 1.0
    return out


def from_terms(**coeffs: float) -> np.ndarray:
    """Build an octonion from keyword coefficients; ``one`` names the real unit.

    >>> from_terms(one=3.0, i=2.0)[:2]
    array([3., 2.])
    """
    out = np.zeros(8)
    for name, val in coeffs.items():
        out[BASIS_LABELS.index("1" if name == "one" else name)] = val
    return out


def multiply(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    left = (a @ _STRUCTURE_FLAT).reshape(8, 8)
    return b @ left


def left_matrix(a) -> np.ndarray:
    """Matrix of x -> a*x acting on coefficient vectors."""
    a = np.asarray(a, dtype=float)
    return (a @ _STRUCTURE_FLAT).reshape(8, 8).T


def conjugate(a) -> np.ndarray:
    return np.asarray(a, dtype=float) * _CONJ


def real_part(a) -> float:
    return float(np.asarray(a)[0])


def imaginary_part(a) -> np.ndarray:
    out = np.array(a, dtype=float)
    out[0] = 0.0
    return out


def norm(a) -> float:
    return float(np.linalg.norm(a))


def associator(a, b, c) -> np.ndarray:
    """(ab)c - a(bc)."""
    return multiply(multiply(a, b), c) - multiply(a, multiply(b, c))


def _fourfold_direct(a, b, c, d) -> np.ndarray:
    # valid as the four-fold product only for orthonormal arguments
    inner = multiply(conjugate(c), d)
    return imaginary_part(multiply(conjugate(a), multiply(b, inner)))


def fourfold_imaginary(a, b, c, d) -> np.ndarray:
    """Imaginary part of the alternating four-fold cross product.

    Inputs are orthonormalised by modified Gram-Schmidt; the result is
    det(R) times the direct product of the orthonormal factors, which is the
    alternating multilinear extension.  Dependent inputs give zero.
    """
    vecs = [np.asarray(v, dtype=float) for v in (a, b, c, d)]
    scale = max(1.0, max(float(np.linalg.norm(v)) for v in vecs))
    q = []
    det = 1.0
    for v in vecs:
        w = v.copy()
        for qi in q:
            w -= (qi @ w) * qi
        r = float(np.linalg.norm(w))
        if r < FOURFOLD_PIVOT_TOL * scale:
            return np.zeros(8)
        q.append(w / r)
        det *= r
    return det * _fourfold_direct(*q)


def clifford_act(alpha, s) -> np.ndarray:
    """Clifford action of a vector alpha in He = span{e, ie, je, ke} on s."""
    alpha = np.asarray(alpha, dtype=float)
    if np.max(np.abs(alpha[:4])) > CLIFFORD_TOL:
        raise ValueError(
            "clifford_act expects alpha in span{e, ie, je, ke}; "
            f"got components {alpha[:4].tolist()} on (1, i, j, k)"
        )
    return multiply(alpha, s)


def format_term(a, tol: float = 0.0) -> str:
    """Render an octonion as a signed sum of basis labels, e.g. ``-2ke``."""
    parts = []
    for coef, label in zip(np.asarray(a, dtype=float), BASIS_LABELS):
        if abs(coef) <= tol:
            continue
        mag = abs(coef)
        body = label if mag == 1.0 and label != "1" else (
            f"{mag:g}" if label == "1" else f"{mag:g}{label}")
        parts.append(("-" if coef < 0 else "+") + body)
    if not parts:
        return "0"
    text = "".join(parts)
    return text[1:] if text.startswith("+") else text


def format_table() -> str:
    """The 8x8 basis multiplication table, rows times columns."""
    width = 4
    lines = [" " * width + "".join(f"{lab:>{width}}" for lab in BASIS_LABELS)]
    for a, ra in enumerate(BASIS_LABELS):
        cells = []
        for b in range(8):
            sgn = "-" if PRODUCT_SIGN[a, b] < 0 else ""
            cells.append(f"{sgn + BASIS_LABELS[PRODUCT_INDEX[a, b]]:>{width}}")
        lines.append(f"{ra:>{width}}" + "".join(cells))
    return "\n".join(lines)
