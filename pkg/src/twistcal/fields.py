"""Scalar coefficient fields on the base: expressions or tabulated data."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from . import expr as ex


@dataclass(frozen=True, eq=False)
class ExprField:
    node: ex.Expr
    variables: tuple
    _fn: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "_fn", ex.CompiledExpr(self.node, self.variables))

    @classmethod
    def from_string(cls, text, variables, params=None):
        declared = tuple(variables) + tuple(params or {})
        node = text if isinstance(text, ex.Expr) else ex.parse(str(text), declared)
        if params:
            node = ex.substitute(node, dict(params))
        return cls(node, tuple(variables))

    def value(self, u) -> float:
        return self._fn([float(c) for c in u])

    def jet(self, u):
        """(value, coordinate gradient)."""
        return ex.eval_jet1(self.node, dict(zip(self.variables, (float(c) for c in u))),
                            self.variables)

    def describe(self) -> str:
        return ex.to_text(self.node)


@dataclass(frozen=True, eq=False)
class TabulatedField:
    """Cubic-spline interpolant of samples along one base coordinate."""

    grid: np.ndarray
    values: np.ndarray
    axis: int = 0
    n_vars: int = 2
    _spline: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_spline", CubicSpline(self.grid, self.values))

    def _coord(self, u) -> float:
        s = float(u[self.axis])
        if not self.grid[0] <= s <= self.grid[-1]:
            raise ValueError(
                f"coordinate {s} outside tabulated range [{self.grid[0]}, {self.grid[-1]}]")
        return s

    def value(self, u) -> float:
        return float(self._spline(self._coord(u)))

    def jet(self, u):
        s = self._coord(u)
        grad = np.zeros(self.n_vars)
        grad[self.axis] = float(self._spline(s, 1))
        return float(self._spline(s)), grad

    def describe(self) -> str:
        return (f"spline over {len(self.grid)} samples in "
                f"[{self.grid[0]:g}, {self.grid[-1]:g}] along coordinate {self.axis}")


def as_field(obj, variables, params=None):
    if isinstance(obj, (ExprField, TabulatedField)):
        return obj
    if isinstance(obj, (int, float)):
        obj = repr(float(obj))
    return ExprField.from_string(obj, variables, params)
