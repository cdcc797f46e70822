"""Named, fully specified positive and negative scenarios."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .immersion import Immersion, OneFormOnL, classify_residuals
from .sections import solve_y_independent_family
from .twisted import (AssocTwist, CayleyTwist, CoassocTwist, SLTwist, base_grid)

DEFAULT_BOX = ((-0.5, 0.5), (-0.5, 0.5))
DEFAULT_RESOLUTION = (5, 5)

XY = ("x", "y")
UV = ("u", "v")

EXP_GRAPH = ("x", "y", "exp(x)*cos(y)", "exp(x)*sin(y)")
EXP_CONJ_GRAPH = ("x", "y", "exp(x)*cos(y)", "-exp(x)*sin(y)")
FLAT_PLANE = ("u", "v", "0", "0")
PARABOLOID = ("u", "v", "u^2 + v^2", "0")

# holomorphic coefficient families over the exp graph
Y_INDEP_ALPHA = "C/(1 + exp(2*x))"
Y_INDEP_BETA = "K/(1 + exp(2*x))"
Y_DEP_ALPHA = "x/(1 + exp(2*x))"
Y_DEP_BETA = "y/(1 + exp(2*x))"


class UnknownScenarioError(KeyError):
    def __init__(self, name, known):
        self.name = name
        self.known = tuple(known)
        super().__init__(f"unknown scenario {name!r}; registered: {', '.join(self.known)}")

    def __str__(self):
        return self.args[0]


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    spec: object
    expected: str
    tolerance: float = 1e-6
    box: tuple = DEFAULT_BOX
    resolution: tuple = DEFAULT_RESOLUTION
    fibre_samples: tuple = field(default=())
    note: str = ""

    def grid(self) -> np.ndarray:
        return base_grid(self.box, self.resolution)

    def fibres(self) -> list:
        if self.fibre_samples:
            return [tuple(t) for t in self.fibre_samples]
        return scenario_fibre_samples(self.spec.fibre_dim)


def scenario_fibre_samples(dim: int) -> list:
    """{-1, 0, 1} in every fibre coordinate."""
    return [tuple(float(v) for v in p) for p in itertools.product((-1.0, 0.0, 1.0), repeat=dim)]


def _imm(components, variables=UV):
    return Immersion.from_strings(components, variables)


def _form(coeffs, variables=UV):
    return OneFormOnL.from_strings(coeffs, variables)


def exp_associative_spec(C: float = 1.0, K: float = 1.0) -> AssocTwist:
    from .fields import ExprField
    params = {"C": C, "K": K}
    return AssocTwist(_imm(EXP_GRAPH, XY),
                      ExprField.from_string(Y_INDEP_ALPHA, XY, params),
                      ExprField.from_string(Y_INDEP_BETA, XY, params))


def coassociative_base(grid=None) -> tuple[Immersion, dict]:
    """Pick the exp graph orientation with vanishing negative superminimal residual."""
    grid = base_grid(DEFAULT_BOX, DEFAULT_RESOLUTION) if grid is None else grid
    choices = {}
    for label, comps in (("exp graph", EXP_GRAPH), ("conjugate exp graph", EXP_CONJ_GRAPH)):
        imm = _imm(comps, XY)
        choices[label] = (imm, classify_residuals(imm, grid))
    label = min(choices, key=lambda k: choices[k][1]["superminimal_neg"])
    imm, res = choices[label]
    return imm, {"selected": label, **{k: float(v[1]["superminimal_neg"]) for k, v in choices.items()}}


@lru_cache(maxsize=None)
def exp_cayley_family():
    """Tabulated (alpha, beta) from the ODE with alpha(0) = beta(0) = 1/2."""
    return solve_y_independent_family(None, 0.5, 0.5, (-1.0, 1.0), 1e-3)


def _build_registry():
    pi = math.pi
    reg = {}

    def add(name, build, expected, note, tol=1e-6):
        reg[name] = (build, expected, note, tol)

    add("exp_associative", lambda: exp_associative_spec(1.0, 1.0), "PASS",
        "line bundle over the exp graph twisted by the y-independent holomorphic section, C = K = 1")
    add("exp_associative_ruled", lambda: exp_associative_spec(0.0, 0.0), "PASS",
        "untwisted line bundle over the exp graph (ruled case, C = K = 0)")
    add("exp_associative_ydep",
        lambda: AssocTwist(_imm(EXP_GRAPH, XY), Y_DEP_ALPHA, Y_DEP_BETA), "PASS",
        "y-dependent holomorphic section (x + iy)/(1 + e^{2x})")
    add("exp_associative_antiholo",
        lambda: AssocTwist(_imm(EXP_GRAPH, XY), Y_DEP_ALPHA, "-" + Y_DEP_BETA), "FAIL",
        "beta -> -beta applied to the y-dependent holomorphic section")
    add("exp_associative_literal_beta",
        lambda: AssocTwist(_imm(EXP_GRAPH, XY), "1/(1 + exp(2*x))", "1 + exp(2*x)"), "FAIL",
        "beta = 1 + e^{2x}: solves the y-independent system with the wrong sign")
    add("flat_conormal_sl",
        lambda: SLTwist(_imm(FLAT_PLANE), OneFormOnL.zero(UV), pi), "PASS",
        "conormal bundle of a plane in R^4, phase i^2")
    add("holograph_sl_harmonic",
        lambda: SLTwist(_imm(EXP_GRAPH, XY), _form(("1", "0"), XY), pi), "PASS",
        "exp graph (minimal) twisted by the harmonic form dx, phase i^2")
    add("holograph_sl_nonharmonic",
        lambda: SLTwist(_imm(EXP_GRAPH, XY), _form(("x", "0"), XY), pi), "FAIL",
        "exp graph twisted by the closed, non-coclosed form x dx")
    add("borisenko_exact",
        lambda: SLTwist(_imm(FLAT_PLANE), _form(("v", "u")), pi), "PASS",
        "plane twisted by the exact harmonic form d(uv)")
    add("paraboloid_conormal_sl",
        lambda: SLTwist(_imm(PARABOLOID), OneFormOnL.zero(UV), pi), "FAIL",
        "conormal bundle of a paraboloid (not austere)")
    add("flat_coassociative",
        lambda: CoassocTwist(_imm(FLAT_PLANE), "1"), "PASS",
        "plane bundle over a plane translated by the constant section w1", tol=1e-10)
    add("flat_coassociative_nonparallel",
        lambda: CoassocTwist(_imm(FLAT_PLANE), "u"), "FAIL",
        "plane bundle over a plane translated by the non-parallel section u w1")
    add("graph_coassociative",
        lambda: CoassocTwist(coassociative_base()[0], "1"), "PASS",
        "negative superminimal orientation of the exp graph, constant section w1")
    add("exp_cayley",
        lambda: CayleyTwist(_imm(EXP_GRAPH, XY), *exp_cayley_family().fields()), "PASS",
        "spinor bundle over the exp graph twisted by the ODE-integrated holomorphic section")
    add("exp_cayley_nonholo",
        lambda: CayleyTwist(_imm(EXP_GRAPH, XY), Y_DEP_ALPHA, "-" + Y_DEP_BETA), "FAIL",
        "beta -> -beta applied to the y-dependent holomorphic spinor section")
    return reg


_REGISTRY = _build_registry()


def scenario_names() -> list[str]:
    return list(_REGISTRY)


@lru_cache(maxsize=None)
def get_scenario(name: str) -> Scenario:
    try:
        build, expected, note, tol = _REGISTRY[name]
    except KeyError:
        raise UnknownScenarioError(name, _REGISTRY) from None
    return Scenario(name=name, spec=build(), expected=expected, tolerance=tol, note=note)


def describe_scenarios() -> list[dict]:
    return [{"name": k, "expected": v[1], "tolerance": v[3], "note": v[2]}
            for k, v in _REGISTRY.items()]


# -- explicit exp-graph example -------------------------------------------------

def exp_graph_omegas(x: float, y: float) -> np.ndarray:
    """w1, w2, w3 over the exp graph from the gradient of u = e^x cos y."""
    ux = math.exp(x) * math.cos(y)
    uy = -math.exp(x) * math.sin(y)
    g = ux * ux + uy * uy
    w1 = np.array([1 - g, 2 * uy, 2 * ux])
    w2 = np.array([-2 * uy, 1 + ux * ux - uy * uy, -2 * ux * uy])
    w3 = np.array([-2 * ux, -2 * ux * uy, 1 - ux * ux + uy * uy])
    return np.array([w1, w2, w3]) / (1 + g)


def exp_example_coords(x: float, y: float, t: float, C: float, K: float) -> np.ndarray:
    """Point t w1 + alpha w2 + beta w3 over (x, y, e^x cos y, e^x sin y), fibre first."""
    w = exp_graph_omegas(x, y)
    weight = 1.0 / (1.0 + math.exp(2 * x))
    fibre = t * w[0] + C * weight * w[1] + K * weight * w[2]
    base = [x, y, math.exp(x) * math.cos(y), math.exp(x) * math.sin(y)]
    return np.concatenate([fibre, base])


def exp_example_printed(x: float, y: float, t: float, C: float, K: float) -> np.ndarray:
    """The printed closed form of the same point, kept only for comparison."""
    ex, e2, e3, e4 = math.exp(x), math.exp(2 * x), math.exp(3 * x), math.exp(4 * x)
    den = 1 + 2 * e2 + e4
    s, c = math.sin(y), math.cos(y)
    x1 = (t - t * e4 + 2 * C * ex * s - 2 * K * ex * c * (1 + e2) ** 2) / den
    x2 = (-2 * t * ex * s - 2 * t * e3 * s + C * (1 + 2 * e2 * math.cos(2 * y))
          + K * (1 + e2) ** 2 * e2 * math.sin(2 * y)) / den
    x3 = (2 * t * ex * c + 2 * t * e3 * c + C * e2 * math.sin(2 * y)
          + K * (1 + e2) ** 2 * (1 - e2 * math.cos(2 * y))) / den
    return np.array([x1, x2, x3, x, y, ex * c, ex * s])


def printed_form_comparison(points=None, C: float = 1.0, K: float = 1.0) -> dict:
    """Max coordinate gaps between the recipe and the printed closed form."""
    if points is None:
        points = [(0.0, 0.0, 0.0), (0.3, -0.2, 0.5), (-0.4, 0.4, -1.0)]
    gaps = np.zeros(7)
    for x, y, t in points:
        gaps = np.maximum(gaps, np.abs(exp_example_coords(x, y, t, C, K)
                                       - exp_example_printed(x, y, t, C, K)))
    origin_recipe = exp_example_coords(0, 0, 0, C, K)
    origin_printed = exp_example_printed(0, 0, 0, C, K)
    return {
        "max_gap_per_coordinate": [float(g) for g in gaps],
        "origin_recipe_fibre": [float(v) for v in origin_recipe[:3]],
        "origin_printed_fibre": [float(v) for v in origin_printed[:3]],
        "agrees": bool(np.max(gaps) < 1e-10),
    }
