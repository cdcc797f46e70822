"""Run configuration: schema validation and resolution into runnable objects.

A config is a JSON document with a top-level ``version``.  It names either a
registered ``scenario`` or an inline ``spec``; every tolerance and step has a
default listed in ``DEFAULTS``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import jsonschema

from . import expr as ex
from .immersion import Immersion, OneFormOnL
from .scenarios import UnknownScenarioError, get_scenario
from .twisted import (DEFAULT_RICHARDSON, DEFAULT_STEP, DEFAULT_TOL, AssocTwist,
                      CayleyTwist, CoassocTwist, SLTwist, base_grid,
                      default_fibre_samples)

CONFIG_VERSION = 1

DEFAULTS = {
    "tolerance": DEFAULT_TOL,
    "step": DEFAULT_STEP,
    "richardson": DEFAULT_RICHARDSON,
    "seed": 0,
    "jobs": 1,
    "grid": {"box": [[-0.5, 0.5], [-0.5, 0.5]], "resolution": [5, 5]},
}

_expr_list = {"type": "array", "items": {"type": "string"}, "minItems": 1}
_scalar_expr = {"type": ["string", "number"]}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["version"],
    "properties": {
        "version": {"const": CONFIG_VERSION},
        "scenario": {"type": "string"},
        "spec": {
            "type": "object",
            "additionalProperties": False,
            "required": ["geometry", "immersion"],
            "properties": {
                "name": {"type": "string"},
                "geometry": {"enum": ["SL", "associative", "coassociative", "cayley"]},
                "variables": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                "immersion": {"oneOf": [{"type": "string"}, _expr_list]},
                "mu": _expr_list,
                "theta": {"type": "number"},
                "alpha": _scalar_expr,
                "beta": _scalar_expr,
                "gamma": _scalar_expr,
                "params": {"type": "object", "additionalProperties": {"type": "number"}},
            },
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "required": ["box", "resolution"],
            "properties": {
                "box": {"type": "array", "minItems": 1,
                        "items": {"type": "array", "items": {"type": "number"},
                                  "minItems": 2, "maxItems": 2}},
                "resolution": {"type": "array", "minItems": 1,
                               "items": {"type": "integer", "minimum": 1}},
            },
        },
        "fibre_samples": {"type": "array", "minItems": 1,
                          "items": {"type": "array", "items": {"type": "number"}}},
        "tolerance": {"type": "number", "exclusiveMinimum": 0},
        "step": {"type": "number", "exclusiveMinimum": 0},
        "richardson": {"type": "integer", "minimum": 0, "maximum": 4},
        "seed": {"type": "integer", "minimum": 0},
        "jobs": {"type": "integer", "minimum": 1},
        "outputs": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"csv": {"type": "string"}, "json": {"type": "string"},
                           "summary": {"type": "string"}},
        },
    },
    "oneOf": [{"required": ["scenario"]}, {"required": ["spec"]}],
}


class ConfigError(ValueError):
    """Invalid configuration (schema, unknown names, unparsable expressions)."""


@dataclass(frozen=True, eq=False)
class RunPlan:
    name: str
    spec: object
    grid: object
    fibre_samples: list
    tolerance: float
    step: float
    richardson: int
    jobs: int
    expected: str | None
    echo: dict


def load_config(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}: invalid JSON at line {err.lineno} column {err.colno}: {err.msg}")


def validate(config: dict) -> None:
    try:
        jsonschema.validate(config, SCHEMA)
    except jsonschema.ValidationError as err:
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"config error at {where}: {err.message}") from None


def split_components(text: str) -> list[str]:
    """Split "(a, f(b, c), d)" at top-level commas."""
    s = text.strip()
    if s.startswith("(") and s.endswith(")"):
        depth = 0
        for i, ch in enumerate(s):
            depth += ch == "("
            depth -= ch == ")"
            if depth == 0 and i < len(s) - 1:
                break
        else:
            s = s[1:-1]
    parts, depth, cur = [], 0, []
    for ch in s:
        if ch == "," and depth == 0:
            parts.append("".join(cur).strip())
            cur = []
            continue
        depth += ch == "("
        depth -= ch == ")"
        cur.append(ch)
    parts.append("".join(cur).strip())
    if any(not p for p in parts):
        raise ConfigError(f"empty component in immersion {text!r}")
    return parts


def build_spec(spec_cfg: dict):
    """Inline spec dictionary to a twist spec object."""
    comps = spec_cfg["immersion"]
    if isinstance(comps, str):
        comps = split_components(comps)
    params = spec_cfg.get("params", {})
    geometry = spec_cfg["geometry"]
    variables = tuple(spec_cfg.get("variables", ["u", "v"]))
    try:
        imm = Immersion.from_strings(comps, variables, params)
        if geometry == "SL":
            mu_cfg = spec_cfg.get("mu")
            mu = (OneFormOnL.zero(variables) if mu_cfg is None
                  else OneFormOnL.from_strings(mu_cfg, variables, params))
            theta = spec_cfg.get("theta", math.remainder(0.5 * math.pi * imm.q, 2 * math.pi))
            return SLTwist(imm, mu, theta)
        from .fields import as_field
        def f(key):
            return as_field(spec_cfg.get(key, "0"), variables, params)
        if geometry == "associative":
            return AssocTwist(imm, f("alpha"), f("beta"))
        if geometry == "coassociative":
            return CoassocTwist(imm, f("gamma"))
        return CayleyTwist(imm, f("alpha"), f("beta"))
    except ex.ExpressionError as err:
        raise ConfigError(f"spec expression error: {err}") from None
    except ValueError as err:
        raise ConfigError(f"spec error: {err}") from None


def resolve(config: dict, overrides: dict | None = None) -> RunPlan:
    """Validate, apply CLI overrides, and build the runnable plan."""
    cfg = json.loads(json.dumps(config))
    for k, v in (overrides or {}).items():
        if v is not None:
            cfg[k] = v
    validate(cfg)
    seed = cfg.get("seed", DEFAULTS["seed"])
    if "scenario" in cfg:
        try:
            sc = get_scenario(cfg["scenario"])
        except UnknownScenarioError as err:
            raise ConfigError(str(err)) from None
        spec, name, expected = sc.spec, sc.name, sc.expected
        grid_cfg = cfg.get("grid", {"box": [list(b) for b in sc.box],
                                    "resolution": list(sc.resolution)})
        fibres = cfg.get("fibre_samples") or [list(t) for t in sc.fibres()]
        tol = cfg.get("tolerance", sc.tolerance)
    else:
        spec = build_spec(cfg["spec"])
        name, expected = cfg["spec"].get("name", "custom"), None
        grid_cfg = cfg.get("grid", DEFAULTS["grid"])
        fibres = cfg.get("fibre_samples") or [list(t) for t in default_fibre_samples(spec.fibre_dim, seed)]
        tol = cfg.get("tolerance", DEFAULTS["tolerance"])
    box, res = grid_cfg["box"], grid_cfg["resolution"]
    if len(box) != len(res) or len(box) != spec.imm.p:
        raise ConfigError(f"grid must have {spec.imm.p} box ranges and resolutions")
    for t in fibres:
        if len(t) != spec.fibre_dim:
            raise ConfigError(f"fibre samples need {spec.fibre_dim} coordinates, got {len(t)}")
    echo = {k: v for k, v in cfg.items() if k not in ("jobs", "outputs")}
    echo.update(grid={"box": box, "resolution": res}, fibre_samples=[list(map(float, t)) for t in fibres],
                tolerance=tol, step=cfg.get("step", DEFAULTS["step"]),
                richardson=cfg.get("richardson", DEFAULTS["richardson"]), seed=seed)
    return RunPlan(name=name, spec=spec, grid=base_grid(box, res),
                   fibre_samples=[tuple(float(c) for c in t) for t in fibres],
                   tolerance=float(tol), step=float(echo["step"]),
                   richardson=int(echo["richardson"]), jobs=int(cfg.get("jobs", DEFAULTS["jobs"])),
                   expected=expected, echo=echo)
