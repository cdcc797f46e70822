"""Command line entry point and run orchestration."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from functools import partial

import numpy as np

from . import __version__
from . import bundles as bd
from . import sections as sec
from .calibration import DegenerateFrameError
from .config import ConfigError, RunPlan, load_config, resolve
from .immersion import (GeometryError, adapted_frame, classify_point, classify_residuals,
                        normal_directions, one_form_calculus)
from .invariants import lemma_fuzz
from .octonion import format_table
from .parallel import ordered_map
from .report import ResidualReport, csv_text, dumps, summarize, summary_text
from .scenarios import describe_scenarios, printed_form_comparison, scenario_names
from .twisted import calibration_verdict, closed_frame, max_principal_angle, numeric_frames

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3
IDENTITY_TOL = 1e-9

_RUNTIME_ERRORS = (GeometryError, DegenerateFrameError, ValueError, ArithmeticError)


# -- per-point diagnostics -----------------------------------------------------

def _section_residuals(spec, u, fp) -> dict:
    imm = spec.imm
    if spec.geometry == "SL":
        calc = one_form_calculus(imm, spec.mu, u, fp)
        return {"closedness": float(np.max(np.abs(calc.dmu))),
                "coclosedness": abs(float(np.trace(calc.B)))}
    if spec.geometry == "associative":
        return {"dbar": sec.dbar_residual(imm, sec.lambda2_frames(imm), spec.alpha, spec.beta, u)}
    if spec.geometry == "coassociative":
        return {"parallel": sec.parallel_residual(imm, sec.line_frame(imm), spec.gamma, u)}
    return {"dbar": sec.dbar_residual(imm, sec.spinor_frames(imm), spec.alpha, spec.beta, u)}


def point_diagnostics(spec, u, ts, step, richardson) -> dict:
    """Route agreement plus section and classifier residuals at one base point."""
    out = {}
    try:
        fp = adapted_frame(spec.imm, u)
        numeric = numeric_frames(spec, u, ts, step, richardson, fp)
        out["route_angle"] = max(max_principal_angle(closed_frame(spec, u, t, fp), fr)
                                 for t, fr in zip(ts, numeric))
        out.update(_section_residuals(spec, u, fp))
        out.update({f"classifier_{k}": float(v)
                    for k, v in classify_point(fp, normal_directions(spec.imm.q)).items()})
    except _RUNTIME_ERRORS as err:
        out["error"] = str(err)
    return out


def reduce_diagnostics(grid, per_u) -> dict:
    """Fixed-order max over the grid, with the worst base point for each key."""
    worst: dict = {}
    errors = 0
    for u, d in zip(grid, per_u):
        if "error" in d:
            errors += 1
            continue
        for k, v in d.items():
            if k not in worst or v > worst[k]["max"]:
                worst[k] = {"max": float(v), "u": [float(c) for c in u]}
    out = {k: worst[k] for k in sorted(worst)}
    out["diagnostic_errors"] = errors
    return out


# -- orchestration ---------------------------------------------------------------

def execute(plan: RunPlan) -> tuple[ResidualReport, dict]:
    """Run the verdict and diagnostics; return the report and its JSON document."""
    base = calibration_verdict(plan.spec, plan.grid, plan.fibre_samples, plan.tolerance,
                               plan.step, plan.richardson, plan.jobs, plan.name, plan.expected)
    fn = partial(point_diagnostics, plan.spec, ts=plan.fibre_samples, step=plan.step,
                 richardson=plan.richardson)
    per_u = ordered_map(fn, [tuple(u) for u in plan.grid], plan.jobs)
    diagnostics = reduce_diagnostics(plan.grid, per_u)
    if plan.name in ("exp_associative", "exp_associative_ruled"):
        C = K = 1.0 if plan.name == "exp_associative" else 0.0
        diagnostics["printed_form_comparison"] = printed_form_comparison(C=C, K=K)
    report = summarize(base.samples, plan.tolerance, plan.name, plan.spec.geometry,
                       diagnostics, plan.expected)
    doc = {"tool": "twistcal", "version": __version__, "config": plan.echo,
           "report": report.to_dict()}
    return report, doc


def render(report, doc, fmt: str) -> str:
    if fmt == "json":
        return dumps(doc) + "\n"
    if fmt == "csv":
        return csv_text(report)
    return summary_text(report) + "\n"


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _emit(text, out):
    if out:
        _write(out, text)
    else:
        sys.stdout.write(text)


def _overrides(args) -> dict:
    return {"seed": args.seed, "jobs": args.jobs, "tolerance": args.tol, "step": args.step}


def _base_config(args) -> dict:
    if args.config and args.scenario:
        raise ConfigError("use either --config or --scenario, not both")
    if args.config:
        return load_config(args.config)
    if args.scenario:
        return {"version": 1, "scenario": args.scenario}
    raise ConfigError("need --config PATH or --scenario NAME")


def cmd_verify(args) -> int:
    if args.all_scenarios:
        return _verify_all(args)
    config = _base_config(args)
    plan = resolve(config, _overrides(args))
    report, doc = execute(plan)
    outputs = config.get("outputs", {})
    for fmt, path in sorted(outputs.items()):
        _write(path, render(report, doc, fmt))
    if args.out:
        _write(args.out, render(report, doc, args.format))
        sys.stdout.write(summary_text(report) + "\n")
    else:
        sys.stdout.write(render(report, doc, args.format))
    return EXIT_OK if report.passed else EXIT_FAIL


def _verify_all(args) -> int:
    docs, lines, matched = [], [], 0
    for name in scenario_names():
        report, doc = execute(resolve({"version": 1, "scenario": name}, _overrides(args)))
        docs.append(doc)
        ok = report.verdict == report.expected
        matched += ok
        lines.append(f"{name:32s} {report.verdict} (expected {report.expected}) "
                     f"max {report.max:.3e}  {'ok' if ok else 'MISMATCH'}")
    lines.append(f"{matched}/{len(docs)} scenarios match their expected verdict")
    if args.format == "json":
        text = dumps({"tool": "twistcal", "version": __version__,
                      "reports": [d["report"] for d in docs],
                      "configs": [d["config"] for d in docs]}) + "\n"
    elif args.format == "csv":
        text = "".join(csv_text(ResidualReport.from_dict(d["report"])) for d in docs)
    else:
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    if args.out:
        sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK if matched == len(docs) else EXIT_FAIL


def _set_path(cfg: dict, path: str, value):
    keys = path.split(".")
    node = cfg
    for k in keys[:-1]:
        if not isinstance(node.get(k), dict):
            raise ConfigError(f"--param {path!r}: {k!r} is not a config section")
        node = node[k]
    node[keys[-1]] = value


def _parse_values(text: str) -> list:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        try:
            out.append(json.loads(tok))
        except json.JSONDecodeError:
            out.append(tok)
    return out


def cmd_scan(args) -> int:
    if not args.param or args.values is None:
        raise ConfigError("scan needs --param NAME and --values V1,V2,...")
    config = _base_config(args)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["param", "value", "verdict", "max_residual", "mean_residual",
                "max_route_angle", "errors"])
    for value in _parse_values(args.values):
        cfg = json.loads(json.dumps(config))
        _set_path(cfg, args.param, value)
        report, _ = execute(resolve(cfg, _overrides(args)))
        route = report.diagnostics.get("route_angle", {}).get("max")
        w.writerow([args.param, value, report.verdict,
                    "" if report.max is None else repr(report.max),
                    "" if report.mean is None else repr(report.mean),
                    "" if route is None else repr(route), len(report.errors)])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_classify(args) -> int:
    plan = resolve(_base_config(args), _overrides(args))
    try:
        res = {k: float(v) for k, v in classify_residuals(plan.spec.imm, plan.grid).items()}
    except _RUNTIME_ERRORS as err:
        sys.stderr.write(f"classify: {err}\n")
        return EXIT_FAIL
    if args.format == "json":
        text = dumps({"tool": "twistcal", "version": __version__, "name": plan.name,
                      "residuals": res}) + "\n"
    elif args.format == "csv":
        text = "residual,max\n" + "".join(f"{k},{v!r}\n" for k, v in sorted(res.items()))
    else:
        text = f"{plan.name}: immersion residuals over {len(plan.grid)} base points\n" + "".join(
            f"  {k}: {v:.3e}\n" for k, v in sorted(res.items()))
    _emit(text, args.out)
    return EXIT_OK


def cmd_identity(args) -> int:
    worst = lemma_fuzz(args.trials, args.max_p, args.seed or 0)
    t = worst["t"]
    text = (f"identity fuzz: {args.trials} trials, p <= {args.max_p}, {worst['checks']} checks\n"
            f"worst normalized residual {worst['residual']:.3e}"
            + (f" at p = {worst['p']}, j = {worst['j']}, t = {t.real:+.4f}{t.imag:+.4f}i"
               if t is not None else "") + "\n")
    _emit(text, args.out)
    return EXIT_OK if worst["residual"] < IDENTITY_TOL else EXIT_FAIL


def cmd_table(args) -> int:
    _emit(format_table() + "\n", args.out)
    return EXIT_OK


def cmd_scenarios(args) -> int:
    rows = describe_scenarios()
    if args.format == "json":
        text = dumps(rows) + "\n"
    else:
        text = "".join(f"{r['name']:32s} {r['expected']:4s}  tol {r['tolerance']:.0e}  {r['note']}\n"
                       for r in rows)
    _emit(text, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH")
    common.add_argument("--scenario", metavar="NAME")
    common.add_argument("--out", metavar="PATH")
    common.add_argument("--format", choices=("summary", "csv", "json"), default="summary")
    common.add_argument("--seed", type=int)
    common.add_argument("--jobs", type=int)
    common.add_argument("--tol", type=float)
    common.add_argument("--step", type=float)

    p = argparse.ArgumentParser(prog="twistcal", description=__doc__)
    p.add_argument("--version", action="version", version=f"twistcal {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="run a config or scenario")
    v.add_argument("--all-scenarios", action="store_true")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("scan", parents=[common], help="sweep one config entry")
    s.add_argument("--param", metavar="NAME", help="dotted config path, e.g. spec.params.C")
    s.add_argument("--values", metavar="V1,V2,...")
    s.set_defaults(func=cmd_scan)

    c = sub.add_parser("classify", parents=[common], help="immersion-only residuals")
    c.set_defaults(func=cmd_classify)

    i = sub.add_parser("identity-check", parents=[common], help="fuzz the sigma identity")
    i.add_argument("--trials", type=int, default=1000)
    i.add_argument("--max-p", type=int, default=5)
    i.set_defaults(func=cmd_identity)

    t = sub.add_parser("octonion-table", parents=[common], help="print the 8x8 table")
    t.set_defaults(func=cmd_table)

    sc = sub.add_parser("scenarios", help="scenario registry")
    scsub = sc.add_subparsers(dest="action", required=True)
    lst = scsub.add_parser("list", parents=[common])
    lst.set_defaults(func=cmd_scenarios)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        sys.stderr.write(f"twistcal: {err}\n")
        return EXIT_CONFIG
    except OSError as err:
        sys.stderr.write(f"twistcal: I/O error: {err}\n")
        return EXIT_IO
    except _RUNTIME_ERRORS as err:
        sys.stderr.write(f"twistcal: {err}\n")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
