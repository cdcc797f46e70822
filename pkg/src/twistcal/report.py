"""Residual reports and their CSV / JSON / text renderings."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from typing import Any


@dataclass(frozen=True)
class SampleRecord:
    u: tuple
    t: tuple
    residual: float | None
    components: dict = field(default_factory=dict)
    error: str | None = None

    @classmethod
    def from_dict(cls, d):
        return cls(u=tuple(d["u"]), t=tuple(d["t"]), residual=d["residual"],
                   components=dict(d.get("components", {})), error=d.get("error"))


@dataclass(frozen=True)
class ResidualReport:
    name: str
    geometry: str
    tolerance: float
    verdict: str
    max: float | None
    mean: float | None
    argmax: dict | None
    components: dict
    samples: tuple
    errors: tuple = ()
    diagnostics: dict = field(default_factory=dict)
    expected: str | None = None

    @property
    def passed(self) -> bool:
        return self.verdict == "PASS"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["samples"] = [asdict(s) for s in self.samples]
        d["errors"] = [dict(e) for e in self.errors]
        return _jsonable(d)

    @classmethod
    def from_dict(cls, d) -> "ResidualReport":
        argmax = d.get("argmax")
        if argmax is not None:
            argmax = {"u": tuple(argmax["u"]), "t": tuple(argmax["t"])}
        return cls(
            name=d["name"], geometry=d["geometry"], tolerance=d["tolerance"],
            verdict=d["verdict"], max=d["max"], mean=d["mean"], argmax=argmax,
            components=dict(d["components"]),
            samples=tuple(SampleRecord.from_dict(s) for s in d["samples"]),
            errors=tuple(dict(e, u=tuple(e["u"]) if e.get("u") is not None else None)
                         for e in d.get("errors", [])),
            diagnostics=_tuplify(d.get("diagnostics", {})),
            expected=d.get("expected"),
        )


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return obj.item()
    return obj


def _tuplify(obj):
    if isinstance(obj, dict):
        return {k: _tuplify(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return tuple(_tuplify(v) for v in obj)
    return obj


def summarize(samples, tol: float, name: str, geometry: str, diagnostics=None,
              expected=None) -> ResidualReport:
    """Fixed-order reduction of per-sample records into a report."""
    best = None
    total = 0.0
    count = 0
    comp_max: dict[str, float] = {}
    errors = []
    for s in samples:
        if s.error is not None:
            errors.append({"u": s.u, "t": s.t, "message": s.error})
            continue
        total += s.residual
        count += 1
        if best is None or s.residual > best.residual:
            best = s
        for k, v in s.components.items():
            comp_max[k] = max(comp_max.get(k, 0.0), v)
    mx = None if best is None else best.residual
    verdict = "PASS" if (not errors and mx is not None and mx < tol) else "FAIL"
    return ResidualReport(
        name=name, geometry=geometry, tolerance=tol, verdict=verdict, max=mx,
        mean=None if count == 0 else total / count,
        argmax=None if best is None else {"u": best.u, "t": best.t},
        components=comp_max, samples=tuple(samples), errors=tuple(errors),
        diagnostics=dict(diagnostics or {}), expected=expected)


def csv_text(report: ResidualReport) -> str:
    """One row per sample: u-coordinates, t-coordinates, residuals."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    first = report.samples[0] if report.samples else None
    nu = len(first.u) if first else 0
    nt = len(first.t) if first else 0
    comp_keys = sorted({k for s in report.samples for k in s.components})
    w.writerow([f"u{i + 1}" for i in range(nu)] + [f"t{i + 1}" for i in range(nt)]
               + ["residual"] + comp_keys + ["error"])
    for s in report.samples:
        w.writerow([repr(float(c)) for c in s.u] + [repr(float(c)) for c in s.t]
                   + ["" if s.residual is None else repr(s.residual)]
                   + [repr(s.components[k]) if k in s.components else "" for k in comp_keys]
                   + [s.error or ""])
    return buf.getvalue()


def summary_text(report: ResidualReport) -> str:
    lines = [f"{report.name} [{report.geometry}]: {report.verdict}"
             + (f" (expected {report.expected})" if report.expected else "")]
    if report.max is not None:
        lines.append(f"  max residual {report.max:.3e} (tol {report.tolerance:.1e}), "
                     f"mean {report.mean:.3e}")
        lines.append(f"  worst sample u = {list(report.argmax['u'])}, "
                     f"t = {list(report.argmax['t'])}")
    for k, v in sorted(report.components.items()):
        lines.append(f"  component {k}: max {v:.3e}")
    for k, v in sorted(report.diagnostics.items()):
        lines.append(f"  {k}: {_short(v)}")
    for e in report.errors[:5]:
        lines.append(f"  error at u = {list(e['u'])}: {e['message']}")
    if len(report.errors) > 5:
        lines.append(f"  ... {len(report.errors) - 5} more errors")
    return "\n".join(lines)


def _short(v: Any) -> str:
    if isinstance(v, float):
        return f"{v:.3e}"
    if isinstance(v, dict):
        return ", ".join(f"{k}={_short(x)}" for k, x in sorted(v.items()))
    return str(v)


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True)
