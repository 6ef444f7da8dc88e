"""Serializable classification reports.

A report holds plain data only (dicts, lists, strings, floats, ints,
``None``), so YAML serialization round-trips exactly.  NaN coefficients
(vacuous points) are stored as ``None``.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import yaml

from . import __version__
from . import catalog
from . import classifier as C
from .catalog import CatalogEntry
from .metric import MetricSpec, SampleGrid, metric_to_dict
from .numeric import Sampled


def plain(obj: Any) -> Any:
    """Recursively convert results to YAML-safe builtins."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return None if math.isnan(x) else x
    return obj


@dataclass
class ClassificationReport:
    metric: dict
    grid: dict
    tolerance: dict
    engine_version: str
    summary: dict
    detectors: dict
    golden: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ClassificationReport":
        names = {f.name for f in dataclasses.fields(cls)}
        missing = names - set(data)
        if missing - {"golden"}:
            raise ValueError(f"report lacks fields {sorted(missing)}")
        return cls(**{k: data[k] for k in names if k in data})

    def dumps(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False, default_flow_style=None, width=100)

    @classmethod
    def loads(cls, text: str) -> "ClassificationReport":
        return cls.from_dict(yaml.safe_load(text))


def _detectors(cl: C.Classification) -> dict:
    out: dict[str, Any] = {}
    for key, pair in cl.pseudosymmetry.items():
        for kind, res in pair.items():
            out[f"{key} {kind}"] = plain(res)
    for key, res in cl.mixed.items():
        out[key] = plain(res)
    out["Roter"] = plain(cl.roter)
    out["generalized Roter"] = plain(cl.generalized_roter)
    out["Ein"] = plain(cl.ein)
    out["quasi-Einstein"] = plain(cl.quasi_einstein)
    out["generalized quasi-Einstein"] = plain(cl.chaki)
    for key, res in cl.recurrency.items():
        out[f"2-form recurrency {key}"] = plain(res)
    out["Ricci 1-form recurrency"] = plain(cl.ricci_recurrency)
    for key, res in cl.ricci_differential.items():
        out[f"Ricci {key}"] = plain(res)
    for key, res in cl.compatibility.items():
        out[f"compatibility {key}"] = plain(res)
    for key, res in cl.weak_symmetry.items():
        out[f"weak symmetry {key}"] = plain(res)
    for key, res in cl.venzi.items():
        out[f"Venzi {key}"] = plain(res)
    for key, res in cl.extra.items():
        out[key] = plain(res)
    return out


def _summary(cl: C.Classification) -> dict:
    rr = cl.pseudosymmetry.get("R.R", {})
    return {
        "pseudosymmetric": rr["pseudosymmetric"].verdict if rr else C.NOT_APPLICABLE,
        "semisymmetric": rr["semisymmetric"].verdict if rr else C.NOT_APPLICABLE,
        "roter": cl.roter.verdict,
        "generalized_roter": cl.generalized_roter.verdict,
        "ein_level": cl.ein.level,
        "qe_rank": cl.quasi_einstein.rank,
        "chaki": cl.chaki.verdict,
        "ricci_recurrent": cl.ricci_recurrency.verdict,
        "compatible": sorted(k for k, v in cl.compatibility.items() if v.verdict == C.HOLDS),
    }


def build_report(metric: MetricSpec, grid: SampleGrid, tol: C.Tolerance = C.DEFAULT_TOL,
                 entry: CatalogEntry | None = None) -> tuple[ClassificationReport, Sampled]:
    """Run the classifier suite (and golden comparison for catalog entries)."""
    fields = entry.fields if entry is not None else None
    s = C.sample(metric, grid, fields)
    cl = C.classify(s, tol)
    golden = []
    if entry is not None and entry.golden:
        for g in catalog.golden_check(entry, grid, s.__getitem__):
            golden.append({"entry": g.entry.label(), "status": g.status,
                           "max_rel_error": plain(g.max_rel_error), "detail": g.detail})
    report = ClassificationReport(
        metric=plain(metric_to_dict(metric)),
        grid=plain(grid.describe()),
        tolerance={"rel": float(tol.rel), "abs_floor": float(tol.abs_floor)},
        engine_version=__version__,
        summary=plain(_summary(cl)),
        detectors=_detectors(cl),
        golden=golden,
    )
    return report, s


def _fmt(x) -> str:
    return "nan" if x is None else f"{x:.6g}"


def _coeff_line(d: dict) -> str | None:
    if "labels" in d and "coefficients" in d:
        cols = list(zip(*d["coefficients"])) if d["coefficients"] else []
        parts = [f"{lab} = [{', '.join(_fmt(v) for v in col)}]" for lab, col in zip(d["labels"], cols)]
        return "; ".join(parts)
    if "alpha" in d and isinstance(d["alpha"], list):
        return f"alpha = [{', '.join(_fmt(v) for v in d['alpha'])}]"
    return None


def render_text(report: ClassificationReport) -> str:
    m, g = report.metric, report.grid
    lines = [f"metric: {m['name']} ({m['dimension']}D, coordinates {', '.join(m['coordinates'])})"]
    if g["parameters"]:
        lines.append("parameters: " + ", ".join(f"{k} = {v:g}" for k, v in g["parameters"].items()))
    lines.append(f"grid: {len(g['points'])} points; tolerance rel {report.tolerance['rel']:g}, "
                 f"abs floor {report.tolerance['abs_floor']:g}")
    lines.append("")
    lines.append("summary:")
    for k, v in report.summary.items():
        lines.append(f"  {k}: {v}")
    lines.append("")
    lines.append("detectors:")
    for name, d in report.detectors.items():
        extra = []
        if d.get("level") is not None:
            extra.append(f"level {d['level']}")
        if d.get("rank") is not None:
            extra.append(f"rank {d['rank']}")
        if "dimensions" in d:
            extra.append(f"dimensions {d['dimensions']}")
        if d.get("residuals"):
            live = [r for r in d["residuals"] if r is not None]
            if live:
                extra.append(f"max residual {max(live):.1e}")
        lines.append(f"  {name}: {d['verdict']}" + (f" ({', '.join(extra)})" if extra else ""))
        coeff = _coeff_line(d)
        if coeff and d["verdict"] == C.HOLDS:
            lines.append(f"      {coeff}")
    if report.golden:
        lines.append("")
        lines.append("golden components:")
        for gr in report.golden:
            lines.append(f"  {gr['entry']}: {gr['status']} (max rel error {gr['max_rel_error']:.1e})")
    return "\n".join(lines) + "\n"
