"""Command-line front end.

Subcommands: ``classify``, ``components``, ``verify-paper`` and ``export``.
Exit codes: 0 ok, 1 engine error, 2 usage (including missing files and
unknown names), 3 parse error, 4 degenerate metric, 5 empty grid.
"""

from __future__ import annotations

import argparse
import itertools
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import yaml

from . import catalog
from . import claims as K
from . import classifier as C
from . import expr as ex
from .catalog import CatalogEntry
from .metric import (
    DegenerateMetricError, EmptyGridError, MetricError, MetricFileError, MetricSpec, SampleGrid,
    default_grid, dump_metric, load_metric, make_grid, parse_grid_flag,
)
from .report import build_report, render_text

EXIT_OK, EXIT_ERROR, EXIT_USAGE, EXIT_PARSE, EXIT_DEGENERATE, EXIT_EMPTY = 0, 1, 2, 3, 4, 5

TENSOR_ALIASES = {"RF": "RdotF", "CF": "CdotF"}
TENSOR_HELP = ("g, ginv, Gamma, R, S, S2, S3, S4, kappa, C, P, W, K, G, nabla<X>, "
               "<A>dot<T> (A in R C P W K G), Q<B><T> (B in g S S2 S3 S4), RF, QgF")


class UsageError(Exception):
    pass


@dataclass
class Source:
    metric: MetricSpec
    entry: CatalogEntry | None
    params: dict[str, float]


def _params(items: Sequence[str]) -> dict[str, float]:
    out = {}
    for item in items or ():
        key, sep, val = item.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"bad --param {item!r}; expected name=value")
        try:
            out[key.strip()] = float(val)
        except ValueError:
            raise UsageError(f"bad --param value in {item!r}") from None
    return out


def _source(args) -> Source:
    params = _params(args.param)
    if args.metric_file:
        path = Path(args.metric_file)
        if not path.is_file():
            raise UsageError(f"metric file not found: {path}")
        return Source(load_metric(path), None, params)
    if not args.metric:
        raise UsageError("one of --metric or --metric-file is required")
    try:
        entry = catalog.lookup(args.metric, params)
    except KeyError as err:
        raise UsageError(err.args[0]) from None
    return Source(entry.metric, entry, params)


def _tolerance(args) -> C.Tolerance:
    if args.tol <= 0 or args.abs_floor < 0:
        raise UsageError("--tol must be positive and --abs-floor non-negative")
    return C.Tolerance(args.tol, args.abs_floor)


def _grid(src: Source, specs: Sequence[str], tol: C.Tolerance) -> SampleGrid:
    if not specs:
        return default_grid(src.metric, src.params, rel_tol=tol.rel, abs_floor=tol.abs_floor)
    axes: dict[str, list[float]] = {}
    for spec in specs:
        name, values = parse_grid_flag(spec)
        axes.setdefault(name, []).extend(values)
    return make_grid(src.metric, axes, src.params, tol.rel, tol.abs_floor)


def _emit(text: str, args) -> None:
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# subcommands


def cmd_classify(args) -> int:
    tol = _tolerance(args)
    src = _source(args)
    grid = _grid(src, args.grid, tol)
    report, _ = build_report(src.metric, grid, tol, src.entry)
    _emit(report.dumps() if args.format == "machine" else render_text(report), args)
    return EXIT_OK


def _golden_column(src: Source, grid: SampleGrid, s, tensor: str) -> dict[tuple[int, ...], tuple[float, str]]:
    if src.entry is None:
        return {}
    entries = tuple(g for g in src.entry.golden if g.tensor == tensor)
    if not entries:
        return {}
    sub = CatalogEntry(src.entry.name, src.entry.metric, src.entry.warp, src.entry.fields, entries)
    return {r.entry.index: (r.printed[0], r.status) for r in catalog.golden_check(sub, grid, s.__getitem__)}


def cmd_components(args) -> int:
    tol = _tolerance(args)
    src = _source(args)
    grid = _grid(src, args.at, tol)
    if len(grid) != 1:
        raise UsageError(f"--at must select exactly one point, got {len(grid)}")
    s = C.sample(src.metric, grid, src.entry.fields if src.entry else None)
    name = args.tensor
    try:
        values = s[TENSOR_ALIASES.get(name, name)][0]
    except (KeyError, ValueError):
        raise UsageError(f"unknown tensor {name!r}; known: {TENSOR_HELP}") from None
    values = np.asarray(values, float)
    golden = _golden_column(src, grid, s, name)
    rows = []
    for idx in itertools.product(*(range(k) for k in values.shape)):
        v = float(values[idx])
        if abs(v) <= tol.abs_floor:
            continue
        label = tuple(i + 1 for i in idx)
        rows.append((label, v, golden.get(label)))
    point = grid.point(0)
    if args.format == "machine":
        doc = {"tensor": name, "point": point, "parameters": {k: float(v) for k, v in grid.env.items()},
               "components": [{"index": list(lab), "value": v,
                               **({"printed": gold[0], "status": gold[1]} if gold else {})}
                              for lab, v, gold in rows]}
        _emit(yaml.safe_dump(doc, sort_keys=False, default_flow_style=None), args)
        return EXIT_OK
    head = f"{name} at " + ", ".join(f"{k} = {v:g}" for k, v in point.items())
    lines = [head]
    for lab, v, gold in rows:
        text = f"{name}_{''.join(map(str, lab))}" if lab else name
        line = f"  {text} = {v:.12g}"
        if gold:
            line += f"    printed {gold[0]:.12g} [{gold[1]}]"
        lines.append(line)
    if not rows:
        lines.append("  (all components vanish)")
    _emit("\n".join(lines) + "\n", args)
    return EXIT_OK


def cmd_verify(args) -> int:
    tol = _tolerance(args)
    results = K.run_all(tol)
    failed = [c for c in results if c.status == K.FAIL]
    if args.format == "machine":
        doc = {"tolerance": {"rel": tol.rel, "abs_floor": tol.abs_floor},
               "claims": [{"name": c.name, "status": c.status, "detail": c.detail} for c in results],
               "failed": len(failed)}
        _emit(yaml.safe_dump(doc, sort_keys=False), args)
    else:
        lines = [f"{c.status:<9} {c.name}" + (f"  ({c.detail})" if c.detail else "") for c in results]
        counts = {st: sum(c.status == st for c in results) for st in (K.PASS, K.DISPUTED, K.FAIL)}
        lines.append("")
        lines.append(", ".join(f"{v} {k}" for k, v in counts.items()))
        _emit("\n".join(lines) + "\n", args)
    return EXIT_OK if not failed else EXIT_ERROR


def cmd_export(args) -> int:
    src = _source(args)
    _emit(dump_metric(src.metric), args)
    return EXIT_OK


# --------------------------------------------------------------------------
# argument parsing


def _common(p: argparse.ArgumentParser, metric: bool = True, grid: bool = True) -> None:
    if metric:
        src = p.add_mutually_exclusive_group()
        src.add_argument("--metric", help="catalog name, melvin_type:<f> or base3:<f>")
        src.add_argument("--metric-file", help="metric definition file (YAML)")
        p.add_argument("--param", action="append", default=[], metavar="K=V", help="parameter value")
    if grid:
        p.add_argument("--grid", action="append", default=[], metavar="C=START:STOP:COUNT",
                       help="sample values for a coordinate (also C=v or C=v1,v2)")
    p.add_argument("--tol", type=float, default=C.DEFAULT_TOL.rel, help="relative tolerance")
    p.add_argument("--abs-floor", type=float, default=C.DEFAULT_TOL.abs_floor, help="absolute floor")
    p.add_argument("--output", help="write to this file instead of stdout")
    p.add_argument("--format", choices=("text", "machine"), default="text")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pseudosym", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("classify", help="run every structure detector on a metric")
    _common(p)
    p.set_defaults(run=cmd_classify)
    p = sub.add_parser("components", help="list nonzero components of a tensor at one point")
    _common(p, grid=False)
    p.add_argument("--tensor", required=True, help=TENSOR_HELP)
    p.add_argument("--at", action="append", default=[], metavar="C=V", help="coordinate value")
    p.set_defaults(run=cmd_components)
    p = sub.add_parser("verify-paper", help="check the reference claims about Melvin-type metrics")
    _common(p, metric=False, grid=False)
    p.set_defaults(run=cmd_verify)
    p = sub.add_parser("export", help="write a catalog metric in the metric-file format")
    _common(p, grid=False)
    p.set_defaults(run=cmd_export)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(args)
    except UsageError as err:
        code, msg = EXIT_USAGE, str(err)
    except (ex.ExprSyntaxError, MetricFileError) as err:
        code, msg = EXIT_PARSE, f"parse error: {err}"
    except DegenerateMetricError as err:
        code, msg = EXIT_DEGENERATE, f"degenerate metric: {err}"
    except EmptyGridError as err:
        code, msg = EXIT_EMPTY, f"empty grid: {err}"
    except MetricError as err:
        code, msg = EXIT_USAGE, str(err)
    print(f"pseudosym: {msg}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
