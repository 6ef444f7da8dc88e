"""Charts, metric specifications, inversion, signature and sample grids."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import yaml

from . import expr as ex
from .expr import Expr, Evaluator

GRID_SEED = 20190417
DEGENERACY = 1e-10
LOCUS_TOL = 1e-8


class MetricError(Exception):
    pass


class DegenerateMetricError(MetricError):
    pass


class EmptyGridError(MetricError):
    pass


class MetricFileError(MetricError):
    pass


@dataclass(frozen=True)
class Chart:
    coordinates: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.coordinates)) != len(self.coordinates):
            raise MetricError(f"duplicate coordinate names in {self.coordinates}")
        if len(self.coordinates) < 2:
            raise MetricError("a chart needs at least two coordinates")

    @property
    def dimension(self) -> int:
        return len(self.coordinates)


@dataclass(frozen=True, eq=False)
class MetricSpec:
    """Symmetric matrix of component expressions on a chart.

    ``domain`` entries are expressions required to be positive;
    ``exceptional`` entries are expressions whose zero sets are excluded
    from sampling.  ``fixed`` gives values for coordinates the sample grid
    does not vary, and ``grid`` an optional default list of values per
    varied coordinate.
    """

    chart: Chart
    components: tuple[tuple[Expr, ...], ...]
    parameters: Mapping[str, float] = field(default_factory=dict)
    signature: tuple[int, int] | None = None
    domain: tuple[Expr, ...] = ()
    exceptional: tuple[Expr, ...] = ()
    name: str = "metric"
    fixed: Mapping[str, float] = field(default_factory=dict)
    grid: Mapping[str, tuple[float, ...]] = field(default_factory=dict)

    def __post_init__(self):
        n = self.chart.dimension
        if len(self.components) != n or any(len(row) != n for row in self.components):
            raise MetricError(f"component matrix must be {n}x{n}")
        for a in range(n):
            for b in range(a):
                if self.components[a][b] is not self.components[b][a]:
                    raise MetricError(f"components ({b + 1},{a + 1}) and ({a + 1},{b + 1}) differ")
        coords = set(self.chart.coordinates)
        for e in self.all_expressions():
            unknown = ex.free_symbols(e) - coords - set(self.parameters)
            if unknown:
                raise MetricError(f"undeclared symbols {sorted(unknown)} in {e}")

    @property
    def dimension(self) -> int:
        return self.chart.dimension

    @property
    def coordinates(self) -> tuple[str, ...]:
        return self.chart.coordinates

    def all_expressions(self):
        for row in self.components:
            yield from row
        yield from self.domain
        yield from self.exceptional

    def matrix(self) -> np.ndarray:
        n = self.dimension
        out = np.empty((n, n), dtype=object)
        for a in range(n):
            for b in range(n):
                out[a, b] = self.components[a][b]
        return out

    def is_diagonal(self) -> bool:
        n = self.dimension
        return all(ex.is_zero(self.components[a][b]) for a in range(n) for b in range(n) if a != b)

    def env(self, overrides: Mapping[str, float] | None = None) -> dict[str, float]:
        out = {k: float(v) for k, v in self.parameters.items()}
        for k, v in (overrides or {}).items():
            if k not in out:
                raise MetricError(f"unknown parameter {k!r} (declared: {sorted(out)})")
            out[k] = float(v)
        return out

    def scaled(self, factor: float) -> "MetricSpec":
        """The metric multiplied by a constant (used for scale checks)."""
        c = ex.num(factor)
        comps = tuple(tuple(c * e for e in row) for row in self.components)
        return MetricSpec(self.chart, comps, self.parameters, self.signature, self.domain,
                          self.exceptional, f"{self.name}*{factor:g}", self.fixed, self.grid)


def metric_from_entries(coordinates: Sequence[str], entries: Mapping[tuple[int, int], object],
                        **kwargs) -> MetricSpec:
    """Build a metric from 1-based ``{(a, b): expr}`` entries (symmetric completion)."""
    chart = Chart(tuple(coordinates))
    n = chart.dimension
    rows = [[ex.ZERO] * n for _ in range(n)]
    params = set(kwargs.get("parameters", {}))
    seen: dict[tuple[int, int], Expr] = {}
    for (a, b), value in entries.items():
        if isinstance(value, str):
            value = ex.parse(value, chart.coordinates, params)
        value = ex.as_expr(value)
        a0, b0 = sorted((a - 1, b - 1))
        if not (0 <= a0 and b0 < n):
            raise MetricError(f"component index ({a},{b}) out of range")
        if seen.get((a0, b0), value) is not value:
            raise MetricError(f"conflicting entries for ({a},{b}) and ({b},{a})")
        seen[(a0, b0)] = value
        rows[a0][b0] = value
        rows[b0][a0] = value
    return MetricSpec(chart, tuple(tuple(r) for r in rows), **kwargs)


# --------------------------------------------------------------------------
# symbolic inverse


def _det(m: list[list[Expr]]) -> Expr:
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    terms = []
    for j in range(n):
        if ex.is_zero(m[0][j]):
            continue
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        t = m[0][j] * _det(minor)
        terms.append(t if j % 2 == 0 else -t)
    return ex.total(terms)


def determinant(m: MetricSpec) -> Expr:
    return _det([list(row) for row in m.components])


def inverse_metric(m: MetricSpec) -> np.ndarray:
    """Symbolic g^{ab} as an (n, n) object array."""
    n = m.dimension
    g = m.matrix()
    inv = np.empty((n, n), dtype=object)
    if m.is_diagonal():
        for a in range(n):
            for b in range(n):
                inv[a, b] = ex.ZERO
            if ex.is_zero(ex.simplify(g[a, a])):
                raise DegenerateMetricError(f"diagonal entry {a + 1} is identically zero")
            inv[a, a] = ex.ONE / g[a, a]
        return inv
    det = determinant(m)
    if ex.is_zero(ex.simplify(det)):
        raise DegenerateMetricError("metric determinant is identically zero")
    rows = [list(r) for r in m.components]
    for a in range(n):
        for b in range(n):
            minor = [r[:a] + r[a + 1:] for i, r in enumerate(rows) if i != b]
            cof = _det(minor)
            inv[a, b] = (cof if (a + b) % 2 == 0 else -cof) / det
    return inv


# --------------------------------------------------------------------------
# pointwise queries


def numeric_matrix(m: MetricSpec, point: Mapping[str, float],
                   env: Mapping[str, float] | None = None) -> np.ndarray:
    values = dict(m.fixed)
    values.update(point)
    values.update(m.env(env))
    ev = Evaluator(values)
    n = m.dimension
    return np.array([[float(ev(m.components[a][b])) for b in range(n)] for a in range(n)])


def _degeneracy_scale(mat: np.ndarray) -> float:
    return float(np.max(np.abs(mat))) if mat.size else 0.0


def signature_at(m: MetricSpec, point: Mapping[str, float],
                 env: Mapping[str, float] | None = None) -> tuple[int, int]:
    """(number of negative, number of positive) eigenvalues at ``point``."""
    mat = numeric_matrix(m, point, env)
    if np.max(np.abs(mat - mat.T)) > 1e-12 * max(_degeneracy_scale(mat), 1.0):
        raise MetricError("numeric metric matrix is not symmetric")
    scale = _degeneracy_scale(mat)
    eig = np.linalg.eigvalsh(mat)
    if scale == 0 or np.min(np.abs(eig)) <= DEGENERACY * scale:
        raise DegenerateMetricError(f"metric degenerate at {dict(point)}")
    n = m.dimension
    if abs(np.linalg.det(mat)) <= DEGENERACY * scale**n:
        raise DegenerateMetricError(f"metric degenerate at {dict(point)}")
    neg = int(np.sum(eig < 0))
    return neg, n - neg


# --------------------------------------------------------------------------
# grids


@dataclass(frozen=True, eq=False)
class SampleGrid:
    """Sample points (rows of ``points`` follow ``coordinates``) plus tolerances."""

    coordinates: tuple[str, ...]
    points: np.ndarray
    env: Mapping[str, float]
    rel_tol: float = 1e-8
    abs_floor: float = 1e-12

    def __len__(self) -> int:
        return len(self.points)

    def bindings(self) -> dict[str, np.ndarray]:
        out = {c: self.points[:, i].copy() for i, c in enumerate(self.coordinates)}
        for k, v in self.env.items():
            out[k] = np.full(len(self.points), float(v))
        return out

    def point(self, i: int) -> dict[str, float]:
        return {c: float(self.points[i, j]) for j, c in enumerate(self.coordinates)}

    def describe(self) -> dict:
        return {
            "coordinates": list(self.coordinates),
            "points": [[float(x) for x in row] for row in self.points],
            "parameters": {k: float(v) for k, v in self.env.items()},
            "rel_tol": self.rel_tol,
            "abs_floor": self.abs_floor,
        }


def admissible(m: MetricSpec, values: Mapping[str, np.ndarray]) -> np.ndarray:
    """Mask of points inside the domain and off every exceptional locus."""
    ev = Evaluator(values)
    size = len(next(iter(values.values())))
    ok = np.ones(size, dtype=bool)
    for e in m.domain:
        try:
            ok &= np.broadcast_to(ev(e), (size,)) > 0
        except ex.DomainError:
            ok &= _pointwise_ok(e, values, lambda v: v > 0)
    for e in m.exceptional:
        try:
            ok &= np.abs(np.broadcast_to(ev(e), (size,))) > LOCUS_TOL
        except ex.DomainError:
            ok &= _pointwise_ok(e, values, lambda v: abs(v) > LOCUS_TOL)
    return ok


def _pointwise_ok(e: Expr, values, pred) -> np.ndarray:
    size = len(next(iter(values.values())))
    out = np.zeros(size, dtype=bool)
    for i in range(size):
        try:
            out[i] = pred(float(Evaluator({k: v[i] for k, v in values.items()})(e)))
        except ex.DomainError:
            out[i] = False
    return out


def _finish_grid(m: MetricSpec, pts: np.ndarray, env, rel_tol, abs_floor, strict: bool) -> SampleGrid:
    coords = m.coordinates
    if len(pts) == 0:
        raise EmptyGridError("no admissible grid points")
    values = {c: pts[:, i] for i, c in enumerate(coords)}
    values.update({k: np.full(len(pts), v) for k, v in env.items()})
    keep = admissible(m, values)
    pts = pts[keep]
    if len(pts) == 0:
        raise EmptyGridError("every requested point lies outside the domain or on an exceptional locus")
    good = []
    for row in pts:
        point = {c: float(v) for c, v in zip(coords, row)}
        try:
            sig = signature_at(m, point, env)
            good.append(row)
        except (DegenerateMetricError, ex.DomainError):
            if strict:
                raise DegenerateMetricError(f"metric degenerate at {point}") from None
            continue
        if m.signature is not None and sig != tuple(m.signature):
            raise MetricError(f"signature {sig} at {point} differs from declared {tuple(m.signature)}")
    if not good:
        raise DegenerateMetricError("metric degenerate at every admissible sample point")
    return SampleGrid(coords, np.array(good, dtype=float), env, rel_tol, abs_floor)


def make_grid(m: MetricSpec, axes: Mapping[str, Sequence[float]],
              params: Mapping[str, float] | None = None,
              rel_tol: float = 1e-8, abs_floor: float = 1e-12) -> SampleGrid:
    """Cartesian product of per-coordinate value lists.

    Coordinates missing from ``axes`` take ``m.fixed`` values (or 0).
    Inadmissible points are dropped; an empty result raises EmptyGridError.
    """
    env = m.env(params)
    for c in axes:
        if c not in m.coordinates:
            raise MetricError(f"unknown grid coordinate {c!r}")
    lists = [list(axes[c]) if c in axes else [float(m.fixed.get(c, 0.0))] for c in m.coordinates]
    pts = np.array(list(itertools.product(*lists)), dtype=float)
    return _finish_grid(m, pts, env, rel_tol, abs_floor, strict=True)


def default_grid(m: MetricSpec, params: Mapping[str, float] | None = None, *,
                 size: int = 8, seed: int = GRID_SEED, low: float = 0.3, high: float = 3.0,
                 rel_tol: float = 1e-8, abs_floor: float = 1e-12) -> SampleGrid:
    """Deterministic grid of at least ``size`` points.

    Uses the metric's declared ``grid`` when present; otherwise draws
    uniform points in ``[low, high]`` for every non-fixed coordinate from a
    generator seeded with ``seed`` (default :data:`GRID_SEED`).
    """
    if m.grid:
        return make_grid(m, m.grid, params, rel_tol, abs_floor)
    env = m.env(params)
    rng = np.random.default_rng(seed)
    free = [c for c in m.coordinates if c not in m.fixed]
    rows: list[np.ndarray] = []
    for _ in range(200):
        cand = np.empty((4 * size, m.dimension))
        for i, c in enumerate(m.coordinates):
            cand[:, i] = m.fixed[c] if c in m.fixed else rng.uniform(low, high, 4 * size)
        try:
            grid = _finish_grid(m, cand, env, rel_tol, abs_floor, strict=False)
        except EmptyGridError:
            continue
        rows.extend(grid.points)
        if len(rows) >= size:
            break
        if not free:
            break
    if not rows:
        raise EmptyGridError("could not find admissible sample points")
    pts = np.array(rows[:size])
    return SampleGrid(m.coordinates, pts, env, rel_tol, abs_floor)


def parse_grid_flag(text: str) -> tuple[str, list[float]]:
    """``r=0.5:4:8`` (linspace), ``r=2`` or ``r=1,1.5,2``."""
    if "=" not in text:
        raise MetricError(f"bad grid spec {text!r}")
    name, rng = text.split("=", 1)
    name = name.strip()
    try:
        if ":" in rng:
            start, stop, count = rng.split(":")
            return name, list(np.linspace(float(start), float(stop), int(count)))
        return name, [float(v) for v in rng.split(",")]
    except ValueError:
        raise MetricError(f"bad grid spec {text!r}") from None


# --------------------------------------------------------------------------
# metric-definition files

_COMPONENT = re.compile(r"^\s*(\d+)\s+(\d+)\s*:\s*(.+)$")
_COMPARE = re.compile(r"(>=|<=|>|<)")


def _predicate(text: str, coords, params) -> Expr:
    parts = _COMPARE.split(text)
    if len(parts) == 1:
        return ex.parse(text, coords, params)
    if len(parts) != 3:
        raise MetricFileError(f"bad domain predicate {text!r}")
    lhs = ex.parse(parts[0], coords, params)
    rhs = ex.parse(parts[2], coords, params)
    return lhs - rhs if parts[1] in (">", ">=") else rhs - lhs


def metric_from_dict(data: Mapping) -> MetricSpec:
    try:
        coords = tuple(str(c) for c in data["coordinates"])
        dim = int(data.get("dimension", len(coords)))
        if dim != len(coords):
            raise MetricFileError(f"dimension {dim} does not match {len(coords)} coordinates")
        params = {str(k): float(v) for k, v in (data.get("parameters") or {}).items()}
        entries = {}
        for line in data.get("components") or []:
            mt = _COMPONENT.match(str(line))
            if not mt:
                raise MetricFileError(f"bad component entry {line!r}")
            a, b = int(mt.group(1)), int(mt.group(2))
            entries[(a, b)] = ex.parse(mt.group(3), coords, params)
        sig = data.get("signature")
        sig = None if sig is None else (int(sig[0]), int(sig[1]))
        domain = tuple(_predicate(str(d), coords, params) for d in data.get("domain") or [])
        excep = tuple(ex.parse(str(d), coords, params) for d in data.get("exceptional") or [])
        fixed = {str(k): float(v) for k, v in (data.get("fixed") or {}).items()}
        grid = {str(k): tuple(float(x) for x in v) for k, v in (data.get("grid") or {}).items()}
        name = str(data.get("name", "metric"))
    except (KeyError, TypeError, ValueError) as err:
        raise MetricFileError(f"malformed metric definition: {err}") from err
    return metric_from_entries(coords, entries, parameters=params, signature=sig, domain=domain,
                               exceptional=excep, name=name, fixed=fixed, grid=grid)


def metric_to_dict(m: MetricSpec) -> dict:
    n = m.dimension
    comps = [f"{a + 1} {b + 1} : {ex.to_string(m.components[a][b])}"
             for a in range(n) for b in range(a, n) if not ex.is_zero(m.components[a][b])]
    out = {
        "name": m.name,
        "dimension": n,
        "coordinates": list(m.coordinates),
        "signature": list(m.signature) if m.signature else None,
        "parameters": {k: float(v) for k, v in m.parameters.items()},
        "components": comps,
        "domain": [f"{ex.to_string(e)} > 0" for e in m.domain],
        "exceptional": [ex.to_string(e) for e in m.exceptional],
    }
    if m.fixed:
        out["fixed"] = {k: float(v) for k, v in m.fixed.items()}
    if m.grid:
        out["grid"] = {k: [float(x) for x in v] for k, v in m.grid.items()}
    return out


def load_metric(path: str | Path) -> MetricSpec:
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as err:
        raise MetricFileError(f"{path}: {err}") from err
    if not isinstance(data, Mapping):
        raise MetricFileError(f"{path}: expected a mapping at top level")
    return metric_from_dict(data)


def dump_metric(m: MetricSpec) -> str:
    return yaml.safe_dump(metric_to_dict(m), sort_keys=False)
