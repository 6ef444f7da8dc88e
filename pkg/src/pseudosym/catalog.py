"""Built-in metrics with their exceptional loci and golden component tables.

Golden expressions are written in the expression language over ``r`` and
the symbols ``f, fp, fpp, fppp`` (the warp exponent and its first three
r-derivatives), plus ``B0`` for the Melvin entry.  Indices are 1-based in
the chart order (t, r, z, phi).  Entries whose printed value is known to
be wrong carry a ``status`` other than ``exact`` and, where it exists, the
corrected expression; they are reported as DISPUTED rather than silently
fixed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from . import expr as ex
from .curvature import TensorField
from .expr import Evaluator, Expr
from .metric import MetricSpec, SampleGrid, metric_from_entries

MELVIN_RADII = (0.5, 0.8, 1.0, 1.3, 1.7, 2.5, 3.0, 4.0)
FIXED = {"t": 0.0, "z": 0.0, "phi": 0.0}
GOLDEN_SYMBOLS = ("f", "fp", "fpp", "fppp", "r", "B0")


@dataclass(frozen=True)
class GoldenEntry:
    tensor: str
    index: tuple[int, ...]
    printed: str
    status: str = "exact"  # exact | sign | typo
    corrected: str | None = None
    note: str = ""

    def label(self) -> str:
        return f"{self.tensor}_{''.join(map(str, self.index))}" if self.index else self.tensor


@dataclass(frozen=True, eq=False)
class CatalogEntry:
    name: str
    metric: MetricSpec
    warp: Expr | None = None
    fields: Mapping[str, TensorField] = field(default_factory=dict)
    golden: tuple[GoldenEntry, ...] = ()
    notes: str = ""


def _g(tensor, index, printed, status="exact", corrected=None, note=""):
    return GoldenEntry(tensor, tuple(int(c) for c in index), printed, status, corrected, note)


# components of the Melvin-type metric, written in terms of f and its derivatives
_C1212 = "exp(2*f)/(3*r)*(r*fpp - 2*r*fp^2 + 2*fp)"
_X = "(2*fp - 2*r*fp^2 + r*fpp)"
_DC = "2*exp(2*f)/(3*r^2)*(2*r*fp*(2*fp - 2*r*fp^2 + 3*r*fpp) + (2*fp - 2*r*fpp - r^2*fppp))"
_HC = "exp(2*f)/r*fp*(2*fp - 2*r*fp^2 + r*fpp)"
_CC = f"exp(-2*f)/3*{_X}^2"
_QSR1 = "(fp^3*(3 - 2*r*fp) + fpp*(fp - r*fp + r*fpp))"
_QSR1C = "(fp^3*(3 - 2*r*fp) + fpp*(fp - r*fp^2 + r*fpp))"
_TRACE = "printed relation is not trace-free; the trace-free completion of C1212, C2323 is given"
_WPS = "sign must follow C.C, which is proportional to Q(g,C)"
_SQ = "the middle term of the second bracket is r f'^2, not r f'"
_QSR2 = "(fp^3*(3 - 2*r*fp) + fpp*(5*fp - 3*r*fp^2 + r*fpp))"

WARPED_GOLDEN: tuple[GoldenEntry, ...] = (
    _g("R", "1313", "exp(2*f)*fp^2"),
    _g("R", "1212", "exp(2*f)*fpp"),
    _g("R", "2323", "-exp(2*f)*fpp"),
    _g("R", "1414", "exp(-2*f)*r*fp*(1 - r*fp)"),
    _g("R", "3434", "-exp(-2*f)*r*fp*(1 - r*fp)"),
    _g("R", "2424", "exp(-2*f)*r*(3*fp - 2*r*fp^2 + r*fpp)"),
    _g("S", "11", "-(fp + r*fpp)/r"),
    _g("S", "33", "(fp + r*fpp)/r"),
    _g("S", "22", "-(3*fp - 2*r*fp^2 - r*fpp)/r"),
    _g("S", "44", "exp(-4*f)*r*(fp + r*fpp)", "sign", "-exp(-4*f)*r*(fp + r*fpp)",
       "printed sign disagrees with the trace-free pattern of S11, S22, S33"),
    _g("kappa", "", "2*exp(-2*f)/r*(r*fpp + r*fp^2 - fp)"),
    _g("C", "1212", _C1212),
    _g("C", "1313", f"-({_C1212})/2", "typo", f"-2*{_C1212}", _TRACE),
    _g("C", "1414", f"r^2*exp(4*f)*{_C1212}", "typo", f"r^2*exp(-4*f)*{_C1212}", _TRACE),
    _g("C", "2323", f"-({_C1212})"),
    _g("C", "2424", f"r^2*exp(4*f)*{_C1212}/2", "typo", f"2*r^2*exp(-4*f)*{_C1212}", _TRACE),
    _g("C", "3434", f"-r^2*exp(4*f)*{_C1212}", "typo", f"-r^2*exp(-4*f)*{_C1212}", _TRACE),
    _g("nablaC", "13132", _DC),
    _g("nablaC", "12122", f"-({_DC})/2"),
    _g("nablaC", "14142", f"-r^2*exp(-4*f)*({_DC})/2"),
    _g("nablaC", "23232", f"({_DC})/2"),
    _g("nablaC", "24243", f"-exp(-4*f)*({_DC})/2", "typo", "0",
       "a z-derivative of a z-independent component with no connection terms vanishes"),
    _g("nablaC", "34342", f"-exp(-4*f)*({_DC})", "typo", f"r^2*exp(-4*f)*({_DC})/2",
       "C3434 = -C1414 and the connection terms agree, so C3434,2 = -C1414,2"),
    _g("nablaC", "12133", _HC),
    _g("nablaC", "13231", _HC),
    _g("nablaC", "14241", f"-r^2*exp(-4*f)*{_HC}"),
    _g("nablaC", "24343", f"r^2*exp(-4*f)*{_HC}"),
    _g("RdotR", "132312", "-exp(2*f)*fpp*(fp^2 - fpp)"),
    _g("RdotR", "121323", "exp(2*f)*fpp*(fp^2 - fpp)"),
    _g("RdotR", "142412", "-exp(-2*f)*r*fpp*(4*fp - 3*r*fp^2 + r*fpp)"),
    _g("RdotR", "243423", "-exp(-2*f)*r*fpp*(4*fp - 3*r*fp^2 + r*fpp)"),
    _g("RdotR", "133414", "-exp(-2*f)*fp^2*(1 - r*fp)*(1 - 2*r*fp)"),
    _g("RdotR", "131434", "exp(-2*f)*fp^2*(1 - r*fp)*(1 - 2*r*fp)"),
    _g("RdotR", "122414", "exp(-2*f)*fp*(1 - r*fp)*(3*fp - 2*r*fp^2 + 2*r*fpp)"),
    _g("RdotR", "232434", "exp(-2*f)*fp*(1 - r*fp)*(3*fp - 2*r*fp^2 + 2*r*fpp)"),
    _g("RdotR", "121424", "-exp(-2*f)*(3*fp - 2*r*fp^2 + r*fpp)*(fp - r*fp^2 - r*fpp)"),
    _g("RdotR", "233424", "-exp(-2*f)*(3*fp - 2*r*fp^2 + r*fpp)*(fp - r*fp^2 - r*fpp)"),
    _g("QgR", "132312", "-exp(4*f)*(fp^2 - fpp)"),
    _g("QgR", "121323", "exp(4*f)*(fp^2 - fpp)"),
    _g("QgR", "142412", "-r*(4*fp - 3*r*fp^2 + r*fpp)"),
    _g("QgR", "243423", "-r*(4*fp - 3*r*fp^2 + r*fpp)"),
    _g("QgR", "133414", "-r*fp*(1 - 2*r*fp)"),
    _g("QgR", "131434", "-r*fp*(1 - 2*r*fp)", "typo", "r*fp*(1 - 2*r*fp)",
       "sign must follow R.R, which is proportional to Q(g,R)"),
    _g("QgR", "122414", "r*(3*fp - 2*r*fp^2 + 2*r*fpp)"),
    _g("QgR", "232434", "r*(3*fp - 2*r*fp^2 + 2*r*fpp)"),
    _g("QgR", "121424", "r*(fp - r*fp^2 - r*fpp)"),
    _g("QgR", "233424", "r*(fp - r*fp^2 - r*fpp)"),
    _g("CdotC", "132312", f"exp(4*f)/r^2*{_CC}"),
    _g("CdotC", "142412", f"-{_CC}"),
    _g("CdotC", "122414", _CC),
    _g("CdotC", "133414", f"-{_CC}"),
    _g("CdotC", "121323", f"-exp(4*f)/r^2*{_CC}"),
    _g("CdotC", "243423", f"-{_CC}"),
    _g("CdotC", "131434", _CC),
    _g("CdotC", "232434", _CC),
    _g("QgC", "132312", f"exp(4*f)/r*{_X}"),
    _g("QgC", "142412", f"-r*{_X}"),
    _g("QgC", "121323", f"-exp(4*f)/r*{_X}"),
    _g("QgC", "133414", f"r*{_X}", "typo", f"-r*{_X}", _WPS),
    _g("QgC", "122414", f"-r*{_X}", "typo", f"r*{_X}", _WPS),
    _g("QgC", "131434", f"-r*{_X}", "typo", f"r*{_X}", _WPS),
    _g("QgC", "243423", f"r*{_X}", "typo", f"-r*{_X}", _WPS),
    _g("QgC", "232434", f"-r*{_X}", "typo", f"r*{_X}", _WPS),
    _g("QSR", "132312", f"exp(2*f)/r*{_QSR1}", "typo", f"exp(2*f)/r*{_QSR1C}", _SQ),
    _g("QSR", "121323", f"-exp(2*f)/r*{_QSR1}", "typo", f"-exp(2*f)/r*{_QSR1C}", _SQ),
    _g("QSR", "142412", f"-exp(-2*f)*r*{_QSR2}"),
    _g("QSR", "243423", f"-exp(-2*f)*r*{_QSR2}"),
    _g("QSR", "133414", "exp(-2*f)*fp*(fp + r*fpp)", "typo", "-exp(-2*f)*fp*(fp + r*fpp)",
       "direct expansion gives S11 R1414 + S44 R1313 = -exp(-2f) f'(f' + r f'')"),
    _g("QSR", "131434", "-exp(-2*f)*fp*(fp + r*fpp)", "typo", "exp(-2*f)*fp*(fp + r*fpp)"),
    _g("QSR", "122414", "exp(-2*f)*fp*(3 - 2*r*fp)*(fp + r*fpp)"),
    _g("QSR", "232434", "exp(-2*f)*fp*(3 - 2*r*fp)*(fp + r*fpp)"),
    _g("QSR", "121424", "-exp(-2*f)*(3*fp - 2*r*fp^2 + r*fpp)*(fp - r*fp^2 - r*fpp)"),
    _g("QSR", "233424", "-exp(-2*f)*(3*fp - 2*r*fp^2 + r*fpp)*(fp - r*fp^2 - r*fpp)"),
)

BASE_GOLDEN: tuple[GoldenEntry, ...] = (
    _g("R", "1212", "exp(2*f)*fpp"),
    _g("R", "2323", "-exp(2*f)*fpp"),
    _g("R", "1313", "exp(2*f)*fp^2"),
    _g("S", "11", "-(fp^2 + fpp)"),
    _g("S", "33", "fp^2 + fpp"),
    _g("S", "22", "2*fpp"),
    _g("kappa", "", "2*exp(-2*f)*(fp^2 + 2*fpp)"),
    _g("K", "1212", "-exp(2*f)*(fp^2 + 2*fpp)"),
    _g("K", "1313", "-exp(2*f)*(fp^2 + 2*fpp)"),
    _g("K", "2323", "exp(2*f)*(fp^2 + 2*fpp)"),
    _g("nablaK", "12122", "2*exp(2*f)*(fp^3 + fp*fpp - fppp)"),
    _g("nablaK", "13132", "2*exp(2*f)*(fp^3 + fp*fpp - fppp)"),
    _g("nablaK", "23232", "-2*exp(2*f)*(fp^3 + fp*fpp - fppp)"),
    _g("RdotR", "132312", "-exp(2*f)*fpp*(fp^2 - fpp)"),
    _g("RdotR", "121323", "exp(2*f)*fpp*(fp^2 - fpp)"),
    _g("QgR", "132312", "-exp(4*f)*(fp^2 - fpp)"),
    _g("QgR", "121323", "exp(4*f)*(fp^2 - fpp)"),
)

_W = "(4 + B0^2*r^2)"
MAXWELL_GOLDEN: tuple[GoldenEntry, ...] = (
    _g("F", "24", f"8*B0*r/{_W}^2"),
    _g("F", "42", f"-8*B0*r/{_W}^2"),
    _g("RdotF", "1412", f"-16*B0^3*r*(4 - B0^2*r^2)/{_W}", "typo",
       f"-16*B0^3*r*(4 - B0^2*r^2)/{_W}^4",
       "printed denominator lacks the fourth power required by R.F = L_F Q(g,F)"),
    _g("RdotF", "1214", f"16*B0^3*r*(4 - B0^2*r^2)/{_W}", "typo",
       f"16*B0^3*r*(4 - B0^2*r^2)/{_W}^4"),
    _g("RdotF", "3423", f"-16*B0^3*r*(4 - B0^2*r^2)/{_W}", "typo",
       f"-16*B0^3*r*(4 - B0^2*r^2)/{_W}^4"),
    _g("RdotF", "2334", f"16*B0^3*r*(4 - B0^2*r^2)/{_W}", "typo",
       f"16*B0^3*r*(4 - B0^2*r^2)/{_W}^4"),
    _g("QgF", "1214", "B0*r/2"),
    _g("QgF", "1412", "-B0*r/2"),
    _g("QgF", "2334", "B0*r/2"),
    _g("QgF", "3423", "-B0*r/2"),
)


# --------------------------------------------------------------------------
# metrics

COORDS = ("t", "r", "z", "phi")


def _warp_expr(f) -> Expr:
    if isinstance(f, str):
        f = ex.parse(f, ("r",), ("B0",))
    f = ex.as_expr(f)
    extra = ex.free_symbols(f) - {"r", "B0"}
    if extra:
        raise ValueError(f"warp function may depend on r (and B0) only, got {sorted(extra)}")
    return f


def _warp_loci(f: Expr) -> tuple[Expr, ...]:
    r = ex.sym("r")
    fp = ex.differentiate(f, "r")
    fpp = ex.differentiate(fp, "r")
    # rf'' - 2rf'^2 + 2f' vanishes exactly where the Weyl tensor does
    return (r * fpp - ex.num(2) * r * fp * fp + ex.num(2) * fp,)


def melvin_type(f, name: str | None = None, params: Mapping[str, float] | None = None,
                exceptional: bool = True) -> CatalogEntry:
    """ds^2 = e^{2f(r)}(-dt^2 + dr^2 + dz^2) + r^2 e^{-2f(r)} dphi^2."""
    f = _warp_expr(f)
    r = ex.sym("r")
    e2 = ex.exp(ex.num(2) * f)
    em2 = ex.exp(ex.num(-2) * f)
    params = dict(params or ({"B0": 1.0} if "B0" in ex.free_symbols(f) else {}))
    m = metric_from_entries(COORDS, {(1, 1): -e2, (2, 2): e2, (3, 3): e2, (4, 4): r * r * em2},
                            parameters=params, signature=(1, 3), domain=(r,),
                            exceptional=_warp_loci(f) if exceptional else (),
                            name=name or f"melvin_type[{ex.to_string(f)}]",
                            fixed=FIXED, grid={"r": MELVIN_RADII})
    return CatalogEntry(m.name, m, warp=f, golden=WARPED_GOLDEN)


def melvin(B0: float = 1.0) -> CatalogEntry:
    """The Melvin magnetic universe with U = 1 + B0^2 r^2 / 4 and its Maxwell field."""
    if B0 < 0:
        raise ValueError("B0 must be non-negative")
    coords, params = COORDS, ("B0",)
    U = ex.parse("1 + B0^2*r^2/4", coords, params)
    r = ex.sym("r")
    m = metric_from_entries(
        coords,
        {(1, 1): -(U * U), (2, 2): U * U, (3, 3): U * U, (4, 4): r * r / (U * U)},
        parameters={"B0": float(B0)}, signature=(1, 3), domain=(r,),
        exceptional=(ex.parse("4 - B0^2*r^2", coords, params),),
        name="melvin", fixed=FIXED, grid={"r": MELVIN_RADII})
    F = np.empty((4, 4), dtype=object)
    F.fill(ex.ZERO)
    f24 = ex.parse("8*B0*r/(4 + B0^2*r^2)^2", coords, params)
    F[1, 3] = f24
    F[3, 1] = -f24
    warp = ex.parse("ln(1 + B0^2*r^2/4)", ("r",), params)
    return CatalogEntry("melvin", m, warp=warp, fields={"F": TensorField("F", F, "antisymmetric-pair")},
                        golden=WARPED_GOLDEN + MAXWELL_GOLDEN)


def conformally_flat_example() -> CatalogEntry:
    """f = 1/2 ln(r/(r+2)): the Weyl tensor vanishes, so its locus is not excluded."""
    return melvin_type("0.5*ln(r/(r+2))", name="conformally_flat_example", exceptional=False)


def pseudosymmetric_example() -> CatalogEntry:
    """f = ln(1+r^2), which solves r f'' + r f'^2 - f' = 0."""
    return melvin_type("ln(1+r^2)", name="pseudosymmetric_example")


def base_3metric(f) -> CatalogEntry:
    """-g_11 = g_22 = g_33 = e^{2f(r)} on (t, r, z)."""
    f = _warp_expr(f)
    r = ex.sym("r")
    e2 = ex.exp(ex.num(2) * f)
    fp = ex.differentiate(f, "r")
    fpp = ex.differentiate(fp, "r")
    params = {"B0": 1.0} if "B0" in ex.free_symbols(f) else {}
    m = metric_from_entries(("t", "r", "z"), {(1, 1): -e2, (2, 2): e2, (3, 3): e2},
                            parameters=params, signature=(1, 2), domain=(r,),
                            exceptional=(fp * fp + ex.num(2) * fpp,),
                            name=f"base3[{ex.to_string(f)}]", fixed={"t": 0.0, "z": 0.0},
                            grid={"r": MELVIN_RADII})
    return CatalogEntry(m.name, m, warp=f, golden=BASE_GOLDEN)


def minkowski_cylindrical() -> CatalogEntry:
    r = ex.sym("r")
    m = metric_from_entries(COORDS, {(1, 1): -1.0, (2, 2): 1.0, (3, 3): 1.0, (4, 4): r * r},
                            signature=(1, 3), domain=(r,), name="minkowski", fixed=FIXED,
                            grid={"r": MELVIN_RADII})
    return CatalogEntry("minkowski", m)


BUILTIN: dict[str, Callable[..., CatalogEntry]] = {
    "melvin": melvin,
    "minkowski": minkowski_cylindrical,
    "conformally_flat_example": conformally_flat_example,
    "pseudosymmetric_example": pseudosymmetric_example,
}


def lookup(name: str, params: Mapping[str, float] | None = None) -> CatalogEntry:
    """Catalog entry by name; ``melvin_type:<f>`` and ``base3:<f>`` take a warp expression."""
    params = dict(params or {})
    if name.startswith("melvin_type:"):
        return melvin_type(name.split(":", 1)[1])
    if name.startswith("base3:"):
        return base_3metric(name.split(":", 1)[1])
    if name not in BUILTIN:
        raise KeyError(f"unknown catalog metric {name!r}; known: {sorted(BUILTIN)}, melvin_type:<f>, base3:<f>")
    if name == "melvin":
        return melvin(params.get("B0", 1.0))
    return BUILTIN[name]()


# --------------------------------------------------------------------------
# golden comparison


def warp_bindings(entry: CatalogEntry, grid: SampleGrid) -> dict[str, np.ndarray]:
    """f, f', f'', f''' and r (and B0) sampled on the grid."""
    vals = grid.bindings()
    ev = Evaluator(vals)
    out = {"r": vals["r"]}
    if "B0" in vals:
        out["B0"] = vals["B0"]
    if entry.warp is not None:
        d = entry.warp
        for key in ("f", "fp", "fpp", "fppp"):
            out[key] = ev.full(d)
            d = ex.differentiate(d, "r")
    return out


@dataclass
class GoldenResult:
    entry: GoldenEntry
    status: str  # PASS | DISPUTED | FAIL
    max_rel_error: float
    engine: list[float]
    printed: list[float]
    detail: str = ""


def _rel_err(a: np.ndarray, b: np.ndarray, scale: float) -> float:
    denom = np.maximum(np.abs(b), scale)
    return float(np.max(np.abs(a - b) / denom))


# scalars are judged against the size of the tensor they are traced from
SCALE_SOURCE = {"kappa": "S"}


def golden_check(entry: CatalogEntry, grid: SampleGrid, lookup_tensor: Callable[[str], np.ndarray],
                 rel_tol: float = 1e-10) -> list[GoldenResult]:
    """Compare every golden entry with engine values at every grid point.

    ``lookup_tensor(name)`` returns the engine tensor sampled on ``grid``
    (shape ``(points, n, ..., n)``).  Errors are relative to the larger of
    the printed value and the tensor's own max-norm at that point, so a
    component that is exactly zero is judged against the tensor scale.
    """
    ev = Evaluator(warp_bindings(entry, grid))
    results = []
    for g in entry.golden:
        arr = lookup_tensor(g.tensor)
        idx = tuple(i - 1 for i in g.index)
        engine = arr[(slice(None),) + idx] if idx else arr
        engine = np.asarray(engine, dtype=float).reshape(len(grid))
        scale_src = lookup_tensor(SCALE_SOURCE[g.tensor]) if g.tensor in SCALE_SOURCE else arr
        scale_pts = np.abs(scale_src).reshape(len(grid), -1).max(axis=1)
        scale = np.maximum(scale_pts, 1e-300)
        printed = ev.full(ex.parse(g.printed, parameters=GOLDEN_SYMBOLS))
        err = _rel_err(engine, printed, 0.0) if np.all(printed != 0) else \
            float(np.max(np.abs(engine - printed) / np.maximum(np.abs(printed), scale)))
        if g.status == "exact":
            status = "PASS" if err <= rel_tol else "FAIL"
            detail = ""
        elif g.status == "sign":
            mag = float(np.max(np.abs(np.abs(engine) - np.abs(printed)) / np.maximum(np.abs(printed), scale)))
            flipped = bool(np.all(np.sign(engine) == -np.sign(printed)))
            status = "DISPUTED" if mag <= rel_tol and flipped else ("PASS" if err <= rel_tol else "FAIL")
            detail = f"magnitude error {mag:.2e}; sign {'opposite to' if flipped else 'as'} printed"
        else:
            corr = ev.full(ex.parse(g.corrected, parameters=GOLDEN_SYMBOLS)) if g.corrected else None
            cerr = float(np.max(np.abs(engine - corr) / np.maximum(np.abs(corr), scale))) if corr is not None else np.inf
            if err <= rel_tol:
                status = "PASS"
            elif cerr <= rel_tol:
                status = "DISPUTED"
            else:
                status = "FAIL"
            detail = f"corrected form error {cerr:.2e}"
        results.append(GoldenResult(g, status, err, engine.tolist(), printed.tolist(), detail))
    return results
