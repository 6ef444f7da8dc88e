"""Pointwise structure detectors on sampled curvature.

Every detector works on a :class:`~pseudosym.numeric.Sampled` view and
returns a verdict in ``{holds, fails, vacuous}`` (some add
``not-applicable``) together with fitted coefficient functions, one value
per grid point.  Residuals are relative, so verdicts do not depend on an
overall constant rescaling of the metric.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .curvature import Geometry
from .metric import MetricSpec, SampleGrid
from .numeric import Sampled
from .operators import kulkarni_nomizu

HOLDS, FAILS, VACUOUS, NOT_APPLICABLE = "holds", "fails", "vacuous", "not-applicable"


@dataclass(frozen=True)
class Tolerance:
    rel: float = 1e-8
    abs_floor: float = 1e-12

    @property
    def rank(self) -> float:
        """Singular-value cutoff for least squares; loosening ``rel`` never coarsens it."""
        return min(self.rel, RANK_REL)


RANK_REL = 1e-8
DEFAULT_TOL = Tolerance()


@dataclass
class FitResult:
    """Outcome of fitting ``L`` as a pointwise linear combination of basis tensors."""

    name: str
    verdict: str
    labels: tuple[str, ...]
    coefficients: np.ndarray  # (points, len(labels)); nan where a point is vacuous
    residuals: np.ndarray  # (points,)
    point_verdicts: tuple[str, ...]
    nullity: np.ndarray  # (points,) dimension of the coefficient solution space
    worst_point: int | None = None
    worst_index: tuple[int, ...] | None = None

    def coefficient(self, label: str | int = 0) -> np.ndarray:
        i = self.labels.index(label) if isinstance(label, str) else label
        return self.coefficients[:, i]

    @property
    def max_residual(self) -> float:
        live = [r for r, v in zip(self.residuals, self.point_verdicts) if v != VACUOUS]
        return float(max(live)) if live else 0.0


@dataclass
class CovectorFit:
    """Fitted 1-forms (one or several, each with n components) per point."""

    name: str
    verdict: str
    covectors: dict[str, np.ndarray]  # label -> (points, n)
    residuals: np.ndarray
    point_verdicts: tuple[str, ...]
    nullity: np.ndarray
    worst_point: int | None = None
    worst_index: tuple[int, ...] | None = None

    @property
    def max_residual(self) -> float:
        live = [r for r, v in zip(self.residuals, self.point_verdicts) if v != VACUOUS]
        return float(max(live)) if live else 0.0


@dataclass
class CheckResult:
    """An identity ``X = 0`` (or ``X = Y``) tested pointwise."""

    name: str
    verdict: str
    residuals: np.ndarray
    point_verdicts: tuple[str, ...]
    worst_point: int | None = None
    worst_index: tuple[int, ...] | None = None

    @property
    def max_residual(self) -> float:
        live = [r for r, v in zip(self.residuals, self.point_verdicts) if v != VACUOUS]
        return float(max(live)) if live else 0.0


def aggregate(point_verdicts: Sequence[str]) -> str:
    if any(v == FAILS for v in point_verdicts):
        return FAILS
    if all(v == VACUOUS for v in point_verdicts):
        return VACUOUS
    return HOLDS


def _norm(x: np.ndarray) -> float:
    return float(np.linalg.norm(x))


def _solve(A: np.ndarray, b: np.ndarray, rel: float) -> tuple[np.ndarray, int]:
    """Least squares with column scaling; minimal-norm in the scaled coordinates.

    Returns the solution and the dimension of the solution space, read off
    the singular values below ``rel * sigma_max``.
    """
    m = A.shape[1]
    norms = np.linalg.norm(A, axis=0)
    live = norms > 0
    x = np.zeros(m)
    if not live.any():
        return x, m
    An = A[:, live] / norms[live]
    u, s, vt = np.linalg.svd(An, full_matrices=False)
    keep = s > rel * s[0]
    y = vt[keep].T @ ((u[:, keep].T @ b) / s[keep])
    x[live] = y / norms[live]
    return x, int(m - keep.sum())


def _worst(diff: np.ndarray, shape: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(int(i) for i in np.unravel_index(int(np.argmax(np.abs(diff))), shape))


# --------------------------------------------------------------------------
# coefficient fits


def fit_combination(name: str, L: np.ndarray, basis: Mapping[str, np.ndarray],
                    tol: Tolerance = DEFAULT_TOL, rows: np.ndarray | None = None) -> FitResult:
    """Fit ``L = sum_k c_k B_k`` independently at every point.

    Arrays carry a leading point axis.  ``rows`` optionally selects which
    flattened components enter the fit (e.g. independent Riemann slots).
    A point holds when ``|L - sum c B| <= rel * max(|L|, |sum c B|)``; it is
    vacuous when L and every basis tensor are below the absolute floor and
    fails when only the basis vanishes.
    """
    L = np.asarray(L, dtype=float)
    labels = tuple(basis)
    Bs = [np.asarray(basis[k], dtype=float) for k in labels]
    P = L.shape[0]
    for B in Bs:
        if B.shape != L.shape:
            raise ValueError(f"{name}: basis tensor shape {B.shape} does not match {L.shape}")
    comp_shape = L.shape[1:]
    coeffs = np.full((P, len(labels)), np.nan)
    res = np.zeros(P)
    nullity = np.zeros(P, dtype=int)
    verdicts = []
    worst = (None, None, -1.0)
    for p in range(P):
        b = L[p].reshape(-1)
        A = np.stack([B[p].reshape(-1) for B in Bs], axis=1)
        if rows is not None:
            b, A = b[rows], A[rows]
        nL = _norm(b)
        nB = max(_norm(A[:, k]) for k in range(A.shape[1]))
        if nL <= tol.abs_floor and nB <= tol.abs_floor:
            verdicts.append(VACUOUS)
            nullity[p] = len(labels)
            continue
        if nB <= tol.abs_floor:
            coeffs[p] = 0.0
            res[p] = 1.0
            nullity[p] = len(labels)
            verdicts.append(FAILS)
            diff = b
        else:
            x, nullity[p] = _solve(A, b, tol.rank)
            coeffs[p] = x
            fit = A @ x
            diff = b - fit
            scale = max(nL, _norm(fit))
            res[p] = _norm(diff) / scale if scale > tol.abs_floor else 0.0
            verdicts.append(HOLDS if res[p] <= tol.rel else FAILS)
        if res[p] > worst[2]:
            if rows is None:
                idx = _worst(diff, comp_shape)
            else:
                idx = _worst_rows(diff, rows, comp_shape)
            worst = (p, idx, res[p])
    return FitResult(name, aggregate(verdicts), labels, coeffs, res, tuple(verdicts), nullity,
                     worst[0], worst[1])


def _worst_rows(diff, rows, shape):
    flat = int(np.asarray(rows)[int(np.argmax(np.abs(diff)))])
    return tuple(int(i) for i in np.unravel_index(flat, shape))


def fit_proportionality(L: np.ndarray, Rside: np.ndarray, tol: Tolerance = DEFAULT_TOL,
                        name: str = "fit") -> FitResult:
    """Fit ``L = c * Rside`` per point; ``c = <L,R>/<R,R>`` (Frobenius)."""
    return fit_combination(name, L, {"L": Rside}, tol)


def check_identity(name: str, X: np.ndarray, Y: np.ndarray | None = None,
                   tol: Tolerance = DEFAULT_TOL, scale: np.ndarray | None = None) -> CheckResult:
    """Test ``X = Y`` (or ``X = 0``) per point.

    The residual is ``|X - Y| / max(|X|, |Y|)``; for ``X = 0`` a per-point
    ``scale`` must be supplied (the natural size of X's ingredients).
    Points where every participant is below the absolute floor are vacuous.
    """
    X = np.asarray(X, dtype=float)
    P = X.shape[0]
    res = np.zeros(P)
    verdicts = []
    worst = (None, None, -1.0)
    for p in range(P):
        x = X[p]
        diff = x if Y is None else x - Y[p]
        ref = max(_norm(x), 0.0 if Y is None else _norm(Y[p]))
        if scale is not None:
            ref = max(ref, float(scale[p]))
        if ref <= tol.abs_floor:
            verdicts.append(VACUOUS)
            continue
        res[p] = _norm(diff) / ref
        verdicts.append(HOLDS if res[p] <= tol.rel else FAILS)
        if res[p] > worst[2]:
            worst = (p, _worst(diff, x.shape), res[p])
    return CheckResult(name, aggregate(verdicts), res, tuple(verdicts), worst[0], worst[1])


def _size(arr: np.ndarray) -> np.ndarray:
    return np.linalg.norm(np.asarray(arr).reshape(arr.shape[0], -1), axis=1)


# --------------------------------------------------------------------------
# pseudosymmetry family

ACTING = ("R", "C", "W", "K")
ACTED = ("R", "S", "C", "W", "K")


def pseudosymmetry(s: Sampled, A: str, T: str, B: str = "g", tol: Tolerance = DEFAULT_TOL) -> FitResult:
    """Fit ``A.T = L_T Q(B, T)``."""
    return fit_proportionality(s[f"{A}dot{T}"], s[f"Q{B}{T}"], tol, name=f"{A}.{T} ~ Q({B},{T})")


def semisymmetry(s: Sampled, A: str, T: str, tol: Tolerance = DEFAULT_TOL) -> CheckResult:
    """``A.T = 0`` judged against ``|g^-1| |A| |T|``."""
    scale = _size(s["ginv"]) * _size(s[A]) * _size(s[T])
    X = s[f"{A}dot{T}"]
    res = check_identity(f"{A}.{T} = 0", X, None, tol, scale)
    # vacuous only when one factor vanishes, not when the product happens to
    return res


def pseudosymmetry_suite(s: Sampled, tol: Tolerance = DEFAULT_TOL) -> dict[str, dict[str, object]]:
    out = {}
    for A in ACTING:
        for T in ACTED:
            out[f"{A}.{T}"] = {"pseudosymmetric": pseudosymmetry(s, A, T, "g", tol),
                               "semisymmetric": semisymmetry(s, A, T, tol)}
    return out


def mixed_condition_suite(s: Sampled, tol: Tolerance = DEFAULT_TOL) -> dict[str, object]:
    """The compound conditions built from R.R, C.R, R.C, Q(S,R), Q(S,C), Q(g,C)."""
    comm = s["CdotR"] - s["RdotC"]
    return {
        "R.R - Q(S,R) ~ Q(g,C)": fit_combination("R.R - Q(S,R) ~ Q(g,C)", s["RdotR"] - s["QSR"],
                                                {"L": s["QgC"]}, tol),
        "Q(S,C) = C.R - R.C": check_identity("Q(S,C) = C.R - R.C", s["QSC"], comm, tol),
        "C.R - R.C ~ Q(g,R) + Q(S,R)": fit_combination("C.R - R.C ~ Q(g,R) + Q(S,R)", comm,
                                                      {"L3": s["QgR"], "L4": s["QSR"]}, tol),
    }


# --------------------------------------------------------------------------
# Roter type


def riemann_rows(n: int) -> np.ndarray:
    """Flat indices of the independent slots ``a<b, c<d, (a,b) <= (c,d)``."""
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    rows = []
    for i, (a, b) in enumerate(pairs):
        for c, d in pairs[i:]:
            rows.append(np.ravel_multi_index((a, b, c, d), (n,) * 4))
    return np.array(rows, dtype=int)


ROTER_LABELS = ("N1", "N2", "N3")
GENERALIZED_LABELS = ("e1", "e2", "e3", "e4", "e5", "e6")


def roter_basis(s: Sampled, generalized: bool = False) -> dict[str, np.ndarray]:
    g, S, S2 = s["g"], s["S"], s["S2"]
    kn = kulkarni_nomizu
    if not generalized:
        return {"N1": kn(S, S), "N2": kn(g, S), "N3": kn(g, g)}
    return {"e1": kn(S, S), "e2": kn(S, S2), "e3": kn(S2, S2),
            "e4": kn(g, g), "e5": kn(g, S), "e6": kn(g, S2)}


def roter_fit(s: Sampled, generalized: bool = False, tol: Tolerance = DEFAULT_TOL) -> FitResult:
    """``R = N1 S^S + N2 g^S + N3 g^g`` or the six-term generalized form."""
    name = "generalized Roter" if generalized else "Roter"
    res = fit_combination(name, s["R"], roter_basis(s, generalized), tol, rows=riemann_rows(s.n))
    # a flat point decomposes trivially with zero coefficients; that says nothing
    flat = _size(s["R"]) <= tol.abs_floor
    if flat.any():
        pv = tuple(VACUOUS if f else v for f, v in zip(flat, res.point_verdicts))
        res.coefficients[flat] = np.nan
        res.point_verdicts = pv
        res.verdict = aggregate(pv)
    return res


# --------------------------------------------------------------------------
# Ricci operator structure


def _upper(X: np.ndarray) -> np.ndarray:
    n = X.shape[-1]
    iu = np.triu_indices(n)
    return X[..., iu[0], iu[1]]


@dataclass
class EinResult:
    verdict: str  # holds (a relation found up to S^4) | fails | vacuous
    level: int | None  # 0 for Einstein, else k of Ein(k); None if none up to 4
    coefficients: np.ndarray  # (points, level+1 or 2) as n_0..n_k with n_k = 1
    point_levels: tuple[int | None, ...]
    constant: bool


def ein_level(s: Sampled, tol: Tolerance = DEFAULT_TOL) -> EinResult:
    """Smallest k with ``n_0 g + n_1 S + ... + S^k = 0`` at every point.

    A relation already among ``g, S`` is reported as level 0 (Einstein).
    """
    P = s.points
    fams = [s["g"], s["S"], s["S2"], s["S3"], s["S4"]]
    levels: list[int | None] = []
    coeff_rows: list[np.ndarray | None] = []
    vac = 0
    for p in range(P):
        if _norm(fams[1][p]) <= tol.abs_floor:
            levels.append(None)
            coeff_rows.append(None)
            vac += 1
            continue
        found = None
        for k in range(1, 5):
            M = np.stack([_upper(F[p]) for F in fams[:k + 1]], axis=1)
            norms = np.linalg.norm(M, axis=0)
            if np.any(norms == 0):
                # a vanishing power is itself a relation
                v = (norms == 0).astype(float)
                found = (k, v)
                break
            _, sv, vt = np.linalg.svd(M / norms, full_matrices=False)
            if sv[-1] <= tol.rel * sv[0]:
                v = vt[-1] / norms
                found = (k, v / v[-1])
                break
        if found is None:
            levels.append(None)
            coeff_rows.append(None)
        else:
            k, v = found
            levels.append(0 if k == 1 else k)
            coeff_rows.append(v)
    if vac == P:
        return EinResult(VACUOUS, None, np.zeros((P, 0)), tuple(levels), True)
    live = [lv for lv, c in zip(levels, coeff_rows) if c is not None]
    missing = sum(1 for p in range(P) if coeff_rows[p] is None) - vac
    constant = len(set(live)) == 1 and missing == 0
    if missing:
        level, verdict = None, FAILS
    else:
        level, verdict = max(live), HOLDS
    width = 0 if level is None else max(level, 1) + 1
    coeffs = np.full((P, width), np.nan)
    for p, c in enumerate(coeff_rows):
        if c is not None and len(c) == width:
            coeffs[p] = c
    return EinResult(verdict, level, coeffs, tuple(levels), constant)


@dataclass
class QuasiEinsteinResult:
    verdict: str
    rank: int | None
    alpha: np.ndarray  # (points,)
    candidates: tuple[tuple[tuple[int, float], ...], ...]  # per point, (rank, alpha) sorted best first
    constant: bool


def _ricci_eigen_candidates(S, g, ginv, tol: Tolerance):
    J = ginv @ S
    ev = np.linalg.eigvals(J)
    scale = max(np.max(np.abs(ev)), 1e-300)
    alphas = []
    for lam in ev:
        if abs(lam.imag) > 1e-9 * scale:
            continue
        a = float(lam.real)
        if all(abs(a - b) > 1e-9 * scale for b in alphas):
            alphas.append(a)
    out = []
    for a in alphas:
        D = S - a * g
        sv = np.linalg.svd(D, compute_uv=False)
        thresh = tol.rel * (np.linalg.norm(S) + abs(a) * np.linalg.norm(g))
        out.append((int(np.sum(sv > thresh)), a))
    # fewest independent directions first, then smaller |alpha|, then larger alpha
    out.sort(key=lambda t: (t[0], round(abs(t[1]) / scale, 9), -t[1]))
    return out


def quasi_einstein_rank(s: Sampled, tol: Tolerance = DEFAULT_TOL) -> QuasiEinsteinResult:
    """Smallest rank of ``S - alpha g`` over real Ricci eigenvalues alpha."""
    P = s.points
    g, S, ginv = s["g"], s["S"], s["ginv"]
    alpha = np.full(P, np.nan)
    cands = []
    ranks = []
    for p in range(P):
        if _norm(S[p]) <= tol.abs_floor:
            cands.append(())
            continue
        c = _ricci_eigen_candidates(S[p], g[p], ginv[p], tol)
        cands.append(tuple(c))
        if c:
            ranks.append(c[0][0])
            alpha[p] = c[0][1]
    if not ranks:
        return QuasiEinsteinResult(VACUOUS, None, alpha, tuple(cands), True)
    constant = len(set(ranks)) == 1 and len(ranks) == sum(1 for c in cands if c)
    return QuasiEinsteinResult(HOLDS if constant else FAILS, max(ranks), alpha, tuple(cands), constant)


@dataclass
class ChakiResult:
    """``S = alpha g + beta Pi(x)Pi + gamma (Pi(x)delta + delta(x)Pi)`` with null Pi.

    Normalization: beta = -1, gamma = 1 and Pi of unit Euclidean length in
    the chart.  Norms are ``g^-1(v, v)``.
    """

    verdict: str  # holds | fails | not-applicable | vacuous
    alpha: np.ndarray
    Pi: np.ndarray  # (points, n)
    delta: np.ndarray
    norm_Pi: np.ndarray
    norm_delta: np.ndarray
    residuals: np.ndarray
    beta: float = -1.0
    gamma: float = 1.0


def _chaki_point(S, g, ginv, alpha, tol: Tolerance):
    D = S - alpha * g
    u, sv, _ = np.linalg.svd(D)
    thresh = tol.rel * (np.linalg.norm(S) + abs(alpha) * np.linalg.norm(g))
    if int(np.sum(sv > thresh)) != 2:
        return None
    E = u[:, :2]
    h = E.T @ ginv @ E
    lam, Qh = np.linalg.eigh(h)
    if not (lam[0] < 0 < lam[1]):
        return None  # induced form on the plane is definite or degenerate: no null rays
    x1 = Qh @ np.array([1 / np.sqrt(lam[1]), 1 / np.sqrt(-lam[0])])
    x2 = Qh @ np.array([1 / np.sqrt(lam[1]), -1 / np.sqrt(-lam[0])])
    M = E.T @ D @ E
    N = np.stack([x1, x2], axis=1)
    Ninv = np.linalg.inv(N)
    K = Ninv @ M @ Ninv.T
    kscale = np.max(np.abs(K))
    if abs(K[1, 1]) > 1e-8 * kscale and abs(K[0, 0]) <= 1e-8 * kscale:
        x1, x2 = x2, x1
        K = K[::-1, ::-1]
    if abs(K[1, 1]) > 1e-8 * kscale:
        return None  # no null Pi leaves D - beta Pi Pi in the form Pi(x)delta + delta(x)Pi
    Pi, Pi2 = E @ x1, E @ x2
    sc = np.linalg.norm(Pi)
    Pi = Pi / sc
    K11, K12 = K[0, 0] * sc ** 2, K[0, 1] * sc
    beta, gamma = -1.0, 1.0
    delta = (K11 - beta) / (2 * gamma) * Pi + (K12 / gamma) * Pi2
    recon = alpha * g + beta * np.outer(Pi, Pi) + gamma * (np.outer(Pi, delta) + np.outer(delta, Pi))
    res = np.linalg.norm(recon - S) / max(np.linalg.norm(S), 1e-300)
    return Pi, delta, float(Pi @ ginv @ Pi), float(delta @ ginv @ delta), res


def generalized_qe_chaki(s: Sampled, qe: QuasiEinsteinResult | None = None,
                         tol: Tolerance = DEFAULT_TOL) -> ChakiResult:
    """Null decomposition of the rank-2 part of ``S - alpha g``.

    Every eigenvalue alpha giving rank 2 is tried; the one whose residual
    plane carries a Lorentzian induced metric (and so null directions) is
    used.
    """
    qe = quasi_einstein_rank(s, tol) if qe is None else qe
    P, n = s.points, s.n
    empty = ChakiResult(VACUOUS, np.full(P, np.nan), np.full((P, n), np.nan), np.full((P, n), np.nan),
                        np.full(P, np.nan), np.full(P, np.nan), np.full(P, np.nan))
    if qe.verdict == VACUOUS:
        return empty
    if qe.rank != 2:
        empty.verdict = NOT_APPLICABLE
        return empty
    g, S, ginv = s["g"], s["S"], s["ginv"]
    out = empty
    ok = True
    for p in range(P):
        got = None
        for rank, a in qe.candidates[p]:
            if rank != 2:
                continue
            got = _chaki_point(S[p], g[p], ginv[p], a, tol)
            if got is not None:
                out.alpha[p] = a
                break
        if got is None:
            ok = False
            continue
        out.Pi[p], out.delta[p], out.norm_Pi[p], out.norm_delta[p], out.residuals[p] = got
        ok = ok and got[4] <= tol.rel
    out.verdict = HOLDS if ok else FAILS
    return out


# --------------------------------------------------------------------------
# recurrency, compatibility, weak symmetry


def _covector_solve(name: str, blocks: Sequence[tuple[str, np.ndarray]], b: np.ndarray,
                    n: int, tol: Tolerance, vacuous: np.ndarray) -> CovectorFit:
    """Solve ``sum_labels A_label @ theta_label = b`` per point.

    ``blocks`` maps labels to coefficient arrays of shape (points, rows, n).
    """
    P = b.shape[0]
    labels = [k for k, _ in blocks]
    cov = {k: np.full((P, n), np.nan) for k in labels}
    res = np.zeros(P)
    nullity = np.zeros(P, dtype=int)
    verdicts = []
    worst = (None, None, -1.0)
    for p in range(P):
        if vacuous[p]:
            verdicts.append(VACUOUS)
            nullity[p] = n * len(labels)
            continue
        A = np.concatenate([blk[p] for _, blk in blocks], axis=1)
        x, nullity[p] = _solve(A, b[p], tol.rank)
        fit = A @ x
        diff = b[p] - fit
        scale = max(_norm(b[p]), _norm(fit))
        res[p] = _norm(diff) / scale if scale > tol.abs_floor else 0.0
        verdicts.append(HOLDS if res[p] <= tol.rel else FAILS)
        for i, k in enumerate(labels):
            cov[k][p] = x[i * n:(i + 1) * n]
        if res[p] > worst[2]:
            worst = (p, (int(np.argmax(np.abs(diff))),), res[p])
    return CovectorFit(name, aggregate(verdicts), cov, res, tuple(verdicts), nullity, worst[0], worst[1])


def two_form_recurrency(H: np.ndarray, nablaH: np.ndarray, tol: Tolerance = DEFAULT_TOL,
                        name: str = "2-form recurrency") -> CovectorFit:
    """Solve the cyclic identity over (i,j,k) for Pi:

    ``H_jkxy,i + H_kixy,j + H_ijxy,k = Pi_i H_jkxy + Pi_j H_kixy + Pi_k H_ijxy``.
    ``nablaH`` carries the derivative index last.
    """
    H, dH = np.asarray(H, float), np.asarray(nablaH, float)
    P, n = H.shape[0], H.shape[1]
    eye = np.eye(n)
    # rows indexed (i,j,k,x,y), columns m
    A = (np.einsum("mi,pjkxy->pijkxym", eye, H) + np.einsum("mj,pkixy->pijkxym", eye, H)
         + np.einsum("mk,pijxy->pijkxym", eye, H))
    b = (np.einsum("pjkxyi->pijkxy", dH) + np.einsum("pkixyj->pijkxy", dH)
         + np.einsum("pijxyk->pijkxy", dH))
    vac = (_size(H) <= tol.abs_floor) & (_size(dH) <= tol.abs_floor)
    return _covector_solve(name, [("Pi", A.reshape(P, -1, n))], b.reshape(P, -1), n, tol, vac)


def ricci_1form_recurrency(S: np.ndarray, nablaS: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> CovectorFit:
    """``S_jx,i - S_ix,j = Pi_i S_jx - Pi_j S_ix``."""
    S, dS = np.asarray(S, float), np.asarray(nablaS, float)
    P, n = S.shape[0], S.shape[1]
    eye = np.eye(n)
    A = np.einsum("mi,pjx->pijxm", eye, S) - np.einsum("mj,pix->pijxm", eye, S)
    b = np.einsum("pjxi->pijx", dS) - np.einsum("pixj->pijx", dS)
    vac = (_size(S) <= tol.abs_floor) & (_size(dS) <= tol.abs_floor)
    return _covector_solve("Ricci 1-form recurrency", [("Pi", A.reshape(P, -1, n))],
                           b.reshape(P, -1), n, tol, vac)


def ricci_differential_checks(S: np.ndarray, nablaS: np.ndarray, tol: Tolerance = DEFAULT_TOL,
                              gamma: np.ndarray | None = None) -> dict[str, CheckResult]:
    """Cyclic parallel Ricci (``S_jk,i + S_ki,j + S_ij,k = 0``) and Codazzi (``S_jk,i = S_ik,j``).

    Residuals are judged against the size of the ingredients of nabla S,
    ``|nabla S| + 2 |Gamma| |S|`` when the connection is supplied, so a
    parallel Ricci tensor (where partial derivatives and connection terms
    cancel) is not judged against its own rounding noise.
    """
    S, dS = np.asarray(S, float), np.asarray(nablaS, float)
    cyc = (np.einsum("pjki->pijk", dS) + np.einsum("pkij->pijk", dS) + np.einsum("pijk->pijk", dS))
    cod = np.einsum("pjki->pijk", dS) - np.einsum("pikj->pijk", dS)
    flat = _size(S) <= tol.abs_floor
    size = _size(dS)
    if gamma is not None:
        size = size + 2 * _size(np.asarray(gamma, float)) * _size(S)
    scale = np.where(flat, 0.0, np.maximum(size, tol.abs_floor * 2))
    out = {}
    for key, X, k in (("cyclic parallel", cyc, 3.0), ("Codazzi", cod, 2.0)):
        out[key] = check_identity(key, X, None, tol, scale * k)
    return out


def compatibility_check(H: np.ndarray, E: np.ndarray, ginv: np.ndarray, tol: Tolerance = DEFAULT_TOL,
                        name: str = "compatibility") -> CheckResult:
    """Cyclic sum over (i,j,k) of ``T_ixjk = E^s_i H_sxjk`` vanishes."""
    H, E, ginv = (np.asarray(a, float) for a in (H, E, ginv))
    Em = np.einsum("pst,pti->psi", ginv, E)
    T = np.einsum("psi,psxjk->pixjk", Em, H)
    cyc = T + np.einsum("pjxki->pixjk", T) + np.einsum("pkxij->pixjk", T)
    return check_identity(name, cyc, None, tol, 3 * _size(T))


def weak_symmetry_fit(R: np.ndarray, nablaR: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> dict[str, CovectorFit]:
    """``R_abcd,e = Pi_e R_abcd + Phi_a R_ebcd + Phibar_b R_aecd + Psi_c R_abed + Psibar_d R_abce``.

    Also fits the Chaki special case (Pi = 2 A, the other four = A) and
    plain recurrency (``nabla R = Pi (x) R``).
    """
    R, dR = np.asarray(R, float), np.asarray(nablaR, float)
    P, n = R.shape[0], R.shape[1]
    eye = np.eye(n)
    blocks = {
        "Pi": np.einsum("me,pabcd->pabcdem", eye, R),
        "Phi": np.einsum("ma,pebcd->pabcdem", eye, R),
        "Phibar": np.einsum("mb,paecd->pabcdem", eye, R),
        "Psi": np.einsum("mc,pabed->pabcdem", eye, R),
        "Psibar": np.einsum("md,pabce->pabcdem", eye, R),
    }
    flat = {k: v.reshape(P, -1, n) for k, v in blocks.items()}
    b = dR.reshape(P, -1)
    vac = (_size(R) <= tol.abs_floor) & (_size(dR) <= tol.abs_floor)
    general = _covector_solve("weakly symmetric", list(flat.items()), b, n, tol, vac)
    chaki_A = 2 * flat["Pi"] + flat["Phi"] + flat["Phibar"] + flat["Psi"] + flat["Psibar"]
    chaki = _covector_solve("Chaki pseudosymmetric", [("A", chaki_A)], b, n, tol, vac)
    recurrent = _covector_solve("recurrent", [("Pi", flat["Pi"])], b, n, tol, vac)
    return {"general": general, "chaki": chaki, "recurrent": recurrent}


@dataclass
class VenziResult:
    verdict: str  # holds when the kernel is nontrivial at every point
    dimensions: tuple[int, ...]


def venzi_system(H: np.ndarray) -> np.ndarray:
    """Rows ``theta_i H_jkxy + theta_j H_kixy + theta_k H_ijxy`` for one point."""
    n = H.shape[0]
    eye = np.eye(n)
    A = (np.einsum("mi,jkxy->ijkxym", eye, H) + np.einsum("mj,kixy->ijkxym", eye, H)
         + np.einsum("mk,ijxy->ijkxym", eye, H))
    return A.reshape(-1, n)


def venzi_dimension(H: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> VenziResult:
    """Dimension of the space of covectors theta killing the cyclic sum, per point."""
    H = np.asarray(H, float)
    dims = []
    vac = 0
    for p in range(H.shape[0]):
        n = H.shape[1]
        if _norm(H[p]) <= tol.abs_floor:
            dims.append(n)
            vac += 1
            continue
        sv = np.linalg.svd(venzi_system(H[p]), compute_uv=False)
        dims.append(int(n - np.sum(sv > tol.rel * sv[0])))
    if vac == H.shape[0]:
        verdict = VACUOUS
    else:
        verdict = HOLDS if all(d >= 1 for d in dims) else FAILS
    return VenziResult(verdict, tuple(dims))


# --------------------------------------------------------------------------


def sample(metric: MetricSpec, grid: SampleGrid, fields=None) -> Sampled:
    """Convenience constructor for a sampled view of a metric."""
    return Sampled(Geometry(metric), grid, fields)


COMPATIBLE_WITH = ("R", "C", "W", "K", "P")


@dataclass
class Classification:
    """All detector outcomes for one metric on one grid."""

    pseudosymmetry: dict
    mixed: dict
    roter: FitResult
    generalized_roter: FitResult
    ein: EinResult
    quasi_einstein: QuasiEinsteinResult
    chaki: ChakiResult
    recurrency: dict
    ricci_recurrency: CovectorFit
    ricci_differential: dict
    compatibility: dict
    weak_symmetry: dict
    venzi: dict
    extra: dict = field(default_factory=dict)


def classify(s: Sampled, tol: Tolerance = DEFAULT_TOL) -> Classification:
    n = s.n
    four = n >= 4
    qe = quasi_einstein_rank(s, tol)
    rec = {H: two_form_recurrency(s[H], s[f"nabla{H}"], tol, name=f"2-form recurrency of {H}")
           for H in (("R", "C", "K") if four else ("R", "K"))}
    extra = {}
    for name, fld in s.fields.items():
        if fld.valence == 2:
            extra[f"R.{name} ~ Q(g,{name})"] = fit_proportionality(
                s[f"Rdot{name}"], s[f"Qg{name}"], tol, name=f"R.{name} ~ Q(g,{name})")
    return Classification(
        pseudosymmetry=pseudosymmetry_suite(s, tol) if four else {
            f"{A}.{T}": {"pseudosymmetric": pseudosymmetry(s, A, T, "g", tol),
                         "semisymmetric": semisymmetry(s, A, T, tol)}
            for A in ("R", "K") for T in ("R", "S", "K")},
        mixed=mixed_condition_suite(s, tol) if four else {},
        roter=roter_fit(s, False, tol),
        generalized_roter=roter_fit(s, True, tol),
        ein=ein_level(s, tol),
        quasi_einstein=qe,
        chaki=generalized_qe_chaki(s, qe, tol),
        recurrency=rec,
        ricci_recurrency=ricci_1form_recurrency(s["S"], s["nablaS"], tol),
        ricci_differential=ricci_differential_checks(s["S"], s["nablaS"], tol, s["Gamma"]),
        compatibility={H: compatibility_check(s[H], s["S"], s["ginv"], tol, name=f"{H} compatible with S")
                       for H in (COMPATIBLE_WITH if four else ("R", "K", "P"))},
        weak_symmetry=weak_symmetry_fit(s["R"], s["nablaR"], tol),
        venzi={H: venzi_dimension(s[H], tol) for H in (("R", "C") if four else ("R",))},
        extra=extra,
    )
