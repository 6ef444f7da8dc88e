"""Christoffel symbols, curvature tensors and covariant derivatives.

Everything here stays symbolic: components are :class:`Expr` trees held in
object arrays (0-based indices; printed tables use 1-based labels).

Conventions:

* ``R_abcd = g_ae (d_c Gamma^e_bd - d_d Gamma^e_bc
  + Gamma^e_cf Gamma^f_bd - Gamma^e_df Gamma^f_bc)``, so that
  ``R_abcd = g(R(e_c, e_d) e_b, e_a)`` with ``R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y]``.
* ``S_bc = g^ad R_abcd``, ``kappa = g^ab S_ab``, ``S^j = S (g^-1 S)^(j-1)``.
* ``(E ^ F)`` is the Kulkarni-Nomizu product of :mod:`pseudosym.operators`
  and ``G = (g ^ g) / 2``.

With these choices a metric of constant sectional curvature ``k`` has
``R = -k G`` and ``kappa = -n (n-1) k``; the component tables of warped
Melvin-type metrics in this package are stated in the same conventions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import expr as ex
from .expr import Evaluator, Expr
from .metric import MetricSpec, SampleGrid, inverse_metric
from .operators import kulkarni_nomizu, raise_first


@dataclass(frozen=True, eq=False)
class TensorField:
    """Covariant tensor field with symbolic components."""

    name: str
    components: np.ndarray
    symmetry: str = "none"  # none | symmetric-pair | riemann-like | antisymmetric-pair

    @property
    def valence(self) -> int:
        return self.components.ndim

    def __getitem__(self, idx) -> Expr:
        return self.components[idx]

    def sample(self, ev: Evaluator) -> np.ndarray:
        return sample_array(self.components, ev)


@dataclass(frozen=True, eq=False)
class Connection:
    """Gamma^a_bc stored as ``components[a, b, c]``."""

    components: np.ndarray
    coordinates: tuple[str, ...]


def sample_array(arr: np.ndarray, ev: Evaluator) -> np.ndarray:
    """Evaluate an object array of Exprs; result has shape ``ev.shape + arr.shape``."""
    arr = np.asarray(arr, dtype=object)
    flat = [ev.full(ex.as_expr(e)) for e in arr.reshape(-1)]
    if not flat:
        return np.zeros(ev.shape + arr.shape)
    out = np.stack(flat, axis=-1)
    return out.reshape(ev.shape + arr.shape)


def _zeros(shape) -> np.ndarray:
    out = np.empty(shape, dtype=object)
    out.fill(ex.ZERO)
    return out


def christoffel(m: MetricSpec, ginv: np.ndarray | None = None) -> Connection:
    n = m.dimension
    coords = m.coordinates
    g = m.matrix()
    ginv = inverse_metric(m) if ginv is None else ginv
    dg = np.empty((n, n, n), dtype=object)  # dg[a, b, c] = d_c g_ab
    for a, b, c in itertools.product(range(n), repeat=3):
        dg[a, b, c] = ex.differentiate(g[a, b], coords[c])
    gam = _zeros((n, n, n))
    half = ex.num(0.5)
    for a, b in itertools.product(range(n), repeat=2):
        for c in range(b, n):
            terms = []
            for d in range(n):
                if ex.is_zero(ginv[a, d]):
                    continue
                inner = ex.total([dg[d, c, b], dg[b, d, c], -dg[b, c, d]])
                if not ex.is_zero(inner):
                    terms.append(ginv[a, d] * inner)
            val = half * ex.total(terms)
            gam[a, b, c] = gam[a, c, b] = val
    return Connection(gam, coords)


def riemann(m: MetricSpec, conn: Connection | None = None) -> TensorField:
    n = m.dimension
    conn = christoffel(m) if conn is None else conn
    gam, coords = conn.components, conn.coordinates
    g = m.matrix()
    # mixed R^e_bcd first, then lower with g
    mixed = _zeros((n, n, n, n))
    for e, b, c, d in itertools.product(range(n), repeat=4):
        if c == d:
            continue
        terms = [ex.differentiate(gam[e, b, d], coords[c]), -ex.differentiate(gam[e, b, c], coords[d])]
        for f in range(n):
            terms.append(gam[e, c, f] * gam[f, b, d])
            terms.append(-(gam[e, d, f] * gam[f, b, c]))
        mixed[e, b, c, d] = ex.total(terms)
    R = _zeros((n, n, n, n))
    for a, b, c, d in itertools.product(range(n), repeat=4):
        R[a, b, c, d] = ex.total(g[a, e] * mixed[e, b, c, d] for e in range(n)
                                 if not ex.is_zero(g[a, e]))
    return TensorField("R", R, "riemann-like")


@dataclass(frozen=True, eq=False)
class RicciFamily:
    S: TensorField
    powers: dict  # j -> TensorField S^j for j = 2, 3, 4
    kappa: Expr
    operator: np.ndarray  # J^a_b = g^ac S_cb


def ricci_family(m: MetricSpec, R: TensorField | None = None, ginv=None) -> RicciFamily:
    n = m.dimension
    ginv = inverse_metric(m) if ginv is None else ginv
    R = riemann(m) if R is None else R
    S = _zeros((n, n))
    for b in range(n):
        for c in range(b, n):
            S[b, c] = S[c, b] = ex.total(ginv[a, d] * R.components[a, b, c, d]
                                         for a in range(n) for d in range(n)
                                         if not ex.is_zero(ginv[a, d]))
    J = raise_first(ginv, S)
    powers = {}
    prev = S
    for j in (2, 3, 4):
        nxt = np.einsum("ab,bc->ac", prev, J)
        nxt = _symmetrize(nxt)
        powers[j] = TensorField(f"S{j}", nxt, "symmetric-pair")
        prev = nxt
    kappa = ex.total(ginv[a, b] * S[a, b] for a in range(n) for b in range(n)
                     if not ex.is_zero(ginv[a, b]))
    return RicciFamily(TensorField("S", S, "symmetric-pair"), powers, kappa, J)


def _symmetrize(arr: np.ndarray) -> np.ndarray:
    """Store the upper triangle on both sides so symmetry holds structurally."""
    n = arr.shape[0]
    out = _zeros(arr.shape)
    for a in range(n):
        for b in range(a, n):
            out[a, b] = out[b, a] = ex.as_expr(arr[a, b])
    return out


def derived_tensors(m: MetricSpec, R: TensorField, ric: RicciFamily) -> dict[str, TensorField]:
    """C, P, W, K and G from R, S and kappa."""
    n = m.dimension
    if n < 3:
        raise ValueError("derived curvature tensors need dimension >= 3")
    g = m.matrix()
    S = ric.S.components
    kappa = ric.kappa
    G = kulkarni_nomizu(g, g) * ex.num(0.5)
    gS = kulkarni_nomizu(g, S)
    Rc = R.components
    C = Rc - gS * ex.num(1.0 / (n - 2)) + G * (kappa / ((n - 1) * (n - 2)))
    K = Rc - gS * ex.num(1.0 / (n - 2))
    W = Rc - G * (kappa / (n * (n - 1)))
    P = Rc - (np.einsum("ad,bc->abcd", g, S) - np.einsum("bd,ac->abcd", g, S)) * ex.num(1.0 / (n - 1))
    fix = np.vectorize(ex.as_expr, otypes=[object])
    return {
        "C": TensorField("C", fix(C), "riemann-like"),
        "P": TensorField("P", fix(P), "none"),
        "W": TensorField("W", fix(W), "riemann-like"),
        "K": TensorField("K", fix(K), "riemann-like"),
        "G": TensorField("G", fix(G), "riemann-like"),
    }


def covariant_derivative(T: TensorField, conn: Connection) -> TensorField:
    """T_{a1..ak;e} = d_e T_{a1..ak} - sum_i Gamma^s_{e a_i} T_{a1..s..ak} (derivative index last)."""
    comp = T.components
    k = comp.ndim
    n = comp.shape[0] if k else len(conn.coordinates)
    gam, coords = conn.components, conn.coordinates
    out = _zeros((n,) * (k + 1))
    for idx in itertools.product(range(n), repeat=k):
        base = comp[idx]
        for e in range(n):
            terms = [ex.differentiate(base, coords[e])]
            for i in range(k):
                ai = idx[i]
                for s in range(n):
                    coef = gam[s, e, ai]
                    if ex.is_zero(coef):
                        continue
                    other = comp[idx[:i] + (s,) + idx[i + 1:]]
                    if not ex.is_zero(other):
                        terms.append(-(coef * other))
            out[idx + (e,)] = ex.total(terms)
    return TensorField(f"nabla{T.name}", out, "none")


class Geometry:
    """Lazily computed symbolic curvature of one metric."""

    def __init__(self, metric: MetricSpec):
        self.metric = metric
        self.n = metric.dimension

    @cached_property
    def g(self) -> TensorField:
        return TensorField("g", self.metric.matrix(), "symmetric-pair")

    @cached_property
    def ginv(self) -> np.ndarray:
        return inverse_metric(self.metric)

    @cached_property
    def connection(self) -> Connection:
        return christoffel(self.metric, self.ginv)

    @cached_property
    def R(self) -> TensorField:
        return riemann(self.metric, self.connection)

    @cached_property
    def ricci(self) -> RicciFamily:
        return ricci_family(self.metric, self.R, self.ginv)

    @property
    def S(self) -> TensorField:
        return self.ricci.S

    @property
    def kappa(self) -> Expr:
        return self.ricci.kappa

    @cached_property
    def derived(self) -> dict[str, TensorField]:
        return derived_tensors(self.metric, self.R, self.ricci)

    def tensor(self, name: str) -> TensorField:
        """Look up a symbolic field by name (g, R, S, S2..S4, C, P, W, K, G, nablaX)."""
        if name == "g":
            return self.g
        if name == "R":
            return self.R
        if name == "S":
            return self.S
        if name in ("S2", "S3", "S4"):
            return self.ricci.powers[int(name[1])]
        if name in ("C", "P", "W", "K", "G"):
            return self.derived[name]
        if name.startswith("nabla"):
            return self.nabla(name[5:])
        raise KeyError(name)

    def nabla(self, name: str) -> TensorField:
        cache = self.__dict__.setdefault("_nabla", {})
        if name not in cache:
            cache[name] = covariant_derivative(self.tensor(name), self.connection)
        return cache[name]

    def evaluator(self, grid: SampleGrid) -> Evaluator:
        values = grid.bindings()
        return Evaluator(values)
