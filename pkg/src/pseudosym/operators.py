"""Kulkarni-Nomizu product, curvature action A.T and the Tachibana operator Q(B,T).

Every function accepts component arrays of either kind: float arrays with
any number of leading batch axes (one per sample point, say), or object
arrays of :class:`~pseudosym.expr.Expr` with no batch axes.  The batch
shape is read off the (0,2) argument, so ``T`` may be of any valence.

Index layout of results follows the local formulas: for a (0,k) tensor
``T`` the outputs ``A.T`` and ``Q(B,T)`` are (0,k+2) arrays indexed
``[a_1, ..., a_k, alpha, beta]``.
"""

from __future__ import annotations

import numpy as np

from . import expr as ex

_LETTERS = "abcdefghijklmnopq"


class OperatorError(ValueError):
    pass


def _tidy(arr):
    """Coerce stray Python numbers left by object-dtype einsum back to Expr."""
    arr = np.asarray(arr)
    if arr.dtype != object:
        return arr
    flat = arr.reshape(-1)
    for i, v in enumerate(flat):
        if not isinstance(v, ex.Expr):
            flat[i] = ex.as_expr(v)
    return arr


def _symmetric(E, batch: int) -> bool:
    E = np.asarray(E)
    swapped = np.swapaxes(E, batch, batch + 1)
    if E.dtype == object:
        return all(x is y for x, y in zip(E.reshape(-1), swapped.reshape(-1)))
    scale = max(float(np.max(np.abs(E))), 1e-300) if E.size else 1.0
    return bool(np.max(np.abs(E - swapped)) <= 1e-12 * scale) if E.size else True


def kulkarni_nomizu(E, F, check: bool = True):
    """(E ^ F)_abcd = E_ad F_bc - E_ac F_bd + E_bc F_ad - E_bd F_ac."""
    E, F = np.asarray(E), np.asarray(F)
    batch = E.ndim - 2
    if check and not (_symmetric(E, batch) and _symmetric(F, batch)):
        raise OperatorError("Kulkarni-Nomizu product needs symmetric (0,2) arguments")
    es = np.einsum
    out = (es("...ad,...bc->...abcd", E, F) - es("...ac,...bd->...abcd", E, F)
           + es("...bc,...ad->...abcd", E, F) - es("...bd,...ac->...abcd", E, F))
    return _tidy(out)


def _valence(T, batch: int) -> int:
    k = np.ndim(T) - batch
    if k < 1:
        raise OperatorError("tensor argument must have valence at least 1")
    return k


def curvature_action(A, T, ginv, valences=(2, 4)):
    """(A.T)_{a1..ak alpha beta} = -g^{rs} sum_i A_{alpha beta a_i s} T_{a1..r..ak}."""
    A, T, ginv = np.asarray(A), np.asarray(T), np.asarray(ginv)
    batch = ginv.ndim - 2
    k = _valence(T, batch)
    if valences is not None and k not in valences:
        raise OperatorError(f"unsupported valence (0,{k})")
    M = _tidy(np.einsum("...rs,...xyas->...xyar", ginv, A))
    idx = _LETTERS[:k]
    out = None
    for i in range(k):
        t_sub = idx[:i] + "r" + idx[i + 1:]
        term = np.einsum(f"...xy{idx[i]}r,...{t_sub}->...{idx}xy", M, T)
        out = term if out is None else out + term
    return _tidy(-out)


def q_operator(B, T, valences=(2, 4), check: bool = True):
    """Q(B,T)(X_1..X_k; X,Y) = -sum_i T(X_1, .., (X ^_B Y) X_i, .., X_k),
    with (X ^_B Y)Z = B(Y,Z)X - B(X,Z)Y.

    Component form: sum_i B_{alpha a_i} T_{a1..beta..ak} - B_{beta a_i} T_{a1..alpha..ak}.
    """
    B, T = np.asarray(B), np.asarray(T)
    batch = B.ndim - 2
    k = _valence(T, batch)
    if valences is not None and k not in valences:
        raise OperatorError(f"unsupported valence (0,{k})")
    if check and not _symmetric(B, batch):
        raise OperatorError("first argument of Q must be symmetric")
    idx = _LETTERS[:k]
    out = None
    for i in range(k):
        with_y = idx[:i] + "y" + idx[i + 1:]
        with_x = idx[:i] + "x" + idx[i + 1:]
        term = (np.einsum(f"...x{idx[i]},...{with_y}->...{idx}xy", B, T)
                - np.einsum(f"...y{idx[i]},...{with_x}->...{idx}xy", B, T))
        out = term if out is None else out + term
    return _tidy(out)


def raise_first(ginv, E):
    """Endomorphism components E^a_b = g^{ac} E_cb."""
    return _tidy(np.einsum("...ac,...cb->...ab", ginv, E))
