import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pseudosym import catalog
from pseudosym import classifier as C
from pseudosym.metric import default_grid
from pseudosym.operators import OperatorError, curvature_action, kulkarni_nomizu, q_operator

N = 3


def _sym(rng, n=N):
    a = rng.normal(size=(n, n))
    return a + a.T


def _riemann_like(rng, n=N):
    """Sum of Kulkarni-Nomizu products has the full curvature symmetry class."""
    return kulkarni_nomizu(_sym(rng, n), _sym(rng, n)) + kulkarni_nomizu(_sym(rng, n), _sym(rng, n))


def _metric(rng, n=N):
    a = rng.normal(size=(n, n))
    return a @ a.T + n * np.eye(n)


# ---------------------------------------------------------------------------
# brute-force oracle: derivation action of an endomorphism on a (0,k) tensor


def _act(endo, T):
    """(E.T)(X_1..X_k) = -sum_i T(X_1, .., E X_i, .., X_k), E given as E[r, i] = (E e_i)^r."""
    n, k = T.shape[0], T.ndim
    out = np.zeros_like(T)
    for idx in itertools.product(range(n), repeat=k):
        total = 0.0
        for i in range(k):
            for r in range(n):
                j = idx[:i] + (r,) + idx[i + 1:]
                total += endo[r, idx[i]] * T[j]
        out[idx] = -total
    return out


def _oracle_action(A, T, ginv):
    n, k = T.shape[0], T.ndim
    out = np.zeros(T.shape + (n, n))
    for al, be in itertools.product(range(n), repeat=2):
        # R(e_al, e_be) e_i = g^{rs} A_{al be i s} e_r
        endo = np.array([[sum(ginv[r, s] * A[al, be, i, s] for s in range(n)) for i in range(n)]
                         for r in range(n)])
        out[(Ellipsis, al, be)] = _act(endo, T)
    return out


def _oracle_q(B, T):
    n = T.shape[0]
    out = np.zeros(T.shape + (n, n))
    for al, be in itertools.product(range(n), repeat=2):
        # (e_al ^_B e_be) e_i = B(e_be, e_i) e_al - B(e_al, e_i) e_be
        endo = np.zeros((n, n))
        endo[al, :] += B[be, :]
        endo[be, :] -= B[al, :]
        out[(Ellipsis, al, be)] = _act(endo, T)
    return out


@pytest.mark.parametrize("k", [2, 4])
def test_action_matches_endomorphism_oracle(rng, k):
    g = _metric(rng)
    ginv = np.linalg.inv(g)
    A = _riemann_like(rng)
    T = rng.normal(size=(N,) * k)
    got = curvature_action(A, T, ginv)
    want = _oracle_action(A, T, ginv)
    assert np.abs(got - want).max() <= 1e-12 * np.abs(want).max()


@pytest.mark.parametrize("k", [2, 4])
def test_q_matches_endomorphism_oracle(rng, k):
    B = _sym(rng)
    T = rng.normal(size=(N,) * k)
    got = q_operator(B, T)
    want = _oracle_q(B, T)
    assert np.abs(got - want).max() <= 1e-12 * np.abs(want).max()


def test_q_with_metric_equals_action_of_g_wedge(rng):
    # X ^_g Y is the endomorphism of the curvature-like tensor G under the action convention
    g = _metric(rng)
    ginv = np.linalg.inv(g)
    G = 0.5 * kulkarni_nomizu(g, g)
    T = rng.normal(size=(N,) * 4)
    np.testing.assert_allclose(q_operator(g, T), curvature_action(G, T, ginv), rtol=1e-12, atol=1e-12)


# ---------------------------------------------------------------------------
# Kulkarni-Nomizu product


def test_g_wedge_g_is_twice_g_tensor(melvin_sampled):
    g = melvin_sampled["g"]
    G = (np.einsum("pad,pbc->pabcd", g, g) - np.einsum("pac,pbd->pabcd", g, g))
    np.testing.assert_allclose(kulkarni_nomizu(g, g), 2 * G, rtol=1e-15)
    np.testing.assert_allclose(melvin_sampled["G"], G, rtol=1e-14)


@given(st.integers(0, 2 ** 32 - 1))
def test_wedge_is_commutative_and_curvature_like(seed):
    rng = np.random.default_rng(seed)
    E, F = _sym(rng, 4), _sym(rng, 4)
    X = kulkarni_nomizu(E, F)
    np.testing.assert_allclose(X, kulkarni_nomizu(F, E), atol=1e-12)
    np.testing.assert_allclose(X, -np.swapaxes(X, 0, 1), atol=1e-12)
    np.testing.assert_allclose(X, np.transpose(X, (2, 3, 0, 1)), atol=1e-12)
    cyc = X + np.einsum("acdb->abcd", X) + np.einsum("adbc->abcd", X)
    assert np.abs(cyc).max() <= 1e-12 * max(np.abs(X).max(), 1.0)


def test_melvin_g_wedge_s(melvin_at_one):
    s = melvin_at_one
    gs = kulkarni_nomizu(s["g"], s["S"])
    # g11 S22 + g22 S11 = (-1.5625)(-0.64) + (1.5625)(-0.64)
    assert gs[0, 0, 1, 0, 1] == pytest.approx(0.0, abs=1e-14)


def test_wedge_rejects_non_symmetric(rng):
    with pytest.raises(OperatorError):
        kulkarni_nomizu(rng.normal(size=(3, 3)), _sym(rng))


def test_symbolic_wedge_of_constant_metric():
    from pseudosym import expr as ex
    g = np.array([[ex.num(1), ex.ZERO], [ex.ZERO, ex.num(2)]], dtype=object)
    X = kulkarni_nomizu(g, g)
    assert X[0, 1, 0, 1] is ex.num(-4)
    assert X[0, 1, 1, 0] is ex.num(4)


# ---------------------------------------------------------------------------
# action and Tachibana operator


def test_valence_errors(rng):
    g = _metric(rng)
    A = _riemann_like(rng)
    with pytest.raises(OperatorError):
        curvature_action(A, rng.normal(size=(N,) * 3), np.linalg.inv(g))
    with pytest.raises(OperatorError):
        q_operator(g, rng.normal(size=(N,) * 3))
    with pytest.raises(OperatorError):
        q_operator(rng.normal(size=(N, N)), rng.normal(size=(N, N)))


def test_action_on_vector_valence_when_allowed(rng):
    g = _metric(rng)
    out = curvature_action(_riemann_like(rng), rng.normal(size=N), np.linalg.inv(g), valences=None)
    assert out.shape == (N, N, N)


@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([2, 4]))
def test_linearity_and_trailing_antisymmetry(seed, k):
    rng = np.random.default_rng(seed)
    g = _metric(rng)
    ginv = np.linalg.inv(g)
    A, B = _riemann_like(rng), _sym(rng)
    T1, T2 = rng.normal(size=(N,) * k), rng.normal(size=(N,) * k)
    for op in (lambda T: curvature_action(A, T, ginv), lambda T: q_operator(B, T)):
        lhs, rhs = op(T1 + T2), op(T1) + op(T2)
        assert np.abs(lhs - rhs).max() <= 1e-12 * max(np.abs(lhs).max(), 1.0)
        out = op(T1)
        assert np.abs(out + np.swapaxes(out, -1, -2)).max() <= 1e-12 * max(np.abs(out).max(), 1.0)


def test_q_of_g_on_g_tensor_vanishes(melvin_sampled, rng):
    s = melvin_sampled
    assert np.abs(s["QgG"]).max() <= 1e-13 * np.abs(s["G"]).max() ** 2
    g = _metric(rng)
    G = 0.5 * kulkarni_nomizu(g, g)
    assert np.abs(q_operator(g, G)).max() <= 1e-12 * np.abs(G).max() ** 2


def test_flat_action_vanishes(minkowski_sampled):
    assert np.abs(minkowski_sampled["RdotR"]).max() <= 1e-14


def test_maxwell_tensor_q_component(melvin_at_one):
    assert melvin_at_one["QgF"][0, 0, 1, 0, 3] == pytest.approx(0.5, rel=1e-13)


def test_maxwell_action_matches_fit(melvin_at_one):
    s = melvin_at_one
    ratio = s["RdotF"][0, 0, 3, 0, 1] / s["QgF"][0, 0, 3, 0, 1]
    assert ratio == pytest.approx(0.1536, rel=1e-12)
    # -16 r (4 - r^2)/(4 + r^2)^p at B0 = r = 1 with the exponent that matches: p = 4
    assert s["RdotF"][0, 0, 3, 0, 1] == pytest.approx(-16 * 3 / 5 ** 4, rel=1e-12)


def test_melvin_type_action_and_q_components():
    entry = catalog.melvin_type("ln(1+r)")
    s = C.sample(entry.metric, default_grid(entry.metric))
    w = catalog.warp_bindings(entry, s.grid)
    f, fp, fpp = w["f"], w["fp"], w["fpp"]
    np.testing.assert_allclose(s["QgR"][:, 0, 2, 1, 2, 0, 1], -np.exp(4 * f) * (fp ** 2 - fpp), rtol=1e-12)
    np.testing.assert_allclose(s["RdotR"][:, 0, 2, 1, 2, 0, 1], -np.exp(2 * f) * fpp * (fp ** 2 - fpp), rtol=1e-12)
