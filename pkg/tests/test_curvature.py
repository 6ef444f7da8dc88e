import itertools

import numpy as np
import pytest

from pseudosym import catalog
from pseudosym import classifier as C
from pseudosym import expr as ex
from pseudosym.curvature import Geometry, christoffel, covariant_derivative, sample_array
from pseudosym.metric import default_grid, make_grid, metric_from_entries, numeric_matrix
from pseudosym.operators import kulkarni_nomizu

CATALOG = {
    "melvin": lambda: catalog.melvin(1.0),
    "melvin_b07": lambda: catalog.melvin(0.7),
    "minkowski": catalog.minkowski_cylindrical,
    "conformally_flat": catalog.conformally_flat_example,
    "pseudosymmetric": catalog.pseudosymmetric_example,
    "warped_ln1r": lambda: catalog.melvin_type("ln(1+r)"),
    "base_ln1r": lambda: catalog.base_3metric("ln(1+r)"),
    "base_ln2r2": lambda: catalog.base_3metric("ln(2+r^2)"),
}


def three_sphere():
    return metric_from_entries(("chi", "theta", "phi"),
                               {(1, 1): 1, (2, 2): "sin(chi)^2", (3, 3): "sin(chi)^2*sin(theta)^2"},
                               signature=(0, 3), name="three_sphere",
                               grid={"chi": (0.4, 0.9, 1.3), "theta": (0.5, 1.1, 2.0)})


@pytest.fixture(scope="module", params=sorted(CATALOG))
def sampled(request):
    entry = CATALOG[request.param]()
    return request.param, entry, C.sample(entry.metric, default_grid(entry.metric))


def _scale(x):
    return max(float(np.abs(x).max()), 1e-300)


def _warp(entry, s):
    return catalog.warp_bindings(entry, s.grid)


# ---------------------------------------------------------------------------
# Christoffel symbols


def test_melvin_christoffel_value(melvin_at_one):
    gam = sample_array(melvin_at_one.geometry.connection.components, melvin_at_one.ev)
    # Gamma^t_tr = A'/(2A) with A = U^2, A' = 2 U U' = 1.25
    assert gam[0, 0, 0, 1] == pytest.approx(1.25 / 3.125, rel=1e-14)


def test_minkowski_christoffel():
    m = catalog.minkowski_cylindrical().metric
    grid = default_grid(m)
    gam = sample_array(christoffel(m).components, Geometry(m).evaluator(grid))
    r = grid.bindings()["r"]
    expected = np.zeros_like(gam)
    expected[:, 1, 3, 3] = -r
    expected[:, 3, 1, 3] = expected[:, 3, 3, 1] = 1 / r
    np.testing.assert_allclose(gam, expected, rtol=1e-15, atol=0)


def test_constant_metric_has_zero_connection():
    m = metric_from_entries(("x", "y", "z"), {(1, 1): -2, (2, 2): 3, (3, 3): 5})
    assert all(g is ex.ZERO for g in christoffel(m).components.reshape(-1))


def test_connection_symmetric_and_metric(sampled):
    _, entry, s = sampled
    gam = sample_array(s.geometry.connection.components, s.ev)
    np.testing.assert_array_equal(gam, np.swapaxes(gam, 2, 3))
    nabla_g = s["nablag"]
    assert np.abs(nabla_g).max() <= 1e-12 * max(_scale(s["g"]), 1.0)


# ---------------------------------------------------------------------------
# Riemann, Ricci and derived tensors


def test_melvin_type_r1313():
    entry = catalog.melvin_type("ln(1+r^2/4)")
    s = C.sample(entry.metric, make_grid(entry.metric, {"r": [1.0]}))
    assert s["R"][0, 0, 2, 0, 2] == pytest.approx(0.25, rel=1e-14)


def test_base_r1212_and_ricci(base_sampled):
    entry, s = base_sampled
    w = _warp(entry, s)
    np.testing.assert_allclose(s["R"][:, 0, 1, 0, 1], np.exp(2 * w["f"]) * w["fpp"], rtol=1e-12)
    # contraction slot pinned by S_22 = 2 f''
    np.testing.assert_allclose(s["S"][:, 1, 1], 2 * w["fpp"], rtol=1e-12)
    np.testing.assert_allclose(s["kappa"], 2 * np.exp(-2 * w["f"]) * (w["fp"] ** 2 + 2 * w["fpp"]), rtol=1e-12)


def test_ricci_slot_alternatives_disagree(base_sampled):
    _, s = base_sampled
    R, ginv = s["R"], s["ginv"]
    other = np.einsum("pac,pabcd->pbd", ginv, R)
    assert not np.allclose(other, s["S"])
    np.testing.assert_allclose(-other, s["S"], rtol=1e-12, atol=1e-14)


def test_minkowski_is_flat(minkowski_sampled):
    for name in ("R", "S", "C", "nablaR"):
        assert np.abs(minkowski_sampled[name]).max() <= 1e-14


def test_melvin_ricci_values(melvin_at_one, melvin_sampled):
    assert melvin_at_one["S"][0, 0, 0] == pytest.approx(-0.64, rel=1e-14)
    scale = _scale(melvin_sampled["S"])
    assert np.abs(melvin_sampled["kappa"]).max() <= 1e-10 * scale


def test_melvin_identities(melvin_sampled):
    s = melvin_sampled
    scale = _scale(s["R"])
    assert np.abs(s["C"] - s["K"]).max() <= 1e-10 * scale
    assert np.abs(s["R"] - s["W"]).max() <= 1e-10 * scale


def test_ricci_powers(sampled):
    _, _, s = sampled
    J = np.einsum("pac,pcb->pab", s["ginv"], s["S"])
    np.testing.assert_allclose(s["S2"], np.einsum("pab,pbc->pac", s["S"], J), atol=1e-12 * _scale(s["S2"]) + 1e-300)
    np.testing.assert_allclose(s["S3"], np.einsum("pab,pbc->pac", s["S2"], J), atol=1e-12 * _scale(s["S3"]) + 1e-300)


def test_riemann_symmetries_and_first_bianchi(sampled):
    _, _, s = sampled
    R = s["R"]
    tol = 1e-10 * _scale(R) + 1e-14
    assert np.abs(R + np.swapaxes(R, 1, 2)).max() <= tol
    assert np.abs(R + np.swapaxes(R, 3, 4)).max() <= tol
    assert np.abs(R - np.transpose(R, (0, 3, 4, 1, 2))).max() <= tol
    cyc = R + np.einsum("pacdb->pabcd", R) + np.einsum("padbc->pabcd", R)
    assert np.abs(cyc).max() <= tol


def test_second_bianchi(sampled):
    _, _, s = sampled
    dR = s["nablaR"]
    cyc = dR + np.einsum("pabdec->pabcde", dR) + np.einsum("pabecd->pabcde", dR)
    assert np.abs(cyc).max() <= 1e-9 * _scale(dR) + 1e-14


def test_weyl_trace_free(sampled):
    name, entry, s = sampled
    Cw = s["C"]
    scale = _scale(s["R"]) + 1e-4
    assert np.abs(np.einsum("pac,pabcd->pbd", s["ginv"], Cw)).max() <= 1e-10 * scale
    if entry.metric.dimension == 3:
        assert np.abs(Cw).max() <= 1e-10 * scale


def test_generic_three_metric_is_conformally_flat():
    m = metric_from_entries(("x", "y", "z"), {(1, 1): "2 + sin(x*y)", (1, 2): "x*z/4", (2, 2): "3 + y^2",
                                               (3, 3): "exp(x - z)", (2, 3): "cos(y)/5"})
    s = C.sample(m, make_grid(m, {"x": [0.3, 1.1], "y": [0.2], "z": [0.4, 0.9]}))
    assert np.abs(s["C"]).max() <= 1e-10 * _scale(s["R"])


def test_conharmonic_minus_concircular():
    entry = catalog.melvin_type("ln(1+r)")
    s = C.sample(entry.metric, default_grid(entry.metric))
    n = 4
    G = 0.5 * kulkarni_nomizu(s["g"], s["g"])
    expected = -kulkarni_nomizu(s["g"], s["S"]) / (n - 2) + s["kappa"][:, None, None, None, None] * G / (n * (n - 1))
    np.testing.assert_allclose(s["K"] - s["W"], expected, atol=1e-12 * _scale(s["R"]))


def test_melvin_type_weyl_component():
    entry = catalog.melvin_type("ln(1+r)")
    s = C.sample(entry.metric, default_grid(entry.metric))
    w = _warp(entry, s)
    f, fp, fpp, r = w["f"], w["fp"], w["fpp"], w["r"]
    np.testing.assert_allclose(s["C"][:, 0, 1, 0, 1],
                               np.exp(2 * f) / (3 * r) * (r * fpp - 2 * r * fp ** 2 + 2 * fp), rtol=1e-12)
    # C_{1213,3}: derivative index last
    np.testing.assert_allclose(s["nablaC"][:, 0, 1, 0, 2, 2],
                               np.exp(2 * f) / r * fp * (2 * fp - 2 * r * fp ** 2 + r * fpp), rtol=1e-12)


def test_base_conharmonic_derivative(base_sampled):
    entry, s = base_sampled
    w = _warp(entry, s)
    f, fp, fpp, fppp = w["f"], w["fp"], w["fpp"], w["fppp"]
    np.testing.assert_allclose(s["nablaK"][:, 0, 1, 0, 1, 1],
                               2 * np.exp(2 * f) * (fp ** 3 + fp * fpp - fppp), rtol=1e-12)


def test_covariant_derivative_of_parallel_field():
    m = catalog.minkowski_cylindrical().metric
    geo = Geometry(m)
    d = covariant_derivative(geo.g, geo.connection)
    vals = sample_array(d.components, geo.evaluator(default_grid(m)))
    assert np.abs(vals).max() <= 1e-14


def test_einstein_sphere_curvature():
    m = three_sphere()
    s = C.sample(m, default_grid(m))
    # unit round sphere: R = -G under this sign convention, so S = -(n-1) g
    G = 0.5 * kulkarni_nomizu(s["g"], s["g"])
    np.testing.assert_allclose(s["R"], -G, atol=1e-13)
    np.testing.assert_allclose(s["S"], -2 * s["g"], atol=1e-13)
    np.testing.assert_allclose(s["kappa"], -6.0, rtol=1e-13)


# ---------------------------------------------------------------------------
# finite-difference oracle


def _fd_christoffel(m, point, env, h=1e-5):
    coords = m.coordinates
    n = len(coords)
    g = numeric_matrix(m, point, env)
    ginv = np.linalg.inv(g)
    dg = np.empty((n, n, n))  # dg[a, b, c] = d_c g_ab
    for c, name in enumerate(coords):
        up, dn = dict(point), dict(point)
        up[name] = point[name] + h
        dn[name] = point[name] - h
        dg[:, :, c] = (numeric_matrix(m, up, env) - numeric_matrix(m, dn, env)) / (2 * h)
    low = 0.5 * (np.einsum("dcb->dbc", dg) + np.einsum("bdc->dbc", dg) - np.einsum("bcd->dbc", dg))
    return np.einsum("ad,dbc->abc", ginv, low), g


def _fd_riemann(m, point, env, H=1e-3):
    """Outer derivatives by a 4th-order stencil of the finite-difference connection."""
    coords = m.coordinates
    n = len(coords)
    gam, g = _fd_christoffel(m, point, env)
    dgam = np.empty((n, n, n, n))  # dgam[e, b, d, c] = d_c Gamma^e_bd
    for c, name in enumerate(coords):
        vals = []
        for k in (2, 1, -1, -2):
            p = dict(point)
            p[name] = point[name] + k * H
            vals.append(_fd_christoffel(m, p, env)[0])
        dgam[..., c] = (-vals[0] + 8 * vals[1] - 8 * vals[2] + vals[3]) / (12 * H)
    mixed = (np.einsum("ebdc->ebcd", dgam) - np.einsum("ebcd->ebcd", dgam)
             + np.einsum("ecf,fbd->ebcd", gam, gam) - np.einsum("edf,fbc->ebcd", gam, gam))
    return np.einsum("ae,ebcd->abcd", g, mixed), gam


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_finite_difference_oracle(name):
    entry = CATALOG[name]()
    m = entry.metric
    grid = default_grid(m)
    s = C.sample(m, grid)
    gam_sym = sample_array(s.geometry.connection.components, s.ev)
    for p in (0, len(grid) // 2, len(grid) - 1):
        point = grid.point(p)
        R_fd, gam_fd = _fd_riemann(m, point, grid.env)
        R_sym = s["R"][p]
        assert np.abs(gam_fd - gam_sym[p]).max() <= 1e-5 * max(_scale(gam_sym[p]), 1.0)
        assert np.abs(R_fd - R_sym).max() <= 1e-5 * max(_scale(R_sym), 1.0)


def test_dense_storage_shapes(melvin_sampled):
    s = melvin_sampled
    P = s.points
    assert s["R"].shape == (P, 4, 4, 4, 4)
    assert s["nablaR"].shape == (P, 4, 4, 4, 4, 4)
    assert s["RdotR"].shape == (P,) + (4,) * 6
    for idx in itertools.islice(itertools.product(range(4), repeat=2), 4):
        assert s["S"][(0,) + idx] == s["S"][(0,) + idx[::-1]]
