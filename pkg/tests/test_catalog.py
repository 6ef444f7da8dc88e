import dataclasses

import numpy as np
import pytest

from pseudosym import catalog
from pseudosym import classifier as C
from pseudosym import expr as ex
from pseudosym.curvature import sample_array
from pseudosym.metric import default_grid, make_grid


def _golden(entry, s):
    return catalog.golden_check(entry, s.grid, s.__getitem__)


@pytest.fixture(scope="module")
def warped():
    entry = catalog.melvin_type("ln(1+r)")
    return entry, C.sample(entry.metric, default_grid(entry.metric))


def test_warped_golden_table(warped):
    entry, s = warped
    results = _golden(entry, s)
    assert len(results) == len(entry.golden)
    assert not [r.entry.label() for r in results if r.status == "FAIL"]
    for r in results:
        expected = "PASS" if r.entry.status == "exact" else "DISPUTED"
        assert r.status == expected, (r.entry.label(), r.detail)


def test_warped_golden_table_on_second_warp():
    entry = catalog.melvin_type("ln(2+r^3)")
    s = C.sample(entry.metric, default_grid(entry.metric))
    assert all(r.status in ("PASS", "DISPUTED") for r in _golden(entry, s))


def test_ricci_44_is_disputed(warped):
    entry, s = warped
    (r44,) = [r for r in _golden(entry, s) if r.entry.label() == "S_44"]
    assert r44.status == "DISPUTED"
    np.testing.assert_allclose(np.abs(r44.engine), np.abs(r44.printed), rtol=1e-10)


def test_base_golden_table(base_sampled):
    entry, s = base_sampled
    statuses = {r.entry.label(): r.status for r in _golden(entry, s)}
    assert statuses and "FAIL" not in statuses.values()


def test_melvin_golden_and_maxwell_entries(melvin_entry, melvin_sampled):
    results = _golden(melvin_entry, melvin_sampled)
    assert "FAIL" not in {r.status for r in results}
    assert any(r.entry.tensor in ("F", "QgF", "RF", "RdotF") for r in results)


def test_tampered_entry_fails(warped):
    entry, s = warped
    first = next(g for g in entry.golden if g.status == "exact")
    bad = dataclasses.replace(first, printed=f"1.001*({first.printed})")
    tampered = dataclasses.replace(entry, golden=(bad,))
    (res,) = _golden(tampered, s)
    assert res.status == "FAIL"
    assert res.max_rel_error == pytest.approx(0.001 / 1.001, rel=1e-6)


def test_wrong_correction_fails(warped):
    entry, s = warped
    typo = next(g for g in entry.golden if g.status == "typo" and g.corrected)
    broken = dataclasses.replace(typo, corrected=f"2*({typo.corrected})")
    (res,) = _golden(dataclasses.replace(entry, golden=(broken,)), s)
    assert res.status == "FAIL"


def test_melvin_is_melvin_type_with_log_warp(melvin_sampled):
    other = catalog.melvin_type("ln(1 + B0^2*r^2/4)")
    s = C.sample(other.metric, melvin_sampled.grid)
    for name in ("g", "R", "S", "C", "nablaR"):
        a, b = melvin_sampled[name], s[name]
        assert np.abs(a - b).max() <= 1e-12 * max(np.abs(a).max(), 1.0)


def test_maxwell_field(melvin_sampled, melvin_at_one):
    F = melvin_sampled["F"]
    np.testing.assert_array_equal(F, -np.swapaxes(F, 1, 2))
    assert melvin_at_one["F"][0, 1, 3] == pytest.approx(0.32, rel=1e-15)
    assert melvin_at_one["g"][0, 0, 0] == pytest.approx(-1.5625, rel=1e-15)
    # dF = 0: F depends on r only and has a single dr ^ dphi component
    dF = melvin_sampled["nablaF"]
    cyc = dF + np.einsum("pbca->pabc", dF) + np.einsum("pcab->pabc", dF)
    assert np.abs(cyc).max() <= 1e-12 * np.abs(dF).max()


def test_maxwell_field_value_against_warp(melvin_entry, melvin_sampled):
    B0 = 1.0
    r = melvin_sampled.grid.bindings()["r"]
    np.testing.assert_allclose(melvin_sampled["F"][:, 1, 3], 8 * B0 * r / (4 + B0 ** 2 * r ** 2) ** 2, rtol=1e-15)


def test_warp_bindings_are_derivatives(warped):
    entry, s = warped
    w = catalog.warp_bindings(entry, s.grid)
    r = w["r"]
    np.testing.assert_allclose(w["f"], np.log1p(r), rtol=1e-15)
    np.testing.assert_allclose(w["fp"], 1 / (1 + r), rtol=1e-15)
    np.testing.assert_allclose(w["fpp"], -1 / (1 + r) ** 2, rtol=1e-15)
    np.testing.assert_allclose(w["fppp"], 2 / (1 + r) ** 3, rtol=1e-15)


def test_example_metrics_have_their_property():
    cf = catalog.conformally_flat_example()
    s = C.sample(cf.metric, default_grid(cf.metric))
    assert np.abs(s["C"]).max() <= 1e-10 * np.abs(s["R"]).max()
    ps = catalog.pseudosymmetric_example()
    s = C.sample(ps.metric, default_grid(ps.metric))
    assert C.pseudosymmetry(s, "R", "R").verdict == "holds"


def test_lookup():
    assert catalog.lookup("melvin", {"B0": 0.5}).metric.parameters["B0"] == 0.5
    assert catalog.lookup("melvin_type:ln(1+r)").warp is ex.parse("ln(1+r)")
    assert catalog.lookup("base3:ln(1+r)").metric.dimension == 3
    with pytest.raises(KeyError):
        catalog.lookup("schwarzschild")
    with pytest.raises(ValueError):
        catalog.melvin(-1.0)
    with pytest.raises(ex.ExprError):
        catalog.melvin_type("ln(1 + z)")


def test_melvin_exceptional_locus_scales_with_field():
    m = catalog.melvin(0.5).metric
    grid = make_grid(m, {"r": [1.0, 4.0, 5.0]})
    assert sorted(grid.bindings()["r"].tolist()) == [1.0, 5.0]


def test_connection_symbolic_form():
    entry = catalog.melvin_type("ln(1+r)")
    grid = make_grid(entry.metric, {"r": [0.7]})
    from pseudosym.curvature import Geometry
    geo = Geometry(entry.metric)
    gam = sample_array(geo.connection.components, geo.evaluator(grid)).reshape(4, 4, 4)
    fp = 1 / 1.7
    assert gam[0, 0, 1] == pytest.approx(fp, rel=1e-14)
    assert gam[3, 1, 3] == pytest.approx(1 / 0.7 - fp, rel=1e-14)
