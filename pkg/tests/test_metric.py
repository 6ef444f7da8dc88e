import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pseudosym import catalog
from pseudosym import expr as ex
from pseudosym.curvature import sample_array
from pseudosym.metric import (
    Chart, DegenerateMetricError, EmptyGridError, MetricError, MetricFileError, SampleGrid,
    default_grid, dump_metric, inverse_metric, load_metric, make_grid, metric_from_dict,
    metric_from_entries, numeric_matrix, parse_grid_flag, signature_at,
)

WEYL_FORM = """
name: weyl_form
coordinates: [t, r, z, phi]
signature: [1, 3]
parameters: {{B0: 1.0}}
components:
  - "1 1 : -exp(2*({psi}))"
  - "2 2 : exp(-2*({psi}))*exp(2*({lam}))"
  - "3 3 : exp(-2*({psi}))*exp(2*({lam}))"
  - "4 4 : exp(-2*({psi}))*r^2"
domain: ["r > 0"]
exceptional: ["4 - B0^2*r^2"]
fixed: {{t: 0, z: 0, phi: 0}}
grid: {{r: [0.5, 0.8, 1.0, 1.3, 1.7, 2.5, 3.0, 4.0]}}
"""
LN_U = "ln(1 + B0^2*r^2/4)"


def _eval_matrix(arr, grid):
    ev = ex.Evaluator(grid.bindings())
    return sample_array(arr, ev)


def test_melvin_inverse_entry():
    m = catalog.melvin(1.0).metric
    grid = make_grid(m, {"r": [1.0]}, {"B0": 1.0})
    inv = _eval_matrix(inverse_metric(m), grid)[0]
    assert inv[3, 3] == pytest.approx(1.5625, rel=1e-14)
    assert numeric_matrix(m, {"r": 1.0})[0, 0] == pytest.approx(-1.5625, rel=1e-15)


def test_minkowski_inverse():
    m = catalog.minkowski_cylindrical().metric
    grid = default_grid(m)
    inv = _eval_matrix(inverse_metric(m), grid)
    r = grid.bindings()["r"]
    for p in range(len(grid)):
        np.testing.assert_allclose(inv[p], np.diag([-1, 1, 1, 1 / r[p] ** 2]), rtol=1e-15)


def test_identity_inverse():
    m = metric_from_entries(("x", "y", "z"), {(1, 1): 1, (2, 2): 1, (3, 3): 1})
    inv = inverse_metric(m)
    assert all(inv[a, b] is (ex.ONE if a == b else ex.ZERO) for a in range(3) for b in range(3))


def test_non_diagonal_inverse_is_inverse():
    m = metric_from_entries(("x", "y", "z"), {(1, 1): "2 + x^2", (1, 2): "sin(y)", (2, 2): "3 + y",
                                               (3, 3): "exp(x)", (1, 3): "x*y/5"},
                            domain=(ex.parse("3 + y"),))
    grid = make_grid(m, {"x": [0.1, 0.7], "y": [0.2, 1.5], "z": [0.0]})
    g = _eval_matrix(m.matrix(), grid)
    inv = _eval_matrix(inverse_metric(m), grid)
    np.testing.assert_allclose(np.einsum("pac,pcb->pab", inv, g), np.broadcast_to(np.eye(3), g.shape),
                               atol=1e-12)


def test_symmetric_completion_and_conflict():
    m = metric_from_entries(("x", "y", "z"), {(1, 1): 1, (1, 2): "x", (2, 2): 1, (3, 3): 1})
    assert m.components[0][1] is m.components[1][0]
    with pytest.raises(MetricError):
        metric_from_entries(("x", "y", "z"), {(1, 2): "x", (2, 1): "y", (1, 1): 1, (2, 2): 1, (3, 3): 1})


def test_identically_degenerate_metric():
    m = metric_from_entries(("x", "y", "z"), {(1, 1): "x - x", (2, 2): 1, (3, 3): 1})
    with pytest.raises(DegenerateMetricError):
        inverse_metric(m)
    with pytest.raises(DegenerateMetricError):
        default_grid(m)


def test_signatures():
    assert signature_at(catalog.melvin(1.0).metric, {"r": 1.0}) == (1, 3)
    assert signature_at(catalog.melvin(1.0).metric, {"r": 3.3}) == (1, 3)
    assert signature_at(catalog.base_3metric("ln(1+r)").metric, {"r": 1.0}) == (1, 2)
    euclid = metric_from_entries(("x", "y", "z"), {(1, 1): 1, (2, 2): 1, (3, 3): 1})
    assert signature_at(euclid, {"x": 0, "y": 0, "z": 0}) == (0, 3)


def test_degenerate_point():
    m = metric_from_entries(("x", "y", "z"), {(1, 1): "x - 1", (2, 2): 1, (3, 3): 1})
    with pytest.raises(DegenerateMetricError):
        signature_at(m, {"x": 1.0, "y": 0.0, "z": 0.0})
    with pytest.raises(DegenerateMetricError):
        make_grid(m, {"x": [1.0]})


def test_declared_signature_is_enforced():
    m = metric_from_entries(("x", "y", "z"), {(1, 1): "x - 1", (2, 2): 1, (3, 3): 1}, signature=(1, 2))
    make_grid(m, {"x": [0.5]})
    with pytest.raises(MetricError):
        make_grid(m, {"x": [2.0]})


def test_chart_rules():
    with pytest.raises(MetricError):
        Chart(("x", "x", "y"))


def test_melvin_grid_avoids_locus():
    m = catalog.melvin(1.0).metric
    grid = default_grid(m, {"B0": 1.0})
    r = grid.bindings()["r"]
    assert len(grid) >= 8
    assert np.all(r > 0) and np.all(np.abs(r - 2.0) > 1e-6)
    with pytest.raises(EmptyGridError):
        make_grid(m, {"r": [2.0]}, {"B0": 1.0})
    assert len(make_grid(m, {"r": [1.0, 2.0, 3.0]}, {"B0": 1.0})) == 2


def test_random_grid_is_deterministic_and_in_domain():
    m = metric_from_entries(("t", "r", "z"), {(1, 1): "-exp(2*ln(1+r))", (2, 2): "exp(2*ln(1+r))",
                                               (3, 3): "r^2"}, domain=(ex.parse("r"),))
    a, b = default_grid(m), default_grid(m)
    assert len(a) >= 8
    np.testing.assert_array_equal(a.points, b.points)
    assert np.all(a.bindings()["r"] > 0)


def test_grid_flag_forms():
    assert parse_grid_flag("r=0.5:4:8")[1] == pytest.approx(list(np.linspace(0.5, 4, 8)))
    assert parse_grid_flag("r=2") == ("r", [2.0])
    assert parse_grid_flag("r=1,1.5") == ("r", [1.0, 1.5])
    with pytest.raises(MetricError):
        parse_grid_flag("r")
    with pytest.raises(MetricError):
        parse_grid_flag("r=a:b:c")


def test_unknown_parameter_rejected():
    with pytest.raises(MetricError):
        default_grid(catalog.melvin(1.0).metric, {"B1": 2.0})


def test_grid_describe_is_plain():
    grid = default_grid(catalog.melvin(1.0).metric)
    d = grid.describe()
    assert d["coordinates"] == ["t", "r", "z", "phi"]
    assert isinstance(d["points"][0][1], float)
    assert isinstance(grid, SampleGrid)


@pytest.mark.parametrize("name", ["melvin", "minkowski", "conformally_flat_example", "pseudosymmetric_example"])
def test_metric_file_roundtrip(name, tmp_path):
    m = catalog.lookup(name).metric
    path = tmp_path / "m.yaml"
    path.write_text(dump_metric(m))
    back = load_metric(path)
    assert back.coordinates == m.coordinates
    assert dump_metric(back) == dump_metric(m)
    grid = default_grid(m)
    np.testing.assert_allclose(_eval_matrix(back.matrix(), grid), _eval_matrix(m.matrix(), grid), rtol=1e-15)


def test_metric_file_errors(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("coordinates: [x, y, z]\ncomponents: ['1 1 : 1 +* x']\n")
    with pytest.raises(ex.ExprSyntaxError):
        load_metric(bad)
    bad.write_text("coordinates: [x, y, z]\ncomponents: ['one one : 1']\n")
    with pytest.raises(MetricFileError):
        load_metric(bad)
    bad.write_text("- just a list\n")
    with pytest.raises(MetricFileError):
        load_metric(bad)
    bad.write_text("coordinates: [x, y, z]\ndimension: 4\n")
    with pytest.raises(MetricFileError):
        load_metric(bad)


def test_weyl_form_reproduces_melvin(tmp_path):
    """The Weyl form matches Melvin for psi = ln U, lambda = 2 psi (not psi = 2 lambda)."""
    mel = catalog.melvin(1.0).metric
    grid = default_grid(mel)
    target = _eval_matrix(mel.matrix(), grid)
    good = metric_from_dict(__import__("yaml").safe_load(WEYL_FORM.format(psi=LN_U, lam=f"2*{LN_U}")))
    np.testing.assert_allclose(_eval_matrix(good.matrix(), grid), target, rtol=1e-14)
    swapped = metric_from_dict(__import__("yaml").safe_load(WEYL_FORM.format(psi=f"2*{LN_U}", lam=LN_U)))
    assert not np.allclose(_eval_matrix(swapped.matrix(), grid), target)
    path = tmp_path / "weyl.yaml"
    path.write_text(WEYL_FORM.format(psi=LN_U, lam=f"2*{LN_U}"))
    assert load_metric(path).name == "weyl_form"


@given(st.floats(0.3, 3.0), st.floats(0.3, 3.0))
def test_scaled_metric_keeps_signature(c, r):
    m = catalog.melvin(1.0).metric
    assert signature_at(m.scaled(c * c), {"r": r if abs(r - 2) > 1e-3 else 1.0}) == (1, 3)
