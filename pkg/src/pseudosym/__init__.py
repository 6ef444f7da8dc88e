"""Curvature engine and pseudosymmetry classifier for semi-Riemannian metrics."""

__version__ = "0.1.0"

from .expr import Evaluator, Expr, differentiate, parse, simplify, to_string  # noqa: E402
from .metric import (  # noqa: E402
    DegenerateMetricError, EmptyGridError, MetricError, MetricFileError, MetricSpec, SampleGrid,
    default_grid, dump_metric, load_metric, make_grid,
)
from .curvature import Geometry, TensorField  # noqa: E402
from .classifier import Classification, Tolerance, classify, sample  # noqa: E402

__all__ = [
    "Classification", "DegenerateMetricError", "EmptyGridError", "Evaluator", "Expr", "Geometry",
    "MetricError", "MetricFileError", "MetricSpec", "SampleGrid", "TensorField", "Tolerance",
    "classify", "default_grid", "differentiate", "dump_metric", "load_metric", "make_grid",
    "parse", "sample", "simplify", "to_string",
]
