"""Curvature tensors and operator products sampled on a grid of points.

Symbolic components are evaluated once per grid; operator products such as
``R.C`` or ``Q(S, R)`` are then formed numerically in float arrays with a
leading point axis.
"""

from __future__ import annotations

import re
from typing import Mapping

import numpy as np

from .curvature import Geometry, TensorField, sample_array
from .metric import SampleGrid
from .operators import curvature_action, q_operator

CURVATURE_NAMES = ("R", "C", "P", "W", "K", "G")
_DOT = re.compile(r"^([RCPWKG])dot(\w+)$")
_Q = re.compile(r"^Q(g|S2|S3|S4|S)(\w+)$")


class Sampled:
    """Lazy cache of sampled tensors, keyed by name.

    Names: ``g, ginv, Gamma, R, S, S2..S4, kappa, C, P, W, K, G``, extra fields,
    ``nabla<X>`` (derivative index last), ``<A>dot<T>`` for the curvature
    action and ``Q<B><T>`` for the Tachibana operator.
    """

    def __init__(self, geometry: Geometry, grid: SampleGrid,
                 fields: Mapping[str, TensorField] | None = None):
        self.geometry = geometry
        self.grid = grid
        self.fields = dict(fields or {})
        self.ev = geometry.evaluator(grid)
        self._cache: dict[str, np.ndarray] = {}

    @property
    def points(self) -> int:
        return len(self.grid)

    @property
    def n(self) -> int:
        return self.geometry.n

    def _flat(self, arr: np.ndarray) -> np.ndarray:
        arr = np.asarray(arr, dtype=float)
        return arr.reshape((self.points,) + arr.shape[len(self.ev.shape):])

    def _symbolic(self, name: str) -> np.ndarray:
        geo = self.geometry
        if name in self.fields:
            return self._flat(self.fields[name].sample(self.ev))
        if name == "ginv":
            return self._flat(sample_array(geo.ginv, self.ev))
        if name == "Gamma":
            return self._flat(sample_array(geo.connection.components, self.ev))
        if name == "kappa":
            return self._flat(self.ev.full(geo.kappa))
        if name.startswith("nabla") and name[5:] in self.fields:
            from .curvature import covariant_derivative
            key = f"_nabla_{name[5:]}"
            if key not in self.__dict__:
                self.__dict__[key] = covariant_derivative(self.fields[name[5:]], geo.connection)
            return self._flat(self.__dict__[key].sample(self.ev))
        return self._flat(geo.tensor(name).sample(self.ev))

    def __getitem__(self, name: str) -> np.ndarray:
        if name in self._cache:
            return self._cache[name]
        m = _DOT.match(name)
        q = _Q.match(name)
        if m:
            value = curvature_action(self[m.group(1)], self[m.group(2)], self["ginv"], valences=None)
        elif q:
            value = q_operator(self[q.group(1)], self[q.group(2)], valences=None)
        else:
            value = self._symbolic(name)
        self._cache[name] = value
        return value

    def __contains__(self, name: str) -> bool:
        try:
            self[name]
        except KeyError:
            return False
        return True
