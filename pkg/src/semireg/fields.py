"""Charts, vector fields, one-forms and the metric on a single coordinate chart.

Everything lives in the coordinate basis.  Pointwise operations take a point
as a plain tuple of coordinates and return numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Protocol, Sequence

import numpy as np

from . import expr as ex
from .expr import Expr
from .jet import Jet, directional

MAX_DIM = 8


@dataclass(frozen=True)
class Chart:
    coords: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        ex.check_coordinate_names(self.coords)
        if not 1 <= len(self.coords) <= MAX_DIM:
            raise ValueError(f"chart dimension must be in 1..{MAX_DIM}, got {len(self.coords)}")

    @property
    def dim(self) -> int:
        return len(self.coords)

    def parse(self, text: str) -> Expr:
        return ex.parse(text, self.coords)

    def check_point(self, p: Sequence[float]) -> tuple[float, ...]:
        if len(p) != self.dim:
            raise ValueError(f"point {tuple(p)} has {len(p)} coordinates, chart has {self.dim}")
        return tuple(float(x) for x in p)


def as_expr(chart: Chart, e) -> Expr:
    """Accept text, a number or an existing tree as an expression on ``chart``."""
    if isinstance(e, str):
        return chart.parse(e)
    if isinstance(e, (int, float)):
        return ex.num(e)
    if ex.max_coord_index(e) >= chart.dim:
        raise ValueError("expression references a coordinate outside the chart")
    return e


class _JetCache:
    """Small per-object memo of point -> jets; entries are never mutated."""

    def __init__(self, size: int = 512):
        self.size = size
        self.data: dict = {}

    def get(self, key, make):
        try:
            return self.data[key]
        except KeyError:
            if len(self.data) >= self.size:
                self.data.clear()
            value = self.data[key] = make()
            return value


@dataclass(frozen=True)
class VectorField:
    chart: Chart
    components: tuple[Expr, ...]
    _cache: _JetCache = field(default_factory=_JetCache, compare=False, hash=False, repr=False)

    def __post_init__(self):
        comps = tuple(as_expr(self.chart, c) for c in self.components)
        if len(comps) != self.chart.dim:
            raise ValueError(f"expected {self.chart.dim} components, got {len(comps)}")
        object.__setattr__(self, "components", comps)

    @classmethod
    def from_text(cls, chart: Chart, texts: Sequence[str]) -> "VectorField":
        return cls(chart, tuple(chart.parse(t) for t in texts))

    @classmethod
    def coordinate(cls, chart: Chart, i: int) -> "VectorField":
        """The coordinate field d/dx^i."""
        return cls(chart, tuple(ex.Num(1.0 if k == i else 0.0) for k in range(chart.dim)))

    @classmethod
    def zero(cls, chart: Chart) -> "VectorField":
        return cls(chart, tuple(ex.Num(0.0) for _ in range(chart.dim)))

    def values(self, p: Sequence[float]) -> np.ndarray:
        return np.array([ex.eval_value(c, p) for c in self.components])

    def jets(self, p: Sequence[float], order: int = 2) -> list[Jet]:
        key = (tuple(p), order)
        return self._cache.get(key, lambda: [ex.eval_jet(c, p, order) for c in self.components])

    def scaled(self, f) -> "VectorField":
        """The field f*X for a scalar expression (or number) f."""
        f = as_expr(self.chart, f)
        return VectorField(self.chart, tuple(ex.mul(f, c) for c in self.components))

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.chart, tuple(ex.add(a, b) for a, b in zip(self.components, other.components)))

    def __mul__(self, c: float) -> "VectorField":
        return self.scaled(c)

    __rmul__ = __mul__

    def describe(self) -> str:
        return "(" + ", ".join(ex.to_text(c, self.chart.coords) for c in self.components) + ")"


@dataclass(frozen=True)
class MetricField:
    """Symmetric matrix of expressions; only the upper triangle is stored."""

    chart: Chart
    upper: tuple[Expr, ...]
    _cache: _JetCache = field(default_factory=_JetCache, compare=False, hash=False, repr=False)

    def __post_init__(self):
        n = self.chart.dim
        if len(self.upper) != n * (n + 1) // 2:
            raise ValueError("upper triangle has the wrong number of entries")
        object.__setattr__(self, "upper", tuple(as_expr(self.chart, e) for e in self.upper))

    @classmethod
    def from_entries(cls, chart: Chart, entries: Mapping[tuple[int, int], object]) -> "MetricField":
        """Build from ``{(i, j): expression}`` with ``i <= j``; missing entries are 0."""
        n = chart.dim
        upper = []
        for (i, j) in entries:
            if not (0 <= i <= j < n):
                raise ValueError(f"entry ({i}, {j}) is not in the upper triangle of a {n}x{n} metric")
        for i in range(n):
            for j in range(i, n):
                upper.append(as_expr(chart, entries.get((i, j), 0.0)))
        return cls(chart, tuple(upper))

    @classmethod
    def diagonal(cls, chart: Chart, diag: Sequence) -> "MetricField":
        return cls.from_entries(chart, {(i, i): d for i, d in enumerate(diag)})

    def _index(self, i: int, j: int) -> int:
        if i > j:
            i, j = j, i
        n = self.chart.dim
        return i * n - i * (i - 1) // 2 + (j - i)

    def entry(self, i: int, j: int) -> Expr:
        return self.upper[self._index(i, j)]

    def at(self, p: Sequence[float]) -> np.ndarray:
        n = self.chart.dim
        G = np.empty((n, n))
        for i in range(n):
            for j in range(i, n):
                G[i, j] = G[j, i] = ex.eval_value(self.entry(i, j), p)
        return G

    def jets(self, p: Sequence[float], order: int = 2) -> list[list[Jet]]:
        """n x n nested list of jets; (i, j) and (j, i) are the same object."""
        def make():
            n = self.chart.dim
            flat = [ex.eval_jet(e, p, order) for e in self.upper]
            return [[flat[self._index(i, j)] for j in range(n)] for i in range(n)]

        return self._cache.get((tuple(p), order), make)


@dataclass(frozen=True)
class PointwiseCovector:
    point: tuple[float, ...]
    components: np.ndarray

    def __call__(self, v: Sequence[float]) -> float:
        return float(self.components @ np.asarray(v, dtype=float))


class EvaluableOneForm(Protocol):
    chart: Chart

    def jets(self, p: Sequence[float]) -> list[Jet]:
        """Component jets (order >= 1) at ``p``."""


@dataclass(frozen=True)
class ExprOneForm:
    """One-form given directly by component expressions."""

    chart: Chart
    components: tuple[Expr, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(as_expr(self.chart, c) for c in self.components))

    def jets(self, p: Sequence[float]) -> list[Jet]:
        return [ex.eval_jet(c, p, 1) for c in self.components]


@dataclass(frozen=True)
class FlatForm:
    """The one-form X-flat = g(X, .), evaluated from metric and field jets."""

    metric: MetricField
    field: VectorField

    @property
    def chart(self) -> Chart:
        return self.metric.chart

    def jets(self, p: Sequence[float]) -> list[Jet]:
        G = self.metric.jets(p)
        X = self.field.jets(p)
        return [lower_index(G, X, j) for j in range(len(X))]


# -- jet-level helpers shared with the Koszul machinery ---------------------


def lower_index(G, X, j: int):
    acc = G[0][j] * X[0]
    for i in range(1, len(X)):
        acc = acc + G[i][j] * X[i]
    return acc


def inner_jets(G, X, Y):
    """<X, Y> as a jet from metric and component jets."""
    n = len(X)
    acc = 0.0
    for i in range(n):
        row = G[i][0] * Y[0]
        for j in range(1, n):
            row = row + G[i][j] * Y[j]
        acc = acc + X[i] * row
    return acc


def bracket_jets(X, Y):
    """Components of [X, Y] one order below the inputs."""
    n = len(X)
    return [directional(Y[k], X) - directional(X[k], Y) for k in range(n)]


# -- pointwise operations ---------------------------------------------------


def metric_eval(g: MetricField, p: Sequence[float]) -> np.ndarray:
    return g.at(g.chart.check_point(p))


def lie_bracket(X: VectorField, Y: VectorField, p: Sequence[float]) -> np.ndarray:
    """[X, Y]^k = X^i d_i Y^k - Y^i d_i X^k at p."""
    p = X.chart.check_point(p)
    bx = X.jets(p, 1)
    by = Y.jets(p, 1)
    return np.array([b.value for b in bracket_jets(bx, by)])


def flat(g: MetricField, X: VectorField, p: Sequence[float]) -> PointwiseCovector:
    p = g.chart.check_point(p)
    return PointwiseCovector(p, g.at(p) @ X.values(p))


def lie_derivative_metric(g: MetricField, Y: VectorField, p: Sequence[float]) -> np.ndarray:
    """(L_Y g)_ij = Y^k d_k g_ij + g_kj d_i Y^k + g_ik d_j Y^k."""
    p = g.chart.check_point(p)
    n = g.chart.dim
    G = g.jets(p, 1)
    Yj = Y.jets(p, 1)
    y = np.array([c.value for c in Yj])
    dY = np.array([c.grad for c in Yj])  # dY[k, i] = d_i Y^k
    Gv = np.array([[G[i][j].value for j in range(n)] for i in range(n)])
    dG = np.array([[G[i][j].grad for j in range(n)] for i in range(n)])  # dG[i, j, k] = d_k g_ij
    L = dG @ y + dY.T @ Gv + Gv @ dY
    return 0.5 * (L + L.T)


def exterior_derivative_oneform(omega: EvaluableOneForm, p: Sequence[float]) -> np.ndarray:
    """(d omega)_ij = d_i omega_j - d_j omega_i."""
    p = omega.chart.check_point(p)
    jac = np.array([c.grad for c in omega.jets(p)])  # jac[j, i] = d_i omega_j
    return jac.T - jac


def two_form_apply(F: np.ndarray, Y: Sequence[float], Z: Sequence[float]) -> float:
    return float(np.asarray(Y) @ F @ np.asarray(Z))
