"""Koszul form, Christoffel symbols of the first kind, connection forms and
the radical-stationary / semi-regular classifications.

The Koszul form

    K(X,Y,Z) = 1/2 { X<Y,Z> + Y<Z,X> - Z<X,Y> - <X,[Y,Z]> + <Y,[Z,X]> + <Z,[X,Y]> }

is evaluated literally from jets of the metric and of the field components.
With order-1 inputs it yields a value; with order-2 inputs it yields a jet
carrying its own gradient, which is what the curvature needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fields import Chart, MetricField, VectorField, bracket_jets, inner_jets
from .jet import Jet, directional, value_of
from .radical import (
    DEFAULT_RANK_TOL,
    ContractionResult,
    RadicalDecomposition,
    cocontract,
    decompose_matrix,
    image_residual,
)

RADICAL_STATIONARY_NOTE = (
    "checked on coordinate pairs at the sampled points only; this suffices because "
    "K(X,Y,.) is function-linear in X, and K(X,fY,.) = f K(X,Y,.) + X(f) Y-flat "
    "where the extra term always lies in the image of the metric"
)


def kosz_jets(G, X, Y, Z):
    """Koszul form from jets; the result is one order below the inputs."""
    t = directional(inner_jets(G, Y, Z), X)
    t = t + directional(inner_jets(G, Z, X), Y)
    t = t - directional(inner_jets(G, X, Y), Z)
    t = t - inner_jets(G, X, bracket_jets(Y, Z))
    t = t + inner_jets(G, Y, bracket_jets(Z, X))
    t = t + inner_jets(G, Z, bracket_jets(X, Y))
    return 0.5 * t


def _unit(n: int, k: int) -> list[float]:
    return [1.0 if i == k else 0.0 for i in range(n)]


@dataclass(frozen=True)
class ChristoffelFirst:
    """``gamma[i, j, k] = K(d_i, d_j, d_k)`` and ``dgamma[i, j, k, l] = d_l gamma[i, j, k]``."""

    point: tuple[float, ...]
    gamma: np.ndarray
    dgamma: np.ndarray


def christoffel_from_jets(G) -> tuple[np.ndarray, np.ndarray]:
    n = len(G)
    dG = np.array([[G[i][j].grad for j in range(n)] for i in range(n)])  # dG[i,j,k] = d_k g_ij
    gamma = 0.5 * (
        np.transpose(dG, (2, 0, 1))      # d_i g_jk
        + np.transpose(dG, (0, 2, 1))    # d_j g_ik
        - dG                             # d_k g_ij
    )
    if G[0][0].hess is None:
        return gamma, None
    H = np.array([[G[i][j].hess for j in range(n)] for i in range(n)])  # H[i,j,k,l] = d_k d_l g_ij
    dgamma = 0.5 * (
        np.transpose(H, (2, 0, 1, 3))
        + np.transpose(H, (0, 2, 1, 3))
        - H
    )
    return gamma, dgamma


class KoszulEvaluator:
    """Pointwise Koszul-form engine for one metric.

    Every evaluation at a point shares one :class:`RadicalDecomposition`.
    """

    def __init__(self, metric: MetricField, rank_tol: float = DEFAULT_RANK_TOL):
        self.metric = metric
        self.rank_tol = rank_tol
        self._decomps: dict = {}

    @property
    def chart(self) -> Chart:
        return self.metric.chart

    @property
    def dim(self) -> int:
        return self.metric.chart.dim

    def decomposition(self, p: Sequence[float]) -> RadicalDecomposition:
        p = self.chart.check_point(p)
        d = self._decomps.get(p)
        if d is None:
            if len(self._decomps) > 1024:
                self._decomps.clear()
            d = self._decomps[p] = decompose_matrix(self.metric.at(p), self.rank_tol, p)
        return d

    def coordinate_field(self, i: int) -> VectorField:
        return VectorField.coordinate(self.chart, i)

    # -- Koszul form ------------------------------------------------------

    def kosz(self, X: VectorField, Y: VectorField, Z: VectorField, p: Sequence[float]) -> float:
        p = self.chart.check_point(p)
        G = self.metric.jets(p, 1)
        return value_of(kosz_jets(G, X.jets(p, 1), Y.jets(p, 1), Z.jets(p, 1)))

    def kosz_jet(self, X: VectorField, Y: VectorField, Z: VectorField, p: Sequence[float]) -> Jet:
        """K(X,Y,Z) together with its coordinate gradient at p."""
        p = self.chart.check_point(p)
        G = self.metric.jets(p, 2)
        return kosz_jets(G, X.jets(p, 2), Y.jets(p, 2), Z.jets(p, 2))

    def covector(self, X: VectorField, Y: VectorField, p: Sequence[float]) -> np.ndarray:
        """Components K(X, Y, d_k) of the one-form K(X, Y, .)."""
        p = self.chart.check_point(p)
        n = self.dim
        G = self.metric.jets(p, 1)
        Xj, Yj = X.jets(p, 1), Y.jets(p, 1)
        return np.array([value_of(kosz_jets(G, Xj, Yj, _unit(n, k))) for k in range(n)])

    def kosz_contract(
        self, X: VectorField, Y: VectorField, Z: VectorField, T: VectorField, p: Sequence[float]
    ) -> ContractionResult:
        """K(X,Y,.) K(Z,T,.) contracted with the pointwise pseudo-inverse."""
        d = self.decomposition(p)
        return cocontract(d, self.covector(X, Y, p), self.covector(Z, T, p))

    def christoffel_first(self, p: Sequence[float]) -> ChristoffelFirst:
        p = self.chart.check_point(p)
        gamma, dgamma = christoffel_from_jets(self.metric.jets(p, 2))
        return ChristoffelFirst(p, gamma, dgamma)

    def connection_form(self, X: VectorField, Y: VectorField) -> "ConnectionForm":
        return ConnectionForm(self, X, Y)


@dataclass(frozen=True)
class ConnectionForm:
    """The one-form Z -> K(Z, X, Y)."""

    evaluator: KoszulEvaluator
    X: VectorField
    Y: VectorField

    @property
    def chart(self) -> Chart:
        return self.evaluator.chart

    def jets(self, p: Sequence[float]) -> list[Jet]:
        p = self.chart.check_point(p)
        ev = self.evaluator
        G = ev.metric.jets(p, 2)
        Xj, Yj = self.X.jets(p, 2), self.Y.jets(p, 2)
        n = ev.dim
        out = []
        for k in range(n):
            c = kosz_jets(G, _unit(n, k), Xj, Yj)
            out.append(c if isinstance(c, Jet) else Jet.constant(c, n, 1))
        return out

    def at(self, p: Sequence[float]) -> np.ndarray:
        """Components omega_XY(d_k) at p."""
        p = self.chart.check_point(p)
        ev = self.evaluator
        G = ev.metric.jets(p, 1)
        Xj, Yj = self.X.jets(p, 1), self.Y.jets(p, 1)
        return np.array([value_of(kosz_jets(G, _unit(ev.dim, k), Xj, Yj)) for k in range(ev.dim)])

    def __call__(self, Z: VectorField, p: Sequence[float]) -> float:
        return self.evaluator.kosz(Z, self.X, self.Y, p)


# -- module-level conveniences ---------------------------------------------


def kosz(g: MetricField, X, Y, Z, p) -> float:
    return KoszulEvaluator(g).kosz(X, Y, Z, p)


def christoffel_first(g: MetricField, p) -> ChristoffelFirst:
    return KoszulEvaluator(g).christoffel_first(p)


def connection_form(g: MetricField, X, Y) -> ConnectionForm:
    return KoszulEvaluator(g).connection_form(X, Y)


def kosz_contract(g: MetricField, X, Y, Z, T, p, rank_tol: float = DEFAULT_RANK_TOL) -> ContractionResult:
    return KoszulEvaluator(g, rank_tol).kosz_contract(X, Y, Z, T, p)


# -- classification ---------------------------------------------------------

NON_DEGENERATE = "non-degenerate"
RADICAL_STATIONARY = "radical-stationary"
NOT_RADICAL_STATIONARY = "not-radical-stationary"
SEMI_REGULAR_PROBE_PASSED = "semi-regular-probe-passed"
VERDICTS = (NON_DEGENERATE, RADICAL_STATIONARY, NOT_RADICAL_STATIONARY, SEMI_REGULAR_PROBE_PASSED)


@dataclass(frozen=True)
class PointClassification:
    point: tuple[float, ...]
    rank: int
    max_residual: float
    worst_pair: tuple[int, int]


@dataclass(frozen=True)
class ProbeReport:
    fields: str
    path: tuple[tuple[float, ...], tuple[float, ...]]
    left_samples: tuple[float, ...]
    right_samples: tuple[float, ...]
    steps: tuple[float, ...]
    left_limit: float
    right_limit: float
    left_error: float
    right_error: float
    pointwise: float
    pointwise_residual: float
    tol: float
    failure: str = ""

    @property
    def converged(self) -> bool:
        return (
            not self.failure
            and math.isfinite(self.left_limit)
            and math.isfinite(self.right_limit)
            and self.left_error <= self.tol * max(1.0, abs(self.left_limit))
            and self.right_error <= self.tol * max(1.0, abs(self.right_limit))
        )

    @property
    def limits_agree(self) -> bool:
        return self.converged and abs(self.left_limit - self.right_limit) <= self.tol * max(
            1.0, abs(self.left_limit), abs(self.right_limit)
        )

    @property
    def pointwise_matches_limit(self) -> bool:
        if not self.limits_agree:
            return False
        lim = 0.5 * (self.left_limit + self.right_limit)
        return abs(self.pointwise - lim) <= self.tol * max(1.0, abs(lim))

    @property
    def passed(self) -> bool:
        return self.limits_agree


@dataclass(frozen=True)
class ClassificationReport:
    points: tuple[PointClassification, ...]
    tol: float
    dim: int
    probes: tuple[ProbeReport, ...] = ()
    note: str = RADICAL_STATIONARY_NOTE

    @property
    def max_residual(self) -> float:
        return max(pc.max_residual for pc in self.points)

    @property
    def radical_stationary(self) -> bool:
        return self.max_residual <= self.tol

    @property
    def verdict(self) -> str:
        if not self.radical_stationary:
            return NOT_RADICAL_STATIONARY
        if self.probes and all(pr.passed for pr in self.probes):
            return SEMI_REGULAR_PROBE_PASSED
        if all(pc.rank == self.dim for pc in self.points):
            return NON_DEGENERATE
        return RADICAL_STATIONARY

    def with_probes(self, probes: Sequence[ProbeReport]) -> "ClassificationReport":
        return ClassificationReport(self.points, self.tol, self.dim, tuple(probes), self.note)


def radical_stationary_check(
    g: MetricField | KoszulEvaluator,
    points: Sequence[Sequence[float]],
    tol: float = 1e-8,
) -> ClassificationReport:
    """Residual of K(d_i, d_j, .) against the image of the metric at each point.

    The residual is ``||(I - P) K_ij|| / max(1, ||K_ij||)``; the verdict holds
    at the sampled points only.
    """
    ev = g if isinstance(g, KoszulEvaluator) else KoszulEvaluator(g)
    if not points:
        raise ValueError("need at least one sample point")
    out = []
    for p in points:
        p = ev.chart.check_point(p)
        d = ev.decomposition(p)
        gamma = ev.christoffel_first(p).gamma
        worst, pair = 0.0, (0, 0)
        for i in range(ev.dim):
            for j in range(ev.dim):
                row = gamma[i, j]
                r = image_residual(d, row) / max(1.0, float(np.linalg.norm(row)))
                if r > worst:
                    worst, pair = r, (i, j)
        out.append(PointClassification(p, d.rank, worst, pair))
    return ClassificationReport(tuple(out), tol, ev.dim)


def richardson(values: Sequence[float]) -> tuple[float, float]:
    """Extrapolate samples taken at steps h, h/2, h/4, ... to step 0.

    Returns ``(limit, error_estimate)`` from the diagonal of the Richardson
    table for an error expansion in integer powers of the step.
    """
    table = [[float(v)] for v in values]
    for k in range(1, len(values)):
        for m in range(1, k + 1):
            prev = table[k][m - 1]
            table[k].append(prev + (prev - table[k - 1][m - 1]) / (2.0**m - 1.0))
    last = table[-1][-1]
    if len(values) < 2:
        return last, math.inf
    return last, abs(last - table[-2][-2])


def _one_sided_limit(samples: Sequence[float]) -> tuple[float, float]:
    mags = [abs(s) for s in samples]
    tail = mags[-4:]
    growing = len(tail) >= 4 and all(b >= 1.5 * a and a > 0 for a, b in zip(tail, tail[1:]))
    if growing:
        return math.copysign(math.inf, samples[-1]), math.inf
    lim, err = richardson(samples)
    if not math.isfinite(lim):
        return math.nan, math.inf
    return lim, err


def semi_regular_probe(
    g: MetricField | KoszulEvaluator,
    X: VectorField,
    Y: VectorField,
    Z: VectorField,
    T: VectorField,
    start: Sequence[float],
    end: Sequence[float],
    samples: int = 8,
    tol: float = 1e-6,
) -> ProbeReport:
    """Probe smoothness of K(X,Y,.)K(Z,T,.) across a degeneracy locus.

    The segment from ``start`` to ``end`` is assumed to cross the locus at its
    midpoint.  Samples approach the midpoint from both sides at steps
    1/4, 1/8, ... of the segment, skip the midpoint itself, and are
    Richardson-extrapolated.  A pass is evidence, not proof.
    """
    ev = g if isinstance(g, KoszulEvaluator) else KoszulEvaluator(g)
    a = np.asarray(ev.chart.check_point(start))
    b = np.asarray(ev.chart.check_point(end))
    steps = tuple(0.25 * 0.5**k for k in range(samples))

    def at(t: float) -> tuple[float, ...]:
        return tuple(float(x) for x in a + t * (b - a))

    left, right = [], []
    failure = ""
    try:
        for h in steps:
            left.append(ev.kosz_contract(X, Y, Z, T, at(0.5 - h)).value)
            right.append(ev.kosz_contract(X, Y, Z, T, at(0.5 + h)).value)
        mid = ev.kosz_contract(X, Y, Z, T, at(0.5))
    except ArithmeticError as exc:
        failure = f"evaluation failed: {exc}"
        mid = None
    if not failure and not all(math.isfinite(v) for v in left + right):
        failure = "non-finite sample"
    if failure:
        ll = rl = math.nan
        le = re_ = math.inf
    else:
        ll, le = _one_sided_limit(left)
        rl, re_ = _one_sided_limit(right)
        if not (math.isfinite(ll) and math.isfinite(rl)):
            failure = "extrapolation is not finite"
    return ProbeReport(
        fields=" ".join(f.describe() for f in (X, Y, Z, T)),
        path=(tuple(a.tolist()), tuple(b.tolist())),
        left_samples=tuple(left),
        right_samples=tuple(right),
        steps=steps,
        left_limit=ll,
        right_limit=rl,
        left_error=le,
        right_error=re_,
        pointwise=mid.value if mid is not None else math.nan,
        pointwise_residual=mid.max_relative_residual if mid is not None else math.nan,
        tol=tol,
        failure=failure,
    )
