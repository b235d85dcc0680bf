"""Residual checks for the Koszul decomposition and the structural equations.

Each check computes a left and a right side along separate code paths:
exterior derivatives and Lie derivatives come from :mod:`semireg.fields`,
Koszul values and contractions from :mod:`semireg.koszul`, curvature from
:mod:`semireg.curvature`.  Only the metric and field jets are shared.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Sequence

import numpy as np

from . import expr as ex
from .curvature import RiemannEvaluator
from .fields import (
    FlatForm,
    VectorField,
    as_expr,
    exterior_derivative_oneform,
    inner_jets,
    lie_bracket,
    lie_derivative_metric,
    two_form_apply,
)
from .jet import directional
from .koszul import KoszulEvaluator
from .radical import DEFAULT_IMAGE_TOL, DEFAULT_RANK_TOL, cocontract

DEFAULT_TOL = 1e-8
ON_LOCUS = "on-locus"
OUT_OF_IMAGE = "out-of-image"


@dataclass(frozen=True)
class ResidualReport:
    name: str
    point: tuple[float, ...]
    inputs: str
    left: float
    right: float
    flags: tuple[str, ...] = ()
    tol: float = DEFAULT_TOL

    @property
    def abs_residual(self) -> float:
        return abs(self.left - self.right)

    @property
    def scale(self) -> float:
        return max(1.0, abs(self.left), abs(self.right))

    @property
    def rel_residual(self) -> float:
        return self.abs_residual / self.scale

    @property
    def passed(self) -> bool:
        # NaN residuals fail
        return self.rel_residual <= self.tol

    @property
    def excused(self) -> bool:
        """A failure explained only by the pointwise contraction at a degenerate point."""
        return not self.passed and ON_LOCUS in self.flags and OUT_OF_IMAGE not in self.flags


def _ev(g) -> KoszulEvaluator:
    return g if isinstance(g, KoszulEvaluator) else KoszulEvaluator(g)


def _describe(*fields: VectorField) -> str:
    return " ".join(f.describe() for f in fields)


def _locus_flags(ev: KoszulEvaluator, p) -> list[str]:
    return [ON_LOCUS] if ev.decomposition(p).degenerate else []


def koszul_decomposition_residual(g, X, Y, Z, p, tol: float = DEFAULT_TOL) -> ResidualReport:
    """2 K(X,Y,Z) against (dY-flat)(X,Z) + (L_Y g)(X,Z)."""
    ev = _ev(g)
    p = ev.chart.check_point(p)
    left = 2.0 * ev.kosz(X, Y, Z, p)
    x, z = X.values(p), Z.values(p)
    dY = exterior_derivative_oneform(FlatForm(ev.metric, Y), p)
    right = two_form_apply(dY, x, z) + float(x @ lie_derivative_metric(ev.metric, Y, p) @ z)
    return ResidualReport("koszul_decomposition", p, _describe(X, Y, Z), left, right,
                          tuple(_locus_flags(ev, p)), tol)


def d_flat_residual(g, X, Y, Z, p, tol: float = DEFAULT_TOL) -> ResidualReport:
    """(dY-flat)(X,Z) against K(X,Y,Z) - K(Z,Y,X)."""
    ev = _ev(g)
    p = ev.chart.check_point(p)
    dY = exterior_derivative_oneform(FlatForm(ev.metric, Y), p)
    left = two_form_apply(dY, X.values(p), Z.values(p))
    right = ev.kosz(X, Y, Z, p) - ev.kosz(Z, Y, X, p)
    return ResidualReport("d_flat", p, _describe(X, Y, Z), left, right,
                          tuple(_locus_flags(ev, p)), tol)


def _first_structural_rhs(ev: KoszulEvaluator, X, Y, Z, p):
    d = ev.decomposition(p)
    g = ev.metric.at(p)
    flat_y = g @ Y.values(p)
    flat_z = g @ Z.values(p)
    a = cocontract(d, ev.covector(Y, X, p), flat_z)
    b = cocontract(d, ev.covector(Z, X, p), flat_y)
    resid = max(a.max_relative_residual, b.max_relative_residual)
    return a.value - b.value, resid


def first_structural_residual(
    g, X, Y, Z, p, tol: float = DEFAULT_TOL, image_tol: float = DEFAULT_IMAGE_TOL
) -> ResidualReport:
    """(dX-flat)(Y,Z) against the contracted wedge K(Y,X,.)(.-flat Z) - K(Z,X,.)(.-flat Y)."""
    ev = _ev(g)
    p = ev.chart.check_point(p)
    dX = exterior_derivative_oneform(FlatForm(ev.metric, X), p)
    left = two_form_apply(dX, Y.values(p), Z.values(p))
    right, resid = _first_structural_rhs(ev, X, Y, Z, p)
    flags = _locus_flags(ev, p)
    if resid > image_tol:
        flags.append(OUT_OF_IMAGE)
    return ResidualReport("first_structural", p, _describe(X, Y, Z), left, right, tuple(flags), tol)


def first_structural_consistency(
    g, X, Y, Z, p, tol: float = 1e-10, image_tol: float = DEFAULT_IMAGE_TOL
) -> ResidualReport:
    """The contracted wedge against K(Y,X,Z) - K(Z,X,Y); equal whenever both covectors are in the image."""
    ev = _ev(g)
    p = ev.chart.check_point(p)
    left, resid = _first_structural_rhs(ev, X, Y, Z, p)
    right = ev.kosz(Y, X, Z, p) - ev.kosz(Z, X, Y, p)
    flags = _locus_flags(ev, p)
    if resid > image_tol:
        flags.append(OUT_OF_IMAGE)
    return ResidualReport("first_structural_expansion", p, _describe(X, Y, Z), left, right, tuple(flags), tol)


def second_structural_residual(
    g, X, Y, Z, T, p, tol: float = DEFAULT_TOL, image_tol: float = DEFAULT_IMAGE_TOL
) -> ResidualReport:
    """R(X,Y,Z,T) against (d omega_XY)(Z,T) + K(Z,X,.)K(T,Y,.) - K(T,X,.)K(Z,Y,.)."""
    ev = _ev(g)
    p = ev.chart.check_point(p)
    cv = RiemannEvaluator(ev).evaluate(X, Y, Z, T, p)
    z, t = Z.values(p), T.values(p)
    d_omega = exterior_derivative_oneform(ev.connection_form(X, Y), p)
    c1 = ev.kosz_contract(Z, X, T, Y, p)
    c2 = ev.kosz_contract(T, X, Z, Y, p)
    right = two_form_apply(d_omega, z, t) + c1.value - c2.value
    flags = _locus_flags(ev, p)
    resid = max(cv.contraction_residual, c1.max_relative_residual, c2.max_relative_residual)
    if resid > image_tol:
        flags.append(OUT_OF_IMAGE)
    return ResidualReport("second_structural", p, _describe(X, Y, Z, T), cv.value, right,
                          tuple(flags), tol)


class FrameError(ValueError):
    """The supplied frame is not orthonormal (up to signs) around the point."""


def _wedge(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.outer(a, b) - np.outer(b, a)


def frame_signs(g, frame: Sequence[VectorField], p, tol: float = 1e-9) -> np.ndarray:
    """Signs eps_a with <E_a, E_b> = eps_a delta_ab and d<E_a, E_b> = 0 at p."""
    ev = _ev(g)
    p = ev.chart.check_point(p)
    n = ev.dim
    if len(frame) != n:
        raise FrameError(f"frame has {len(frame)} fields, chart dimension is {n}")
    if ev.decomposition(p).degenerate:
        raise FrameError(f"metric is degenerate at {p}; no orthonormal frame exists")
    G = ev.metric.jets(p, 1)
    E = [F.jets(p, 1) for F in frame]
    signs = np.zeros(n)
    for a in range(n):
        for b in range(a, n):
            ip = inner_jets(G, E[a], E[b])
            target = 0.0
            if a == b:
                signs[a] = 1.0 if ip.value > 0 else -1.0
                target = signs[a]
            if abs(ip.value - target) > tol:
                raise FrameError(f"<E_{a}, E_{b}> = {ip.value!r} at {p}, expected {target}")
            if np.abs(ip.grad).max() > tol:
                raise FrameError(f"<E_{a}, E_{b}> is not locally constant at {p}")
    return signs


def frame_structure_check(
    g, frame: Sequence[VectorField], p, tol: float = DEFAULT_TOL, antisym_tol: float = 1e-10
) -> list[ResidualReport]:
    """d theta^a = -omega_s^a ^ theta^s for an orthonormal frame, plus omega_ab = -omega_ba.

    With eps_a = <E_a, E_a> the dual coframe is theta^a = eps_a E_a-flat and
    omega_s^a = eps_a omega_{E_s E_a}; for a Riemannian frame all eps_a = 1.
    """
    ev = _ev(g)
    p = ev.chart.check_point(p)
    n = ev.dim
    eps = frame_signs(ev, frame, p)
    G = ev.metric.at(p)
    theta = [eps[a] * (G @ frame[a].values(p)) for a in range(n)]
    omega = [[ev.connection_form(frame[s], frame[a]).at(p) for a in range(n)] for s in range(n)]
    desc = _describe(*frame)
    out = []
    for a in range(n):
        left = eps[a] * exterior_derivative_oneform(FlatForm(ev.metric, frame[a]), p)
        right = np.zeros((n, n))
        for s in range(n):
            right -= _wedge(eps[a] * omega[s][a], theta[s])
        for i in range(n):
            for j in range(i + 1, n):
                out.append(ResidualReport(
                    f"frame.coframe[{a}][{i},{j}]", p, desc, float(left[i, j]), float(right[i, j]), (), tol))
    for a in range(n):
        for b in range(a, n):
            for k in range(n):
                out.append(ResidualReport(
                    f"frame.antisymmetry[{a},{b}][{k}]", p, desc,
                    float(omega[a][b][k]), float(-omega[b][a][k]), (), antisym_tol))
    return out


# -- Koszul form properties --------------------------------------------------


def koszul_property_residuals(
    g, X, Y, Z, f, p, X2=None, coeffs=(1.5, -0.75), tol: float = DEFAULT_TOL
) -> list[ResidualReport]:
    """The eight algebraic properties of the Koszul form at one point.

    ``f`` is a scalar expression, ``X2`` a second field for the linearity
    checks (defaults to ``Y``), ``coeffs`` the real coefficients (a, b).
    """
    ev = _ev(g)
    p = ev.chart.check_point(p)
    K = lambda A, B, C: ev.kosz(A, B, C, p)  # noqa: E731
    X2 = Y if X2 is None else X2
    a, b = coeffs
    fj = ex.eval_jet(as_expr(ev.chart, f), p, 1)
    fv = fj.value
    G = ev.metric.at(p)
    x, y, z = X.values(p), Y.values(p), Z.values(p)
    inner = lambda u, v: float(u @ G @ v)  # noqa: E731
    Xf = directional(fj, X.values(p)).value
    # derivative of <A, B> along C via jets of the metric and fields
    Gj = ev.metric.jets(p, 1)

    def d_inner(C, A, B):
        return directional(inner_jets(Gj, A.jets(p, 1), B.jets(p, 1)), C.values(p)).value

    comb = X * a + X2 * b
    desc = _describe(X, Y, Z)
    flags = tuple(_locus_flags(ev, p))
    r = lambda name, l, rr: ResidualReport(name, p, desc, l, rr, flags, tol)  # noqa: E731
    out = [
        r("koszul.linear_slot1", K(comb, Y, Z), a * K(X, Y, Z) + b * K(X2, Y, Z)),
        r("koszul.linear_slot2", K(Y, comb, Z), a * K(Y, X, Z) + b * K(Y, X2, Z)),
        r("koszul.linear_slot3", K(Y, Z, comb), a * K(Y, Z, X) + b * K(Y, Z, X2)),
        r("koszul.flinear_first", K(X.scaled(f), Y, Z), fv * K(X, Y, Z)),
        r("koszul.leibniz", K(X, Y.scaled(f), Z), fv * K(X, Y, Z) + Xf * inner(y, z)),
        r("koszul.flinear_third", K(X, Y, Z.scaled(f)), fv * K(X, Y, Z)),
        r("koszul.metric", K(X, Y, Z) + K(X, Z, Y), d_inner(X, Y, Z)),
        r("koszul.torsionless", K(X, Y, Z) - K(Y, X, Z), inner(lie_bracket(X, Y, p), z)),
        r("koszul.lie_derivative", K(X, Y, Z) + K(Z, Y, X),
          float(z @ lie_derivative_metric(ev.metric, Y, p) @ x)),
        r("koszul.cyclic", K(X, Y, Z) + K(Y, Z, X),
          d_inner(Y, Z, X) + inner(lie_bracket(X, Y, p), z)),
    ]
    return out


# -- batch driver ------------------------------------------------------------


def random_polynomial(chart, rng: np.random.Generator, degree: int = 2, coef: float = 2.0):
    """Random polynomial expression of total degree <= ``degree`` with coefficients in [-coef, coef]."""
    terms = None
    for d in range(degree + 1):
        for mono in combinations_with_replacement(range(chart.dim), d):
            c = float(rng.uniform(-coef, coef))
            node = ex.num(c)
            for i in mono:
                node = ex.mul(node, ex.Coord(i))
            terms = node if terms is None else ex.add(terms, node)
    return terms


def random_field(chart, rng: np.random.Generator, degree: int = 2, coef: float = 2.0) -> VectorField:
    return VectorField(chart, tuple(random_polynomial(chart, rng, degree, coef) for _ in range(chart.dim)))


@dataclass(frozen=True)
class SuiteResult:
    records: tuple[ResidualReport, ...]
    errors: tuple[tuple[tuple[float, ...], str], ...]

    @property
    def failures(self) -> list[ResidualReport]:
        return [r for r in self.records if not r.passed and not r.excused]

    @property
    def excused(self) -> list[ResidualReport]:
        return [r for r in self.records if r.excused]

    @property
    def passed(self) -> bool:
        return not self.failures and not self.errors

    def max_residuals(self) -> dict[str, float]:
        out: dict[str, float] = {}
        for r in self.records:
            key = identity_family(r.name)
            out[key] = max(out.get(key, 0.0), r.rel_residual)
        return dict(sorted(out.items()))

    def flagged_points(self) -> list[tuple[float, ...]]:
        return sorted({r.point for r in self.records if r.flags and not r.passed})


def identity_family(name: str) -> str:
    return name.split("[", 1)[0]


def verify_suite(
    g,
    points: Sequence[Sequence[float]],
    fields: Sequence[VectorField] | None = None,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
    rank_tol: float = DEFAULT_RANK_TOL,
    frame: Sequence[VectorField] | None = None,
    draws: int = 1,
) -> SuiteResult:
    """Run every identity check at every point.

    Without user ``fields`` each point gets ``draws`` sets of random
    polynomial fields (degree <= 2, coefficients in [-2, 2]) and a random
    scalar, all drawn from ``numpy.random.default_rng(seed)`` in point order.
    Per-point evaluation errors are collected, not raised.
    """
    ev = g if isinstance(g, KoszulEvaluator) else KoszulEvaluator(g, rank_tol)
    chart = ev.chart
    rng = np.random.default_rng(seed)
    records: list[ResidualReport] = []
    errors = []
    for p in points:
        p = chart.check_point(p)
        for _ in range(draws):
            if fields:
                fs = list(fields) + [fields[-1]] * (5 - len(fields))
                X, Y, Z, T, X2 = fs[:5]
                f = random_polynomial(chart, rng)
            else:
                X, Y, Z, T, X2 = (random_field(chart, rng) for _ in range(5))
                f = random_polynomial(chart, rng)
            try:
                records += koszul_property_residuals(ev, X, Y, Z, f, p, X2=X2, tol=tol)
                records.append(koszul_decomposition_residual(ev, X, Y, Z, p, tol))
                records.append(d_flat_residual(ev, X, Y, Z, p, tol))
                first = first_structural_residual(ev, X, Y, Z, p, tol)
                records.append(first)
                if OUT_OF_IMAGE not in first.flags:
                    records.append(first_structural_consistency(ev, X, Y, Z, p))
                records.append(second_structural_residual(ev, X, Y, Z, T, p, tol))
            except ArithmeticError as exc:
                errors.append((p, f"{type(exc).__name__}: {exc}"))
        if frame is not None and not ev.decomposition(p).degenerate:
            try:
                records += frame_structure_check(ev, frame, p, tol)
            except (ArithmeticError, ValueError) as exc:
                errors.append((p, f"{type(exc).__name__}: {exc}"))
    records.sort(key=lambda r: (r.point, r.name))
    return SuiteResult(tuple(records), tuple(errors))
