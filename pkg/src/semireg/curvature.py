"""Riemann curvature built from the Koszul form, curvature forms, and a
classical Christoffel-based oracle for full-rank points.

    R(X,Y,Z,T) = X K(Y,Z,T) - Y K(X,Z,T) - K([X,Y],Z,T)
                 + K(X,Z,.)K(Y,T,.) - K(Y,Z,.)K(X,T,.)

Only K is differentiated.  The contractions use the pseudo-inverse at the
point itself and are never differentiated, so the formula stays defined where
the rank of the metric changes.  With this convention
R(X,Y,Z,T) = g(R(X,Y)Z, T), R(X,Y) = [D_X, D_Y] - D_[X,Y] at full rank.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fields import MetricField, VectorField, bracket_jets
from .jet import directional, value_of
from .koszul import KoszulEvaluator, _unit, kosz_jets
from .radical import DEFAULT_IMAGE_TOL, DEFAULT_RANK_TOL, cocontract


@dataclass(frozen=True)
class CurvatureValue:
    value: float
    contraction_residual: float
    on_locus: bool

    def out_of_image(self, tol: float = DEFAULT_IMAGE_TOL) -> bool:
        return self.contraction_residual > tol


@dataclass(frozen=True)
class RiemannTable:
    """``R[i, j, k, l] = R(d_i, d_j, d_k, d_l)`` at one point.

    ``residuals[i, j, k, l]`` is the largest relative out-of-image residual of
    the covectors contracted for that entry.  ``on_locus`` marks points where
    the metric is degenerate and the contraction is the pointwise one.
    """

    point: tuple[float, ...]
    R: np.ndarray
    residuals: np.ndarray
    rank: int
    on_locus: bool

    @property
    def scale(self) -> float:
        return max(1.0, float(np.abs(self.R).max()))


class RiemannEvaluator:
    def __init__(self, koszul: KoszulEvaluator):
        self.koszul = koszul

    @classmethod
    def for_metric(cls, g: MetricField, rank_tol: float = DEFAULT_RANK_TOL) -> "RiemannEvaluator":
        return cls(KoszulEvaluator(g, rank_tol))

    @property
    def metric(self) -> MetricField:
        return self.koszul.metric

    def evaluate(
        self, X: VectorField, Y: VectorField, Z: VectorField, T: VectorField, p: Sequence[float]
    ) -> CurvatureValue:
        ev = self.koszul
        p = ev.chart.check_point(p)
        G2 = ev.metric.jets(p, 2)
        Xj, Yj, Zj, Tj = (F.jets(p, 2) for F in (X, Y, Z, T))
        d_x = value_of(directional(kosz_jets(G2, Yj, Zj, Tj), Xj))
        d_y = value_of(directional(kosz_jets(G2, Xj, Zj, Tj), Yj))
        k_br = value_of(kosz_jets(G2, bracket_jets(Xj, Yj), Zj, Tj))
        d = ev.decomposition(p)
        c1 = cocontract(d, ev.covector(X, Z, p), ev.covector(Y, T, p))
        c2 = cocontract(d, ev.covector(Y, Z, p), ev.covector(X, T, p))
        value = d_x - d_y - k_br + c1.value - c2.value
        resid = max(c1.max_relative_residual, c2.max_relative_residual)
        return CurvatureValue(value, resid, d.degenerate)

    def riemann(self, X, Y, Z, T, p) -> float:
        return self.evaluate(X, Y, Z, T, p).value

    def table(self, p: Sequence[float]) -> RiemannTable:
        """All coordinate components, assembled from Christoffel symbols of the first kind."""
        ev = self.koszul
        p = ev.chart.check_point(p)
        n = ev.dim
        cf = ev.christoffel_first(p)
        gamma, dgamma = cf.gamma, cf.dgamma
        d = ev.decomposition(p)
        Gp = d.pinv
        # dgamma[j, k, l, i] = d_i gamma[j, k, l]
        deriv = np.transpose(dgamma, (3, 0, 1, 2))
        contr = np.einsum("ika,ab,jlb->ijkl", gamma, Gp, gamma)
        R = deriv - np.transpose(deriv, (1, 0, 2, 3)) + contr - np.transpose(contr, (1, 0, 2, 3))
        P = d.projector
        res = np.linalg.norm(gamma - gamma @ P, axis=2) / np.maximum(1.0, np.linalg.norm(gamma, axis=2))
        # entry (i,j,k,l) contracts gamma[i,k], gamma[j,l], gamma[j,k], gamma[i,l]
        rk = np.maximum(res[:, None, :, None], res[None, :, None, :])
        rk = np.maximum(rk, np.maximum(res[None, :, :, None], res[:, None, None, :]))
        return RiemannTable(p, R, rk, d.rank, d.degenerate)

    def curvature_form(self, X: VectorField, Y: VectorField) -> "CurvatureForm":
        return CurvatureForm(self, X, Y)


@dataclass(frozen=True)
class CurvatureForm:
    """The two-form (Z, T) -> R(X, Y, Z, T)."""

    evaluator: RiemannEvaluator
    X: VectorField
    Y: VectorField

    def __call__(self, Z: VectorField, T: VectorField, p: Sequence[float]) -> float:
        return self.evaluator.riemann(self.X, self.Y, Z, T, p)

    def matrix(self, p: Sequence[float]) -> np.ndarray:
        """Components Omega(d_k, d_l) at p."""
        n = self.evaluator.koszul.dim
        E = [self.evaluator.koszul.coordinate_field(k) for k in range(n)]
        return np.array([[self(E[k], E[l], p) for l in range(n)] for k in range(n)])


def riemann(g: MetricField, X, Y, Z, T, p) -> float:
    return RiemannEvaluator.for_metric(g).riemann(X, Y, Z, T, p)


def riemann_table(g: MetricField, p, rank_tol: float = DEFAULT_RANK_TOL) -> RiemannTable:
    return RiemannEvaluator.for_metric(g, rank_tol).table(p)


def curvature_form(g: MetricField, X, Y) -> CurvatureForm:
    return RiemannEvaluator.for_metric(g).curvature_form(X, Y)


# -- classical oracle --------------------------------------------------------


class SingularMetricError(ValueError):
    pass


def classical_riemann(g: MetricField, p: Sequence[float], cond_limit: float = 1e12) -> np.ndarray:
    """Textbook curvature from Christoffel symbols of the second kind.

    Uses ``numpy.linalg.inv`` and the derivative of the inverse metric; valid
    only where g is invertible.  Same index convention as the Koszul-based
    table: ``R[i,j,k,l] = g_lm R^m_kij`` with
    ``R^m_kij = d_i G^m_jk - d_j G^m_ik + G^m_ip G^p_jk - G^m_jp G^p_ik``.
    """
    p = g.chart.check_point(p)
    n = g.chart.dim
    G = g.jets(p, 2)
    g0 = np.array([[G[i][j].value for j in range(n)] for i in range(n)])
    if np.linalg.cond(g0) > cond_limit:
        raise SingularMetricError(f"metric is (numerically) singular at {p}")
    d1 = np.zeros((n, n, n))      # d1[a, i, j] = d_a g_ij
    d2 = np.zeros((n, n, n, n))   # d2[a, b, i, j] = d_a d_b g_ij
    for i in range(n):
        for j in range(n):
            d1[:, i, j] = G[i][j].grad
            d2[:, :, i, j] = G[i][j].hess
    ginv = np.linalg.inv(g0)
    dginv = -np.einsum("ml,alr,rs->ams", ginv, d1, ginv)  # d_a g^ms
    # lowered symbols L[s, i, j] = 1/2 (d_i g_js + d_j g_is - d_s g_ij)
    L = 0.5 * (np.einsum("ijs->sij", d1) + np.einsum("jis->sij", d1) - d1)
    dL = 0.5 * (np.einsum("aijs->asij", d2) + np.einsum("ajis->asij", d2) - d2)  # dL[a, s, i, j]
    Gam = np.einsum("ms,sij->mij", ginv, L)
    dGam = np.einsum("ams,sij->amij", dginv, L) + np.einsum("ms,asij->amij", ginv, dL)
    Rup = (
        np.einsum("imjk->mkij", dGam)
        - np.einsum("jmik->mkij", dGam)
        + np.einsum("mip,pjk->mkij", Gam, Gam)
        - np.einsum("mjp,pik->mkij", Gam, Gam)
    )
    return np.einsum("lm,mkij->ijkl", g0, Rup)


# -- symmetries --------------------------------------------------------------


@dataclass(frozen=True)
class SymmetryReport:
    antisym_first: float
    antisym_second: float
    pair: float
    bianchi: float
    scale: float

    @property
    def residuals(self) -> dict[str, float]:
        return {
            "antisym_first": self.antisym_first,
            "antisym_second": self.antisym_second,
            "pair": self.pair,
            "bianchi": self.bianchi,
        }

    def max_relative(self) -> float:
        return max(self.residuals.values()) / self.scale

    def passed(self, tol: float) -> bool:
        return self.max_relative() <= tol


def symmetry_check(t: RiemannTable | np.ndarray) -> SymmetryReport:
    """Absolute residuals of the four algebraic symmetries of R."""
    R = t.R if isinstance(t, RiemannTable) else np.asarray(t)
    scale = max(1.0, float(np.abs(R).max()))
    return SymmetryReport(
        antisym_first=float(np.abs(R + np.transpose(R, (1, 0, 2, 3))).max()),
        antisym_second=float(np.abs(R + np.transpose(R, (0, 1, 3, 2))).max()),
        pair=float(np.abs(R - np.transpose(R, (2, 3, 0, 1))).max()),
        bianchi=float(
            np.abs(R + np.transpose(R, (1, 2, 0, 3)) + np.transpose(R, (2, 0, 1, 3))).max()
        ),
        scale=scale,
    )
