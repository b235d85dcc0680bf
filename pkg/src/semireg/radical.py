"""Pointwise linear algebra of a possibly degenerate metric.

The covectors that can be contracted at a point are the image of the flat
map, i.e. the column space of the metric matrix G.  On that space the inner
product is given by the Moore-Penrose pseudo-inverse: for omega = G x and
tau = G y, ``omega^T G^+ tau = x^T G y``, independent of the choice of x, y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

DEFAULT_RANK_TOL = 1e-9
DEFAULT_IMAGE_TOL = 1e-9


class OutOfImageError(ValueError):
    """A covector handed to a strict contraction is not in the image of G."""


def jacobi_eigh(A: np.ndarray, max_sweeps: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(w, Q)`` with ``A @ Q[:, k] = w[k] * Q[:, k]``, eigenvalues in
    ascending order and Q orthogonal.
    """
    A = np.array(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    A = 0.5 * (A + A.T)
    Q = np.eye(n)
    scale = np.linalg.norm(A)
    if scale == 0.0:
        return np.zeros(n), Q
    eps = np.finfo(float).eps
    for _ in range(max_sweeps):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= eps * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                app, aqq = A[p, p], A[q, q]
                theta = (aqq - app) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # A <- J^T A J with J the (p, q) rotation
                Ap = A[:, p].copy()
                Aq = A[:, q].copy()
                A[:, p] = c * Ap - s * Aq
                A[:, q] = s * Ap + c * Aq
                Ap = A[p, :].copy()
                Aq = A[q, :].copy()
                A[p, :] = c * Ap - s * Aq
                A[q, :] = s * Ap + c * Aq
                A[p, q] = A[q, p] = 0.0
                Qp = Q[:, p].copy()
                Qq = Q[:, q].copy()
                Q[:, p] = c * Qp - s * Qq
                Q[:, q] = s * Qp + c * Qq
    w = np.diag(A).copy()
    order = np.argsort(w, kind="stable")
    return w[order], Q[:, order]


@dataclass(frozen=True)
class RadicalDecomposition:
    point: tuple[float, ...] | None
    matrix: np.ndarray
    rank: int
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    pinv: np.ndarray
    projector: np.ndarray
    tol: float

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def degenerate(self) -> bool:
        return self.rank < self.dim

    @property
    def image_mask(self) -> np.ndarray:
        lam = np.abs(self.eigenvalues)
        top = lam.max() if lam.size else 0.0
        return lam > self.tol * top if top > 0 else np.zeros(lam.shape, dtype=bool)

    @property
    def kernel_basis(self) -> np.ndarray:
        """Columns spanning the radical (numerical kernel) of G."""
        return self.eigenvectors[:, ~self.image_mask]

    @property
    def image_basis(self) -> np.ndarray:
        return self.eigenvectors[:, self.image_mask]


def decompose_matrix(G: np.ndarray, tol: float = DEFAULT_RANK_TOL, point=None) -> RadicalDecomposition:
    if not 0.0 < tol < 1.0:
        raise ValueError("rank tolerance must lie in (0, 1)")
    G = np.array(G, dtype=float)
    w, Q = jacobi_eigh(G)
    lam = np.abs(w)
    top = lam.max() if lam.size else 0.0
    keep = lam > tol * top if top > 0 else np.zeros(lam.shape, dtype=bool)
    Qr = Q[:, keep]
    pinv = (Qr / w[keep]) @ Qr.T
    pinv = 0.5 * (pinv + pinv.T)
    # equals G @ G^+ but symmetric by construction
    P = Qr @ Qr.T
    P = 0.5 * (P + P.T)
    return RadicalDecomposition(
        point=None if point is None else tuple(point),
        matrix=G,
        rank=int(keep.sum()),
        eigenvalues=w,
        eigenvectors=Q,
        pinv=pinv,
        projector=P,
        tol=tol,
    )


def decompose(g, p: Sequence[float], tol: float = DEFAULT_RANK_TOL) -> RadicalDecomposition:
    """Rank, pseudo-inverse and image projector of the metric ``g`` at ``p``."""
    p = g.chart.check_point(p)
    return decompose_matrix(g.at(p), tol, p)


def _components(omega) -> np.ndarray:
    return np.asarray(getattr(omega, "components", omega), dtype=float)


def image_residual(d: RadicalDecomposition, omega) -> float:
    w = _components(omega)
    return float(np.linalg.norm(w - d.projector @ w))


def in_image(d: RadicalDecomposition, omega, tol: float = DEFAULT_IMAGE_TOL) -> tuple[bool, float]:
    """Whether ``omega`` lies in the image of G, with the residual ||(I - P) omega||."""
    w = _components(omega)
    r = image_residual(d, w)
    return r <= tol * max(1.0, float(np.linalg.norm(w))), r


@dataclass(frozen=True)
class ContractionResult:
    value: float
    residuals: tuple[float, float]
    scales: tuple[float, float]

    def relative_residuals(self) -> tuple[float, float]:
        return tuple(r / max(1.0, s) for r, s in zip(self.residuals, self.scales))

    def in_image(self, tol: float = DEFAULT_IMAGE_TOL) -> bool:
        return all(r <= tol for r in self.relative_residuals())

    @property
    def max_relative_residual(self) -> float:
        return max(self.relative_residuals())


def cocontract(
    d: RadicalDecomposition,
    omega,
    tau,
    strict: bool = False,
    tol: float = DEFAULT_IMAGE_TOL,
) -> ContractionResult:
    """Covariant contraction ``omega^T G^+ tau`` with image-membership diagnostics.

    Outside the image the value is not meaningful; it is still returned
    unless ``strict`` is set, in which case :class:`OutOfImageError` is raised.
    """
    w = _components(omega)
    t = _components(tau)
    res = ContractionResult(
        value=float(w @ d.pinv @ t),
        residuals=(image_residual(d, w), image_residual(d, t)),
        scales=(float(np.linalg.norm(w)), float(np.linalg.norm(t))),
    )
    if strict and not res.in_image(tol):
        raise OutOfImageError(
            f"covector outside the image of the metric (residuals {res.residuals[0]:.3g}, {res.residuals[1]:.3g})"
        )
    return res
