"""Truncated Taylor jets (value, gradient, Hessian) with exact propagation.

A :class:`Jet` carries derivatives up to a fixed order (0, 1 or 2).  Binary
operations between jets of different order truncate to the lower one, and
taking a directional derivative lowers the order by one.  Plain Python floats
act as constants of unlimited order.
"""

from __future__ import annotations

import math
from typing import Sequence, Union

import numpy as np


class DomainError(ArithmeticError):
    """Raised when an expression is evaluated outside its real domain."""


class Jet:
    """Value plus first and (optionally) second partial derivatives at a point.

    ``grad`` is ``None`` for an order-0 jet and ``hess`` is ``None`` for
    order <= 1.  The Hessian is symmetric by construction: every update is a
    sum of symmetric terms or of ``outer(a, b) + outer(b, a)`` pairs.
    """

    __slots__ = ("value", "grad", "hess")

    def __init__(self, value: float, grad=None, hess=None):
        self.value = float(value)
        self.grad = grad
        self.hess = hess

    @property
    def order(self) -> int:
        if self.hess is not None:
            return 2
        if self.grad is not None:
            return 1
        return 0

    @property
    def dim(self) -> int:
        return 0 if self.grad is None else len(self.grad)

    @classmethod
    def constant(cls, value: float, n: int, order: int = 2) -> "Jet":
        return cls(
            value,
            np.zeros(n) if order >= 1 else None,
            np.zeros((n, n)) if order >= 2 else None,
        )

    @classmethod
    def variable(cls, value: float, index: int, n: int, order: int = 2) -> "Jet":
        grad = None
        if order >= 1:
            grad = np.zeros(n)
            grad[index] = 1.0
        return cls(value, grad, np.zeros((n, n)) if order >= 2 else None)

    def truncate(self, order: int) -> "Jet":
        if order >= self.order:
            return self
        return Jet(
            self.value,
            self.grad if order >= 1 else None,
            self.hess if order >= 2 else None,
        )

    def __repr__(self) -> str:
        return f"Jet(value={self.value!r}, grad={self.grad!r}, hess={self.hess!r})"

    # -- arithmetic ---------------------------------------------------------

    def __neg__(self) -> "Jet":
        return Jet(
            -self.value,
            None if self.grad is None else -self.grad,
            None if self.hess is None else -self.hess,
        )

    def __pos__(self) -> "Jet":
        return self

    def __add__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return Jet(self.value + other, self.grad, self.hess)
        m = min(self.order, other.order)
        return Jet(
            self.value + other.value,
            self.grad + other.grad if m >= 1 else None,
            self.hess + other.hess if m >= 2 else None,
        )

    def __radd__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return Jet(other + self.value, self.grad, self.hess)
        return other.__add__(self)

    def __sub__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return Jet(self.value - other, self.grad, self.hess)
        m = min(self.order, other.order)
        return Jet(
            self.value - other.value,
            self.grad - other.grad if m >= 1 else None,
            self.hess - other.hess if m >= 2 else None,
        )

    def __rsub__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return Jet(
                other - self.value,
                None if self.grad is None else -self.grad,
                None if self.hess is None else -self.hess,
            )
        return other.__sub__(self)

    def __mul__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            c = float(other)
            return Jet(
                self.value * c,
                None if self.grad is None else self.grad * c,
                None if self.hess is None else self.hess * c,
            )
        a, b = self, other
        m = min(a.order, b.order)
        grad = hess = None
        if m >= 1:
            grad = a.value * b.grad + b.value * a.grad
        if m >= 2:
            hess = (
                a.value * b.hess
                + b.value * a.hess
                + (np.outer(a.grad, b.grad) + np.outer(b.grad, a.grad))
            )
        return Jet(a.value * b.value, grad, hess)

    def __rmul__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return self.__mul__(other)
        return other.__mul__(self)

    def __truediv__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            if other == 0:
                raise DomainError("division by zero")
            c = float(other)
            return Jet(
                self.value / c,
                None if self.grad is None else self.grad / c,
                None if self.hess is None else self.hess / c,
            )
        return _divide(self, other)

    def __rtruediv__(self, other) -> "Jet":
        n = self.dim
        return _divide(Jet.constant(other, n, self.order), self)

    def apply(self, f0: float, f1: float, f2: float) -> "Jet":
        """Chain rule for a scalar function with derivatives ``f1``, ``f2``."""
        grad = hess = None
        if self.grad is not None:
            grad = f1 * self.grad
        if self.hess is not None:
            hess = f1 * self.hess + f2 * np.outer(self.grad, self.grad)
        return Jet(f0, grad, hess)


def _divide(a: Jet, b: Jet) -> Jet:
    if b.value == 0.0:
        raise DomainError("division by zero")
    q = a.value / b.value
    m = min(a.order, b.order)
    grad = hess = None
    if m >= 1:
        grad = (a.grad - q * b.grad) / b.value
    if m >= 2:
        hess = (
            a.hess - q * b.hess - (np.outer(b.grad, grad) + np.outer(grad, b.grad))
        ) / b.value
    return Jet(q, grad, hess)


Scalar = Union[Jet, float]


def directional(f: Scalar, X: Sequence[Scalar]) -> Scalar:
    """Derivative of ``f`` along the vector field with component jets ``X``.

    Returns ``X^k d_k f`` as a jet one order lower than ``min(order f, order X + 1)``.
    A float ``f`` is a constant and differentiates to ``0.0``.
    """
    if not isinstance(f, Jet):
        return 0.0
    if f.order == 0:
        raise ValueError("cannot differentiate an order-0 jet")
    xs = [x if isinstance(x, Jet) else None for x in X]
    values = np.array([x.value if x is not None else float(X[k]) for k, x in enumerate(xs)])
    out_order = f.order - 1
    for x in xs:
        if x is not None:
            out_order = min(out_order, x.order)
    value = float(values @ f.grad)
    if out_order == 0:
        return Jet(value)
    grad = f.hess @ values
    for k, x in enumerate(xs):
        if x is not None:
            grad = grad + f.grad[k] * x.grad
    return Jet(value, grad)


def value_of(x: Scalar) -> float:
    return x.value if isinstance(x, Jet) else float(x)


# -- elementary functions ---------------------------------------------------


def _check_finite(x: float, name: str) -> float:
    if not math.isfinite(x):
        raise DomainError(f"{name} overflowed")
    return x


def jsin(x: Jet) -> Jet:
    s, c = math.sin(x.value), math.cos(x.value)
    return x.apply(s, c, -s)


def jcos(x: Jet) -> Jet:
    s, c = math.sin(x.value), math.cos(x.value)
    return x.apply(c, -s, -c)


def jtan(x: Jet) -> Jet:
    if math.cos(x.value) == 0.0:
        raise DomainError("tan at a pole")
    t = math.tan(x.value)
    sec2 = 1.0 + t * t
    return x.apply(t, sec2, 2.0 * t * sec2)


def jexp(x: Jet) -> Jet:
    e = _check_finite(math.exp(x.value), "exp")
    return x.apply(e, e, e)


def jlog(x: Jet) -> Jet:
    if x.value <= 0.0:
        raise DomainError(f"log of non-positive value {x.value!r}")
    return x.apply(math.log(x.value), 1.0 / x.value, -1.0 / (x.value * x.value))


def jsqrt(x: Jet) -> Jet:
    if x.value < 0.0:
        raise DomainError(f"sqrt of negative value {x.value!r}")
    s = math.sqrt(x.value)
    if x.order >= 1 and s == 0.0:
        raise DomainError("sqrt is not differentiable at 0")
    if s == 0.0:
        return Jet(0.0)
    return x.apply(s, 0.5 / s, -0.25 / (s * s * s))


def jsinh(x: Jet) -> Jet:
    sh = _check_finite(math.sinh(x.value), "sinh")
    ch = math.cosh(x.value)
    return x.apply(sh, ch, sh)


def jcosh(x: Jet) -> Jet:
    sh = math.sinh(x.value)
    ch = _check_finite(math.cosh(x.value), "cosh")
    return x.apply(ch, sh, ch)


def jtanh(x: Jet) -> Jet:
    t = math.tanh(x.value)
    d = 1.0 - t * t
    return x.apply(t, d, -2.0 * t * d)


JET_FUNCTIONS = {
    "sin": jsin,
    "cos": jcos,
    "tan": jtan,
    "exp": jexp,
    "log": jlog,
    "sqrt": jsqrt,
    "sinh": jsinh,
    "cosh": jcosh,
    "tanh": jtanh,
}
