"""Scalar expressions over chart coordinates.

Grammar, lowest to highest binding::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?          # right-associative
    atom   := NUMBER | COORD | FUNC "(" expr ")" | "(" expr ")"

so ``-u^2`` is ``-(u^2)`` and ``u^2^3`` is ``u^(2^3)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence, Union

from .jet import JET_FUNCTIONS, DomainError, Jet

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh", "tanh")
BINARY_OPS = ("+", "-", "*", "/", "^")
INTEGER_EXPONENT_TOL = 1e-12


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Coord:
    index: int


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Coord, Neg, BinOp, Call]


class ParseError(ValueError):
    """Syntax error in an expression.

    ``offset`` is a character offset into the source; it equals ``len(source)``
    when the input ended too early.
    """

    def __init__(self, message: str, offset: int, expected: str = ""):
        self.message = message
        self.offset = offset
        self.expected = expected
        text = f"{message} at offset {offset}"
        if expected:
            text += f" (expected {expected})"
        super().__init__(text)


# -- construction helpers ---------------------------------------------------


def num(x: float) -> Expr:
    """Literal node; negative values become ``Neg(Num(|x|))`` like parsed text."""
    x = float(x)
    if x < 0 or (x == 0 and math.copysign(1.0, x) < 0):
        return Neg(Num(-x))
    return Num(x)


def add(a: Expr, b: Expr) -> Expr:
    return BinOp("+", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    return BinOp("-", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    return BinOp("*", a, b)


def div(a: Expr, b: Expr) -> Expr:
    return BinOp("/", a, b)


def power(a: Expr, b: Expr) -> Expr:
    return BinOp("^", a, b)


def is_constant(e: Expr) -> bool:
    """True when ``e`` references no coordinate."""
    if isinstance(e, Num):
        return True
    if isinstance(e, Coord):
        return False
    if isinstance(e, Neg):
        return is_constant(e.arg)
    if isinstance(e, Call):
        return is_constant(e.arg)
    return is_constant(e.left) and is_constant(e.right)


def max_coord_index(e: Expr) -> int:
    if isinstance(e, Num):
        return -1
    if isinstance(e, Coord):
        return e.index
    if isinstance(e, (Neg, Call)):
        return max_coord_index(e.arg)
    return max(max_coord_index(e.left), max_coord_index(e.right))


# -- tokenizer and parser ---------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


def check_coordinate_names(coords: Sequence[str]) -> None:
    if not coords:
        raise ValueError("at least one coordinate name is required")
    seen = set()
    for name in coords:
        if not _IDENT_RE.match(name):
            raise ValueError(f"invalid coordinate name {name!r}")
        if name in FUNCTIONS:
            raise ValueError(f"coordinate name {name!r} shadows a function")
        if name in seen:
            raise ValueError(f"duplicate coordinate name {name!r}")
        seen.add(name)


class _Parser:
    def __init__(self, source: str, coords: Sequence[str]):
        self.tokens = _tokenize(source)
        self.pos = 0
        self.coords = {name: i for i, name in enumerate(coords)}

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.pos]

    def next(self) -> tuple[str, str, int]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str) -> None:
        kind, tok, offset = self.next()
        if tok != text or kind != "op":
            what = "end of input" if kind == "end" else repr(tok)
            raise ParseError(f"unexpected {what}", offset, repr(text))

    def parse(self) -> Expr:
        if self.peek()[0] == "end":
            raise ParseError("empty expression", 0, "an expression")
        e = self.expr()
        kind, tok, offset = self.peek()
        if kind != "end":
            raise ParseError(f"trailing token {tok!r}", offset, "end of input")
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.next()[1]
            left = BinOp(op, left, self.term())
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.next()[1]
            left = BinOp(op, left, self.unary())
        return left

    def unary(self) -> Expr:
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.next()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.next()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        kind, tok, offset = self.next()
        if kind == "number":
            return Num(float(tok))
        if kind == "ident":
            if tok in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(tok, arg)
            if tok in self.coords:
                return Coord(self.coords[tok])
            raise ParseError(f"unknown identifier {tok!r}", offset, "a coordinate or function name")
        if kind == "op" and tok == "(":
            e = self.expr()
            self.expect(")")
            return e
        what = "end of input" if kind == "end" else repr(tok)
        raise ParseError(f"unexpected {what}", offset, "a number, coordinate, function or '('")


def parse(source: str, coords: Sequence[str]) -> Expr:
    """Parse ``source`` into an expression tree over the named coordinates."""
    check_coordinate_names(coords)
    return _Parser(source, coords).parse()


def to_text(e: Expr, coords: Sequence[str]) -> str:
    """Fully parenthesized text that :func:`parse` maps back to ``e``."""
    if isinstance(e, Num):
        if not math.isfinite(e.value) or e.value < 0:
            raise ValueError(f"cannot print literal {e.value!r}")
        return repr(e.value)
    if isinstance(e, Coord):
        return coords[e.index]
    if isinstance(e, Neg):
        return f"(-{to_text(e.arg, coords)})"
    if isinstance(e, Call):
        return f"{e.func}({to_text(e.arg, coords)})"
    return f"({to_text(e.left, coords)} {e.op} {to_text(e.right, coords)})"


# -- evaluation -------------------------------------------------------------
#
# eval_value and eval_jet2 follow the same operation order node by node, so the
# jet's value is bit-identical to the plain evaluation.


def _integer_exponent(c: float) -> int | None:
    k = round(c)
    if abs(c - k) <= INTEGER_EXPONENT_TOL:
        return int(k)
    return None


def _float_call(func: str, x: float) -> float:
    if func == "log":
        if x <= 0.0:
            raise DomainError(f"log of non-positive value {x!r}")
        return math.log(x)
    if func == "sqrt":
        if x < 0.0:
            raise DomainError(f"sqrt of negative value {x!r}")
        return math.sqrt(x)
    if func == "tan" and math.cos(x) == 0.0:
        raise DomainError("tan at a pole")
    try:
        y = getattr(math, func)(x)
    except OverflowError:
        raise DomainError(f"{func} overflowed") from None
    if not math.isfinite(y):
        raise DomainError(f"{func} overflowed")
    return y


def _ipow(base, k: int):
    if k == 0:
        return None
    acc = base
    for _ in range(abs(k) - 1):
        acc = acc * base
    return acc


def eval_value(e: Expr, p: Sequence[float]) -> float:
    """Evaluate ``e`` at the point ``p``; raises :class:`DomainError`."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Coord):
        return float(p[e.index])
    if isinstance(e, Neg):
        return -eval_value(e.arg, p)
    if isinstance(e, Call):
        return _float_call(e.func, eval_value(e.arg, p))
    a = eval_value(e.left, p)
    if e.op == "^":
        return _float_pow(a, e.right, p)
    b = eval_value(e.right, p)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if b == 0.0:
        raise DomainError("division by zero")
    return a / b


def _float_pow(a: float, exponent: Expr, p) -> float:
    c = eval_value(exponent, p)
    if is_constant(exponent):
        k = _integer_exponent(c)
        if k is not None:
            if k == 0:
                return 1.0
            acc = _ipow(a, k)
            if k < 0:
                if acc == 0.0:
                    raise DomainError("division by zero")
                return 1.0 / acc
            return acc
        if a < 0.0 or (a == 0.0 and c < 0.0):
            raise DomainError(f"non-integer power {c!r} of {a!r}")
        return math.pow(a, c)
    if a <= 0.0:
        raise DomainError(f"variable exponent needs a positive base, got {a!r}")
    return _float_call("exp", c * math.log(a))


def eval_jet(e: Expr, p: Sequence[float], order: int = 2) -> Jet:
    """Value and derivatives of ``e`` at ``p`` up to ``order`` (0, 1 or 2)."""
    n = len(p)
    if isinstance(e, Num):
        return Jet.constant(e.value, n, order)
    if isinstance(e, Coord):
        return Jet.variable(p[e.index], e.index, n, order)
    if isinstance(e, Neg):
        return -eval_jet(e.arg, p, order)
    if isinstance(e, Call):
        return JET_FUNCTIONS[e.func](eval_jet(e.arg, p, order))
    a = eval_jet(e.left, p, order)
    if e.op == "^":
        return _jet_pow(a, e.right, p, order)
    b = eval_jet(e.right, p, order)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    return a / b


def _jet_pow(a: Jet, exponent: Expr, p, order: int) -> Jet:
    n = len(p)
    if is_constant(exponent):
        c = eval_value(exponent, p)
        k = _integer_exponent(c)
        if k is not None:
            if k == 0:
                return Jet.constant(1.0, n, order)
            acc = _ipow(a, k)
            return 1.0 / acc if k < 0 else acc
        if a.value < 0.0 or (a.value == 0.0 and c < 0.0):
            raise DomainError(f"non-integer power {c!r} of {a.value!r}")
        if a.value == 0.0 and order >= 1 and c < order:
            raise DomainError(f"power {c!r} is not {order} times differentiable at 0")
        v = math.pow(a.value, c)
        f1 = c * math.pow(a.value, c - 1) if a.value != 0.0 else 0.0
        f2 = c * (c - 1) * math.pow(a.value, c - 2) if a.value != 0.0 else 0.0
        return a.apply(v, f1, f2)
    if a.value <= 0.0:
        raise DomainError(f"variable exponent needs a positive base, got {a.value!r}")
    b = eval_jet(exponent, p, order)
    return JET_FUNCTIONS["exp"](b * JET_FUNCTIONS["log"](a))


def eval_jet2(e: Expr, p: Sequence[float]) -> Jet:
    """Value, gradient and Hessian of ``e`` at ``p``."""
    return eval_jet(e, p, 2)
