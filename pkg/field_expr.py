"""Scalar-field expressions in the variables ``x`` and ``y``.

A small recursive-descent parser turns formulas such as
``x/4 + y/9 - 1.3*y*(x-0.5)`` into an immutable expression tree.  Trees
evaluate on plain floats and on numpy arrays alike, so the same parsed
formula serves single-point evaluation and whole-lattice sampling.

Grammar (``^`` is right-associative; unary minus binds tighter than ``*``
and looser than ``^``)::

    expr   := term (("+" | "-") term)*
    term   := factor (("*" | "/") factor)*
    factor := "-" factor | power
    power  := atom ("^" factor)?
    atom   := number | "x" | "y" | "pi" | "e" | func "(" expr ")" | "(" expr ")"
    func   := "sin" | "cos" | "tan" | "exp" | "log" | "sqrt" | "abs"
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np

from errors import (
    DomainError,
    ExpressionSyntaxError,
    UnknownFigure,
    UnknownIdentifier,
)
from gasket import barycentric
from models import Point2

FUNCTIONS: dict[str, Callable] = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
}
CONSTANTS = {"pi": math.pi, "e": math.e}
VARIABLES = ("x", "y")

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
    | (?P<number>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)
    | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
    | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


class Token(NamedTuple):
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if not match:
            raise ExpressionSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = match.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, match.group(), pos))
        pos = match.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


# -- expression tree --------------------------------------------------------


def _checked(result, what: str):
    if not np.all(np.isfinite(result)):
        raise DomainError(f"{what} is undefined or overflows for the given point")
    return result


@dataclass(frozen=True)
class Number:
    value: float

    def evaluate(self, x, y):
        return _checked(self.value, "literal")

    def __str__(self) -> str:
        return repr(self.value)


@dataclass(frozen=True)
class Variable:
    name: str

    def evaluate(self, x, y):
        return x if self.name == "x" else y

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Constant:
    name: str

    def evaluate(self, x, y):
        return CONSTANTS[self.name]

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Negate:
    operand: "Node"

    def evaluate(self, x, y):
        return -self.operand.evaluate(x, y)

    def __str__(self) -> str:
        return f"(-{self.operand})"


@dataclass(frozen=True)
class BinaryOp:
    op: str
    left: "Node"
    right: "Node"

    def evaluate(self, x, y):
        a = self.left.evaluate(x, y)
        b = self.right.evaluate(x, y)
        with np.errstate(all="ignore"):
            if self.op == "+":
                return _checked(np.add(a, b), "sum")
            if self.op == "-":
                return _checked(np.subtract(a, b), "difference")
            if self.op == "*":
                return _checked(np.multiply(a, b), "product")
            if self.op == "/":
                if np.any(np.asarray(b) == 0):
                    raise DomainError("division by zero")
                return _checked(np.true_divide(a, b), "division")
            return _checked(np.power(np.asarray(a, dtype=float), b), "power")

    def __str__(self) -> str:
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"

    def evaluate(self, x, y):
        value = self.arg.evaluate(x, y)
        if self.func == "log" and np.any(np.asarray(value) <= 0):
            raise DomainError("log of a non-positive argument")
        if self.func == "sqrt" and np.any(np.asarray(value) < 0):
            raise DomainError("sqrt of a negative argument")
        with np.errstate(all="ignore"):
            return _checked(FUNCTIONS[self.func](value), self.func)

    def __str__(self) -> str:
        return f"{self.func}({self.arg})"


Node = Number | Variable | Constant | Negate | BinaryOp | Call


class _Parser:
    def __init__(self, text: str) -> None:
        self.tokens = tokenize(text)
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.current
        self.index += 1
        return token

    def expect(self, text: str) -> None:
        if self.current.text != text:
            found = self.current.text or "end of input"
            raise ExpressionSyntaxError(
                f"expected {text!r} but found {found!r}", self.current.pos
            )
        self.advance()

    def parse(self) -> Node:
        node = self.expr()
        if self.current.kind != "end":
            raise ExpressionSyntaxError(
                f"unexpected {self.current.text!r}", self.current.pos
            )
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.current.text in ("+", "-"):
            op = self.advance().text
            node = BinaryOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.current.text in ("*", "/"):
            op = self.advance().text
            node = BinaryOp(op, node, self.factor())
        return node

    def factor(self) -> Node:
        if self.current.text == "-":
            self.advance()
            return Negate(self.factor())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.current.text == "^":
            self.advance()
            return BinaryOp("^", base, self.factor())
        return base

    def atom(self) -> Node:
        token = self.current
        if token.kind == "number":
            self.advance()
            return Number(float(token.text))
        if token.kind == "name":
            self.advance()
            if token.text in VARIABLES:
                return Variable(token.text)
            if token.text in CONSTANTS:
                return Constant(token.text)
            if token.text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(token.text, arg)
            raise UnknownIdentifier(token.text, token.pos)
        if token.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        found = token.text or "end of input"
        raise ExpressionSyntaxError(
            f"expected a number, variable or '(' but found {found!r}", token.pos
        )


@dataclass(frozen=True)
class FieldExpr:
    root: Node
    text: str

    def __call__(self, x, y):
        return self.root.evaluate(x, y)

    def __str__(self) -> str:
        return str(self.root)


@lru_cache(maxsize=256)
def parse(text: str) -> FieldExpr:
    return FieldExpr(_Parser(text).parse(), text)


def evaluate(fe: FieldExpr, t: Point2) -> float:
    return float(fe(t.x, t.y))


# -- scalar fields ----------------------------------------------------------


def _as_result(value, x):
    if np.ndim(x) == 0:
        return float(value)
    return np.broadcast_to(np.asarray(value, dtype=float), np.shape(x)).copy()


class ScalarField:
    """A real-valued map on the gasket, callable on floats or arrays."""

    kind = "built-in"
    label = ""

    def __call__(self, x, y):
        raise NotImplementedError

    def at(self, t: Point2) -> float:
        return float(self(t.x, t.y))

    def __add__(self, other: "ScalarField") -> "ScalarField":
        return SumField(self, other, 1.0)

    def __sub__(self, other: "ScalarField") -> "ScalarField":
        return SumField(self, other, -1.0)

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.label}>"


class ExprField(ScalarField):
    kind = "expression"

    def __init__(self, expr: FieldExpr) -> None:
        self.expr = expr
        self.label = expr.text

    @classmethod
    def from_text(cls, text: str) -> "ExprField":
        return cls(parse(text))

    def __call__(self, x, y):
        return _as_result(self.expr(x, y), x)


class ConstantField(ScalarField):
    def __init__(self, value: float) -> None:
        self.value = float(value)
        self.label = repr(self.value)

    def __call__(self, x, y):
        return _as_result(self.value, x)


class BarycentricBump(ScalarField):
    """``scale * l1 * l2 * l3``; vanishes exactly at the three corners."""

    def __init__(self, scale: float = 1.0) -> None:
        self.scale = float(scale)
        self.label = f"{self.scale!r}*l1*l2*l3"

    def __call__(self, x, y):
        l1, l2, l3 = barycentric(x, y)
        return _as_result(self.scale * l1 * l2 * l3, x)


class SumField(ScalarField):
    def __init__(self, left: ScalarField, right: ScalarField, sign: float) -> None:
        self.left = left
        self.right = right
        self.sign = sign
        op = "+" if sign > 0 else "-"
        self.label = f"({left.label}) {op} ({right.label})"

    def __call__(self, x, y):
        return _as_result(self.left(x, y) + self.sign * self.right(x, y), x)


# -- built-in figure pairs -----------------------------------------------

# Compatibility tolerance for the figure pairs, whose bases use the literal
# 0.866 in place of sqrt(3)/2.
FIGURE_COMPAT_TOL = 1e-3
FIGURE_ALPHAS = (0.1, 0.3, 0.6, 0.9)

_EDGE_TERM = " - x^2*y + 0.866*x^2 + x*y - 0.866*x"

FIGURE_TEXTS: dict[int, tuple[str, str]] = {
    1: ("x/4 + y/9", "x/4 + y/9 - 1.3*y*(x-0.5)"),
    2: ("sin(x + 3.7) + 1.3*x", "sin(x + 3.7) + 1.3*x" + _EDGE_TERM),
    3: (
        "cos(2*x + 5) + sin(x + 2.7) - 1.5 + 1.3*x",
        "cos(2*x + 5) + sin(x + 2.7) - 1.5 + 1.3*x" + _EDGE_TERM,
    ),
    4: (
        "cos(100*x + 5) + sin(x + 2.7) - 1.5 + 1.3*x",
        "cos(100*x + 5) + sin(x + 2.7) - 1.5 + 1.3*x" + _EDGE_TERM,
    ),
}


def builtin_figure_fields(figure: int) -> tuple[ExprField, ExprField]:
    try:
        f_text, b_text = FIGURE_TEXTS[int(figure)]
    except (KeyError, TypeError, ValueError):
        raise UnknownFigure(figure) from None
    return ExprField.from_text(f_text), ExprField.from_text(b_text)


__all__ = [
    "FUNCTIONS",
    "CONSTANTS",
    "tokenize",
    "FieldExpr",
    "parse",
    "evaluate",
    "ScalarField",
    "ExprField",
    "ConstantField",
    "BarycentricBump",
    "SumField",
    "FIGURE_COMPAT_TOL",
    "FIGURE_ALPHAS",
    "FIGURE_TEXTS",
    "builtin_figure_fields",
]
