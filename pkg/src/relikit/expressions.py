"""Limit-state expressions: text parsing, evaluation, numerical differentiation.

Grammar (standard precedence, loosest to tightest):

    expr    := term (('+' | '-') term)*
    term    := factor (('*' | '/') factor)*
    factor  := '-' factor | power
    power   := atom ('^' factor)?          # right-associative
    atom    := NUMBER | FUNc '(' expr ')' | VARIABLE | '(' expr ')'

Variables are written ``x1 .. xn`` (1-based); functions are ``sqrt``, ``exp``,
``log``, ``abs``, ``sin``, ``cos``. The textual grammar is a stable public
format accepted by run-configuration files.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import EvaluationDomainError, ExpressionSyntaxError

__all__ = [
    "LimitStateExpr",
    "GradientSettings",
    "parse",
    "evaluate",
    "gradient",
    "pretty",
]

Node = Union["Num", "Var", "Neg", "BinOp", "Call"]

FUNCTIONS = {
    "sqrt": np.sqrt,
    "exp": np.exp,
    "log": np.log,
    "abs": np.abs,
    "sin": np.sin,
    "cos": np.cos,
}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    index: int  # 1-based


@dataclass(frozen=True)
class Neg:
    operand: Node


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: Node
    right: Node


@dataclass(frozen=True)
class Call:
    func: str
    arg: Node


@dataclass(frozen=True)
class LimitStateExpr:
    """Parsed limit-state function g(x) over variables x1..x_arity."""

    root: Node
    arity: int
    source: str

    def __call__(self, x):
        return evaluate(self, x)


# --------------------------------------------------------------------------
# tokenizer / parser
# --------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)

_VAR_RE = re.compile(r"^x([1-9]\d*)$")


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            bad_pos = pos + (len(text[pos:]) - len(stripped))
            raise ExpressionSyntaxError(
                f"unexpected character {stripped[0]!r}", _byte_offset(text, bad_pos)
            )
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), _byte_offset(text, m.start(kind))))
        pos = m.end()
    tokens.append(("end", "", _byte_offset(text, len(text))))
    return tokens


class _Parser:
    def __init__(self, text: str, arity: int):
        self.text = text
        self.arity = arity
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message: str, offset: int | None = None):
        raise ExpressionSyntaxError(
            message, self.peek()[2] if offset is None else offset
        )

    def parse(self) -> Node:
        node = self.expr()
        kind, value, offset = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected token {value!r}", offset)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.advance()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            op = self.advance()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Node:
        if self.peek()[:2] == ("op", "-"):
            self.advance()
            return Neg(self.factor())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.advance()
            return BinOp("^", base, self.factor())
        return base

    def atom(self) -> Node:
        kind, value, offset = self.advance()
        if kind == "num":
            return Num(float(value))
        if kind == "ident":
            var = _VAR_RE.match(value)
            if var:
                index = int(var.group(1))
                if index > self.arity:
                    raise ExpressionSyntaxError(
                        f"variable x{index} exceeds arity {self.arity}", offset
                    )
                return Var(index)
            if value in FUNCTIONS:
                if self.peek()[:2] != ("op", "("):
                    self.error(f"expected '(' after function {value!r}")
                self.advance()
                arg = self.expr()
                if self.peek()[:2] != ("op", ")"):
                    self.error("expected ')'")
                self.advance()
                return Call(value, arg)
            raise ExpressionSyntaxError(f"unknown identifier {value!r}", offset)
        if (kind, value) == ("op", "("):
            node = self.expr()
            if self.peek()[:2] != ("op", ")"):
                self.error("expected ')'")
            self.advance()
            return node
        if kind == "end":
            raise ExpressionSyntaxError("unexpected end of expression", offset)
        raise ExpressionSyntaxError(f"unexpected token {value!r}", offset)


def parse(text: str, arity: int) -> LimitStateExpr:
    """Parse expression ``text`` over variables ``x1..x<arity>``."""
    if not isinstance(arity, (int, np.integer)) or arity < 0:
        raise ValueError(f"arity must be a non-negative integer, got {arity}")
    if not text or not text.strip():
        raise ExpressionSyntaxError("empty expression", 0)
    return LimitStateExpr(_Parser(text, int(arity)).parse(), int(arity), text)


# --------------------------------------------------------------------------
# pretty printer (emits text that reparses to an identical tree)
# --------------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4, "atom": 5}


def _prec(node: Node) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _PREC["neg"]
    if isinstance(node, Num) and node.value < 0:
        return _PREC["neg"]
    return _PREC["atom"]


def _fmt(node: Node) -> str:
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return f"x{node.index}"
    if isinstance(node, Call):
        return f"{node.func}({_fmt(node.arg)})"
    if isinstance(node, Neg):
        inner = _fmt(node.operand)
        if _prec(node.operand) < _PREC["neg"]:
            inner = f"({inner})"
        return f"-{inner}"
    left, right = _fmt(node.left), _fmt(node.right)
    prec = _PREC[node.op]
    if node.op == "^":
        # right-associative: parenthesize any compound base, bare exponents only
        if _prec(node.left) <= prec:
            left = f"({left})"
        if _prec(node.right) < prec:
            right = f"({right})"
    else:
        # left-associative: equal-precedence right operands need parens to
        # survive reparsing as the same tree
        if _prec(node.left) < prec:
            left = f"({left})"
        if _prec(node.right) <= prec:
            right = f"({right})"
    return f"{left} {node.op} {right}"


def pretty(expr: LimitStateExpr) -> str:
    """Canonical text form of the expression tree."""
    return _fmt(expr.root)


# --------------------------------------------------------------------------
# evaluation
# --------------------------------------------------------------------------


def _check_nan(value, node: Node, message: str):
    if np.any(np.isnan(value)):
        raise EvaluationDomainError(message, _fmt(node))


def _eval(node: Node, cols) -> np.ndarray:
    if isinstance(node, Num):
        return np.asarray(node.value)
    if isinstance(node, Var):
        return cols[node.index - 1]
    if isinstance(node, Neg):
        return -_eval(node.operand, cols)
    if isinstance(node, Call):
        arg = _eval(node.arg, cols)
        if node.func == "sqrt" and np.any(arg < 0):
            raise EvaluationDomainError("sqrt of negative argument", _fmt(node))
        if node.func == "log" and np.any(arg < 0):
            raise EvaluationDomainError("log of negative argument", _fmt(node))
        with np.errstate(divide="ignore"):
            out = FUNCTIONS[node.func](arg)
        _check_nan(out, node, "undefined function value")
        return out
    left = _eval(node.left, cols)
    right = _eval(node.right, cols)
    if node.op == "^":
        if np.any((left < 0) & (np.mod(right, 1.0) != 0.0)):
            raise EvaluationDomainError(
                "non-integer power of a negative base", _fmt(node)
            )
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            out = np.power(left, right)
    elif node.op == "/":
        with np.errstate(divide="ignore", invalid="ignore"):
            out = left / right
    else:
        with np.errstate(over="ignore", invalid="ignore"):
            out = {"+": np.add, "-": np.subtract, "*": np.multiply}[node.op](left, right)
    _check_nan(out, node, "undefined arithmetic result")
    return out


def evaluate(expr: LimitStateExpr, x):
    """Evaluate g at ``x``.

    ``x`` of shape (arity,) gives a scalar; shape (..., arity) evaluates
    elementwise over leading axes.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] != expr.arity:
        raise ValueError(
            f"expected input with last dimension {expr.arity}, got shape {x.shape}"
        )
    cols = [x[..., i] for i in range(expr.arity)]
    out = _eval(expr.root, cols)
    out = np.broadcast_to(out, x.shape[:-1])
    if out.ndim == 0:
        return float(out)
    return np.array(out)


@dataclass(frozen=True)
class GradientSettings:
    """Finite-difference settings: absolute step ``h`` and scheme.

    The step is absolute (not scaled by ``|x_i|``), which is a known
    limitation for badly scaled variables.
    """

    h: float = 1e-5
    scheme: str = "forward"

    def __post_init__(self):
        if not (0.0 < self.h < 1e-1):
            raise ValueError(f"step h must lie in (0, 0.1), got {self.h}")
        if self.scheme not in ("forward", "central"):
            raise ValueError(f"scheme must be 'forward' or 'central', got {self.scheme!r}")


def gradient(expr: LimitStateExpr, x, settings: GradientSettings | None = None) -> np.ndarray:
    """Finite-difference gradient of g at a single point ``x``."""
    settings = settings or GradientSettings()
    x = np.asarray(x, dtype=float)
    if x.shape != (expr.arity,):
        raise ValueError(f"expected point of shape ({expr.arity},), got {x.shape}")
    h = settings.h
    probes = np.tile(x, (expr.arity, 1))
    idx = np.arange(expr.arity)
    if settings.scheme == "forward":
        g0 = evaluate(expr, x)
        probes[idx, idx] += h
        return (evaluate(expr, probes) - g0) / h
    plus = probes.copy()
    plus[idx, idx] += h
    minus = probes
    minus[idx, idx] -= h
    return (evaluate(expr, plus) - evaluate(expr, minus)) / (2.0 * h)
