"""A small expression language with value, gradient and Hessian evaluation.

Grammar (lowest to highest precedence)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?          # right associative
    atom   := number | name | func "(" expr ")" | "(" expr ")"

Functions: exp, log, sin, cos, sinh, cosh, sqrt, atan.  Derivatives are
propagated forward through the tree as truncated second-order jets.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

FUNCTIONS = ("exp", "log", "sin", "cos", "sinh", "cosh", "sqrt", "atan")

ATOM_START = frozenset({"number", "identifier", "(", "-"})


class ExpressionError(ValueError):
    pass


class ParseError(ExpressionError):
    """Syntax error at a byte offset, with the set of tokens that would fit."""

    def __init__(self, text: str, offset: int, expected: Iterable[str], found: str):
        self.text = text
        self.offset = offset
        self.expected = frozenset(expected)
        self.found = found
        exp = ", ".join(sorted(self.expected))
        super().__init__(
            f"syntax error at offset {offset}: found {found}, expected one of: {exp}")


class UnknownIdentifierError(ExpressionError):
    def __init__(self, name: str, offset: int, declared: Sequence[str]):
        self.name = name
        self.offset = offset
        self.declared = tuple(declared)
        listed = ", ".join(self.declared) if self.declared else "(none)"
        super().__init__(
            f"unknown identifier {name!r} at offset {offset}; declared variables: {listed}")


class DomainError(ExpressionError):
    """Evaluation left the domain of a function; ``node`` is the culprit."""

    def __init__(self, reason: str, node: "Expr"):
        self.reason = reason
        self.node = node
        super().__init__(f"{reason} in {to_text(node)}")


# -- syntax tree -------------------------------------------------------------

@dataclass(frozen=True)
class Expr:
    pass


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str  # one of + - * / ^
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    fn: str
    arg: Expr


def to_text(node: Expr) -> str:
    """Fully parenthesised text that parses back to an equivalent tree."""
    if isinstance(node, Num):
        text = repr(float(node.value))
        return f"({text})" if node.value < 0 or text.startswith("-") else text
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_text(node.arg)})"
    if isinstance(node, BinOp):
        return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
    if isinstance(node, Call):
        return f"{node.fn}({to_text(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


def free_variables(node: Expr) -> frozenset:
    if isinstance(node, Var):
        return frozenset({node.name})
    if isinstance(node, Num):
        return frozenset()
    if isinstance(node, (Neg, Call)):
        return free_variables(node.arg)
    return free_variables(node.left) | free_variables(node.right)


def substitute(node: Expr, mapping: Mapping[str, "Expr | float"]) -> Expr:
    """Replace variables by expressions or numbers."""
    if isinstance(node, Var):
        if node.name in mapping:
            rep = mapping[node.name]
            return rep if isinstance(rep, Expr) else Num(float(rep))
        return node
    if isinstance(node, Num):
        return node
    if isinstance(node, Neg):
        return Neg(substitute(node.arg, mapping))
    if isinstance(node, Call):
        return Call(node.fn, substitute(node.arg, mapping))
    return BinOp(node.op, substitute(node.left, mapping), substitute(node.right, mapping))


# -- tokenizer and parser ----------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<identifier>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


@dataclass
class _Token:
    kind: str  # number, identifier, op, end
    text: str
    offset: int  # byte offset


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    byte_pos = 0
    while True:
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos and not m.lastgroup:
            rest = text[pos:]
            stripped = rest.lstrip()
            byte_pos += len(rest[: len(rest) - len(stripped)].encode())
            if not stripped:
                tokens.append(_Token("end", "", byte_pos))
                return tokens
            raise ParseError(text, byte_pos, ATOM_START | {"+", "*", "/", "^", ")"},
                             f"unexpected character {stripped[0]!r}")
        start = m.start(m.lastgroup)
        byte_start = byte_pos + len(text[pos:start].encode())
        kind = m.lastgroup if m.lastgroup != "op" else "op"
        tokens.append(_Token(kind, m.group(m.lastgroup), byte_start))
        byte_pos = byte_start + len(m.group(m.lastgroup).encode())
        pos = m.end()


def _describe(tok: _Token) -> str:
    return "end of input" if tok.kind == "end" else repr(tok.text)


class _Parser:
    def __init__(self, text: str, variables):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0
        self.variables = None if variables is None else tuple(variables)

    @property
    def tok(self) -> _Token:
        return self.tokens[self.pos]

    def _is_op(self, *ops) -> bool:
        return self.tok.kind == "op" and self.tok.text in ops

    def _fail(self, expected):
        raise ParseError(self.text, self.tok.offset, expected, _describe(self.tok))

    def parse(self) -> Expr:
        node = self.expr()
        if self.tok.kind != "end":
            self._fail({"+", "-", "*", "/", "^", "end of input"})
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self._is_op("+", "-"):
            op = self.tok.text
            self.pos += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self._is_op("*", "/"):
            op = self.tok.text
            self.pos += 1
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self._is_op("-"):
            self.pos += 1
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self._is_op("^"):
            self.pos += 1
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "number":
            self.pos += 1
            return Num(float(tok.text))
        if tok.kind == "identifier":
            self.pos += 1
            if tok.text in FUNCTIONS:
                if not self._is_op("("):
                    self._fail({"("})
                self.pos += 1
                arg = self.expr()
                if not self._is_op(")"):
                    self._fail({")", "+", "-", "*", "/", "^"})
                self.pos += 1
                return Call(tok.text, arg)
            if self.variables is not None and tok.text not in self.variables:
                raise UnknownIdentifierError(tok.text, tok.offset, self.variables)
            return Var(tok.text)
        if self._is_op("("):
            self.pos += 1
            node = self.expr()
            if not self._is_op(")"):
                self._fail({")", "+", "-", "*", "/", "^"})
            self.pos += 1
            return node
        self._fail(ATOM_START)


def parse(text: str, variables: Sequence[str] | None = None) -> Expr:
    """Parse ``text``; if ``variables`` is given, other identifiers are errors."""
    if not isinstance(text, str):
        raise TypeError(f"expression text must be a string, got {type(text).__name__}")
    return _Parser(text, variables).parse()


# -- jets --------------------------------------------------------------------

@dataclass(frozen=True)
class Jet2:
    value: float
    gradient: np.ndarray
    hessian: np.ndarray
    variables: tuple = field(default=())


def _fn_derivs(fn: str, v: float, node: Expr, order: int):
    """Value and first two derivatives of a built-in function at v."""
    if fn == "exp":
        try:
            f = math.exp(v)
        except OverflowError:
            raise DomainError("overflow in exp", node) from None
        return f, f, f
    if fn == "log":
        if v <= 0:
            raise DomainError(f"log of nonpositive value {v!r}", node)
        return math.log(v), 1.0 / v, -1.0 / (v * v)
    if fn == "sin":
        s, c = math.sin(v), math.cos(v)
        return s, c, -s
    if fn == "cos":
        s, c = math.sin(v), math.cos(v)
        return c, -s, -c
    if fn == "sinh":
        try:
            s, c = math.sinh(v), math.cosh(v)
        except OverflowError:
            raise DomainError("overflow in sinh", node) from None
        return s, c, s
    if fn == "cosh":
        try:
            s, c = math.sinh(v), math.cosh(v)
        except OverflowError:
            raise DomainError("overflow in cosh", node) from None
        return c, s, c
    if fn == "sqrt":
        if v < 0:
            raise DomainError(f"sqrt of negative value {v!r}", node)
        r = math.sqrt(v)
        if order == 0:
            return r, 0.0, 0.0
        if r == 0.0:
            raise DomainError("sqrt is not differentiable at 0", node)
        return r, 0.5 / r, -0.25 / (r * v)
    if fn == "atan":
        d = 1.0 / (1.0 + v * v)
        return math.atan(v), d, -2.0 * v * d * d
    raise ExpressionError(f"unknown function {fn!r}")


def _const_power(base: float, c: float, node: Expr, order: int):
    is_int = float(c).is_integer()
    if base == 0.0 and c < 0:
        raise DomainError("division by zero in power", node)
    if base < 0 and not is_int:
        raise DomainError(f"negative base {base!r} with non-integer exponent", node)
    try:
        f = base**c
    except OverflowError:
        raise DomainError("overflow in power", node) from None
    if order == 0:
        return f, 0.0, 0.0
    if base == 0.0 and not is_int and c < 2:
        raise DomainError("power is not twice differentiable at 0", node)

    def term(coef, e):
        return 0.0 if coef == 0.0 else coef * base**e

    return f, term(c, c - 1), term(c * (c - 1), c - 2)


class _Evaluator:
    """Recursive jet evaluation; order 0 returns floats only."""

    def __init__(self, index: Mapping[str, int], values: Sequence[float], order: int):
        self.index = index
        self.values = values
        self.order = order
        self.n = len(values)

    def const(self, c: float):
        if self.order == 0:
            return (c, None, None)
        g = np.zeros(self.n)
        return (c, g, np.zeros((self.n, self.n)) if self.order > 1 else None)

    def chain(self, jet, f, d1, d2):
        v, g, H = jet
        if self.order == 0:
            return (f, None, None)
        gn = d1 * g
        Hn = None
        if self.order > 1:
            Hn = d1 * H + d2 * np.outer(g, g)
        return (f, gn, Hn)

    def ev(self, node: Expr):
        if isinstance(node, Num):
            return self.const(node.value)
        if isinstance(node, Var):
            try:
                i = self.index[node.name]
            except KeyError:
                raise UnknownIdentifierError(node.name, -1, tuple(self.index)) from None
            if self.order == 0:
                return (self.values[i], None, None)
            g = np.zeros(self.n)
            g[i] = 1.0
            return (self.values[i], g, np.zeros((self.n, self.n)) if self.order > 1 else None)
        if isinstance(node, Neg):
            v, g, H = self.ev(node.arg)
            return (-v, None if g is None else -g, None if H is None else -H)
        if isinstance(node, Call):
            a = self.ev(node.arg)
            f, d1, d2 = _fn_derivs(node.fn, a[0], node, self.order)
            return self.chain(a, f, d1, d2)
        op = node.op
        if op == "^" and not free_variables(node.right):
            a = self.ev(node.left)
            c = _eval_plain(node.right, {})
            f, d1, d2 = _const_power(a[0], c, node, self.order)
            return self.chain(a, f, d1, d2)
        a = self.ev(node.left)
        b = self.ev(node.right)
        if op == "+":
            return self._lin(a, b, 1.0)
        if op == "-":
            return self._lin(a, b, -1.0)
        if op == "*":
            return self._mul(a, b)
        if op == "/":
            if b[0] == 0.0:
                raise DomainError("division by zero", node)
            inv = 1.0 / b[0]
            return self._mul(a, self.chain(b, inv, -inv * inv, 2.0 * inv**3))
        if op == "^":
            if a[0] <= 0:
                raise DomainError(f"nonpositive base {a[0]!r} with variable exponent", node)
            la = self.chain(a, math.log(a[0]), 1.0 / a[0], -1.0 / a[0] ** 2)
            prod = self._mul(la, b)
            try:
                f = math.exp(prod[0])
            except OverflowError:
                raise DomainError("overflow in power", node) from None
            return self.chain(prod, f, f, f)
        raise ExpressionError(f"unknown operator {op!r}")

    def _lin(self, a, b, s):
        v = a[0] + s * b[0]
        if self.order == 0:
            return (v, None, None)
        return (v, a[1] + s * b[1], None if self.order < 2 else a[2] + s * b[2])

    def _mul(self, a, b):
        v = a[0] * b[0]
        if self.order == 0:
            return (v, None, None)
        g = a[0] * b[1] + b[0] * a[1]
        H = None
        if self.order > 1:
            cross = np.outer(a[1], b[1])
            H = a[0] * b[2] + b[0] * a[2] + cross + cross.T
        return (v, g, H)


def _eval_plain(node: Expr, point: Mapping[str, float]) -> float:
    names = tuple(point)
    return _Evaluator({k: i for i, k in enumerate(names)},
                      [float(point[k]) for k in names], 0).ev(node)[0]


def _resolve(point: Mapping[str, float], variables):
    names = tuple(point) if variables is None else tuple(variables)
    missing = [k for k in names if k not in point]
    if missing:
        raise ExpressionError(f"unbound variables: {', '.join(missing)}")
    return names, [float(point[k]) for k in names]


def eval_jet2(node: Expr, point: Mapping[str, float], variables=None) -> Jet2:
    """Value, gradient and Hessian with respect to ``variables``.

    ``variables`` defaults to the key order of ``point``.
    """
    names, vals = _resolve(point, variables)
    ev = _Evaluator({k: i for i, k in enumerate(names)}, vals, 2)
    v, g, H = ev.ev(node)
    return Jet2(float(v), g, 0.5 * (H + H.T), names)


def eval_jet1(node: Expr, point: Mapping[str, float], variables=None):
    """(value, gradient) only."""
    names, vals = _resolve(point, variables)
    ev = _Evaluator({k: i for i, k in enumerate(names)}, vals, 1)
    v, g, _ = ev.ev(node)
    return float(v), g


def evaluate(node: Expr, point: Mapping[str, float]) -> float:
    return float(_eval_plain(node, point))


# -- compiled value-only evaluation -------------------------------------------

class _Fail(Exception):
    pass


def _c_div(a, b):
    if b == 0.0:
        raise _Fail
    return a / b


def _c_pow(a, b):
    if (a == 0.0 and b < 0) or (a < 0 and not float(b).is_integer()):
        raise _Fail
    return a**b


def _c_log(a):
    if a <= 0:
        raise _Fail
    return math.log(a)


def _c_sqrt(a):
    if a < 0:
        raise _Fail
    return math.sqrt(a)


_COMPILE_ENV = {
    "_div": _c_div, "_pow": _c_pow, "_log": _c_log, "_sqrt": _c_sqrt,
    "_exp": math.exp, "_sin": math.sin, "_cos": math.cos, "_sinh": math.sinh,
    "_cosh": math.cosh, "_atan": math.atan,
}


def _source(node: Expr, index: Mapping[str, int]) -> str:
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, Var):
        return f"_x[{index[node.name]}]"
    if isinstance(node, Neg):
        return f"(-{_source(node.arg, index)})"
    if isinstance(node, Call):
        return f"_{node.fn}({_source(node.arg, index)})"
    a, b = _source(node.left, index), _source(node.right, index)
    if node.op == "/":
        return f"_div({a}, {b})"
    if node.op == "^":
        return f"_pow({a}, {b})"
    return f"({a} {node.op} {b})"


class CompiledExpr:
    """Fast value-only evaluation of an expression at positional arguments.

    Falls back to the tree walker to produce a located ``DomainError``.
    """

    def __init__(self, node: Expr, variables: Sequence[str]):
        self.node = node
        self.variables = tuple(variables)
        unknown = free_variables(node) - set(self.variables)
        if unknown:
            raise UnknownIdentifierError(sorted(unknown)[0], -1, self.variables)
        index = {k: i for i, k in enumerate(self.variables)}
        self._fn = eval(f"lambda _x: {_source(node, index)}", dict(_COMPILE_ENV))

    def __call__(self, values: Sequence[float]) -> float:
        try:
            return float(self._fn(values))
        except (_Fail, ValueError, OverflowError, ZeroDivisionError):
            point = dict(zip(self.variables, (float(v) for v in values)))
            return evaluate(self.node, point)

    def __getstate__(self):
        return {"node": self.node, "variables": self.variables}

    def __setstate__(self, state):
        self.__init__(state["node"], state["variables"])
