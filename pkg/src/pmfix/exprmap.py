"""Tiny arithmetic language for writing maps ``F(x, y)`` in config files.

Grammar (EBNF)::

    expr    = term , { ("+" | "-") , term } ;
    term    = unary , { ("*" | "/") , unary } ;
    unary   = "-" , unary | primary ;
    primary = number | "x" | "y"
            | ("max" | "min") , "(" , expr , "," , expr , ")"
            | "(" , expr , ")" ;
    number  = digits , [ "." , [ digits ] ] , [ exponent ]
            | "." , digits , [ exponent ] ;

Binary operators are left associative; unary minus binds tightest.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Union

from .errors import ExprEvalError, ExprSyntaxError, UnknownIdentifierError


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str  # "x" or "y"


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    fn: str  # "max" or "min"
    left: "Expr"
    right: "Expr"


Expr = Union[Num, Var, Neg, BinOp, Call]

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/(),])
    """,
    re.VERBOSE,
)

_FUNCS = ("max", "min")
_VARS = ("x", "y")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, lexeme: str):
        kind, value, pos = self.tok
        if value != lexeme or kind == "end":
            what = "end of input" if kind == "end" else repr(value)
            raise ExprSyntaxError(f"expected {lexeme!r}, found {what}", pos)
        self.advance()

    def parse(self) -> Expr:
        node = self.expr()
        kind, value, pos = self.tok
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {value!r}", pos)
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.tok[0] == "op" and self.tok[1] in "+-":
            op = self.advance()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.tok[0] == "op" and self.tok[1] in "*/":
            op = self.advance()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.tok[:2] == ("op", "-"):
            self.advance()
            return Neg(self.unary())
        return self.primary()

    def primary(self) -> Expr:
        kind, value, pos = self.tok
        if kind == "num":
            self.advance()
            v = float(value)
            if not math.isfinite(v):
                raise ExprSyntaxError(f"literal {value!r} is not finite", pos)
            return Num(v)
        if kind == "name":
            self.advance()
            if value in _VARS:
                return Var(value)
            if value in _FUNCS:
                self.expect("(")
                left = self.expr()
                self.expect(",")
                right = self.expr()
                self.expect(")")
                return Call(value, left, right)
            raise UnknownIdentifierError(f"unknown identifier {value!r}", pos)
        if (kind, value) == ("op", "("):
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        what = "end of input" if kind == "end" else repr(value)
        raise ExprSyntaxError(f"expected an operand, found {what}", pos)


def parse_expr(text: str) -> Expr:
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    return _Parser(text).parse()


def _finite(v: float) -> float:
    if not math.isfinite(v):
        raise ExprEvalError(f"non-finite result {v!r}")
    return v


def _div(a: float, b: float) -> float:
    if b == 0:
        raise ExprEvalError("division by zero")
    return a / b


_BINOPS: dict[str, Callable[[float, float], float]] = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": _div,
}


def eval_expr(ast: Expr, x: float, y: float) -> float:
    """Reference tree-walking evaluator."""
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ExprEvalError("inputs must be finite")

    def walk(node):
        if isinstance(node, Num):
            return node.value
        if isinstance(node, Var):
            return x if node.name == "x" else y
        if isinstance(node, Neg):
            return -walk(node.operand)
        if isinstance(node, BinOp):
            return _BINOPS[node.op](walk(node.left), walk(node.right))
        if isinstance(node, Call):
            fn = max if node.fn == "max" else min
            return fn(walk(node.left), walk(node.right))
        raise TypeError(f"not an expression node: {node!r}")

    try:
        return _finite(float(walk(ast)))
    except OverflowError as exc:
        raise ExprEvalError(str(exc)) from None


def compile_expr(ast: Expr) -> Callable[[float, float], float]:
    """Turn an AST into a closure tree; same semantics as :func:`eval_expr`."""

    def build(node):
        if isinstance(node, Num):
            c = node.value
            return lambda x, y: c
        if isinstance(node, Var):
            return (lambda x, y: x) if node.name == "x" else (lambda x, y: y)
        if isinstance(node, Neg):
            f = build(node.operand)
            return lambda x, y: -f(x, y)
        if isinstance(node, BinOp):
            f, g, op = build(node.left), build(node.right), _BINOPS[node.op]
            return lambda x, y: op(f(x, y), g(x, y))
        if isinstance(node, Call):
            f, g = build(node.left), build(node.right)
            fn = max if node.fn == "max" else min
            return lambda x, y: fn(f(x, y), g(x, y))
        raise TypeError(f"not an expression node: {node!r}")

    body = build(ast)

    def run(x: float, y: float) -> float:
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ExprEvalError("inputs must be finite")
        try:
            return _finite(float(body(x, y)))
        except OverflowError as exc:
            raise ExprEvalError(str(exc)) from None

    return run


def to_text(ast: Expr) -> str:
    """Print with full parenthesization; ``parse_expr(to_text(a)) == a``."""
    if isinstance(ast, Num):
        return repr(ast.value)
    if isinstance(ast, Var):
        return ast.name
    if isinstance(ast, Neg):
        return f"(-{to_text(ast.operand)})"
    if isinstance(ast, BinOp):
        return f"({to_text(ast.left)} {ast.op} {to_text(ast.right)})"
    if isinstance(ast, Call):
        return f"{ast.fn}({to_text(ast.left)}, {to_text(ast.right)})"
    raise TypeError(f"not an expression node: {ast!r}")
