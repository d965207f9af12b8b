"""Small arithmetic expression language for field components.

Grammar::

    expr   := term (("+" | "-") term)*
    term   := factor (("*" | "/") factor)*
    factor := "-" factor | atom ("^" integer)?
    atom   := number | ident | func "(" expr ")" | "(" expr ")"
    func   := "sqrt" | "exp" | "sin" | "cos"
    ident  := "x" digit+ | defined-name

Evaluation is generic over the scalar type: floats, :class:`~kropina.autodiff.Dual`
and :class:`~kropina.autodiff.Jet` all work.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Union

from . import autodiff as ad


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifier(ValueError):
    pass


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Var, Neg, BinOp, Pow, Call]

FUNCS = {"sqrt": ad.sqrt, "exp": ad.exp, "sin": ad.sin, "cos": ad.cos}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)
_COORD = re.compile(r"x(\d+)$")


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, names: frozenset[str] | None):
        self.tokens = _tokenize(text)
        self.i = 0
        self.names = names

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, text, pos = self.take()
        if text != value:
            raise ExprSyntaxError(f"expected {value!r}, got {text or 'end of input'!r}", pos)

    def parse(self) -> Expr:
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {text!r}", pos)
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Expr:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.factor())
        node = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            negative = False
            if self.peek()[:2] == ("op", "-"):
                self.take()
                negative = True
            kind, text, pos = self.take()
            if kind != "num" or not re.fullmatch(r"\d+", text):
                raise ExprSyntaxError("exponent must be an integer literal", pos)
            node = Pow(node, -int(text) if negative else int(text))
        return node

    def atom(self) -> Expr:
        kind, text, pos = self.take()
        if kind == "num":
            return Num(float(text))
        if kind == "ident":
            if text in FUNCS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            if _COORD.match(text) or self.names is None or text in self.names:
                return Var(text)
            raise UnknownIdentifier(f"unknown identifier {text!r} at offset {pos}")
        if text == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ExprSyntaxError(f"unexpected token {text or 'end of input'!r}", pos)


def parse_expr(text: str, names: frozenset[str] | set[str] | None = frozenset()) -> Expr:
    """Parse ``text`` into an AST.

    ``names`` lists the defined names that may appear besides ``x1..xn``;
    ``None`` disables the identifier check.
    """
    return _Parser(text, None if names is None else frozenset(names)).parse()


def evaluate(node: Expr, env: Mapping[str, object]):
    """Evaluate ``node`` with variables looked up in ``env``."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        try:
            return env[node.name]
        except KeyError:
            raise UnknownIdentifier(f"unbound identifier {node.name!r}") from None
    if isinstance(node, Neg):
        return -evaluate(node.operand, env)
    if isinstance(node, BinOp):
        a = evaluate(node.left, env)
        b = evaluate(node.right, env)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if isinstance(b, (int, float)):
            ad._check_denominator(b)
        return a / b
    if isinstance(node, Pow):
        return ad._int_power(evaluate(node.base, env), node.exponent)
    if isinstance(node, Call):
        return FUNCS[node.func](evaluate(node.arg, env))
    raise TypeError(f"not an expression node: {node!r}")


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def to_text(node: Expr, parent: int = 0) -> str:
    """Render ``node`` back into the surface syntax (fully re-parseable)."""
    if isinstance(node, Num):
        text = repr(node.value)
        return f"({text})" if node.value < 0 else text
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        text = "-" + to_text(node.operand, 3)
        return f"({text})" if parent > 2 else text
    if isinstance(node, BinOp):
        prec = _PREC[node.op]
        # right operand of - and / binds tighter to preserve left associativity
        text = f"{to_text(node.left, prec)} {node.op} {to_text(node.right, prec + 1)}"
        return f"({text})" if prec < parent else text
    if isinstance(node, Pow):
        base = to_text(node.base, 4)
        if not isinstance(node.base, (Num, Var, Call)):
            base = f"({to_text(node.base)})"
        return f"{base}^{node.exponent}" if node.exponent >= 0 else f"{base}^-{-node.exponent}"
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


def free_names(node: Expr) -> set[str]:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Num):
        return set()
    if isinstance(node, (Neg,)):
        return free_names(node.operand)
    if isinstance(node, BinOp):
        return free_names(node.left) | free_names(node.right)
    if isinstance(node, Pow):
        return free_names(node.base)
    return free_names(node.arg)
