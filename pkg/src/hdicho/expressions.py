"""Tiny arithmetic expression grammar for coefficient matrices in configs.

Grammar (usual precedence, ^ is right-associative power):

    expr    := term (('+' | '-') term)*
    term    := factor (('*' | '/') factor)*
    factor  := '-' factor | power
    power   := primary ('^' factor)?
    primary := NUMBER | 't' | NAME '(' expr ')' | '(' expr ')'

with NAME one of exp, log, sin, cos.  Parsing produces a plain Python
callable of the scalar time variable t.
"""

from __future__ import annotations

import math
import re
from typing import Callable

__all__ = ["ExpressionError", "parse_expression"]

_FUNCTIONS = {"exp": math.exp, "log": math.log, "sin": math.sin, "cos": math.cos}

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


class ExpressionError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            if src[pos:].strip() == "":
                break
            raise ExpressionError(f"unexpected character {src[pos]!r}", pos)
        if m.lastgroup == "number":
            tokens.append(("number", m.group("number"), m.start("number")))
        elif m.lastgroup == "name":
            tokens.append(("name", m.group("name"), m.start("name")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, value, pos = self.peek()
        if kind != "op" or value != op:
            raise ExpressionError(f"expected {op!r}", pos)
        self.advance()

    def parse(self) -> Callable[[float], float]:
        node = self.expr()
        kind, value, pos = self.peek()
        if kind != "end":
            raise ExpressionError(f"trailing input {value!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.advance()
                rhs = self.term()
                if value == "+":
                    node = (lambda a, b: lambda t: a(t) + b(t))(node, rhs)
                else:
                    node = (lambda a, b: lambda t: a(t) - b(t))(node, rhs)
            else:
                return node

    def term(self):
        node = self.factor()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "*/":
                self.advance()
                rhs = self.factor()
                if value == "*":
                    node = (lambda a, b: lambda t: a(t) * b(t))(node, rhs)
                else:
                    node = (lambda a, b: lambda t: a(t) / b(t))(node, rhs)
            else:
                return node

    def factor(self):
        # unary minus binds looser than ^, so -t^2 parses as -(t^2)
        kind, value, _ = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            inner = self.factor()
            return (lambda a: lambda t: -a(t))(inner)
        return self.power()

    def power(self):
        base = self.primary()
        kind, value, _ = self.peek()
        if kind == "op" and value == "^":
            self.advance()
            exponent = self.factor()  # right-associative; allows 2^-3
            return (lambda a, b: lambda t: a(t) ** b(t))(base, exponent)
        return base

    def primary(self):
        kind, value, pos = self.advance()
        if kind == "number":
            const = float(value)
            return lambda t: const
        if kind == "name":
            if value == "t":
                return lambda t: t
            fn = _FUNCTIONS.get(value)
            if fn is None:
                raise ExpressionError(
                    f"unknown name {value!r} (allowed: t, {', '.join(_FUNCTIONS)})", pos
                )
            self.expect_op("(")
            inner = self.expr()
            self.expect_op(")")
            return (lambda f, a: lambda t: f(a(t)))(fn, inner)
        if kind == "op" and value == "(":
            inner = self.expr()
            self.expect_op(")")
            return inner
        raise ExpressionError(f"unexpected token {value!r}", pos)


def parse_expression(src: str) -> Callable[[float], float]:
    """Compile an expression in the variable t to a scalar callable."""
    if not isinstance(src, str) or not src.strip():
        raise ExpressionError("empty expression", 0)
    return _Parser(src).parse()
