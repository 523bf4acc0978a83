"""Tiny arithmetic grammar for coefficient expressions.

Supports numbers, the coordinates x and y, the operators + - * /, unary
minus, parentheses, and the functions sin, cos, exp, abs.  Side-effect free;
this is the only parser in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ExpressionError

_FUNCTIONS: dict[str, Callable] = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "abs": np.abs,
}
_VARIABLES = ("x", "y")


@dataclass(frozen=True)
class _Token:
    kind: str   # "num", "ident", "op", "lparen", "rparen", "end"
    text: str
    pos: int
    value: float = 0.0


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch.isspace():
            i += 1
            continue
        if ch in "+-*/":
            tokens.append(_Token("op", ch, i))
            i += 1
        elif ch == "(":
            tokens.append(_Token("lparen", ch, i))
            i += 1
        elif ch == ")":
            tokens.append(_Token("rparen", ch, i))
            i += 1
        elif ch.isdigit() or ch == ".":
            j = i
            while j < n and (source[j].isdigit() or source[j] == "."):
                j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                while k < n and source[k].isdigit():
                    k += 1
                j = k
            text = source[i:j]
            try:
                value = float(text)
            except ValueError:
                raise ExpressionError(f"malformed number '{text}' at position {i}") from None
            tokens.append(_Token("num", text, i, value))
            i = j
        elif ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            tokens.append(_Token("ident", source[i:j], i))
            i = j
        else:
            raise ExpressionError(f"unexpected character '{ch}' at position {i}")
    tokens.append(_Token("end", "", n))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str, what: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            shown = tok.text if tok.kind != "end" else "end of expression"
            raise ExpressionError(f"expected {what} but found '{shown}' at position {tok.pos}")
        return self.advance()

    def parse(self):
        node = self.sum()
        tok = self.peek()
        if tok.kind != "end":
            raise ExpressionError(f"unexpected token '{tok.text}' at position {tok.pos}")
        return node

    def sum(self):
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            rhs = self.term()
            node = ("add" if op == "+" else "sub", node, rhs)
        return node

    def term(self):
        node = self.factor()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance().text
            rhs = self.factor()
            node = ("mul" if op == "*" else "div", node, rhs)
        return node

    def factor(self):
        tok = self.peek()
        if tok.kind == "op" and tok.text in "+-":
            self.advance()
            inner = self.factor()
            return inner if tok.text == "+" else ("neg", inner)
        return self.atom()

    def atom(self):
        tok = self.advance()
        if tok.kind == "num":
            return ("num", tok.value)
        if tok.kind == "ident":
            if tok.text in _FUNCTIONS:
                self.expect("lparen", f"'(' after function '{tok.text}'")
                arg = self.sum()
                self.expect("rparen", "')'")
                return ("call", tok.text, arg)
            if tok.text in _VARIABLES:
                return ("var", tok.text)
            raise ExpressionError(f"unknown identifier '{tok.text}' at position {tok.pos}")
        if tok.kind == "lparen":
            node = self.sum()
            self.expect("rparen", "')'")
            return node
        shown = tok.text if tok.kind != "end" else "end of expression"
        raise ExpressionError(f"unexpected token '{shown}' at position {tok.pos}")


def parse_expression(source: str):
    """Parse an expression; raises ExpressionError naming the offending token."""
    if not source.strip():
        raise ExpressionError("empty expression")
    return _Parser(_tokenize(source)).parse()


def _eval(node, env: dict[str, np.ndarray]):
    kind = node[0]
    if kind == "num":
        return node[1]
    if kind == "var":
        name = node[1]
        if name not in env:
            raise ExpressionError(
                f"variable '{name}' is not available on a {len(env)}D domain"
            )
        return env[name]
    if kind == "neg":
        return -_eval(node[1], env)
    if kind == "call":
        return _FUNCTIONS[node[1]](_eval(node[2], env))
    a = _eval(node[1], env)
    b = _eval(node[2], env)
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return a * b
    if kind == "div":
        with np.errstate(divide="raise", invalid="raise"):
            try:
                return a / b
            except FloatingPointError:
                raise ExpressionError("division by zero while evaluating expression") from None
    raise ExpressionError(f"internal: unknown node kind '{kind}'")


def evaluate_expression(source: str, x: np.ndarray, y: np.ndarray | None = None) -> np.ndarray:
    """Evaluate an expression on coordinate arrays (y only on 2D domains)."""
    node = parse_expression(source)
    env = {"x": np.asarray(x, dtype=float)}
    if y is not None:
        env["y"] = np.asarray(y, dtype=float)
    out = _eval(node, env)
    result = np.broadcast_to(np.asarray(out, dtype=float), env["x"].shape).copy()
    if not np.all(np.isfinite(result)):
        raise ExpressionError("expression produced non-finite values")
    return result
