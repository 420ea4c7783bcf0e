"""Infix expression parser (Pratt style).

Grammar: ``+ - * / ^`` with integer powers, parentheses, and the calls
sin/cos/exp/log.  Precedence, tightest first: ``^`` (right-associative),
unary minus, ``*`` ``/``, ``+`` ``-``.  Integer literals become exact
rationals; literals with a decimal point or exponent become floats.
Positions in errors are 1-based.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Mapping

from .errors import ExprSyntaxError, UnknownSymbolError
from .expr import Add, Call, Const, Div, Expr, FUNCTIONS, Mul, Neg, Pow, Sym, Symbol, simplify

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>\*|/|\+|-|\^|\(|\)|,))"
)

_ADD, _MUL, _UNARY, _POW = 10, 20, 30, 40

_MAX_EXPONENT = 999


class _Token:
    __slots__ = ("kind", "text", "pos")

    def __init__(self, kind: str, text: str, pos: int):
        self.kind = kind  # "num" | "name" | "op" | "end"
        self.text = text
        self.pos = pos  # 1-based


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    i = 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None or m.end() == i:
            stripped = text[i:].lstrip()
            if not stripped:
                break
            pos = i + (len(text[i:]) - len(stripped)) + 1
            raise ExprSyntaxError(f"unexpected character {stripped[0]!r}", pos)
        for kind in ("num", "name", "op"):
            s = m.group(kind)
            if s is not None:
                tokens.append(_Token(kind, s, m.start(kind) + 1))
                break
        i = m.end()
    tokens.append(_Token("end", "", len(text) + 1))
    return tokens


class _Parser:
    def __init__(self, text: str, context: Mapping[str, Symbol]):
        self.text = text
        self.context = context
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> None:
        tok = self.advance()
        if tok.kind != "op" or tok.text != text:
            raise ExprSyntaxError(f"expected {text!r}", tok.pos)

    def parse(self) -> Expr:
        e = self.expression(0)
        tok = self.peek()
        if tok.kind != "end":
            raise ExprSyntaxError(f"unexpected token {tok.text!r}", tok.pos)
        return e

    def expression(self, rbp: int) -> Expr:
        left = self.prefix()
        while True:
            tok = self.peek()
            lbp = self.lbp(tok)
            if rbp >= lbp:
                return left
            left = self.infix(left)

    @staticmethod
    def lbp(tok: _Token) -> int:
        if tok.kind == "op":
            if tok.text in ("+", "-"):
                return _ADD
            if tok.text in ("*", "/"):
                return _MUL
            if tok.text == "^":
                return _POW
        return 0

    def prefix(self) -> Expr:
        tok = self.advance()
        if tok.kind == "num":
            if "." in tok.text or "e" in tok.text or "E" in tok.text:
                return Const(float(tok.text))
            return Const(Fraction(int(tok.text)))
        if tok.kind == "name":
            nxt = self.peek()
            if nxt.kind == "op" and nxt.text == "(":
                if tok.text not in FUNCTIONS:
                    raise ExprSyntaxError(f"unknown function {tok.text!r}", tok.pos)
                self.advance()
                arg = self.expression(0)
                self.expect(")")
                return Call(tok.text, arg)
            symbol = self.context.get(tok.text)
            if symbol is None:
                raise UnknownSymbolError(tok.text, tok.pos)
            return Sym(symbol)
        if tok.kind == "op":
            if tok.text == "(":
                e = self.expression(0)
                self.expect(")")
                return e
            if tok.text == "-":
                return Neg(self.expression(_UNARY))
            if tok.text == "+":
                return self.expression(_UNARY)
        if tok.kind == "end":
            raise ExprSyntaxError("unexpected end of input", tok.pos)
        raise ExprSyntaxError(f"unexpected token {tok.text!r}", tok.pos)

    def infix(self, left: Expr) -> Expr:
        tok = self.advance()
        if tok.text == "+":
            return Add((left, self.expression(_ADD)))
        if tok.text == "-":
            return Add((left, Neg(self.expression(_ADD))))
        if tok.text == "*":
            return Mul((left, self.expression(_MUL)))
        if tok.text == "/":
            return Div(left, self.expression(_MUL))
        if tok.text == "^":
            exp_expr = self.expression(_POW - 1)  # right-associative
            return Pow(left, self._as_int_exponent(exp_expr, tok.pos))
        raise ExprSyntaxError(f"unexpected token {tok.text!r}", tok.pos)

    @staticmethod
    def _as_int_exponent(e: Expr, pos: int) -> int:
        s = simplify(e)
        if isinstance(s, Const) and isinstance(s.value, Fraction) and s.value.denominator == 1:
            k = int(s.value)
            if abs(k) > _MAX_EXPONENT:
                raise ExprSyntaxError(f"exponent magnitude above {_MAX_EXPONENT}", pos)
            return k
        raise ExprSyntaxError("exponent must be an integer constant", pos)


def parse(text: str, context: Mapping[str, Symbol]) -> Expr:
    """Parse ``text`` against a symbol table; returns the raw tree."""
    return _Parser(text, context).parse()
