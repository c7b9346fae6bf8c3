"""Recursive-descent parser for the expression DSL.

Grammar (EBNF, also documented in the README):

    expr     = term { ("+" | "-") term } ;
    term     = unary { ("*" | "/") unary } ;
    unary    = { "-" | "+" } power ;
    power    = atom [ "^" exponent ] ;
    exponent = [ "-" ] integer
             | "(" [ "-" ] integer [ "/" integer ] ")" ;
    atom     = number | ident | ident "(" expr ")" | "(" expr ")" ;
    number   = integer | integer "." digits ;

    Bare exponents are integers; fractional exponents must be
    parenthesized (x^(1/2)), since x^2/4 reads as (x^2)/4.

Identifiers must be coordinates of the supplied chart or the formal
action parameter ``r``; the function heads are exp, log, sqrt, abs,
sign, sin, cos.  ``sqrt(x)`` is sugar for ``x^(1/2)``.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Optional, Sequence

from . import expr as ex

__all__ = ["parse", "ParseError", "UnknownIdentifierError", "FUNCTIONS"]

FUNCTIONS = {"exp": ex.exp_, "log": ex.log_, "sqrt": ex.sqrt_,
             "abs": ex.abs_, "sign": ex.sign_, "sin": ex.sin_, "cos": ex.cos_}

_TOKEN = re.compile(r"\s*(?:(\d+\.\d+|\d+)|([A-Za-z_][A-Za-z_0-9]*)|([()+\-*/^]))")


class ParseError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class UnknownIdentifierError(ParseError):
    pass


class _Lexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.tokens = []
        while self.pos < len(text):
            m = _TOKEN.match(text, self.pos)
            if not m or m.end() == self.pos:
                stray = text[self.pos:].lstrip()
                if not stray:
                    break
                raise ParseError(f"unexpected character {stray[0]!r}",
                                 len(text) - len(stray))
            num, ident, op = m.groups()
            start = m.end() - len(num or ident or op)
            if num:
                self.tokens.append(("num", num, start))
            elif ident:
                self.tokens.append(("ident", ident, start))
            else:
                self.tokens.append(("op", op, start))
            self.pos = m.end()
        self.tokens.append(("end", "", len(text)))
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, val, pos = self.next()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r} but found {val!r}" if val
                             else f"expected {op!r} but input ended", pos)


def parse(text: str, chart=None, names: Optional[Sequence[str]] = None) -> ex.Expr:
    """Parse a DSL string into an Expr.

    Identifiers are validated against the chart's coordinates (plus the
    action parameter 'r') or, when no chart is given, against `names`.
    """
    if chart is not None:
        allowed = set(chart.coords) | {"r", "s"}
        where = f"chart {chart.name!r} declares ({', '.join(chart.coords)})"
    elif names is not None:
        allowed = set(names) | {"r", "s"}
        where = f"known names: ({', '.join(sorted(allowed))})"
    else:
        allowed = None
        where = ""
    lx = _Lexer(text)

    def p_expr() -> ex.Expr:
        parts = [p_term()]
        while True:
            kind, val, _ = lx.peek()
            if kind == "op" and val in "+-":
                lx.next()
                t = p_term()
                parts.append(t if val == "+" else ex.neg(t))
            else:
                return ex.add(*parts)

    def p_term() -> ex.Expr:
        out = p_unary()
        while True:
            kind, val, _ = lx.peek()
            if kind == "op" and val in "*/":
                lx.next()
                rhs = p_unary()
                out = ex.mul(out, rhs) if val == "*" else ex.div(out, rhs)
            else:
                return out

    def p_unary() -> ex.Expr:
        negate = False
        while True:
            kind, val, _ = lx.peek()
            if kind == "op" and val in "+-":
                lx.next()
                if val == "-":
                    negate = not negate
            else:
                break
        out = p_power()
        return ex.neg(out) if negate else out

    def p_power() -> ex.Expr:
        base = p_atom()
        kind, val, _ = lx.peek()
        if kind == "op" and val == "^":
            lx.next()
            return ex.pw(base, p_exponent())
        return base

    def p_exponent() -> Fraction:
        # bare exponents are integers; fractional exponents need parens,
        # otherwise x^2/4 would be ambiguous with (x^2)/4
        kind, val, pos = lx.peek()
        if kind == "op" and val == "(":
            lx.next()
            q = p_signed_rational(allow_fraction=True)
            lx.expect_op(")")
            return q
        return p_signed_rational(allow_fraction=False)

    def p_signed_rational(allow_fraction: bool) -> Fraction:
        sign = 1
        kind, val, pos = lx.peek()
        if kind == "op" and val == "-":
            lx.next()
            sign = -1
        kind, val, pos = lx.next()
        if kind != "num" or "." in val:
            raise ParseError(f"expected an integer exponent, found {val!r}", pos)
        num = int(val)
        kind, val, _ = lx.peek()
        if allow_fraction and kind == "op" and val == "/":
            lx.next()
            kind, val, pos = lx.next()
            if kind != "num" or "." in val:
                raise ParseError(f"expected an integer denominator, found {val!r}", pos)
            return Fraction(sign * num, int(val))
        return Fraction(sign * num)

    def p_atom() -> ex.Expr:
        kind, val, pos = lx.next()
        if kind == "num":
            return ex.rat(Fraction(val))
        if kind == "ident":
            k2, v2, _ = lx.peek()
            if k2 == "op" and v2 == "(":
                if val not in FUNCTIONS:
                    raise UnknownIdentifierError(f"unknown function {val!r}", pos)
                lx.next()
                arg = p_expr()
                lx.expect_op(")")
                return FUNCTIONS[val](arg)
            if val in FUNCTIONS:
                raise ParseError(f"function {val!r} needs an argument list", pos)
            if allowed is not None and val not in allowed:
                raise UnknownIdentifierError(
                    f"unknown identifier {val!r}; {where}", pos)
            return ex.var(val)
        if kind == "op" and val == "(":
            inner = p_expr()
            lx.expect_op(")")
            return inner
        raise ParseError(f"unexpected token {val!r}" if val else "unexpected end of input", pos)

    out = p_expr()
    kind, val, pos = lx.peek()
    if kind != "end":
        raise ParseError(f"unexpected token {val!r}", pos)
    return out
