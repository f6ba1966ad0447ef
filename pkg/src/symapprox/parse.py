"""Recursive-descent parser for the infix expression syntax.

Grammar (lowest to highest precedence)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := ("-" | "+") unary | power
    power   := atom (("^" | "**") unary)?
    atom    := number | name primes? call? | "(" expr ")"

Calls to ``sin cos exp log sqrt`` build known functions, ``D(f, x[, n])``
differentiates, ``Int(f, x, a, b)`` builds a held integral and
``Piecewise(x, [lo, hi, value], ...)`` a piecewise function.  Any other call
is an unknown function; primes (``u''(0)``) give the derivative order.
Names ending in ``_`` (and ``_`` alone) are pattern wildcards.
"""
from __future__ import annotations

import re
from fractions import Fraction

from .errors import ParseError
from .expr import (
    Expr,
    Num,
    Symbol,
    Unknown,
    Wild,
    add,
    as_expr,
    div,
    func,
    integral,
    mul,
    neg,
    piecewise,
    power,
    sqrt,
    sub,
)

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>\d+\.\d*|\.\d+|\d+)
  | (?P<name>[^\W\d]\w*)
  | (?P<op>\*\*|[-+*/^(),\[\]'=])
""", re.VERBOSE)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            val = m.group()
            out.append((kind, "^" if val == "**" else val, pos))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def take(self, value: str | None = None):
        kind, val, pos = self.tok
        if value is not None and val != value:
            shown = repr(val) if kind != "end" else "end of input"
            raise ParseError(f"expected {value!r}, found {shown}", pos)
        self.i += 1
        return val

    def at(self, value: str) -> bool:
        return self.tok[1] == value and self.tok[0] == "op"

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok[0] != "end":
            raise ParseError(f"unexpected {self.tok[1]!r}", self.tok[2])
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.at("+") or self.at("-"):
            op = self.take()
            rhs = self.term()
            e = add(e, rhs) if op == "+" else sub(e, rhs)
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.at("*") or self.at("/"):
            op = self.take()
            rhs = self.unary()
            if op == "*":
                e = mul(e, rhs)
            else:
                if rhs == Num(0):
                    raise ParseError("division by zero", self.tok[2])
                e = div(e, rhs)
        return e

    def unary(self) -> Expr:
        if self.at("-"):
            self.take()
            return neg(self.unary())
        if self.at("+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.at("^"):
            pos = self.tok[2]
            self.take()
            exponent = self.unary()
            try:
                return power(base, exponent)
            except ArithmeticError as exc:
                raise ParseError(str(exc), pos) from None
        return base

    def atom(self) -> Expr:
        kind, val, pos = self.tok
        if kind == "num":
            self.take()
            return Num(Fraction(val))
        if kind == "op" and val == "(":
            self.take()
            e = self.expr()
            self.take(")")
            return e
        if kind == "name":
            self.take()
            primes = 0
            while self.at("'"):
                self.take()
                primes += 1
            if self.at("("):
                return self.call(val, primes, pos)
            if primes:
                raise ParseError(f"primes on {val} require an argument list", pos)
            if val.endswith("_"):
                return Wild(val if val == "_" else val[:-1])
            return Symbol(val)
        if kind == "end":
            raise ParseError("unexpected end of input", pos)
        raise ParseError(f"unexpected {val!r}", pos)

    def arglist(self) -> list:
        self.take("(")
        args = []
        if not self.at(")"):
            args.append(self.item())
            while self.at(","):
                self.take()
                args.append(self.item())
        self.take(")")
        return args

    def item(self):
        if self.at("["):
            self.take()
            parts = [self.expr()]
            while self.at(","):
                self.take()
                parts.append(self.expr())
            self.take("]")
            return parts
        return self.expr()

    def call(self, name: str, primes: int, pos: int) -> Expr:
        args = self.arglist()
        if any(isinstance(a, list) for a in args) and name != "Piecewise":
            raise ParseError(f"list argument not allowed in {name}", pos)

        def arity(*allowed):
            if len(args) not in allowed:
                raise ParseError(f"{name} takes {' or '.join(map(str, allowed))} arguments", pos)

        def symbol_arg(a, what):
            if not isinstance(a, Symbol):
                raise ParseError(f"{what} of {name} must be a symbol", pos)
            return a

        if primes and name in ("sin", "cos", "exp", "log", "sqrt", "D", "Int", "Piecewise"):
            raise ParseError(f"primes not allowed on {name}", pos)
        if name in ("sin", "cos", "exp", "log"):
            arity(1)
            try:
                return func(name, args[0])
            except ArithmeticError as exc:
                raise ParseError(str(exc), pos) from None
        if name == "sqrt":
            arity(1)
            return sqrt(args[0])
        if name == "D":
            arity(2, 3)
            from .calculus import diff
            var = symbol_arg(args[1], "variable")
            order = 1
            if len(args) == 3:
                if not (isinstance(args[2], Num) and args[2].is_integer and args[2].value >= 1):
                    raise ParseError("derivative order must be a positive integer", pos)
                order = int(args[2].value)
            return diff(args[0], var, order)
        if name == "Int":
            arity(4)
            return integral(args[0], symbol_arg(args[1], "variable"), args[2], args[3])
        if name == "Piecewise":
            if len(args) < 1:
                raise ParseError("Piecewise needs a variable", pos)
            var = symbol_arg(args[0], "variable")
            pieces = []
            for p in args[1:]:
                if not (isinstance(p, list) and len(p) == 3):
                    raise ParseError("Piecewise pieces are [lo, hi, value] lists", pos)
                pieces.append(tuple(p))
            try:
                return piecewise(var, pieces)
            except Exception as exc:  # noqa: BLE001 - re-raised with position
                raise ParseError(str(exc), pos) from None
        if not args:
            raise ParseError(f"{name}() needs at least one argument", pos)
        derivs = None
        if primes:
            if len(args) != 1:
                raise ParseError("primes are only allowed on single-argument unknowns", pos)
            derivs = (primes,)
        return Unknown(name, tuple(as_expr(a) for a in args), derivs)


def parse_expr(text: str) -> Expr:
    """Parse ``text`` into a canonical expression; raises :class:`ParseError`."""
    if not text or not text.strip():
        raise ParseError("empty expression", 0)
    return _Parser(text).parse()


def parse_equation(text: str) -> Expr:
    """Parse ``lhs = rhs`` (or a bare expression) into ``lhs - rhs``."""
    if text.count("=") > 1:
        raise ParseError("more than one '=' in equation", text.rfind("="))
    if "=" in text:
        lhs, rhs = text.split("=")
        if not lhs.strip():
            raise ParseError("missing left-hand side", 0)
        if not rhs.strip():
            raise ParseError("missing right-hand side", len(text))
        return sub(parse_expr(lhs), parse_expr(rhs))
    return parse_expr(text)
