"""Plain-text and LaTeX serialisation of expressions.

The plain format is the same infix grammar accepted by
:func:`symapprox.parse.parse_expr`, so ``parse_expr(render(e))`` rebuilds
``e`` for canonical input.
"""
from __future__ import annotations

from fractions import Fraction

from .expr import (
    Add,
    Deriv,
    Expr,
    Func,
    Integral,
    Mul,
    Num,
    Piecewise,
    Pow,
    Symbol,
    Unknown,
    Wild,
    split_coeff,
)

_P_ADD, _P_MUL, _P_NEG, _P_POW, _P_ATOM = 1, 2, 3, 4, 5


def render(e: Expr, fmt: str = "plain") -> str:
    if fmt == "plain":
        return _plain(e)[0]
    if fmt == "latex":
        return _latex(e)[0]
    raise ValueError(f"unknown format {fmt!r}")


def _split_fraction(e: Mul) -> tuple[Fraction, list[Expr], list[Expr]]:
    """Coefficient, numerator factors and (positive-exponent) denominator factors."""
    c, rest = split_coeff(e)
    num, den = [], []
    for f in (rest.factors if isinstance(rest, Mul) else (rest,)):
        if isinstance(f, Pow) and split_coeff(f.exp)[0] < 0:
            inv = Pow(f.base, _negate(f.exp))
            den.append(f.base if inv.exp == Num(1) else inv)
        elif isinstance(f, Num) and f.value == 1:
            continue
        else:
            num.append(f)
    return c, num, den


def _negate(e: Expr) -> Expr:
    from .expr import neg
    return neg(e)


# plain ----------------------------------------------------------------------

def _wrap(s: str, prec: int, need: int) -> str:
    return f"({s})" if prec < need else s


def _num_plain(v: Fraction) -> tuple[str, int]:
    if v.denominator == 1:
        return str(v.numerator), (_P_ATOM if v >= 0 else _P_NEG)
    return f"{v.numerator}/{v.denominator}", (_P_MUL if v > 0 else _P_NEG)


def _plain(e: Expr) -> tuple[str, int]:
    if isinstance(e, Num):
        return _num_plain(e.value)
    if isinstance(e, Symbol):
        return e.name, _P_ATOM
    if isinstance(e, Wild):
        return ("_" if e.name == "_" else e.name + "_"), _P_ATOM
    if isinstance(e, Add):
        parts: list[str] = []
        for i, t in enumerate(e.terms):
            c, _ = split_coeff(t)
            if i and c < 0:
                s, p = _plain(_negate(t))
                parts.append(" - " + _wrap(s, p, _P_MUL))
            else:
                s, p = _plain(t)
                parts.append((" + " if i else "") + _wrap(s, p, _P_ADD + 1 if i else _P_ADD))
        return "".join(parts), _P_ADD
    if isinstance(e, Mul) or (isinstance(e, Pow) and split_coeff(e.exp)[0] < 0):
        return _plain_product(e)
    if isinstance(e, Pow):
        b, pb = _plain(e.base)
        x, px = _plain(e.exp)
        if not (isinstance(e.exp, (Symbol, Func, Unknown)) or
                (isinstance(e.exp, Num) and e.exp.is_integer and e.exp.value >= 0)):
            x = f"({x})"
        return f"{_wrap(b, pb, _P_ATOM)}^{x}", _P_POW
    if isinstance(e, Func):
        return f"{e.head}({_plain(e.arg)[0]})", _P_ATOM
    if isinstance(e, Unknown):
        return _plain_unknown(e), _P_ATOM
    if isinstance(e, Deriv):
        return f"D({_plain(e.expr)[0]}, {e.var.name}, {e.order})", _P_ATOM
    if isinstance(e, Integral):
        args = ", ".join(_plain(x)[0] for x in (e.integrand, e.var, e.lo, e.hi))
        return f"Int({args})", _P_ATOM
    if isinstance(e, Piecewise):
        pieces = ", ".join("[" + ", ".join(_plain(x)[0] for x in p) + "]" for p in e.pieces)
        return f"Piecewise({e.var.name}, {pieces})", _P_ATOM
    raise TypeError(f"cannot render {type(e).__name__}")


def _plain_unknown(e: Unknown) -> str:
    call = f"{e.name}({', '.join(_plain(a)[0] for a in e.args)})"
    if not any(e.derivs):
        return call
    if len(e.args) == 1 and not isinstance(e.args[0], Symbol):
        return f"{e.name}{chr(39) * e.derivs[0]}({_plain(e.args[0])[0]})"
    inner = f"{e.name}({', '.join(_plain(a)[0] for a in e.args)})"
    for a, n in zip(e.args, e.derivs):
        if n:
            if not isinstance(a, Symbol):
                raise TypeError(f"cannot render derivative of {e.name} in a non-symbol slot")
            inner = f"D({inner}, {a.name})" if n == 1 else f"D({inner}, {a.name}, {n})"
    return inner


def _plain_product(e: Expr) -> tuple[str, int]:
    if isinstance(e, Pow):
        c, num, den = Fraction(1), [], [Pow(e.base, _negate(e.exp))]
        if den[0].exp == Num(1):
            den = [e.base]
    else:
        c, num, den = _split_fraction(e)
    sign = "-" if c < 0 else ""
    c = abs(c)
    top = [str(c.numerator)] if (c.numerator != 1 or not num) else []
    for f in num:
        s, p = _plain(f)
        top.append(_wrap(s, p, _P_POW if isinstance(f, Pow) else _P_NEG + 1))
    out = "*".join(top)
    bottom = [str(c.denominator)] if c.denominator != 1 else []
    for f in den:
        s, p = _plain(f)
        bottom.append(_wrap(s, p, _P_POW))
    if bottom:
        b = "*".join(bottom)
        out += "/" + (f"({b})" if len(bottom) > 1 else b)
    return sign + out, (_P_NEG if sign else _P_MUL)


# LaTeX ------------------------------------------------------------------------

_GREEK = {"alpha", "beta", "gamma", "delta", "epsilon", "lambda", "mu", "nu", "phi",
          "pi", "psi", "rho", "sigma", "tau", "theta", "omega", "xi", "eta", "kappa"}


def _latex_symbol(name: str) -> str:
    if name in _GREEK:
        return "\\" + name
    if "__" in name:
        base, idx = name.split("__", 1)
        return f"{_latex_symbol(base)}_{{{idx}}}"
    if len(name) > 1:
        return f"\\mathrm{{{name}}}"
    return name


def _latex_num(v: Fraction) -> tuple[str, int]:
    if v.denominator == 1:
        return str(v.numerator), (_P_ATOM if v >= 0 else _P_NEG)
    s = f"\\frac{{{abs(v.numerator)}}}{{{v.denominator}}}"
    return ("-" + s, _P_NEG) if v < 0 else (s, _P_MUL)


def _paren(s: str) -> str:
    return f"\\left({s}\\right)"


def _lwrap(s: str, prec: int, need: int) -> str:
    return _paren(s) if prec < need else s


def _latex(e: Expr) -> tuple[str, int]:
    if isinstance(e, Num):
        return _latex_num(e.value)
    if isinstance(e, Symbol):
        return _latex_symbol(e.name), _P_ATOM
    if isinstance(e, Wild):
        return _latex_symbol(e.name) + "\\_", _P_ATOM
    if isinstance(e, Add):
        parts: list[str] = []
        for i, t in enumerate(e.terms):
            c, _ = split_coeff(t)
            if i and c < 0:
                s, p = _latex(_negate(t))
                parts.append(" - " + _lwrap(s, p, _P_MUL))
            else:
                s, p = _latex(t)
                parts.append((" + " if i else "") + s)
        return "".join(parts), _P_ADD
    if isinstance(e, Mul) or (isinstance(e, Pow) and split_coeff(e.exp)[0] < 0):
        return _latex_product(e)
    if isinstance(e, Pow):
        b, pb = _latex(e.base)
        if isinstance(e.exp, Num) and e.exp.value == Fraction(1, 2):
            return f"\\sqrt{{{b}}}", _P_ATOM
        return f"{{{_lwrap(b, pb, _P_ATOM)}}}^{{{_latex(e.exp)[0]}}}", _P_POW
    if isinstance(e, Func):
        if e.head == "exp":
            return f"e^{{{_latex(e.arg)[0]}}}", _P_POW
        return f"\\{e.head}{_paren(_latex(e.arg)[0])}", _P_ATOM
    if isinstance(e, Unknown):
        args = ", ".join(_latex(a)[0] for a in e.args)
        primes = "'" * e.order if e.order <= 3 else f"^{{({e.order})}}"
        return f"{_latex_symbol(e.name)}{primes}{_paren(args)}", _P_ATOM
    if isinstance(e, Deriv):
        v = _latex_symbol(e.var.name)
        if e.order == 1:
            op = f"\\frac{{d}}{{d{v}}}"
        else:
            op = f"\\frac{{d^{{{e.order}}}}}{{d{v}^{{{e.order}}}}}"
        return f"{op}{_paren(_latex(e.expr)[0])}", _P_MUL
    if isinstance(e, Integral):
        lo, hi = _latex(e.lo)[0], _latex(e.hi)[0]
        body = _latex(e.integrand)[0]
        return f"\\int_{{{lo}}}^{{{hi}}} {body} \\, d{_latex_symbol(e.var.name)}", _P_ADD
    if isinstance(e, Piecewise):
        v = _latex_symbol(e.var.name)
        rows = " \\\\ ".join(
            f"{_latex(val)[0]} & {_latex(lo)[0]} \\le {v} < {_latex(hi)[0]}"
            for lo, hi, val in e.pieces)
        return f"\\begin{{cases}} {rows} \\\\ 0 & \\text{{otherwise}} \\end{{cases}}", _P_ATOM
    raise TypeError(f"cannot render {type(e).__name__}")


def _latex_product(e: Expr) -> tuple[str, int]:
    if isinstance(e, Pow):
        c, num, den = Fraction(1), [], [Pow(e.base, _negate(e.exp))]
        if den[0].exp == Num(1):
            den = [e.base]
    else:
        c, num, den = _split_fraction(e)
    sign = "-" if c < 0 else ""
    c = abs(c)

    def join(fs: list[Expr], lead: int) -> str:
        parts = [str(lead)] if (lead != 1 or not fs) else []
        for f in fs:
            s, p = _latex(f)
            parts.append(_lwrap(s, p, _P_POW if isinstance(f, Pow) else _P_NEG + 1))
        return " ".join(parts)

    def slot(fs: list[Expr], lead: int) -> str:
        # a lone factor needs no brackets inside \frac
        if len(fs) == 1 and lead == 1 and not isinstance(fs[0], Pow):
            return _latex(fs[0])[0]
        return join(fs, lead)

    top = join(num, c.numerator)
    if den or c.denominator != 1:
        return (f"{sign}\\frac{{{slot(num, c.numerator)}}}{{{slot(den, c.denominator)}}}",
                _P_NEG if sign else _P_MUL)
    return sign + top, (_P_NEG if sign else _P_MUL)
