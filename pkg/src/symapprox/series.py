"""Truncated power series in one small parameter."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import PoleAtCenter, SymApproxError
from .expr import (
    ONE,
    ZERO,
    Add,
    Expr,
    Func,
    Mul,
    Num,
    Pow,
    Symbol,
    add,
    as_expr,
    cos,
    exp,
    free_of,
    log,
    mul,
    power,
    sin,
    substitute,
)
from .ratfunc import Zeroness, is_zero, simplify


@dataclass(frozen=True)
class Series:
    """``sum(coeffs[k] * param**k) + O(param**(order+1))``."""

    param: Symbol
    coeffs: tuple[Expr, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(as_expr(c) for c in self.coeffs))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, k: int) -> Expr:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else ZERO

    def to_expr(self) -> Expr:
        return add(*(mul(c, power(self.param, Num(k))) for k, c in enumerate(self.coeffs)))

    def truncate(self, order: int) -> Series:
        return Series(self.param, self.coeffs[: order + 1])

    def simplified(self) -> Series:
        return Series(self.param, tuple(simplify(c) for c in self.coeffs))

    def at(self, value) -> Expr:
        return substitute(self.to_expr(), {self.param: as_expr(value)})


# coefficient-list arithmetic ----------------------------------------------------

def _s_add(a: list[Expr], b: list[Expr]) -> list[Expr]:
    return [add(x, y) for x, y in zip(a, b)]


def _s_mul(a: list[Expr], b: list[Expr]) -> list[Expr]:
    n = len(a)
    return [simplify(add(*(mul(a[i], b[k - i]) for i in range(k + 1)))) for k in range(n)]


def _s_scale(a: list[Expr], c: Expr) -> list[Expr]:
    return [mul(c, x) for x in a]


def _s_const(c: Expr, n: int) -> list[Expr]:
    return [c] + [ZERO] * (n - 1)


def _s_inverse(a: list[Expr]) -> list[Expr]:
    c0 = simplify(a[0])
    if is_zero(c0) in (Zeroness.ZERO, Zeroness.PROBABLY_ZERO):
        raise PoleAtCenter(f"constant term {c0} vanishes at the expansion point")
    inv0 = simplify(power(c0, Num(-1)))
    out = [inv0]
    for k in range(1, len(a)):
        acc = add(*(mul(a[i], out[k - i]) for i in range(1, k + 1)))
        out.append(simplify(mul(Num(-1), inv0, acc)))
    return out


def _compose_unit(coeffs_of_f: list[Expr], u: list[Expr]) -> list[Expr]:
    """``sum coeffs_of_f[k] * u^k`` for a series ``u`` with zero constant term."""
    n = len(u)
    out = [ZERO] * n
    term = _s_const(ONE, n)
    for c in coeffs_of_f[:n]:
        out = _s_add(out, _s_scale(term, c))
        term = _s_mul(term, u)
    return [simplify(x) for x in out]


def _s_pow_rational(a: list[Expr], alpha: Expr) -> list[Expr]:
    n = len(a)
    c0 = simplify(a[0])
    if is_zero(c0) in (Zeroness.ZERO, Zeroness.PROBABLY_ZERO):
        raise PoleAtCenter(f"non-integer power of a series vanishing at the center: {c0}")
    u = [ZERO] + [simplify(mul(x, power(c0, Num(-1)))) for x in a[1:]]
    binom = []
    c = ONE
    for k in range(n):
        binom.append(c)
        c = simplify(mul(c, add(alpha, Num(-k)), Num(Fraction(1, k + 1))))
    return _s_scale(_compose_unit(binom, u), power(c0, alpha))


def _series(e: Expr, s: Symbol, n: int) -> list[Expr]:
    if free_of(e, s):
        return _s_const(e, n)
    if e == s:
        return ([ZERO, ONE] + [ZERO] * n)[:n]
    if isinstance(e, Add):
        out = _s_const(ZERO, n)
        for t in e.terms:
            out = _s_add(out, _series(t, s, n))
        return out
    if isinstance(e, Mul):
        out = _s_const(ONE, n)
        for f in e.factors:
            out = _s_mul(out, _series(f, s, n))
        return out
    if isinstance(e, Pow):
        if not free_of(e.exp, s):
            return _series(exp(mul(e.exp, log(e.base))), s, n)
        base = _series(e.base, s, n)
        if isinstance(e.exp, Num) and e.exp.is_integer:
            k = int(e.exp.value)
            if k < 0:
                base, k = _s_inverse(base), -k
            out = _s_const(ONE, n)
            while k:
                if k & 1:
                    out = _s_mul(out, base)
                k >>= 1
                if k:
                    base = _s_mul(base, base)
            return out
        return _s_pow_rational(base, e.exp)
    if isinstance(e, Func):
        a = _series(e.arg, s, n)
        c0 = simplify(a[0])
        u = [ZERO] + a[1:]
        if e.head == "exp":
            return _s_scale(_compose_unit([Num(Fraction(1, math.factorial(k))) for k in range(n)], u),
                            exp(c0))
        if e.head in ("sin", "cos"):
            cu = _compose_unit([Num(Fraction((-1) ** (k // 2), math.factorial(k))) if k % 2 == 0
                                else ZERO for k in range(n)], u)
            su = _compose_unit([Num(Fraction((-1) ** (k // 2), math.factorial(k))) if k % 2 == 1
                                else ZERO for k in range(n)], u)
            if e.head == "sin":
                return [simplify(x) for x in _s_add(_s_scale(cu, sin(c0)), _s_scale(su, cos(c0)))]
            return [simplify(x) for x in _s_add(_s_scale(cu, cos(c0)), _s_scale(su, mul(Num(-1), sin(c0))))]
        if e.head == "log":
            if is_zero(c0) in (Zeroness.ZERO, Zeroness.PROBABLY_ZERO):
                raise PoleAtCenter(f"log of a series vanishing at the center: {e}")
            v = [ZERO] + [simplify(mul(x, power(c0, Num(-1)))) for x in a[1:]]
            logc = [ZERO] + [Num(Fraction((-1) ** (k + 1), k)) for k in range(1, n)]
            out = _compose_unit(logc, v)
            out[0] = log(c0)
            return out
    raise SymApproxError(f"cannot expand {e} as a power series in {s}")


def taylor(e, s: Symbol, center=0, order: int = 2) -> Series:
    """Truncated Taylor series of ``e`` in ``s`` about ``center`` via series arithmetic.

    The returned coefficients are in powers of ``s - center``.
    """
    e = as_expr(e)
    center = as_expr(center)
    if order < 0:
        raise ValueError("order must be >= 0")
    if center != ZERO:
        e = substitute(e, {s: add(s, center)})
    coeffs = _series(e, s, order + 1)
    return Series(s, tuple(simplify(c) for c in coeffs))


def series_mul(a: Series, b: Series) -> Series:
    n = min(len(a.coeffs), len(b.coeffs))
    return Series(a.param, tuple(_s_mul(list(a.coeffs[:n]), list(b.coeffs[:n]))))


def series_inverse(a: Series) -> Series:
    return Series(a.param, tuple(_s_inverse(list(a.coeffs))))
