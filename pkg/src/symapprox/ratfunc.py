"""Rational normal form and zero testing.

Expressions are mapped to quotients of polynomials over Q in *kernels*:
symbols, unknown-function applications, ``sin``/``cos``/``log`` applications,
held integrals and so on.  Exponentials are graded: ``exp(c*m)`` for a
monomial ``m`` becomes an integer power of one kernel ``exp(g*m)``, where
``g`` is the rational gcd of every coefficient of ``m`` seen in the
expression, so ``exp(-2*k*t)`` and ``exp(-k*t)`` share a kernel.
Numerators are reduced modulo ``sin(a)^2 + cos(a)^2 - 1`` for each argument.
"""
from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

from . import poly as P
from .errors import EvaluationError
from .expr import (
    ONE,
    PI,
    ZERO,
    Add,
    Deriv,
    Expr,
    Func,
    Integral,
    Mul,
    Num,
    Piecewise,
    Pow,
    Unknown,
    Wild,
    add,
    as_expr,
    eval_numeric,
    free_symbols,
    func,
    mul,
    power,
    split_coeff,
    walk,
)


class Zeroness(enum.Enum):
    ZERO = "zero"
    NONZERO = "nonzero"
    UNKNOWN = "unknown"
    PROBABLY_ZERO = "probably-zero"


def _frac_gcd(a: Fraction, b: Fraction) -> Fraction:
    a, b = abs(a), abs(b)
    if a == 0:
        return b
    if b == 0:
        return a
    return Fraction(math.gcd(a.numerator, b.numerator), math.lcm(a.denominator, b.denominator))


@dataclass
class _Context:
    kernels: list[Expr] = field(default_factory=list)
    index: dict[Expr, int] = field(default_factory=dict)
    exp_scale: dict[Expr, Fraction] = field(default_factory=dict)  # monomial -> g
    trig_pairs: list[tuple[int, int]] = field(default_factory=list)  # (sin idx, cos idx)
    exp_vars: set[int] = field(default_factory=set)
    uncertain: bool = False

    @property
    def n(self) -> int:
        return len(self.kernels)


def _exp_terms(arg: Expr):
    for t in (arg.terms if isinstance(arg, Add) else (arg,)):
        yield split_coeff(t)


def _collect(e: Expr, found: set[Expr], ctx: _Context, simplify_inner: bool) -> Expr:
    """First pass: register kernels; returns ``e`` with kernel interiors simplified."""
    if isinstance(e, Num):
        return e
    if isinstance(e, (Add, Mul)):
        return e.rebuild(lambda c: _collect(c, found, ctx, simplify_inner))
    if isinstance(e, Pow):
        if isinstance(e.exp, Num) and e.exp.is_integer:
            return power(_collect(e.base, found, ctx, simplify_inner), e.exp)
        found.add(e)
        return e
    if isinstance(e, Func) and e.head == "exp":
        for c, m in _exp_terms(e.arg):
            ctx.exp_scale[m] = _frac_gcd(ctx.exp_scale.get(m, Fraction(0)), c)
        return e
    if isinstance(e, Func) and e.head in ("sin", "cos"):
        found.add(func("sin", e.arg))
        found.add(func("cos", e.arg))
        return e
    if simplify_inner and isinstance(e, (Integral, Unknown, Piecewise)):
        e = e.rebuild(simplify)
    found.add(e)
    return e


def _classify(ctx: _Context) -> None:
    trig_args: list[Expr] = []
    logs = 0
    frac_bases: list[Expr] = []
    for k in ctx.kernels:
        if isinstance(k, Func) and k.head in ("sin", "cos"):
            if k.head == "sin":
                trig_args.append(k.arg)
        elif isinstance(k, Func) and k.head == "log":
            logs += 1
        elif isinstance(k, Pow):
            if isinstance(k.base, Num) or not isinstance(k.exp, Num):
                ctx.uncertain = True
            frac_bases.append(k.base)
        elif isinstance(k, (Integral, Deriv, Piecewise)):
            ctx.uncertain = True
    if logs > 1 or len(frac_bases) != len(set(frac_bases)):
        ctx.uncertain = True
    for m in ctx.exp_scale:
        if any(isinstance(n, Func) and n.head in ("log", "sin", "cos") for n in walk(m)):
            ctx.uncertain = True
    for i, a in enumerate(trig_args):
        if _pi_multiple(a):
            ctx.uncertain = True
        for b in trig_args[:i]:
            d = a - b
            if not free_symbols(d) - {PI}:
                ctx.uncertain = True
                continue
            q = normalize_pair(a, b)
            if q is not None:
                ctx.uncertain = True


def _pi_multiple(a: Expr) -> bool:
    c, m = split_coeff(a)
    return m == PI


def normalize_pair(a: Expr, b: Expr) -> Fraction | None:
    """Rational ratio a/b when both are numeric multiples of one monomial."""
    if isinstance(a, Add) or isinstance(b, Add):
        if isinstance(a, Add) and isinstance(b, Add) and len(a.terms) == len(b.terms):
            ratios = {normalize_pair(x, y) for x, y in zip(a.terms, b.terms)}
            if len(ratios) == 1:
                return ratios.pop()
        return None
    ca, ma = split_coeff(a)
    cb, mb = split_coeff(b)
    if ma == mb and cb != 0:
        return ca / cb
    return None


def _build_context(exprs: list[Expr], simplify_inner: bool = True) -> tuple[_Context, list[Expr]]:
    ctx = _Context()
    found: set[Expr] = set()
    cleaned = [_collect(e, found, ctx, simplify_inner) for e in exprs]
    exp_kernels = {}
    for m, g in ctx.exp_scale.items():
        if g == 0:
            continue
        exp_kernels[func("exp", mul(Num(g), m))] = m
    all_k = sorted(found | set(exp_kernels), key=lambda k: k.key)
    ctx.kernels = all_k
    ctx.index = {k: i for i, k in enumerate(all_k)}
    ctx.exp_vars = {ctx.index[k] for k in exp_kernels}
    for k in all_k:
        if isinstance(k, Func) and k.head == "sin":
            ctx.trig_pairs.append((ctx.index[k], ctx.index[func("cos", k.arg)]))
    _classify(ctx)
    return ctx, cleaned


# fractions of polynomials ----------------------------------------------------

def _frac_add(a, b):
    (n1, d1), (n2, d2) = a, b
    if not n1:
        return b
    if not n2:
        return a
    if d1 == d2:
        return P.p_add(n1, n2), d1
    g = P.gcd(d1, d2)
    if P.is_const(g):
        return P.p_add(P.p_mul(n1, d2), P.p_mul(n2, d1)), P.p_mul(d1, d2)
    q1, q2 = P.div_exact(d1, g), P.div_exact(d2, g)
    return P.p_add(P.p_mul(n1, q2), P.p_mul(n2, q1)), P.p_mul(d1, q2)


def _frac_mul(a, b):
    return P.p_mul(a[0], b[0]), P.p_mul(a[1], b[1])


def _frac_pow(a, k: int, n: int):
    num, den = a
    if k < 0:
        if not num:
            raise ZeroDivisionError("division by zero")
        num, den, k = den, num, -k
    return P.p_pow(num, k, n), P.p_pow(den, k, n)


def _to_frac(e: Expr, ctx: _Context):
    n = ctx.n
    if isinstance(e, Num):
        return P.const(e.value, n), P.const(1, n)
    if isinstance(e, Add):
        acc = ({}, P.const(1, n))
        for t in e.terms:
            acc = _frac_add(acc, _to_frac(t, ctx))
        return acc
    if isinstance(e, Mul):
        acc = (P.const(1, n), P.const(1, n))
        for f in e.factors:
            acc = _frac_mul(acc, _to_frac(f, ctx))
        return acc
    if isinstance(e, Pow) and isinstance(e.exp, Num) and e.exp.is_integer:
        return _frac_pow(_to_frac(e.base, ctx), int(e.exp.value), n)
    if isinstance(e, Func) and e.head == "exp":
        num_mono = [0] * n
        den_mono = [0] * n
        for c, m in _exp_terms(e.arg):
            g = ctx.exp_scale[m]
            idx = ctx.index[func("exp", mul(Num(g), m))]
            k = c / g
            assert k.denominator == 1
            if k > 0:
                num_mono[idx] += int(k)
            else:
                den_mono[idx] -= int(k)
        return {tuple(num_mono): Fraction(1)}, {tuple(den_mono): Fraction(1)}
    idx = ctx.index[e]
    v = P.var(idx, n)
    return v, P.const(1, n)


def _trig_reduce(a: P.Poly, ctx: _Context) -> P.Poly:
    if not ctx.trig_pairs or not a:
        return a
    n = ctx.n
    for si, ci in ctx.trig_pairs:
        if all(m[si] < 2 for m in a):
            continue
        one_minus_c2 = P.p_sub(P.const(1, n), P.p_mul(P.var(ci, n), P.var(ci, n)))
        out: dict = {}
        for m, c in a.items():
            k = m[si]
            if k < 2:
                out = P.p_add(out, {m: c})
                continue
            base = list(m)
            base[si] = k % 2
            term = {tuple(base): c}
            out = P.p_add(out, P.p_mul(term, P.p_pow(one_minus_c2, k // 2, n)))
        a = out
    return a


@dataclass
class RationalForm:
    num: P.Poly
    den: P.Poly
    ctx: _Context

    def to_expr(self) -> Expr:
        return _from_frac(self.num, self.den, self.ctx)


def rational_form(e, simplify_inner: bool = True) -> RationalForm:
    e = as_expr(e)
    ctx, (cleaned,) = _build_context([e], simplify_inner)
    num, den = _to_frac(cleaned, ctx)
    num = _trig_reduce(num, ctx)
    den = _trig_reduce(den, ctx)
    if not num:
        return RationalForm({}, P.const(1, ctx.n), ctx)
    g = P.gcd(num, den)
    if not P.is_const(g):
        num, den = P.div_exact(num, g), P.div_exact(den, g)
    den, factor = P.integer_normalize(den)
    num = P.p_scale(num, factor)
    return RationalForm(num, den, ctx)


def _poly_to_expr(a: P.Poly, ctx: _Context, shift: list[int] | None = None) -> Expr:
    terms = []
    for m, c in a.items():
        factors = [Num(c)]
        for i, k in enumerate(m):
            k = k - (shift[i] if shift else 0)
            if k:
                factors.append(power(ctx.kernels[i], Num(k)))
        terms.append(mul(*factors))
    return add(*terms)


def _from_frac(num: P.Poly, den: P.Poly, ctx: _Context) -> Expr:
    if not num:
        return ZERO
    shift = [0] * ctx.n
    for i in ctx.exp_vars:
        low = min(m[i] for m in den)
        shift[i] = low
    if any(shift):
        den_shifted = {tuple(k - s for k, s in zip(m, shift)): c for m, c in den.items()}
        num_shifted = {tuple(k - s for k, s in zip(m, shift)): c for m, c in num.items()}
        den, num = den_shifted, num_shifted
    n_expr = _poly_to_expr(num, ctx)
    if P.is_const(den):
        return mul(n_expr, Num(1 / den[next(iter(den))]))
    # pull the numeric content of the numerator in front for readability
    content = reduce(_frac_gcd, num.values(), Fraction(0))
    lead_sign = -1 if P.leading(num)[1] < 0 and all(c < 0 for c in num.values()) else 1
    content *= lead_sign
    if content != 1:
        n_expr = mul(Num(content), _poly_to_expr(P.p_scale(num, 1 / content), ctx))
    return mul(n_expr, power(_poly_to_expr(den, ctx), Num(-1)))


def simplify(e) -> Expr:
    """Rational normal form: one fraction, expanded numerator and denominator, gcd cancelled."""
    return rational_form(e).to_expr()


def numer_denom(e) -> tuple[Expr, Expr]:
    rf = rational_form(e)
    if not rf.num:
        return ZERO, ONE
    whole = rf.to_expr()
    # split the canonical quotient back into its two polynomials
    num_part, den_part = [], []
    for f in (whole.factors if isinstance(whole, Mul) else (whole,)):
        if isinstance(f, Pow) and isinstance(f.exp, Num) and f.exp.value < 0:
            den_part.append(power(f.base, -f.exp))
        else:
            num_part.append(f)
    return mul(*num_part), mul(*den_part)


# zero testing --------------------------------------------------------------

_PROBE_SEED = 20240917
_PROBE_POINTS = 3


def _probe_values(e: Expr, attempts: int = 12) -> list[float] | None:
    syms = sorted(free_symbols(e) - {PI}, key=lambda s: s.name)
    rng = random.Random(_PROBE_SEED)
    values: list[float] = []
    for _ in range(attempts):
        point = {s: Fraction(rng.randint(-100, 100), rng.randint(1, 10)) for s in syms}
        try:
            values.append(eval_numeric(e, {s: float(v) for s, v in point.items()}))
        except EvaluationError:
            if any(isinstance(n, (Unknown, Integral, Deriv, Wild)) for n in walk(e)):
                return None
            continue
        except (ZeroDivisionError, OverflowError):
            continue
        if len(values) == _PROBE_POINTS:
            return values
    return values or None


def is_zero(e) -> Zeroness:
    """Decide whether ``e`` is identically zero.

    ``ZERO`` is returned only when the rational normal form is literally 0.
    Free symbols are treated as generic, so ``k`` alone is ``NONZERO``.  When the
    kernels may be algebraically dependent the answer comes from a numeric
    probe and is never ``ZERO``.
    """
    e = as_expr(e)
    if isinstance(e, Num):
        return Zeroness.ZERO if e.value == 0 else Zeroness.NONZERO
    rf = rational_form(e)
    if not rf.num:
        return Zeroness.ZERO
    if not rf.ctx.uncertain:
        return Zeroness.NONZERO
    vals = _probe_values(e)
    if vals is None:
        return Zeroness.UNKNOWN
    if all(abs(v) < 1e-9 for v in vals):
        return Zeroness.PROBABLY_ZERO
    return Zeroness.NONZERO


def equivalent(a, b) -> bool:
    """True when ``a - b`` normalises to zero."""
    return is_zero(as_expr(a) - as_expr(b)) is Zeroness.ZERO


def is_numeric_constant(e: Expr) -> bool:
    return not (free_symbols(e) - {PI}) and not any(
        isinstance(n, (Unknown, Integral, Deriv, Piecewise, Wild)) for n in walk(e))


def nonzero_factors(e: Expr) -> list[Expr]:
    """Non-trivial factors whose vanishing would make ``e`` vanish.

    Used to phrase genericity assumptions: numeric content, ``pi`` and
    exponentials are dropped, monomial factors are split into kernels.
    """
    rf = rational_form(e)
    if not rf.num:
        return [ZERO]
    ctx = rf.ctx
    num = rf.num
    lows = [min(m[i] for m in num) for i in range(ctx.n)]
    out: list[Expr] = []
    for i, low in enumerate(lows):
        if low and i not in ctx.exp_vars and ctx.kernels[i] != PI:
            out.append(ctx.kernels[i])
    rest = {tuple(k - l for k, l in zip(m, lows)): c for m, c in num.items()}
    if not P.is_const(rest):
        rest, _ = P.integer_normalize(rest)
        out.append(_poly_to_expr(rest, ctx))
    return out
