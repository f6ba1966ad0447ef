"""Sparse multivariate polynomials over Q.

A polynomial is a ``dict`` mapping dense exponent tuples to nonzero
``Fraction`` coefficients.  All polynomials taking part in one computation
share the same number of variables; variable 0 is the most significant in the
lexicographic monomial order.
"""
from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd as igcd, lcm as ilcm

Poly = dict


class NotDivisible(ArithmeticError):
    pass


def const(c, nvars: int) -> Poly:
    c = Fraction(c)
    return {(0,) * nvars: c} if c else {}


def var(i: int, nvars: int) -> Poly:
    return {tuple(1 if j == i else 0 for j in range(nvars)): Fraction(1)}


def p_add(a: Poly, b: Poly) -> Poly:
    if len(a) < len(b):
        a, b = b, a
    out = dict(a)
    for m, c in b.items():
        s = out.get(m, 0) + c
        if s:
            out[m] = s
        else:
            out.pop(m, None)
    return out


def p_neg(a: Poly) -> Poly:
    return {m: -c for m, c in a.items()}


def p_sub(a: Poly, b: Poly) -> Poly:
    return p_add(a, p_neg(b))


def p_scale(a: Poly, c) -> Poly:
    c = Fraction(c)
    if not c:
        return {}
    return {m: v * c for m, v in a.items()}


def _mono_mul(m1: tuple, m2: tuple) -> tuple:
    return tuple(x + y for x, y in zip(m1, m2))


def p_mul(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return {}
    if len(a) == 1:
        (m, c), = a.items()
        return {_mono_mul(m, mb): c * cb for mb, cb in b.items()}
    if len(b) == 1:
        return p_mul(b, a)
    out: dict = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            m = _mono_mul(ma, mb)
            s = out.get(m, 0) + ca * cb
            if s:
                out[m] = s
            else:
                out.pop(m, None)
    return out


def p_mul_term(a: Poly, mono: tuple, c: Fraction) -> Poly:
    return {_mono_mul(m, mono): v * c for m, v in a.items()}


def p_pow(a: Poly, k: int, nvars: int) -> Poly:
    result = const(1, nvars)
    base = a
    while k:
        if k & 1:
            result = p_mul(result, base)
        k >>= 1
        if k:
            base = p_mul(base, base)
    return result


def is_const(a: Poly) -> bool:
    return not a or (len(a) == 1 and not any(next(iter(a))))


def leading(a: Poly) -> tuple[tuple, Fraction]:
    m = max(a)
    return m, a[m]


def monic(a: Poly) -> Poly:
    if not a:
        return a
    _, lc = leading(a)
    return p_scale(a, 1 / lc) if lc != 1 else a


def vars_of(a: Poly) -> set[int]:
    out: set[int] = set()
    for m in a:
        out.update(i for i, e in enumerate(m) if e)
    return out


def degree(a: Poly, v: int) -> int:
    return max((m[v] for m in a), default=-1)


def coeffs_in(a: Poly, v: int) -> dict[int, Poly]:
    """Coefficients of ``a`` viewed as a univariate polynomial in variable ``v``."""
    out: dict[int, Poly] = {}
    for m, c in a.items():
        k = m[v]
        rest = m[:v] + (0,) + m[v + 1:]
        out.setdefault(k, {})[rest] = c
    return out


def div_exact(a: Poly, b: Poly) -> Poly:
    """Exact quotient ``a / b``; raises :class:`NotDivisible` otherwise."""
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    if not a:
        return {}
    lm_b, lc_b = leading(b)
    if len(b) == 1:
        out = {}
        for m, c in a.items():
            q = tuple(x - y for x, y in zip(m, lm_b))
            if min(q) < 0:
                raise NotDivisible
            out[q] = c / lc_b
        return out
    q: dict = {}
    r = dict(a)
    while r:
        lm_r = max(r)
        diff = tuple(x - y for x, y in zip(lm_r, lm_b))
        if min(diff) < 0:
            raise NotDivisible
        c = r[lm_r] / lc_b
        q[diff] = c
        r = p_sub(r, p_mul_term(b, diff, c))
    return q


def divides(b: Poly, a: Poly) -> bool:
    try:
        div_exact(a, b)
    except NotDivisible:
        return False
    return True


def _prem(a: Poly, b: Poly, v: int) -> Poly:
    db = degree(b, v)
    cb = coeffs_in(b, v)
    lb = cb[db]
    r = a
    while r and degree(r, v) >= db:
        dr = degree(r, v)
        lr = coeffs_in(r, v)[dr]
        shift = tuple(dr - db if i == v else 0 for i in range(len(next(iter(b)))))
        r = p_sub(p_mul(lb, r), p_mul(p_mul(lr, b), {shift: Fraction(1)}))
    return r


def content(a: Poly, v: int) -> Poly:
    """Monic gcd of the coefficients of ``a`` with respect to variable ``v``."""
    parts = list(coeffs_in(a, v).values())
    parts.sort(key=len)
    g = parts[0]
    for p in parts[1:]:
        if is_const(g):
            break
        g = gcd(g, p)
    return monic(g)


def primitive(a: Poly, v: int) -> Poly:
    c = content(a, v)
    return a if is_const(c) else div_exact(a, c)


def gcd(a: Poly, b: Poly) -> Poly:
    """Monic greatest common divisor over Q (recursive primitive PRS)."""
    if not a:
        return monic(b)
    if not b:
        return monic(a)
    nv = len(next(iter(a)))
    one = const(1, nv)
    if is_const(a) or is_const(b):
        return one
    if a == b:
        return monic(a)
    va, vb = vars_of(a), vars_of(b)
    # a monomial divides-out quickly
    if len(a) == 1 or len(b) == 1:
        return monic(_monomial_gcd(a, b))
    v = min(va | vb)
    if v not in va:
        return gcd(a, content(b, v))
    if v not in vb:
        return gcd(content(a, v), b)
    ca, cb = content(a, v), content(b, v)
    pa = a if is_const(ca) else div_exact(a, ca)
    pb = b if is_const(cb) else div_exact(b, cb)
    c = gcd(ca, cb)
    if degree(pa, v) < degree(pb, v):
        pa, pb = pb, pa
    while True:
        r = _prem(pa, pb, v)
        if not r:
            g = pb
            break
        if degree(r, v) == 0:
            g = one
            break
        pa, pb = pb, primitive(r, v)
    if not is_const(g):
        g = primitive(g, v)
    return monic(p_mul(c, g))


def _monomial_gcd(a: Poly, b: Poly) -> Poly:
    if len(a) != 1:
        a, b = b, a
    (m, _), = a.items()
    low = list(m)
    for mb in b:
        low = [min(x, y) for x, y in zip(low, mb)]
    return {tuple(low): Fraction(1)}


def integer_normalize(a: Poly) -> tuple[Poly, Fraction]:
    """Scale ``a`` to coprime integer coefficients with positive leading term.

    Returns ``(scaled, factor)`` with ``scaled == a * factor``.
    """
    if not a:
        return a, Fraction(1)
    dens = reduce(ilcm, (c.denominator for c in a.values()), 1)
    nums = reduce(igcd, (abs(c.numerator) * (dens // c.denominator) for c in a.values()), 0)
    factor = Fraction(dens, nums)
    if leading(a)[1] < 0:
        factor = -factor
    return p_scale(a, factor), factor


def p_sqrt(a: Poly) -> Poly | None:
    """Exact square root of ``a`` if it is a perfect square over Q, else ``None``."""
    if not a:
        return {}
    lm, lc = leading(a)
    if lc < 0 or any(e % 2 for e in lm):
        return None
    rc = _frac_sqrt(lc)
    if rc is None:
        return None
    lead_mono = tuple(e // 2 for e in lm)
    root = {lead_mono: rc}
    for _ in range(4 * len(a) + 8):
        rem = p_sub(a, p_mul(root, root))
        if not rem:
            return root
        lm_r, lc_r = leading(rem)
        diff = tuple(x - y for x, y in zip(lm_r, lead_mono))
        if min(diff) < 0 or diff >= lead_mono:
            return None
        root = p_add(root, {diff: lc_r / (2 * rc)})
    return None


def _frac_sqrt(c: Fraction) -> Fraction | None:
    from math import isqrt
    n, d = c.numerator, c.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None
