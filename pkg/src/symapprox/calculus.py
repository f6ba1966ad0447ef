"""Differentiation, exact integration over exp-trig-polynomials, and Taylor series.

The integrator handles finite sums of terms ``c * x^k * exp(a*x) * trig(b*x + phi)``
(with products of trig factors linearised first).  Each group sharing ``a``
and ``b*x + phi`` is antidifferentiated by undetermined coefficients, solving
the triangular system from the top degree down.  Anything outside that class
comes back as a held :class:`~symapprox.expr.Integral` and is reported.
"""
from __future__ import annotations

from fractions import Fraction

from .errors import UnsupportedDerivative
from .expr import (
    ONE,
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
    Symbol,
    Unknown,
    Wild,
    add,
    as_expr,
    cos,
    exp,
    expand,
    factors_of,
    free_of,
    func,
    integral,
    log,
    mul,
    neg,
    piecewise,
    power,
    sin,
    split_coeff,
    substitute,
    terms_of,
    walk,
)
from .ratfunc import Zeroness, is_numeric_constant, is_zero, simplify
from .report import note_assumption, note_unresolved, note_warning
from .series import Series, taylor  # noqa: F401 - re-exported

__all__ = [
    "diff", "integrate", "antiderivative", "integrate_piecewise", "resolve_integrals",
    "taylor", "Series", "ExpTrigTerm", "exp_trig_terms",
]


# ---------------------------------------------------------------------------
# differentiation

def diff(e, var: Symbol, order: int = 1) -> Expr:
    """Exact derivative of ``e`` with respect to ``var``."""
    e = as_expr(e)
    if order < 0:
        raise ValueError("order must be >= 0")
    for _ in range(order):
        e = _d(e, var)
    return e


def _d(e: Expr, x: Symbol) -> Expr:
    if isinstance(e, Num):
        return ZERO
    if isinstance(e, (Symbol, Wild)):
        return ONE if e == x else ZERO
    if free_of(e, x):
        return ZERO
    if isinstance(e, Add):
        return add(*(_d(t, x) for t in e.terms))
    if isinstance(e, Mul):
        fs = e.factors
        return add(*(mul(*fs[:i], _d(f, x), *fs[i + 1:]) for i, f in enumerate(fs)))
    if isinstance(e, Pow):
        b, n = e.base, e.exp
        if free_of(n, x):
            return mul(n, power(b, add(n, Num(-1))), _d(b, x))
        if free_of(b, x):
            return mul(e, log(b), _d(n, x))
        return mul(e, add(mul(_d(n, x), log(b)), mul(n, _d(b, x), power(b, Num(-1)))))
    if isinstance(e, Func):
        da = _d(e.arg, x)
        if e.head == "sin":
            return mul(cos(e.arg), da)
        if e.head == "cos":
            return mul(Num(-1), sin(e.arg), da)
        if e.head == "exp":
            return mul(e, da)
        if e.head == "log":
            return mul(da, power(e.arg, Num(-1)))
    if isinstance(e, Unknown):
        out = []
        for i, a in enumerate(e.args):
            da = _d(a, x)
            if da == ZERO:
                continue
            derivs = list(e.derivs)
            derivs[i] += 1
            out.append(mul(Unknown(e.name, e.args, tuple(derivs)), da))
        return add(*out)
    if isinstance(e, Integral):
        parts = []
        f = e.integrand
        if not free_of(e.hi, x):
            parts.append(mul(substitute(f, {e.var: e.hi}), _d(e.hi, x)))
        if not free_of(e.lo, x):
            parts.append(mul(Num(-1), substitute(f, {e.var: e.lo}), _d(e.lo, x)))
        if e.var != x and not free_of(f, x):
            parts.append(integral(_d(f, x), e.var, e.lo, e.hi))
        return add(*parts)
    if isinstance(e, Piecewise):
        if e.var != x:
            return piecewise(e.var, [(lo, hi, _d(v, x)) for lo, hi, v in e.pieces])
        _check_continuous(e)
        return piecewise(e.var, [(lo, hi, _d(v, x)) for lo, hi, v in e.pieces])
    if isinstance(e, Deriv):
        if e.var == x:
            return Deriv(e.expr, e.var, e.order + 1)
        return Deriv(e, x, 1)
    raise TypeError(f"cannot differentiate {type(e).__name__}")


def _check_continuous(p: Piecewise) -> None:
    """Differentiating across a jump would need a Dirac delta; refuse instead."""
    for point in p.breakpoints:
        left = ZERO
        for lo, hi, v in p.pieces:
            if hi.value == point:
                left = substitute(v, {p.var: hi})
        right = substitute(p.piece_at(point), {p.var: Num(point)})
        if is_zero(simplify(left - right)) is not Zeroness.ZERO:
            raise UnsupportedDerivative(
                f"piecewise function jumps at {point}; its derivative is not a function")


# ---------------------------------------------------------------------------
# integration

class ExpTrigTerm:
    """``coeff * x^k * exp(a*x) * trig(theta)`` with ``theta`` linear in ``x``."""

    __slots__ = ("coeff", "k", "a", "theta", "trig")

    def __init__(self, coeff: Expr, k: int, a: Expr, theta: Expr | None, trig: str | None):
        self.coeff, self.k, self.a, self.theta, self.trig = coeff, k, a, theta, trig

    def __repr__(self) -> str:
        return f"ExpTrigTerm({self.coeff}, {self.k}, {self.a}, {self.theta}, {self.trig})"

    def to_expr(self, x: Symbol) -> Expr:
        t = ONE if self.trig is None else func(self.trig, self.theta)
        return mul(self.coeff, power(x, Num(self.k)), exp(mul(self.a, x)), t)


class _OutOfClass(Exception):
    pass


def _linear_in(e: Expr, x: Symbol) -> tuple[Expr, Expr]:
    """Split ``e = a*x + c`` with ``a`` and ``c`` free of ``x``."""
    slope, const = [], []
    for t in terms_of(expand(e)):
        if free_of(t, x):
            const.append(t)
            continue
        rest, found = [], 0
        for f in factors_of(t):
            if f == x:
                found += 1
            elif free_of(f, x):
                rest.append(f)
            else:
                raise _OutOfClass
        if found != 1:
            raise _OutOfClass
        slope.append(mul(*rest))
    return add(*slope), add(*const)


def _trig_product(h1: str, t1: Expr, h2: str, t2: Expr) -> list[tuple[Fraction, str, Expr]]:
    d, s = add(t1, neg(t2)), add(t1, t2)
    half = Fraction(1, 2)
    if h1 == "sin" and h2 == "sin":
        return [(half, "cos", d), (-half, "cos", s)]
    if h1 == "cos" and h2 == "cos":
        return [(half, "cos", d), (half, "cos", s)]
    if h1 == "sin":
        return [(half, "sin", s), (half, "sin", d)]
    return [(half, "sin", s), (-half, "sin", d)]


def _as_trig(e: Expr, x: Symbol) -> tuple[Expr, str | None, Expr | None]:
    """Split a canonical ``c * trig(theta)`` (or a constant) for the variable ``x``."""
    c, m = split_coeff(e)
    if isinstance(m, Func) and m.head in ("sin", "cos") and not free_of(m.arg, x):
        return Num(c), m.head, m.arg
    return e, None, None


def exp_trig_terms(e: Expr, x: Symbol) -> list[ExpTrigTerm]:
    """Decompose ``e`` into exp-trig-polynomial terms; raises if outside the class."""
    out: list[ExpTrigTerm] = []
    for t in terms_of(expand(e)):
        coeff: list[Expr] = []
        k = 0
        a: Expr = ZERO
        trig: list[tuple[str, Expr]] = []
        for f in factors_of(t):
            if free_of(f, x):
                coeff.append(f)
            elif f == x:
                k += 1
            elif isinstance(f, Pow) and f.base == x and isinstance(f.exp, Num) \
                    and f.exp.is_integer and f.exp.value > 0:
                k += int(f.exp.value)
            elif isinstance(f, Func) and f.head == "exp":
                slope, const = _linear_in(f.arg, x)
                a = add(a, slope)
                coeff.append(exp(const))
            elif isinstance(f, Func) and f.head in ("sin", "cos"):
                _linear_in(f.arg, x)
                trig.append((f.head, f.arg))
            elif isinstance(f, Pow) and isinstance(f.base, Func) and f.base.head in ("sin", "cos") \
                    and isinstance(f.exp, Num) and f.exp.is_integer and f.exp.value > 0:
                _linear_in(f.base.arg, x)
                trig.extend([(f.base.head, f.base.arg)] * int(f.exp.value))
            else:
                raise _OutOfClass
        # linearise products of trig factors
        combos: list[tuple[Expr, str | None, Expr | None]] = [(ONE, None, None)]
        for head, theta in trig:
            nxt = []
            for c, h, th in combos:
                if h is None:
                    nxt.append((c, head, theta))
                    continue
                for r, h2, th2 in _trig_product(h, th, head, theta):
                    val = func(h2, th2)
                    vc, vh, vth = _as_trig(val, x)
                    nxt.append((mul(c, Num(r), vc), vh, vth))
            combos = nxt
        base = mul(*coeff)
        for c, h, th in combos:
            cc = mul(base, c)
            if cc != ZERO:
                out.append(ExpTrigTerm(cc, k, a, th, h))
    return out


def _pivot(d: Expr) -> bool:
    """Decide whether ``d`` may be divided by; records the assumption when generic."""
    z = is_zero(d)
    if z is Zeroness.ZERO:
        return False
    if z is Zeroness.PROBABLY_ZERO:
        raise _Resonance(d)
    if not is_numeric_constant(d):
        note_assumption(d)
    return True


class _Resonance(Exception):
    pass


def _antiderivative_group(a: Expr, theta: Expr | None, targets: dict, x: Symbol) -> Expr:
    """Antiderivative of ``exp(a x) * sum_j x^j (S_j sin theta + C_j cos theta)``."""
    kmax = max(targets)
    if theta is None:
        if is_zero(a) is Zeroness.ZERO:
            return add(*(mul(targets[j], power(x, Num(j + 1)), Num(Fraction(1, j + 1)))
                         for j in targets))
        if not _pivot(a):
            raise _Resonance(a)
        inv_a = power(a, Num(-1))
        r: dict[int, Expr] = {}
        nxt = ZERO
        for j in range(kmax, -1, -1):
            rj = simplify(mul(add(targets.get(j, ZERO), mul(Num(-(j + 1)), nxt)), inv_a))
            r[j] = rj
            nxt = rj
        return mul(exp(mul(a, x)), add(*(mul(r[j], power(x, Num(j))) for j in r)))
    b, _ = _linear_in(theta, x)
    det = simplify(add(mul(a, a), mul(b, b)))
    if not _pivot(det):
        raise _Resonance(det)
    inv = power(det, Num(-1))
    P: dict[int, Expr] = {}
    Q: dict[int, Expr] = {}
    p_next, q_next = ZERO, ZERO
    for j in range(kmax, -1, -1):
        ts, tc = targets.get(j, (ZERO, ZERO))
        rs = add(ts, mul(Num(-(j + 1)), p_next))
        rc = add(tc, mul(Num(-(j + 1)), q_next))
        pj = simplify(mul(add(mul(a, rs), mul(b, rc)), inv))
        qj = simplify(mul(add(mul(a, rc), mul(Num(-1), b, rs)), inv))
        P[j], Q[j] = pj, qj
        p_next, q_next = pj, qj
    s, c = sin(theta), cos(theta)
    poly = add(*(mul(power(x, Num(j)), add(mul(P[j], s), mul(Q[j], c))) for j in P))
    return mul(exp(mul(a, x)), poly)


def _antiderivative_terms(terms: list[ExpTrigTerm], x: Symbol) -> Expr:
    groups: dict[tuple, dict] = {}
    order: list[tuple] = []
    for t in terms:
        key = (simplify(t.a), t.theta)
        if key not in groups:
            groups[key] = {}
            order.append(key)
        g = groups[key]
        if t.trig is None:
            g[t.k] = add(g.get(t.k, ZERO), t.coeff)
        else:
            s, c = g.get(t.k, (ZERO, ZERO))
            if t.trig == "sin":
                s = add(s, t.coeff)
            else:
                c = add(c, t.coeff)
            g[t.k] = (s, c)
    return add(*(_antiderivative_group(a, theta, groups[(a, theta)], x) for a, theta in order))


def antiderivative(e, x: Symbol) -> Expr | None:
    """An antiderivative of ``e`` in the exp-trig-polynomial class, or ``None``."""
    e = as_expr(e)
    try:
        terms = exp_trig_terms(e, x)
        return _antiderivative_terms(terms, x)
    except (_OutOfClass, _Resonance):
        return None


def _contains_piecewise_in(e: Expr, x: Symbol) -> bool:
    return any(isinstance(n, Piecewise) and n.var == x for n in walk(e))


def integrate(e, var: Symbol, lo, hi, *, simplify_result: bool = True) -> Expr:
    """Definite integral of ``e`` over ``var`` from ``lo`` to ``hi``.

    Returns a held integral (and records it in the active report) when the
    integrand is outside the supported class or the coefficient system is
    singular for the parameter values at hand.
    """
    e, lo, hi = as_expr(e), as_expr(lo), as_expr(hi)
    if lo == hi or e == ZERO:
        return ZERO
    if _contains_piecewise_in(e, var):
        return integrate_piecewise(e, var, lo, hi)
    try:
        terms = exp_trig_terms(e, var)
        F = _antiderivative_terms(terms, var)
    except _OutOfClass:
        held = integral(e, var, lo, hi)
        note_unresolved(held)
        return held
    except _Resonance as exc:
        held = integral(e, var, lo, hi)
        note_warning(f"GenericityViolation: coefficient {exc.args[0]} probably vanishes; "
                     f"integral left unevaluated")
        note_unresolved(held)
        return held
    value = add(substitute(F, {var: hi}), neg(substitute(F, {var: lo})))
    return simplify(value) if simplify_result else value


def _replace_nodes(e: Expr, mapping: dict) -> Expr:
    if e in mapping:
        return mapping[e]
    if not e.children():
        return e
    if isinstance(e, Integral):
        return integral(_replace_nodes(e.integrand, mapping), e.var,
                        _replace_nodes(e.lo, mapping), _replace_nodes(e.hi, mapping))
    return e.rebuild(lambda c: _replace_nodes(c, mapping))


def integrate_piecewise(e, var: Symbol, lo, hi) -> Expr:
    """Integrate an integrand containing piecewise factors by splitting at breakpoints."""
    e, lo, hi = as_expr(e), as_expr(lo), as_expr(hi)
    if not (isinstance(lo, Num) and isinstance(hi, Num)):
        held = integral(e, var, lo, hi)
        note_unresolved(held)
        return held
    sign = ONE
    if lo.value > hi.value:
        lo, hi, sign = hi, lo, Num(-1)
    nodes = {n for n in walk(e) if isinstance(n, Piecewise) and n.var == var}
    cuts = {lo.value, hi.value}
    for n in nodes:
        cuts.update(p for p in n.breakpoints if lo.value < p < hi.value)
    cuts = sorted(cuts)
    parts = []
    for p, q in zip(cuts, cuts[1:]):
        piece = _replace_nodes(e, {n: n.piece_at(p) for n in nodes})
        parts.append(integrate(piece, var, Num(p), Num(q), simplify_result=False))
    return simplify(mul(sign, add(*parts)))


def resolve_integrals(e: Expr) -> Expr:
    """Evaluate every held integral that falls in the supported class (innermost first)."""
    if isinstance(e, Integral):
        inner = resolve_integrals(e.integrand)
        lo, hi = resolve_integrals(e.lo), resolve_integrals(e.hi)
        return integrate(inner, e.var, lo, hi)
    if not e.children():
        return e
    if not any(isinstance(n, Integral) for n in walk(e)):
        return e
    return e.rebuild(resolve_integrals)
