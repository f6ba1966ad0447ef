"""Regular perturbation expansions and Padé resummation.

The unknown is replaced by ``sum(e^k * x_k)``; collecting powers of the small
parameter gives a cascade in which every order is a linear problem for the
new coefficient, with the same linear operator as the unperturbed problem.
"""
from __future__ import annotations

from dataclasses import dataclass

from .calculus import diff, integrate
from .errors import DegenerateRoot, NotRegular, SingularPade, SingularSystem, SymApproxError
from .expr import (
    ZERO,
    Expr,
    Func,
    Integral,
    Num,
    Pow,
    Symbol,
    Unknown,
    add,
    as_expr,
    exp,
    expand,
    factors_of,
    free_of,
    fresh_symbol,
    mul,
    neg,
    power,
    substitute,
    terms_of,
    walk,
)
from .linalg import linear_solve_symbolic
from .ratfunc import Zeroness, is_zero, simplify
from .report import SolveReport, note_warning, recording
from .series import Series, taylor

__all__ = [
    "PadeApproximant",
    "Series",
    "pade",
    "perturb_solve_algebraic",
    "perturb_solve_ode",
    "series_residual",
]


def _held(e: Expr) -> bool:
    return any(isinstance(n, Integral) for n in walk(e))


def _order_coefficients(e: Expr, param: Symbol, order: int) -> list[Expr]:
    if free_of(e, param):
        return [simplify(e)] + [ZERO] * order
    return list(taylor(e, param, 0, order).coeffs)


# ---------------------------------------------------------------------------
# algebraic equations

def perturb_solve_algebraic(eq, unknown: Symbol, x0, param: Symbol, order: int,
                            report: SolveReport | None = None) -> Series:
    """Series ``x(e)`` with ``x(0) = x0`` solving ``eq(x, e) = 0``.

    Requires ``x0`` to be a simple root of ``eq(x, 0)``.
    """
    eq, x0 = as_expr(eq), as_expr(x0)
    with recording(report) as rep:
        f0 = simplify(substitute(eq, {unknown: x0, param: ZERO}))
        if is_zero(f0) is not Zeroness.ZERO:
            raise NotRegular(f"{x0} is not a root of the unperturbed equation (residual {f0})")
        d = simplify(substitute(diff(eq, unknown), {unknown: x0, param: ZERO}))
        if is_zero(d) in (Zeroness.ZERO, Zeroness.PROBABLY_ZERO):
            raise DegenerateRoot(f"derivative at the root {x0} vanishes")
        xs = [fresh_symbol("x") for _ in range(order)]
        trial = add(x0, *(mul(s, power(param, k + 1)) for k, s in enumerate(xs)))
        coeffs = _order_coefficients(substitute(eq, {unknown: trial}), param, order)
        solved: dict[Symbol, Expr] = {}
        out = [x0]
        for k in range(1, order + 1):
            ck = simplify(substitute(coeffs[k], solved))
            rest = simplify(substitute(ck, {xs[k - 1]: ZERO}))
            value = simplify(mul(neg(rest), power(d, -1)))
            solved[xs[k - 1]] = value
            out.append(value)
        series = Series(param, tuple(out))
        rep.result = series
        rep.iterations_run = order
    return series


# ---------------------------------------------------------------------------
# first-order ODE initial value problems

@dataclass
class _Cascade:
    cp: Expr     # coefficient of the derivative slot
    cu: Expr     # coefficient of the value slot


def _flatten_unknown(eq: Expr, name: str, t: Symbol, slots: tuple[Symbol, Symbol]) -> Expr:
    def rep(n: Expr) -> Expr:
        if isinstance(n, Unknown) and n.name == name:
            if n.args != (t,):
                raise SymApproxError(f"{n} is not evaluated at {t}")
            if n.order > 1:
                raise NotRegular("only first-order equations are supported")
            return slots[n.order]
        return n.rebuild(rep) if n.children() else n

    return rep(eq)


def _solve_first_order(cascade: _Cascade, rest: Expr, t: Symbol, t0: Expr, c: Expr
                       ) -> Expr | None:
    """``cp*y' + cu*y + rest = 0`` with ``y(t0) = c``; ``None`` if an integral stays held."""
    s = fresh_symbol("s")
    P = integrate(substitute(simplify(mul(cascade.cu, power(cascade.cp, -1))), {t: s}), s, t0, t)
    if _held(P):
        return None
    forcing = simplify(mul(neg(rest), power(cascade.cp, -1)))
    integrand = simplify(mul(exp(substitute(P, {t: s})), substitute(forcing, {t: s})))
    inner = integrate(integrand, s, t0, t) if integrand != ZERO else ZERO
    if _held(inner):
        return None
    return simplify(mul(exp(neg(P)), add(c, inner)))


def _secular(term_sets: list[Expr], t: Symbol, base: Expr) -> list[Expr]:
    """Terms ``t^m * trig(..t..)`` or ``t^m * exp(a t)`` with ``exp(a t)`` already present at order 0."""
    base_exps = {f for term in terms_of(expand(base)) for f in factors_of(term)
                 if isinstance(f, Func) and f.head == "exp" and not free_of(f, t)}
    flagged = []
    for e in term_sets:
        for term in terms_of(expand(e)):
            fs = factors_of(term)
            grows = any(f == t or (isinstance(f, Pow) and f.base == t) for f in fs)
            if not grows:
                continue
            if any(isinstance(f, Func) and f.head in ("sin", "cos") and not free_of(f, t)
                   for f in fs) or any(f in base_exps for f in fs):
                flagged.append(term)
    return flagged


def perturb_solve_ode(eq, ic: tuple, unknown: Unknown, param: Symbol, order: int,
                      report: SolveReport | None = None) -> Series:
    """Series solution of the first-order IVP ``eq = 0``, ``u(t0) = c``.

    ``ic`` is the pair ``(t0, c)``.  Each order is a linear first-order IVP
    solved with an integrating factor; if an integral cannot be evaluated at
    some order the series is truncated there and a warning is recorded.
    """
    eq = as_expr(eq)
    if not (isinstance(unknown, Unknown) and len(unknown.args) == 1
            and isinstance(unknown.args[0], Symbol)):
        raise SymApproxError("unknown must look like u(t)")
    t = unknown.args[0]
    t0, c = (as_expr(v) for v in ic)
    us, ps = fresh_symbol("u"), fresh_symbol("du")
    flat = _flatten_unknown(eq, unknown.name, t, (us, ps))
    a = [fresh_symbol("a") for _ in range(order + 1)]
    b = [fresh_symbol("b") for _ in range(order + 1)]
    su = add(*(mul(ak, power(param, k)) for k, ak in enumerate(a)))
    sp = add(*(mul(bk, power(param, k)) for k, bk in enumerate(b)))
    with recording(report) as rep:
        coeffs = _order_coefficients(substitute(flat, {us: su, ps: sp}), param, order)
        f0 = coeffs[0]
        cp, cu = simplify(diff(f0, b[0])), simplify(diff(f0, a[0]))
        for second in (diff(cp, b[0]), diff(cp, a[0]), diff(cu, a[0])):
            if is_zero(simplify(second)) is not Zeroness.ZERO:
                raise NotRegular("the unperturbed equation is nonlinear")
        if is_zero(cp) is Zeroness.ZERO:
            raise NotRegular("the unperturbed equation does not involve the derivative")
        cascade = _Cascade(cp, cu)
        known: dict[Symbol, Expr] = {}
        out: list[Expr] = []
        for k in range(order + 1):
            ck = simplify(substitute(coeffs[k], known))
            rest = simplify(substitute(ck, {a[k]: ZERO, b[k]: ZERO}))
            start = c if k == 0 else ZERO
            sol = _solve_first_order(cascade, rest, t, t0, start)
            if sol is None:
                if k == 0:
                    raise NotRegular("the unperturbed equation has no closed-form solution")
                note_warning(f"integral unresolved at order {k}; series truncated at order {k - 1}")
                break
            out.append(sol)
            known[a[k]] = sol
            known[b[k]] = simplify(diff(sol, t))
        flagged = _secular(out[1:], t, out[0])
        if flagged:
            note_warning("secular terms: " + ", ".join(str(f) for f in flagged[:3]))
        series = Series(param, tuple(out))
        rep.result = series
        rep.iterations_run = len(out) - 1
    return series


def series_residual(eq, unknown: Unknown, series: Series) -> list[Expr]:
    """Coefficients of ``eq`` at the series through its order (all zero for a correct series)."""
    t = unknown.args[0]
    from .expr import Wild
    template = substitute(series.to_expr(), {t: Wild("_")})
    plugged = substitute(as_expr(eq), {Unknown(unknown.name, (Wild("_"),)): template})
    return [simplify(c) for c in _order_coefficients(plugged, series.param, series.order)]


# ---------------------------------------------------------------------------
# Padé approximants

@dataclass(frozen=True)
class PadeApproximant:
    """``num / den`` with ``den(0) = 1``; both polynomials in ``param``."""

    num: Expr
    den: Expr
    param: Symbol
    m: int
    n: int

    def to_expr(self) -> Expr:
        return mul(self.num, power(self.den, -1))

    def simplified(self) -> Expr:
        return simplify(self.to_expr())


def pade(s: Series, m: int, n: int) -> PadeApproximant:
    """The ``[m/n]`` Padé approximant of a series with at least ``m + n + 1`` terms."""
    if m < 0 or n < 0:
        raise ValueError("m and n must be >= 0")
    if m + n > s.order:
        raise ValueError(f"[{m}/{n}] needs order >= {m + n}, the series has order {s.order}")
    c = [simplify(x) for x in s.coeffs]

    def coef(i: int) -> Expr:
        return c[i] if i >= 0 else ZERO

    if n:
        A = [[coef(m + i - j) for j in range(1, n + 1)] for i in range(1, n + 1)]
        rhs = [neg(coef(m + i)) for i in range(1, n + 1)]
        try:
            q = [Num(1)] + linear_solve_symbolic(A, rhs)
        except SingularSystem:
            raise SingularPade(f"degenerate Padé block [{m}/{n}]; try [{m + 1}/{n}] or "
                               f"[{max(m - 1, 0)}/{n}]") from None
    else:
        q = [Num(1)]
    p = [simplify(add(*(mul(q[j], coef(i - j)) for j in range(min(i, n) + 1))))
         for i in range(m + 1)]
    x = s.param
    num = add(*(mul(pi, power(x, i)) for i, pi in enumerate(p)))
    den = add(*(mul(qj, power(x, j)) for j, qj in enumerate(q)))
    return PadeApproximant(num, den, x, m, n)
