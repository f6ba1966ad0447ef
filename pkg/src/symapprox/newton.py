"""Newton's method: exact steps for algebraic systems and quasilinearization for BVPs.

Each functional Newton step solves the linear problem

    F'(u_n)[h] + F(u_n) = 0,   h = u_{n+1} - u_n

with the boundary data carried by the increment ``h``.  Two linear solvers
are provided: a closed-form one for directly integrable and constant
coefficient equations, and a Galerkin one for everything else.
"""
from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass

from .calculus import diff, integrate
from .errors import LinearBackendUnsupported, SymApproxError, UnsupportedDerivative
from .expr import (
    ZERO,
    Expr,
    Integral,
    Num,
    Symbol,
    Unknown,
    Wild,
    add,
    as_expr,
    cos,
    eval_numeric,
    exp,
    free_of,
    free_symbols,
    fresh_symbol,
    mul,
    neg,
    power,
    sin,
    sqrt,
    substitute,
    walk,
)
from .frechet import frechet_derivative
from .linalg import linear_solve_symbolic
from .ratfunc import Zeroness, is_numeric_constant, is_zero, simplify
from .report import SolveReport, note_warning, recording

__all__ = [
    "AlgebraicSystem",
    "BvpProblem",
    "galerkin_linear_bvp",
    "LinearBvp",
    "jacobian",
    "linear_solve_symbolic",
    "newton_algebraic",
    "newton_functional",
    "quasilinearize",
    "solve_linear_bvp",
]


# ---------------------------------------------------------------------------
# finite dimensions

@dataclass(frozen=True)
class AlgebraicSystem:
    equations: tuple[Expr, ...]
    vars: tuple[Symbol, ...]
    x0: tuple[Expr, ...]

    def __init__(self, equations: Sequence, vars: Sequence, x0: Sequence):
        eqs = tuple(as_expr(e) for e in equations)
        vs = tuple(as_expr(v) for v in vars)
        start = tuple(as_expr(v) for v in x0)
        if not (len(eqs) == len(vs) == len(start)):
            raise ValueError("equations, vars and x0 must have the same length")
        if not all(isinstance(v, Symbol) for v in vs):
            raise ValueError("vars must be symbols")
        object.__setattr__(self, "equations", eqs)
        object.__setattr__(self, "vars", vs)
        object.__setattr__(self, "x0", start)


def jacobian(equations: Sequence[Expr], vars: Sequence[Symbol]) -> list[list[Expr]]:
    return [[diff(f, v) for v in vars] for f in equations]


def newton_algebraic(system: AlgebraicSystem, steps: int,
                     report: SolveReport | None = None) -> tuple[dict[Symbol, Expr], SolveReport]:
    """Run ``steps`` exact Newton steps; stop early once the residual is zero.

    The report lists every iterate (the start point first) under ``iterates``.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    J = jacobian(system.equations, system.vars)
    x = list(system.x0)
    with recording(report) as rep:
        rep.iterates.append(dict(zip(system.vars, x)))
        for _ in range(steps):
            at = dict(zip(system.vars, x))
            f = [simplify(substitute(e, at)) for e in system.equations]
            if all(is_zero(v) is Zeroness.ZERO for v in f):
                break
            Jx = [[simplify(substitute(e, at)) for e in row] for row in J]
            d = linear_solve_symbolic(Jx, f)
            x = [simplify(add(xi, neg(di))) for xi, di in zip(x, d)]
            rep.iterations_run += 1
            rep.iterates.append(dict(zip(system.vars, x)))
        solution = dict(zip(system.vars, x))
        rep.result = solution
    return solution, rep


# ---------------------------------------------------------------------------
# two-point boundary value problems

@dataclass
class BvpProblem:
    """``residual(u) = 0`` on ``domain`` with ``u(lo), u(hi)`` given by ``boundary``."""

    residual: Expr
    unknown: Unknown
    domain: tuple
    boundary: tuple
    u0: Expr | None = None

    def __post_init__(self):
        self.residual = as_expr(self.residual)
        if not (isinstance(self.unknown, Unknown) and len(self.unknown.args) == 1
                and isinstance(self.unknown.args[0], Symbol)):
            raise SymApproxError("unknown must look like u(x)")
        self.domain = tuple(as_expr(d) for d in self.domain)
        self.boundary = tuple(as_expr(b) for b in self.boundary)
        if self.u0 is None:
            self.u0 = self.lifting()
        self.u0 = as_expr(self.u0)
        order = max((n.order for n in walk(self.residual)
                     if isinstance(n, Unknown) and n.name == self.unknown.name), default=0)
        if order > 2:
            raise SymApproxError(f"residual has order {order}; at most 2 is supported")

    @property
    def var(self) -> Symbol:
        return self.unknown.args[0]

    def lifting(self) -> Expr:
        """The straight line through the boundary values."""
        (lo, hi), (a, b) = self.domain, self.boundary
        x = self.var
        return simplify(add(a, mul(add(b, neg(a)), add(x, neg(lo)), power(add(hi, neg(lo)), -1))))

    def evaluate(self, approximant: Expr) -> Expr:
        """The residual with ``approximant`` substituted for the unknown."""
        x = self.var
        template = substitute(as_expr(approximant), {x: Wild("_")})
        return substitute(self.residual, {Unknown(self.unknown.name, (Wild("_"),)): template})


@dataclass
class LinearBvp:
    """``c2 h'' + c1 h' + c0 h = rhs`` with ``h(lo), h(hi)`` prescribed."""

    equation: Expr
    increment: Unknown
    coeffs: tuple[Expr, Expr, Expr]
    rhs: Expr
    domain: tuple[Expr, Expr]
    boundary: tuple[Expr, Expr]

    @property
    def var(self) -> Symbol:
        return self.increment.args[0]


def quasilinearize(p: BvpProblem, u_n: Expr | None = None, increment: str = "h") -> LinearBvp:
    """The Newton-linearized equation ``F'(u_n)[h] + F(u_n) = 0`` at ``u_n``."""
    x = p.var
    u_n = p.u0 if u_n is None else as_expr(u_n)
    h = Unknown(increment, (x,))
    lin = frechet_derivative(p.residual, p.unknown, h)
    template = substitute(u_n, {x: Wild("_")})
    at_un = {Unknown(p.unknown.name, (Wild("_"),)): template}
    lin = substitute(lin, at_un)
    f_n = simplify(p.evaluate(u_n))
    slots = [fresh_symbol("dh") for _ in range(3)]
    hmap = {Unknown(increment, (x,), (k,)): s for k, s in enumerate(slots)}
    flat = _replace(lin, hmap)
    if any(isinstance(n, Unknown) and n.name == increment for n in walk(flat)):
        raise SymApproxError("linearized equation involves derivatives of order above 2")
    coeffs = tuple(simplify(diff(flat, s)) for s in slots)
    rest = simplify(substitute(flat, {s: ZERO for s in slots}))
    if rest != ZERO:
        raise SymApproxError("linearized operator is not homogeneous in the increment")
    lo, hi = p.domain
    a, b = p.boundary
    bc = (simplify(add(a, neg(substitute(u_n, {x: lo})))),
          simplify(add(b, neg(substitute(u_n, {x: hi})))))
    equation = add(*(mul(c, Unknown(increment, (x,), (k,))) for k, c in enumerate(coeffs)), f_n)
    return LinearBvp(equation, h, coeffs, simplify(neg(f_n)), (lo, hi), bc)


def _replace(e: Expr, mapping: dict) -> Expr:
    if e in mapping:
        return mapping[e]
    if not e.children():
        return e
    return e.rebuild(lambda c: _replace(c, mapping))


# ---------------------------------------------------------------------------
# closed-form linear solves

def _has_held(e: Expr) -> bool:
    return any(isinstance(n, Integral) for n in walk(e))


def _integrate_or_fail(e: Expr, s: Symbol, lo: Expr, hi: Expr) -> Expr:
    value = integrate(e, s, lo, hi)
    if _has_held(value):
        raise LinearBackendUnsupported(f"cannot integrate {e} in closed form")
    return value


def _homogeneous_pair(p: Expr, q: Expr, x: Symbol) -> tuple[Expr, Expr]:
    """Two independent solutions of ``h'' + p h' + q h = 0`` for constant ``p, q``."""
    disc = simplify(add(mul(p, p), mul(-4, q)))
    half_p = mul(Num(-1) / 2, p)
    verdict = is_zero(disc)
    if verdict is Zeroness.ZERO:
        r = simplify(half_p)
        return exp(mul(r, x)), mul(x, exp(mul(r, x)))
    if not is_numeric_constant(disc):
        raise LinearBackendUnsupported(
            f"sign of the characteristic discriminant {disc} cannot be decided")
    value = eval_numeric(disc)
    if value > 0:
        root = sqrt(disc)
        r1 = simplify(add(half_p, mul(Num(1) / 2, root)))
        r2 = simplify(add(half_p, mul(Num(-1) / 2, root)))
        return exp(mul(r1, x)), exp(mul(r2, x))
    omega = sqrt(simplify(neg(disc)))
    omega = mul(Num(1) / 2, omega)
    decay = exp(mul(simplify(half_p), x))
    return mul(decay, cos(mul(omega, x))), mul(decay, sin(mul(omega, x)))


def solve_linear_bvp(lb: LinearBvp) -> Expr:
    """Closed-form solution of a linearized BVP.

    Handles ``c2 h'' = r`` (double integration, ``c2`` may vary) and
    constant-coefficient second-order equations (homogeneous solutions from
    the characteristic roots plus variation of parameters).
    """
    x = lb.var
    c0, c1, c2 = lb.coeffs
    lo, hi = lb.domain
    alpha, beta = lb.boundary
    if is_zero(c2) is Zeroness.ZERO:
        raise LinearBackendUnsupported("linearized equation is not second order")
    s, t = fresh_symbol("s"), fresh_symbol("t")
    g = simplify(mul(lb.rhs, power(c2, -1)))
    if is_zero(c1) is Zeroness.ZERO and is_zero(c0) is Zeroness.ZERO:
        inner = _integrate_or_fail(substitute(g, {x: s}), s, lo, t)
        H = _integrate_or_fail(inner, t, lo, x)
        H_hi = substitute(H, {x: hi})
        slope = mul(add(beta, neg(alpha), neg(H_hi)), power(add(hi, neg(lo)), -1))
        return simplify(add(H, alpha, mul(slope, add(x, neg(lo)))))
    p = simplify(mul(c1, power(c2, -1)))
    q = simplify(mul(c0, power(c2, -1)))
    if not (free_of(p, x) and free_of(q, x)):
        raise LinearBackendUnsupported("variable coefficients; use the Galerkin backend")
    y1, y2 = _homogeneous_pair(p, q, x)
    w = simplify(add(mul(y1, diff(y2, x)), neg(mul(diff(y1, x), y2))))
    gs = substitute(g, {x: s})
    k1 = simplify(mul(substitute(y2, {x: s}), gs, power(substitute(w, {x: s}), -1)))
    k2 = simplify(mul(substitute(y1, {x: s}), gs, power(substitute(w, {x: s}), -1)))
    hp = add(mul(neg(y1), _integrate_or_fail(k1, s, lo, x)),
             mul(y2, _integrate_or_fail(k2, s, lo, x)))
    A = [[substitute(y1, {x: lo}), substitute(y2, {x: lo})],
         [substitute(y1, {x: hi}), substitute(y2, {x: hi})]]
    b = [simplify(add(alpha, neg(substitute(hp, {x: lo})))),
         simplify(add(beta, neg(substitute(hp, {x: hi}))))]
    ca, cb = linear_solve_symbolic(A, b)
    return simplify(add(hp, mul(ca, y1), mul(cb, y2)))


# ---------------------------------------------------------------------------
# Galerkin linear solves

def galerkin_linear_bvp(lb: LinearBvp, basis) -> Expr:
    """Solve the linearized BVP in weak form on ``basis`` (homogeneous at both ends).

    Nonzero boundary increments are carried by a linear lifting.  The second
    derivative is moved onto the test function, so piecewise-linear bases work.
    """
    from .galerkin import galerkin_elliptic, second_order_form
    x = lb.var
    c0, c1, c2 = lb.coeffs
    lo, hi = lb.domain
    alpha, beta = lb.boundary
    lift = simplify(add(alpha, mul(add(beta, neg(alpha)), add(x, neg(lo)),
                                   power(add(hi, neg(lo)), -1))))
    rhs = simplify(add(lb.rhs, neg(mul(c1, diff(lift, x))), neg(mul(c0, lift))))
    sol = galerkin_elliptic(second_order_form(lb.coeffs, rhs, (lo, hi), x), basis)
    return simplify(add(lift, sol.approximant))


# ---------------------------------------------------------------------------
# the iteration

def _residual_samples(p: BvpProblem, u: Expr, points: Sequence[float],
                      bindings: Mapping | None) -> list[tuple[float, float]] | None:
    from .numvalid import sample
    try:
        r = p.evaluate(u)
    except UnsupportedDerivative:
        note_warning("residual of a piecewise iterate was not sampled")
        return None
    names = {k.name if isinstance(k, Symbol) else str(k) for k in (bindings or {})}
    if any(s.name not in names for s in free_symbols(r) - {p.var, Symbol("pi")}):
        return None
    return sample(r, p.var, points, bindings)


def newton_functional(p: BvpProblem, steps: int, backend="closed_form", *,
                      bindings: Mapping | None = None, sample_points: int = 11,
                      report: SolveReport | None = None) -> tuple[Expr, SolveReport]:
    """Quasilinearization: ``steps`` Newton steps starting from ``p.u0``.

    ``backend`` is ``"closed_form"`` or a :class:`~symapprox.galerkin.Basis`.
    After each step the residual is sampled at ``sample_points`` equally
    spaced points (using ``bindings`` for parameters); a growing residual is
    reported as a warning, never trapped.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    lo, hi = (float(eval_numeric(d)) for d in p.domain) if all(
        is_numeric_constant(d) for d in p.domain) else (None, None)
    points = None
    if lo is not None:
        from .numvalid import grid
        points = grid(lo, hi, sample_points)
    u = p.u0
    last_sup = None
    with recording(report) as rep:
        rep.iterates.append(u)
        for k in range(steps):
            try:
                lb = quasilinearize(p, u)
            except UnsupportedDerivative as exc:
                raise LinearBackendUnsupported(
                    f"step {k + 1}: the iterate is not smooth enough to linearize ({exc})") from None
            if isinstance(backend, str):
                if backend != "closed_form":
                    raise ValueError(f"unknown linear backend {backend!r}")
                h = solve_linear_bvp(lb)
            else:
                h = galerkin_linear_bvp(lb, backend)
            u = simplify(add(u, h))
            rep.iterations_run += 1
            rep.iterates.append(u)
            if points is not None:
                samples = _residual_samples(p, u, points, bindings)
                if samples is not None:
                    rep.residual_samples = samples
                    sup = max(abs(v) for _, v in samples)
                    if last_sup is not None and sup > last_sup:
                        note_warning(f"sampled residual grew at step {k + 1}: {sup:.3g} > {last_sup:.3g}")
                    last_sup = sup
        rep.result = u
    return u, rep



