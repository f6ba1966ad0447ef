"""Successive approximations, the Shanks transformation and Steffensen's method."""
from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass

from .calculus import integrate, resolve_integrals
from .errors import DegenerateSequence, SymApproxError, UnresolvedIntegral
from .expr import (
    Expr,
    Integral,
    Symbol,
    Unknown,
    Wild,
    add,
    as_expr,
    exp,
    fresh_symbol,
    integral,
    mul,
    neg,
    power,
    substitute,
    walk,
)
from .ratfunc import Zeroness, is_zero, simplify
from .report import note_unresolved


@dataclass(frozen=True)
class OperatorDef:
    """``body`` with the placeholder ``unknown`` standing for the argument.

    ``unknown`` is a symbol for scalar maps (``x -> x/2 + 1``) or a function
    pattern such as ``u(_)`` for operators on functions of ``var``.
    """

    name: str
    unknown: Expr
    var: Symbol | None
    body: Expr

    def __post_init__(self):
        object.__setattr__(self, "unknown", as_expr(self.unknown))
        object.__setattr__(self, "body", as_expr(self.body))
        if isinstance(self.unknown, Unknown):
            if not all(isinstance(a, Wild) for a in self.unknown.args):
                raise SymApproxError("function placeholders must use wildcard arguments, e.g. u(_)")
            if self.var is None:
                raise SymApproxError("function operators need a variable")
        elif not isinstance(self.unknown, Symbol):
            raise SymApproxError("the placeholder must be a symbol or a pattern like u(_)")

    def bind(self, g) -> dict:
        g = as_expr(g)
        if isinstance(self.unknown, Symbol):
            return {self.unknown: g}
        slot = self.unknown.args[0]
        return {self.unknown: substitute(g, {self.var: slot})}

    def apply(self, g, allow_held: bool = False) -> Expr:
        out = resolve_integrals(substitute(self.body, self.bind(g)))
        held = [n for n in walk(out) if isinstance(n, Integral)]
        if held:
            for h in held:
                note_unresolved(h)
            if not allow_held:
                raise UnresolvedIntegral(f"{self.name}: could not evaluate {held[0]}")
            return out
        return simplify(out)

    def __call__(self, g, allow_held: bool = False) -> Expr:
        return self.apply(g, allow_held)


def scalar_map(body, var) -> OperatorDef:
    """Operator for an ordinary function ``var -> body``."""
    var = as_expr(var)
    return OperatorDef("f", var, None, body)


def nest_list(op: OperatorDef, x0, n: int, allow_held: bool = False) -> list[Expr]:
    """``[x0, f(x0), ..., f^n(x0)]``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    out = [simplify(as_expr(x0))]
    for _ in range(n):
        out.append(op.apply(out[-1], allow_held))
    return out


def nest(op: OperatorDef, x0, n: int, allow_held: bool = False) -> Expr:
    """The ``n``-th iterate ``f^n(x0)``."""
    return nest_list(op, x0, n, allow_held)[-1]


def _is_float(*xs) -> bool:
    return any(isinstance(x, float) for x in xs)


def shanks(x_n, x_n1, x_n2):
    """Aitken-Shanks extrapolation ``(x2*x0 - x1^2) / (x2 + x0 - 2*x1)``.

    Works on floats (numeric use) or on expressions (exact use).
    """
    if _is_float(x_n, x_n1, x_n2):
        den = x_n2 + x_n - 2 * x_n1
        if den == 0:
            raise DegenerateSequence("second difference vanishes")
        return (x_n2 * x_n - x_n1 ** 2) / den
    a, b, c = (as_expr(v) for v in (x_n, x_n1, x_n2))
    den = simplify(add(c, a, mul(-2, b)))
    if is_zero(den) in (Zeroness.ZERO, Zeroness.PROBABLY_ZERO):
        raise DegenerateSequence(f"second difference {den} vanishes")
    return simplify(mul(add(mul(c, a), neg(mul(b, b))), power(den, -1)))


def shanks_alternate(x_n, x_n1, x_n2):
    """The difference-quotient form ``x1 + 1/(1/(x2 - x1) - 1/(x1 - x0))``."""
    if _is_float(x_n, x_n1, x_n2):
        return x_n1 + 1 / (1 / (x_n2 - x_n1) - 1 / (x_n1 - x_n))
    a, b, c = (as_expr(v) for v in (x_n, x_n1, x_n2))
    inner = add(power(add(c, neg(b)), -1), neg(power(add(b, neg(a)), -1)))
    return simplify(add(b, power(inner, -1)))


def steffensen(op, x0, n: int = 0, allow_held: bool = False):
    """``shanks(f^n(x0), f^(n+1)(x0), f^(n+2)(x0))``.

    ``op`` is an :class:`OperatorDef` or a plain Python callable; a float
    ``x0`` with a callable gives a purely numeric computation.
    """
    if callable(op) and not isinstance(op, OperatorDef):
        xs = [x0]
        for _ in range(n + 2):
            xs.append(op(xs[-1]))
        return shanks(*xs[n:n + 3])
    if isinstance(x0, float):
        from .expr import compile_numeric
        f = compile_numeric(op.body, [op.unknown])
        return steffensen(f, x0, n)
    seq = nest_list(op, x0, n + 2, allow_held)
    return shanks(*seq[n:n + 3])


def ivp_to_integral(p, q, unknown: Unknown, u0, name: str = "picard") -> OperatorDef:
    """Integral operator for ``u' + p(t) u = q(t, u)``, ``u(0) = u0``.

    Uses the integrating factor: ``u(t) = u0*exp(-P(t)) + Int(exp(P(tau) - P(t)) q(tau, u(tau)))``
    with ``P(t) = Int(p, 0, t)``.
    """
    if not (isinstance(unknown, Unknown) and len(unknown.args) == 1
            and isinstance(unknown.args[0], Symbol)):
        raise SymApproxError("unknown must look like u(t)")
    t = unknown.args[0]
    tau = fresh_symbol("tau")
    P = integrate(as_expr(p), t, 0, t)
    if any(isinstance(nd, Integral) for nd in walk(P)):
        raise UnresolvedIntegral(f"cannot integrate the coefficient {p}")
    P_tau = substitute(P, {t: tau})
    q_tau = substitute(as_expr(q), {t: tau})
    body = add(mul(u0, exp(neg(P))),
               integral(mul(exp(add(P_tau, neg(P))), q_tau), tau, 0, t))
    return OperatorDef(name, Unknown(unknown.name, (Wild("_"),)), t, body)


def iterate_distances(seq: Sequence[Expr], var: Symbol, points: Sequence[float],
                      bindings: Mapping | None = None) -> list[float]:
    """Sampled sup-distances between consecutive iterates (a heuristic, not a proof)."""
    from .numvalid import sample
    values = [[v for _, v in sample(e, var, points, bindings)] for e in seq]
    return [max(abs(a - b) for a, b in zip(u, w)) for u, w in zip(values, values[1:])]
