"""Fréchet derivatives of pointwise and integral functionals.

Two rules do all the work:

* under an integral whose bounds are free of the integration variable, the
  derivative moves inside;
* a pointwise expression ``f(u(x), u'(x), ..., u^(n)(x), x)`` is treated as
  a function of independent slots, giving ``sum_i df/d(slot_i) * h^(i)(x)``.

Integrals nested inside a pointwise expression become slots of their own whose
direction is the derivative of the integral.
"""
from __future__ import annotations

from collections.abc import Callable, Mapping

from .calculus import diff, resolve_integrals
from .errors import NonlocalDependence, SymApproxError
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
    eval_numeric,
    free_of,
    fresh_symbol,
    integral,
    match,
    mul,
    substitute,
    walk,
)

MAX_ORDER = 4

# FD[Int(g, x, a, b)] = Int(FD[g], x, a, b), guarded by "a and b are free of x"
INTEGRAL_PATTERN = Integral(Wild("g"), Wild("x", Symbol), Wild("a"), Wild("b"))


def _bounds_free(b: dict) -> bool:
    return free_of(b["a"], b["x"]) and free_of(b["b"], b["x"])


Direction = Callable[[Expr, int], Expr]


def _direction(h, var: Symbol) -> Direction:
    """Normalise the direction into ``(argument, order) -> h^(order)(argument)``."""
    h = as_expr(h)
    if isinstance(h, Unknown) and len(h.args) == 1 and not any(h.derivs):
        return lambda arg, k: Unknown(h.name, (arg,), (k,))

    def apply(arg: Expr, k: int) -> Expr:
        return substitute(diff(h, var, k), {var: arg})

    return apply


def _mentions(e: Expr, name: str) -> bool:
    return any(isinstance(n, Unknown) and n.name == name for n in walk(e))


def _fd(e: Expr, name: str, x: Symbol, h: Direction) -> Expr:
    if not _mentions(e, name):
        return ZERO
    if isinstance(e, Integral):
        b = match(e, INTEGRAL_PATTERN)
        if b is None or not _bounds_free(b):
            raise NonlocalDependence(f"integration bounds of {e} depend on {e.var}")
        return integral(_fd(e.integrand, name, e.var, h), e.var, e.lo, e.hi)
    slots: dict[Expr, Symbol] = {}
    directions: dict[Symbol, Expr] = {}

    def collect(n: Expr) -> Expr:
        if isinstance(n, Unknown) and n.name == name:
            if len(n.args) != 1 or n.args[0] != x:
                raise NonlocalDependence(f"{n} is not evaluated at {x}")
            if n.order > MAX_ORDER:
                raise SymApproxError(f"derivative order {n.order} exceeds {MAX_ORDER}")
            if n not in slots:
                s = fresh_symbol("slot")
                slots[n] = s
                directions[s] = h(x, n.order)
            return slots[n]
        if isinstance(n, Integral) and _mentions(n, name):
            if n not in slots:
                s = fresh_symbol("islot")
                slots[n] = s
                directions[s] = _fd(n, name, x, h)
            return slots[n]
        if not n.children():
            return n
        return n.rebuild(collect)

    f = collect(e)
    back = {s: n for n, s in slots.items()}
    terms = [mul(substitute(diff(f, s), back), directions[s]) for s in directions]
    return add(*terms)


def frechet_derivative(F, unknown: Unknown, direction) -> Expr:
    """Fréchet derivative of ``F`` with respect to ``unknown`` applied to ``direction``.

    ``unknown`` is the unknown applied to its variable, e.g. ``u(x)``;
    ``direction`` is an unknown such as ``h(x)`` or any expression in ``x``.
    """
    F = as_expr(F)
    if not (isinstance(unknown, Unknown) and len(unknown.args) == 1
            and isinstance(unknown.args[0], Symbol)):
        raise SymApproxError("unknown must be a one-argument application like u(x)")
    x = unknown.args[0]
    return _fd(F, unknown.name, x, _direction(direction, x))


def variational_form(F, unknown: Unknown, test) -> Expr:
    """Weak form of the stationarity condition of ``F``: the derivative in direction ``test``."""
    return frechet_derivative(F, unknown, test)


def _function_binding(name: str, value: Expr, x: Symbol) -> dict:
    return {Unknown(name, (Wild("_"),)): substitute(as_expr(value), {x: Wild("_")})}


def _evaluate(e: Expr, point: Mapping) -> float:
    e = resolve_integrals(e)
    if any(isinstance(n, Integral) for n in walk(e)):
        from .numvalid import eval_with_quadrature
        return eval_with_quadrature(e, point)
    return eval_numeric(e, point)


def gateaux_check(F, unknown: Unknown, phi_value, h_value, point: Mapping,
                  eps: float = 1e-5) -> tuple[float, float]:
    """Compare the symbolic derivative with a central difference of ``F``.

    Returns ``(symbolic, numeric)`` evaluated at ``point`` (a map from symbols
    to numbers, which should bind the unknown's variable for pointwise ``F``).
    """
    F = as_expr(F)
    x = unknown.args[0]
    h_name = fresh_symbol("h").name
    d = frechet_derivative(F, unknown, Unknown(h_name, (x,)))
    bindings = {**_function_binding(unknown.name, phi_value, x),
                **_function_binding(h_name, h_value, x)}
    symbolic = _evaluate(substitute(d, bindings), point)
    e = Num(eps) if isinstance(eps, int) else as_expr(eps)
    plus = substitute(F, _function_binding(unknown.name, add(as_expr(phi_value), mul(e, h_value)), x))
    minus = substitute(F, _function_binding(unknown.name,
                                            add(as_expr(phi_value), mul(-e, h_value)), x))
    numeric = (_evaluate(plus, point) - _evaluate(minus, point)) / (2 * float(eps))
    return symbolic, numeric
