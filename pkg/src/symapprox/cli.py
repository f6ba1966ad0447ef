"""Command-line front end: ``symapprox PROBLEM_FILE [flags]``.

A problem file is a line-oriented ``key: value`` document (``#`` starts a
comment).  See README.md for the keys each method understands.

Exit codes: 0 success, 2 parse or validation error, 3 method failure,
4 unresolved symbolic work (held integrals without ``--allow-held``).
"""
from __future__ import annotations

import argparse
import json
import sys
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from . import expr as expr_mod
from .errors import ParseError, SymApproxError, UnresolvedInnerProduct, UnresolvedIntegral
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
    free_symbols,
    fresh_symbol,
    mul,
    neg,
    power,
    substitute,
    walk,
)
from .parse import parse_equation, parse_expr
from .ratfunc import simplify
from .render import render
from .report import SolveReport, recording

METHODS = (
    "fixedpoint", "steffensen", "newton", "newton-bvp", "perturb", "pade",
    "galerkin-elliptic", "galerkin-spectral", "galerkin-evolution", "frechet",
)

EXIT_OK, EXIT_INPUT, EXIT_METHOD, EXIT_UNRESOLVED = 0, 2, 3, 4


class ProblemError(Exception):
    """Invalid problem file; the message names the key (and line when known)."""

    def __init__(self, key: str, message: str, line: int | None = None):
        where = f"line {line}, " if line else ""
        super().__init__(f"{where}key '{key}': {message}")
        self.key = key
        self.line = line


# ---------------------------------------------------------------------------
# problem files

@dataclass
class ProblemFile:
    entries: dict[str, tuple[str, int]] = field(default_factory=dict)

    @classmethod
    def parse(cls, text: str) -> ProblemFile:
        entries: dict[str, tuple[str, int]] = {}
        for number, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if ":" not in line:
                raise ProblemError(line.split()[0], "expected 'key: value'", number)
            key, value = (part.strip() for part in line.split(":", 1))
            if key in entries:
                raise ProblemError(key, "given twice", number)
            entries[key] = (value, number)
        return cls(entries)

    def has(self, key: str) -> bool:
        return key in self.entries and bool(self.entries[key][0])

    def line(self, key: str) -> int | None:
        return self.entries.get(key, ("", None))[1]

    def text(self, key: str, default: str | None = None) -> str:
        if not self.has(key):
            if default is not None:
                return default
            raise ProblemError(key, "missing or empty", self.line(key))
        return self.entries[key][0]

    def _wrap(self, key: str, fn: Callable[[str], object]):
        try:
            return fn(self.text(key))
        except ParseError as exc:
            raise ProblemError(key, str(exc), self.line(key)) from None

    def expr(self, key: str, default=None) -> Expr:
        if default is not None and not self.has(key):
            return as_expr(default)
        return self._wrap(key, parse_expr)

    def equation(self, key: str = "equation") -> Expr:
        return self._wrap(key, parse_equation)

    def integer(self, key: str, default: int | None = None) -> int:
        if default is not None and not self.has(key):
            return default
        value = self.text(key)
        try:
            return int(value)
        except ValueError:
            raise ProblemError(key, f"expected an integer, got {value!r}", self.line(key)) from None

    def expr_list(self, key: str, sep: str = ",") -> list[Expr]:
        return self._wrap(key, lambda s: [parse_expr(p) for p in _split_top(s, sep)])


def _split_top(text: str, sep: str) -> list[str]:
    """Split on ``sep`` outside brackets."""
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur).strip())
    return [p for p in parts if p]


# ---------------------------------------------------------------------------
# outcome of a method

@dataclass
class Outcome:
    lines: Callable[[Callable[[Expr], str]], list[str]]
    result: object
    sample_expr: Expr | None = None
    var: Symbol | None = None
    reference: Callable[[list[float]], list[float]] | None = None


def _assignment(name: str, value: Expr, show: Callable[[Expr], str]) -> str:
    return f"{name} = {show(value)}"


def _matrix(rows: Sequence[Sequence[Expr]], show) -> str:
    return "[" + ", ".join("[" + ", ".join(show(x) for x in row) + "]" for row in rows) + "]"


def _vector(items: Sequence[Expr], show) -> str:
    return "[" + ", ".join(show(x) for x in items) + "]"


# ---------------------------------------------------------------------------
# shared parsing helpers

def _unknown(pf: ProblemFile) -> Expr:
    u = pf.expr("unknown")
    if isinstance(u, Unknown):
        if len(u.args) != 1 or not isinstance(u.args[0], Symbol) or any(u.derivs):
            raise ProblemError("unknown", "expected an application like u(t)", pf.line("unknown"))
    elif not isinstance(u, Symbol):
        raise ProblemError("unknown", "expected a symbol or an application like u(t)",
                           pf.line("unknown"))
    return u


def _mentions(e: Expr, u: Expr) -> bool:
    if isinstance(u, Symbol):
        return u in free_symbols(e)
    return any(isinstance(n, Unknown) and n.name == u.name for n in walk(e))


def _check_equation(pf: ProblemFile, eq: Expr, u: Expr, extra: set[Symbol] = frozenset()) -> None:
    if not _mentions(eq, u):
        raise ProblemError("equation", f"does not involve the unknown {render(u)}",
                           pf.line("equation"))
    if pf.has("symbols"):
        declared = {Symbol(n.split()[0]) for n in _split_top(pf.text("symbols"), ",")}
        allowed = declared | set(extra) | {Symbol("pi")}
        if isinstance(u, Unknown):
            allowed |= set(u.args)
        else:
            allowed.add(u)
        stray = free_symbols(eq) - allowed
        if stray:
            names = ", ".join(sorted(s.name for s in stray))
            raise ProblemError("symbols", f"undeclared symbols {names}", pf.line("symbols"))


def _values(pf: ProblemFile) -> dict[str, float]:
    """Numeric parameter values for sampling (``values: a = 1, k = 2``)."""
    out = {}
    if not pf.has("values"):
        return out
    for item in _split_top(pf.text("values"), ","):
        if "=" not in item:
            raise ProblemError("values", f"expected name = number, got {item!r}", pf.line("values"))
        name, value = (p.strip() for p in item.split("=", 1))
        try:
            out[name] = eval_numeric(parse_expr(value))
        except (ParseError, SymApproxError) as exc:
            raise ProblemError("values", str(exc), pf.line("values")) from None
    return out


def _pair(pf: ProblemFile, key: str) -> tuple[Expr, Expr]:
    items = pf.expr_list(key)
    if len(items) != 2:
        raise ProblemError(key, "expected two comma-separated values", pf.line(key))
    return items[0], items[1]


def _condition(pf: ProblemFile, key: str, u: Unknown, text: str) -> tuple[Expr, Expr]:
    """``u(t0) = c`` into ``(t0, c)``."""
    if "=" not in text:
        raise ProblemError(key, f"expected {u.name}(point) = value", pf.line(key))
    lhs, rhs = text.split("=", 1)
    try:
        left, right = parse_expr(lhs), parse_expr(rhs)
    except ParseError as exc:
        raise ProblemError(key, str(exc), pf.line(key)) from None
    if not (isinstance(left, Unknown) and left.name == u.name and not any(left.derivs)):
        raise ProblemError(key, f"left side must be {u.name}(point)", pf.line(key))
    return left.args[0], right


def _boundary(pf: ProblemFile, u: Unknown, domain: tuple[Expr, Expr]) -> tuple[Expr, Expr]:
    if not pf.has("boundary"):
        return ZERO, ZERO
    conds = [_condition(pf, "boundary", u, c) for c in _split_top(pf.text("boundary"), ",")]
    values = dict(conds)
    if set(values) != set(domain):
        raise ProblemError("boundary", "conditions must be given at both domain ends",
                           pf.line("boundary"))
    return values[domain[0]], values[domain[1]]


def _domain(pf: ProblemFile) -> tuple[Expr, Expr]:
    return _pair(pf, "domain") if pf.has("domain") else (Num(0), Num(1))


def _basis(pf: ProblemFile, domain, var: Symbol):
    from .galerkin import make_basis
    kind = pf.text("basis", "sine")
    n = pf.integer("basis_n", 3)
    try:
        return make_basis(kind, n, domain, var)
    except ValueError as exc:
        raise ProblemError("basis", str(exc), pf.line("basis")) from None


def _linear_parts(residual: Expr, u: Unknown, domain) -> tuple[tuple[Expr, Expr, Expr], Expr]:
    """``residual = c2 u'' + c1 u' + c0 u - f``; returns ``((c0, c1, c2), f)``."""
    from .newton import BvpProblem, quasilinearize
    p = BvpProblem(residual, u, domain, (ZERO, ZERO), ZERO)
    lb = quasilinearize(p, ZERO)
    x = u.args[0]
    rebuilt = add(*(mul(c, Unknown(u.name, (x,), (k,))) for k, c in enumerate(lb.coeffs)),
                  neg(lb.rhs))
    if simplify(add(residual, neg(rebuilt))) != ZERO:
        raise SymApproxError("the equation is not linear in the unknown")
    return lb.coeffs, lb.rhs


def _second_derivative_form(residual: Expr, u: Unknown) -> Expr:
    """Solve ``residual = 0`` for ``u''`` (used by the finite-difference reference)."""
    from .calculus import diff
    x = u.args[0]
    slot = fresh_symbol("upp")
    flat = substitute_unknown_derivative(residual, u.name, x, 2, slot)
    c2 = simplify(diff(flat, slot))
    if c2 == ZERO or slot in free_symbols(c2):
        raise SymApproxError("equation is not linear in the second derivative")
    rest = substitute(flat, {slot: ZERO})
    return simplify(mul(neg(rest), power(c2, -1)))


def substitute_unknown_derivative(e: Expr, name: str, x: Symbol, order: int, slot: Symbol) -> Expr:
    target = Unknown(name, (x,), (order,))

    def rep(n: Expr) -> Expr:
        if n == target:
            return slot
        return n.rebuild(rep) if n.children() else n

    return rep(e)


def _first_derivative_form(eq: Expr, u: Unknown) -> Expr:
    from .calculus import diff
    t = u.args[0]
    slot = fresh_symbol("up")
    flat = substitute_unknown_derivative(eq, u.name, t, 1, slot)
    cp = simplify(diff(flat, slot))
    if cp == ZERO or slot in free_symbols(cp):
        raise SymApproxError("equation is not linear in the derivative")
    return simplify(mul(neg(substitute(flat, {slot: ZERO})), power(cp, -1)))


# ---------------------------------------------------------------------------
# references

def _rk4_reference(rhs: Expr, u: Unknown, t0: float, u0: float, bindings: dict):
    from .numvalid import rk4_ivp

    def ref(points: list[float]) -> list[float]:
        hi = max(points)
        if min(points) < t0:
            raise SymApproxError("sample points must not precede the initial time")
        steps = max(1000, 100 * len(points))
        traj = rk4_ivp(rhs, u0, (t0, hi), steps, u.args[0], Symbol(u.name), bindings)
        ts, ys = zip(*traj)
        return list(np.interp(points, ts, ys))

    return ref


def _fd_reference(g: Expr, u: Unknown, domain, boundary, bindings: dict):
    from .numvalid import fd_bvp

    def ref(points: list[float]) -> list[float]:
        lo, hi = (eval_numeric(d) for d in domain)
        bc = tuple(eval_numeric(substitute(b, _symbols(bindings))) for b in boundary)
        xs, us = fd_bvp(g, u.args[0], u.name, (lo, hi), bc, 400, bindings)
        return list(np.interp(points, xs, us))

    return ref


def _symbols(bindings: dict) -> dict:
    return {Symbol(k): Num(v) if isinstance(v, int) else as_expr(_fraction(v))
            for k, v in bindings.items()}


def _fraction(v: float):
    from fractions import Fraction
    return Fraction(v).limit_denominator(10 ** 12)


# ---------------------------------------------------------------------------
# methods

def _operator(pf: ProblemFile, u: Expr, eq_text: str):
    from .iterate import OperatorDef
    if "=" not in eq_text:
        raise ProblemError("equation", "expected unknown = body", pf.line("equation"))
    lhs, rhs = eq_text.split("=", 1)
    try:
        left, body = parse_expr(lhs), parse_expr(rhs)
    except ParseError as exc:
        raise ProblemError("equation", str(exc), pf.line("equation")) from None
    if left != u:
        raise ProblemError("equation", f"left side must be the unknown {render(u)}",
                           pf.line("equation"))
    if isinstance(u, Symbol):
        return OperatorDef("f", u, None, body)
    x = u.args[0]
    return OperatorDef("operator", Unknown(u.name, (Wild("_"),)), x, body)


def run_fixedpoint(pf: ProblemFile, opts) -> Outcome:
    from .iterate import nest_list
    u = _unknown(pf)
    op = _operator(pf, u, pf.text("equation"))
    _check_equation(pf, op.body, u)
    x0 = pf.expr("x0", 0) if not pf.has("initial") else pf.expr("initial")
    n = pf.integer("iterations", 1)
    seq = nest_list(op, x0, n, opts.allow_held)
    result = seq[-1]
    var = u.args[0] if isinstance(u, Unknown) else None
    return Outcome(lambda show: [show(result)], result, result if var is not None else None, var)


def run_steffensen(pf: ProblemFile, opts) -> Outcome:
    from .expr import compile_numeric
    from .iterate import steffensen
    u = _unknown(pf)
    op = _operator(pf, u, pf.text("equation"))
    _check_equation(pf, op.body, u)
    n = pf.integer("iterations", 0)
    x0 = pf.expr("x0", 0)
    if pf.text("numeric", "no").lower() in ("yes", "true", "1"):
        if not isinstance(u, Symbol):
            raise ProblemError("numeric", "numeric Steffensen needs a scalar unknown",
                               pf.line("numeric"))
        f = compile_numeric(op.body, [u])
        value = steffensen(f, float(eval_numeric(x0)), n)
        return Outcome(lambda show: [f"{value:.12g}"], value)
    result = steffensen(op, x0, n, opts.allow_held)
    return Outcome(lambda show: [show(result)], result)


def run_newton(pf: ProblemFile, opts) -> Outcome:
    from .newton import AlgebraicSystem, newton_algebraic
    names = pf.expr_list("unknown")
    if not all(isinstance(v, Symbol) for v in names):
        raise ProblemError("unknown", "expected a comma list of symbols", pf.line("unknown"))
    eqs = pf._wrap("equation", lambda s: [parse_equation(p) for p in _split_top(s, ";")])
    x0 = pf.expr_list("x0")
    if not (len(eqs) == len(names) == len(x0)):
        raise ProblemError("x0", f"need {len(names)} equations and starting values, got "
                                 f"{len(eqs)} and {len(x0)}", pf.line("x0"))
    for e in eqs:
        if pf.has("symbols"):
            _check_equation(pf, add(e, *names), names[0], set(names))
    sol, _ = newton_algebraic(AlgebraicSystem(eqs, names, x0), pf.integer("iterations", 1))
    return Outcome(lambda show: [", ".join(_assignment(v.name, sol[v], show) for v in names)],
                   sol)


def run_newton_bvp(pf: ProblemFile, opts) -> Outcome:
    from .newton import BvpProblem, newton_functional
    u = _unknown(pf)
    if not isinstance(u, Unknown):
        raise ProblemError("unknown", "expected an application like u(x)", pf.line("unknown"))
    residual = pf.equation()
    _check_equation(pf, residual, u)
    domain = _domain(pf)
    boundary = _boundary(pf, u, domain)
    u0 = pf.expr("u0") if pf.has("u0") else None
    problem = BvpProblem(residual, u, domain, boundary, u0)
    backend_name = pf.text("backend", "closed_form")
    if backend_name in ("closed_form", "closed-form"):
        backend = "closed_form"
    elif backend_name == "galerkin":
        backend = _basis(pf, domain, u.args[0])
    else:
        raise ProblemError("backend", "expected closed_form or galerkin", pf.line("backend"))
    values = _values(pf)
    if values and backend != "closed_form":
        problem = BvpProblem(substitute(residual, _symbols(values)), u, domain,
                             tuple(substitute(b, _symbols(values)) for b in boundary),
                             None if u0 is None else substitute(u0, _symbols(values)))
    result, _ = newton_functional(problem, pf.integer("iterations", 1), backend, bindings=values)
    ref = None
    if opts.reference == "fd":
        ref = _fd_reference(_second_derivative_form(residual, u), u, domain, boundary, values)
    return Outcome(lambda show: [show(result)], result, result, u.args[0], ref)


def _perturb_inputs(pf: ProblemFile):
    u = _unknown(pf)
    param = pf.expr("param")
    if not isinstance(param, Symbol):
        raise ProblemError("param", "expected a symbol", pf.line("param"))
    eq = pf.equation()
    _check_equation(pf, eq, u, {param})
    return u, param, eq


def _perturb_series(pf: ProblemFile, order: int):
    from .perturb import perturb_solve_algebraic, perturb_solve_ode
    u, param, eq = _perturb_inputs(pf)
    if isinstance(u, Unknown):
        t0, c = _condition(pf, "initial", u, pf.text("initial"))
        return u, param, eq, perturb_solve_ode(eq, (t0, c), u, param, order), (t0, c)
    return u, param, eq, perturb_solve_algebraic(eq, u, pf.expr("x0"), param, order), None


def _ode_reference(pf: ProblemFile, opts, u, param, eq, ic):
    if opts.reference != "rk4":
        return None
    if not isinstance(u, Unknown):
        raise ProblemError("unknown", "an rk4 reference needs a differential equation",
                           pf.line("unknown"))
    values = _values(pf)
    rhs = _first_derivative_form(eq, u)
    t0, c = ic
    return _rk4_reference(rhs, u, float(eval_numeric(t0)),
                          float(eval_numeric(substitute(c, _symbols(values)))), values)


def run_perturb(pf: ProblemFile, opts) -> Outcome:
    u, param, eq, series, ic = _perturb_series(pf, pf.integer("order", 1))
    result = series.to_expr()
    var = u.args[0] if isinstance(u, Unknown) else None
    ref = _ode_reference(pf, opts, u, param, eq, ic)
    return Outcome(lambda show: [show(result)], series, result if var else None, var, ref)


def run_pade(pf: ProblemFile, opts) -> Outcome:
    from .perturb import pade
    from .series import taylor
    m, n = (int(eval_numeric(v)) for v in _pair(pf, "pade"))
    order = pf.integer("order", m + n)
    if pf.has("series"):
        param = pf.expr("param")
        series = taylor(pf.expr("series"), param, 0, order)
        u, eq, ic = None, None, None
    else:
        u, param, eq, series, ic = _perturb_series(pf, order)
    if m + n > series.order:
        raise ProblemError("pade", f"m + n must not exceed the order {series.order}",
                           pf.line("pade"))
    approx = pade(series, m, n)
    result = approx.simplified()
    var = u.args[0] if isinstance(u, Unknown) else None
    ref = _ode_reference(pf, opts, u, param, eq, ic) if u is not None else None
    return Outcome(lambda show: [show(result)], approx, result if var else None, var, ref)


def _galerkin_setup(pf: ProblemFile):
    u = _unknown(pf)
    if not isinstance(u, Unknown):
        raise ProblemError("unknown", "expected an application like u(x)", pf.line("unknown"))
    domain = _domain(pf)
    return u, u.args[0], domain, _basis(pf, domain, u.args[0])


def _explicit_forms(pf: ProblemFile, x: Symbol, domain):
    from .galerkin import InnerProductSpec
    if not pf.has("a_form"):
        return None
    return InnerProductSpec(pf.expr("a_form"), pf.expr("l_form") if pf.has("l_form") else None,
                            pf.expr("m_form") if pf.has("m_form") else None, domain, x)


def run_galerkin_elliptic(pf: ProblemFile, opts) -> Outcome:
    from .galerkin import galerkin_elliptic, second_order_form
    from .newton import LinearBvp, galerkin_linear_bvp
    u, x, domain, basis = _galerkin_setup(pf)
    ip = _explicit_forms(pf, x, domain)
    ref = None
    if ip is not None:
        sol = galerkin_elliptic(ip, basis)
        result, coeffs = sol.approximant, sol.coeffs
    else:
        residual = pf.equation()
        _check_equation(pf, residual, u)
        coeffs3, f = _linear_parts(residual, u, domain)
        boundary = _boundary(pf, u, domain)
        if boundary == (ZERO, ZERO):
            sol = galerkin_elliptic(second_order_form(coeffs3, f, domain, x), basis)
            result, coeffs = sol.approximant, sol.coeffs
        else:
            lb = LinearBvp(residual, Unknown(u.name, (x,)), coeffs3, f, domain, boundary)
            result, coeffs = galerkin_linear_bvp(lb, basis), None
        if opts.reference == "fd":
            ref = _fd_reference(_second_derivative_form(residual, u), u, domain, boundary,
                                _values(pf))

    def lines(show):
        out = [show(result)]
        if coeffs is not None:
            out += [_assignment(f"c{i + 1}", c, show) for i, c in enumerate(coeffs)]
        return out

    return Outcome(lines, result, result, x, ref)


def _spectral_forms(pf: ProblemFile, u: Unknown, x: Symbol, domain, lam: Symbol):
    from .calculus import diff
    from .galerkin import second_order_form
    ip = _explicit_forms(pf, x, domain)
    if ip is not None:
        if ip.m_form is None:
            raise ProblemError("m_form", "missing or empty", pf.line("m_form"))
        return ip
    residual = pf.equation()
    _check_equation(pf, residual, u, {lam})
    (c0, c1, c2), f = _linear_parts(residual, u, domain)
    if f != ZERO:
        raise ProblemError("equation", "an eigenvalue problem must be homogeneous",
                           pf.line("equation"))
    if lam in free_symbols(c1) | free_symbols(c2):
        raise ProblemError("equation", f"{lam.name} may only multiply the unknown itself",
                           pf.line("equation"))
    mass = simplify(neg(diff(c0, lam)))
    if mass == ZERO or lam in free_symbols(mass):
        raise ProblemError("equation", f"expected a term {lam.name}*{u.name}({x.name})",
                           pf.line("equation"))
    a0 = simplify(substitute(c0, {lam: ZERO}))
    return second_order_form((a0, c1, c2), 0, domain, x, mass)


def run_galerkin_spectral(pf: ProblemFile, opts) -> Outcome:
    from .galerkin import galerkin_spectral
    u, x, domain, basis = _galerkin_setup(pf)
    lam = pf.expr("eigenvalue", Symbol("lambda"))
    ip = _spectral_forms(pf, u, x, domain, lam)
    res = galerkin_spectral(ip, basis, lam)

    def lines(show):
        out = [_assignment("char_poly", res.char_poly, show)]
        if res.eigenvalues is not None:
            out.append(f"{lam.name} = {_vector(res.eigenvalues, show)}")
        elif res.eigenpairs:
            out.append(f"{lam.name} ~ [" + ", ".join(f"{v:.12g}" for v, _ in res.eigenpairs) + "]")
        return out

    return Outcome(lines, res.char_poly)


def run_galerkin_evolution(pf: ProblemFile, opts) -> Outcome:
    from .galerkin import galerkin_evolution, second_order_form
    u, x, domain, basis = _galerkin_setup(pf)
    ip = _explicit_forms(pf, x, domain)
    if ip is None:
        rate = pf.equation()
        _check_equation(pf, rate, u)
        (c0, c1, c2), g = _linear_parts(neg(rate), u, domain)
        ip = second_order_form((c0, c1, c2), g, domain, x)
    system = galerkin_evolution(ip, basis)
    rates = system.rates()
    c0 = system.project(pf.expr("initial")) if pf.has("initial") else None
    sample = None
    t_end = pf.expr("t_end") if pf.has("t_end") else None
    if c0 is not None and t_end is not None:
        traj = system.simulate(c0, (0.0, float(eval_numeric(t_end))), pf.integer("steps", 1000))
        final = [_fraction(v) for v in traj[-1][1]]
        sample = system.approximant([Num(v) for v in final])

    def lines(show):
        out = ["M = " + _matrix(system.mass, show),
               "K = " + _matrix(system.stiffness, show),
               "rates = " + _matrix(rates, show)]
        if any(b != ZERO for b in system.load):
            out.append("b = " + _vector(system.load, show))
        if c0 is not None:
            out.append("c0 = " + _vector(c0, show))
        return out

    return Outcome(lines, rates, sample, x if sample is not None else None)


def run_frechet(pf: ProblemFile, opts) -> Outcome:
    from .frechet import frechet_derivative
    u = _unknown(pf)
    if not isinstance(u, Unknown):
        raise ProblemError("unknown", "expected an application like u(x)", pf.line("unknown"))
    functional = pf.equation()
    _check_equation(pf, functional, u)
    direction = pf.expr("direction") if pf.has("direction") else Unknown("v", u.args)
    result = frechet_derivative(functional, u, direction)
    return Outcome(lambda show: [show(result)], result)


RUNNERS: dict[str, Callable[[ProblemFile, argparse.Namespace], Outcome]] = {
    "fixedpoint": run_fixedpoint,
    "steffensen": run_steffensen,
    "newton": run_newton,
    "newton-bvp": run_newton_bvp,
    "perturb": run_perturb,
    "pade": run_pade,
    "galerkin-elliptic": run_galerkin_elliptic,
    "galerkin-spectral": run_galerkin_spectral,
    "galerkin-evolution": run_galerkin_evolution,
    "frechet": run_frechet,
}


# ---------------------------------------------------------------------------
# driver

def _parse_samples(text: str) -> tuple[float, float, int]:
    try:
        lo, hi, n = text.split(":")
        return float(eval_numeric(parse_expr(lo))), float(eval_numeric(parse_expr(hi))), int(n)
    except (ValueError, SymApproxError):
        raise ProblemError("--samples", f"expected lo:hi:n, got {text!r}") from None


def _samples_csv(outcome: Outcome, window: str, values: dict) -> str:
    from .numvalid import grid, sample, to_csv
    if outcome.sample_expr is None or outcome.var is None:
        raise ProblemError("--samples", "this method has no sampled result")
    lo, hi, n = _parse_samples(window)
    points = grid(lo, hi, n)
    rows = sample(outcome.sample_expr, outcome.var, points, values)
    header = [outcome.var.name, "approx"]
    table = [[p, v] for p, v in rows]
    if outcome.reference is not None:
        header.append("reference")
        for row, r in zip(table, outcome.reference(points)):
            row.append(r)
    return to_csv(table, header)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="symapprox", description=__doc__.splitlines()[0])
    ap.add_argument("problem", help="problem file")
    ap.add_argument("--format", choices=("plain", "latex", "csv"), default="plain")
    ap.add_argument("--samples", metavar="LO:HI:N", help="also emit sampled values as CSV")
    ap.add_argument("--reference", choices=("rk4", "fd"), help="add a numeric reference column")
    ap.add_argument("--report", metavar="PATH", help="write the solve report as JSON")
    ap.add_argument("--allow-held", action="store_true",
                    help="accept results containing unevaluated integrals")
    ap.add_argument("--max-passes", type=int, metavar="N", help="rewrite budget per fixpoint")
    return ap


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    opts = build_parser().parse_args(argv)
    saved_passes = expr_mod.DEFAULT_MAX_PASSES
    report = SolveReport()
    try:
        if opts.max_passes is not None:
            if opts.max_passes < 1:
                raise ProblemError("--max-passes", "must be >= 1")
            expr_mod.DEFAULT_MAX_PASSES = opts.max_passes
        try:
            with open(opts.problem, encoding="utf-8") as fh:
                pf = ProblemFile.parse(fh.read())
        except OSError as exc:
            raise ProblemError("problem", str(exc)) from None
        method = pf.text("method")
        if method not in RUNNERS:
            raise ProblemError("method", f"unknown method {method!r}; expected one of "
                                         f"{', '.join(METHODS)}", pf.line("method"))
        if opts.format == "csv" and not opts.samples:
            raise ProblemError("--format", "csv output needs --samples")
        with recording(report):
            outcome = RUNNERS[method](pf, opts)
            report.result = outcome.result
            held = [n for n in walk(outcome.sample_expr or _as_expr_or_zero(outcome.result))
                    if isinstance(n, Integral)]
            if held and report.unresolved_integrals and not opts.allow_held:
                raise UnresolvedIntegral(f"result contains unevaluated integral {render(held[0])}")
            csv = _samples_csv(outcome, opts.samples, _values(pf)) if opts.samples else None
        if opts.format == "csv":
            stdout.write(csv)
        else:
            show = (lambda e: render(e, "latex")) if opts.format == "latex" else render
            stdout.write("\n".join(outcome.lines(show)) + "\n")
            if csv:
                stdout.write("\n" + csv)
        code = EXIT_OK
    except ProblemError as exc:
        stderr.write(f"error: {exc}\n")
        code = EXIT_INPUT
    except ParseError as exc:
        stderr.write(f"error: {exc}\n")
        code = EXIT_INPUT
    except (UnresolvedIntegral, UnresolvedInnerProduct) as exc:
        stderr.write(f"unresolved: {type(exc).__name__}: {exc}\n")
        code = EXIT_UNRESOLVED
    except SymApproxError as exc:
        stderr.write(f"failed: {type(exc).__name__}: {exc}\n")
        code = EXIT_METHOD
    finally:
        expr_mod.DEFAULT_MAX_PASSES = saved_passes
    if opts.report:
        with open(opts.report, "w", encoding="utf-8") as fh:
            json.dump({"exit_code": code, **report.to_dict()}, fh, indent=2)
            fh.write("\n")
    return code


def _as_expr_or_zero(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if hasattr(value, "to_expr"):
        return value.to_expr()
    return ZERO


def main() -> None:
    sys.exit(run())

