"""Numeric reference solvers used as independent oracles.

Nothing here touches the symbolic solvers: expressions are only compiled to
floating-point functions and evaluated.
"""
from __future__ import annotations

from collections.abc import Callable, Mapping, Sequence

import numpy as np
from scipy.linalg import solve_banded

from .errors import EvaluationError, NoConvergence
from .expr import (
    Expr,
    Integral,
    Num,
    Symbol,
    Unknown,
    as_expr,
    compile_numeric,
    eval_numeric,
    free_symbols,
    fresh_symbol,
    substitute,
    walk,
)


def _bind_names(bindings: Mapping | None) -> dict[str, float]:
    return {(k.name if isinstance(k, Symbol) else str(k)): float(v) for k, v in (bindings or {}).items()}


def _compile(e: Expr, variables: Sequence[Symbol], bindings: Mapping | None) -> Callable[..., float]:
    """Compile ``e`` as a function of ``variables`` with remaining symbols fixed by ``bindings``."""
    fixed = _bind_names(bindings)
    e = substitute(as_expr(e), {Symbol(k): Num(v) for k, v in fixed.items()
                                if Symbol(k) not in variables}) if fixed else as_expr(e)
    return compile_numeric(e, variables)


def _unknowns_to_symbols(e: Expr, name: str, x: Symbol, slots: Sequence[Symbol]) -> Expr:
    """Replace ``u(x), u'(x), ...`` by the plain symbols in ``slots``."""
    mapping = {}
    for n in walk(e):
        if isinstance(n, Unknown) and n.name == name:
            if n.args != (x,) or n.order >= len(slots):
                raise EvaluationError(f"unsupported occurrence {n} in a reference problem")
            mapping[n] = slots[n.order]
    if not mapping:
        return e

    def rep(n: Expr) -> Expr:
        if n in mapping:
            return mapping[n]
        return n.rebuild(rep) if n.children() else n

    return rep(e)


# ---------------------------------------------------------------------------
# Runge-Kutta

def rk4_system(rhs: Sequence, y0: Sequence[float], t_span: tuple[float, float], steps: int,
               t: Symbol, ys: Sequence[Symbol], bindings: Mapping | None = None
               ) -> list[tuple[float, list[float]]]:
    """Classical fixed-step RK4 for ``y' = rhs(t, y)``; returns ``[(t_i, y_i), ...]``."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    fs = [_compile(r, [t, *ys], bindings) for r in rhs]
    t0, t1 = map(float, t_span)
    h = (t1 - t0) / steps
    y = [float(v) for v in y0]
    out = [(t0, list(y))]

    def f(tt, yy):
        return [g(tt, *yy) for g in fs]

    for i in range(steps):
        tt = t0 + i * h
        try:
            k1 = f(tt, y)
            k2 = f(tt + h / 2, [a + h / 2 * b for a, b in zip(y, k1)])
            k3 = f(tt + h / 2, [a + h / 2 * b for a, b in zip(y, k2)])
            k4 = f(tt + h, [a + h * b for a, b in zip(y, k3)])
        except EvaluationError as exc:
            raise EvaluationError(f"step {i}: {exc}") from None
        y = [a + h / 6 * (p + 2 * q + 2 * r + s) for a, p, q, r, s in zip(y, k1, k2, k3, k4)]
        out.append((t0 + (i + 1) * h, list(y)))
    return out


def rk4_ivp(rhs, u0: float, t_span: tuple[float, float], steps: int,
            t: Symbol = Symbol("t"), u: Symbol | str = Symbol("u"),
            bindings: Mapping | None = None) -> list[tuple[float, float]]:
    """RK4 for a scalar ``u' = rhs(t, u)``.

    ``rhs`` may use the plain symbol ``u`` or the unknown ``u(t)``.
    """
    u = Symbol(u) if isinstance(u, str) else u
    rhs = _unknowns_to_symbols(as_expr(rhs), u.name, t, [u])
    return [(tt, yy[0]) for tt, yy in rk4_system([rhs], [u0], t_span, steps, t, [u], bindings)]


# ---------------------------------------------------------------------------
# finite differences for two-point boundary value problems

def fd_bvp(g, x: Symbol, unknown: str, domain: tuple[float, float],
           boundary: tuple[float, float], grid_n: int, bindings: Mapping | None = None,
           tol: float = 1e-10, max_iter: int = 50) -> tuple[np.ndarray, np.ndarray]:
    """Solve ``u'' = g(x, u, u')`` with Dirichlet data by central differences.

    ``g`` is written in terms of ``u(x)`` and ``u'(x)`` (or ``D(u(x), x)``).
    The discrete system is solved by damped Newton with a finite-difference
    Jacobian.  Returns the grid nodes and nodal values.
    """
    us, ps = fresh_symbol("u"), fresh_symbol("p")
    expr = _unknowns_to_symbols(as_expr(g), unknown, x, [us, ps])
    gf = _compile(expr, [x, us, ps], bindings)
    lo, hi = map(float, domain)
    n = int(grid_n)
    if n < 2:
        raise ValueError("grid_n must be >= 2")
    xs = np.linspace(lo, hi, n + 1)
    h = (hi - lo) / n
    ua, ub = map(float, boundary)
    u = ua + (ub - ua) * (xs - lo) / (hi - lo)
    xi = xs[1:-1]
    gv = np.vectorize(gf, otypes=[float])

    def residual(v: np.ndarray) -> np.ndarray:
        full = np.concatenate(([ua], v, [ub]))
        p = (full[2:] - full[:-2]) / (2 * h)
        return (full[2:] - 2 * full[1:-1] + full[:-2]) / h ** 2 - gv(xi, full[1:-1], p)

    v = u[1:-1].copy()
    r = residual(v)
    for _ in range(max_iter):
        full = np.concatenate(([ua], v, [ub]))
        p = (full[2:] - full[:-2]) / (2 * h)
        du = 1e-7 * (1 + np.abs(full[1:-1]))
        dp = 1e-7 * (1 + np.abs(p))
        gu = (gv(xi, full[1:-1] + du, p) - gv(xi, full[1:-1] - du, p)) / (2 * du)
        gp = (gv(xi, full[1:-1], p + dp) - gv(xi, full[1:-1], p - dp)) / (2 * dp)
        m = len(v)
        ab = np.zeros((3, m))
        ab[1] = -2 / h ** 2 - gu
        ab[0, 1:] = (1 / h ** 2 - gp / (2 * h))[:-1]
        ab[2, :-1] = (1 / h ** 2 + gp / (2 * h))[1:]
        step = solve_banded((1, 1), ab, -r)
        norm0 = np.max(np.abs(r))
        lam = 1.0
        while True:
            trial = v + lam * step
            r_trial = residual(trial)
            if np.max(np.abs(r_trial)) <= (1 - lam / 4) * norm0 or lam < 1e-4:
                break
            lam /= 2
        v, r = trial, r_trial
        if np.max(np.abs(lam * step)) <= tol * (1 + np.max(np.abs(v))):
            return xs, np.concatenate(([ua], v, [ub]))
    raise NoConvergence(f"finite-difference Newton did not converge in {max_iter} iterations")


# ---------------------------------------------------------------------------
# quadrature

def _simpson(f, a, fa, b, fb, m, fm, whole, tol, depth):
    lm, rm = (a + m) / 2, (m + b) / 2
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6 * (fa + 4 * flm + fm)
    right = (b - m) / 6 * (fm + 4 * frm + fb)
    delta = left + right - whole
    if depth <= 0 or abs(delta) <= 15 * tol:
        return left + right + delta / 15
    return (_simpson(f, a, fa, m, fm, lm, flm, left, tol / 2, depth - 1)
            + _simpson(f, m, fm, b, fb, rm, frm, right, tol / 2, depth - 1))


def adaptive_simpson(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10,
                     max_depth: int = 50) -> float:
    if lo == hi:
        return 0.0
    # split into a few panels first so that oscillatory integrands are not sampled at zeros only
    panels = 8
    edges = [lo + (hi - lo) * i / panels for i in range(panels + 1)]
    total = 0.0
    for a, b in zip(edges, edges[1:]):
        m = (a + b) / 2
        fa, fm, fb = f(a), f(m), f(b)
        whole = (b - a) / 6 * (fa + 4 * fm + fb)
        total += _simpson(f, a, fa, b, fb, m, fm, whole, tol / panels, max_depth)
    return total


def quad(e, var: Symbol, lo: float, hi: float, tol: float = 1e-10,
         bindings: Mapping | None = None) -> float:
    """Adaptive Simpson quadrature of the expression ``e`` over ``var``."""
    e = as_expr(e)
    if any(isinstance(n, Integral) for n in walk(e)):
        env = _bind_names(bindings)
        return adaptive_simpson(lambda v: eval_with_quadrature(e, {**env, var.name: v}, tol),
                                float(lo), float(hi), tol)
    f = _compile(e, [var], bindings)
    return adaptive_simpson(f, float(lo), float(hi), tol)


def eval_with_quadrature(e: Expr, bindings: Mapping | None = None, tol: float = 1e-10) -> float:
    """Evaluate ``e``, computing any held integrals numerically."""
    env = _bind_names(bindings)
    outer = _outermost_integrals(e)
    if not outer:
        return eval_numeric(e, env)
    values = {}
    for node in outer:
        lo = eval_with_quadrature(node.lo, env, tol)
        hi = eval_with_quadrature(node.hi, env, tol)
        values[node] = quad(node.integrand, node.var, lo, hi, tol, env)
    names = {node: fresh_symbol("I") for node in outer}

    def rep(n: Expr) -> Expr:
        if n in names:
            return names[n]
        return n.rebuild(rep) if n.children() else n

    env.update({names[n].name: v for n, v in values.items()})
    return eval_numeric(rep(e), env)


def _outermost_integrals(e: Expr) -> list[Integral]:
    if isinstance(e, Integral):
        return [e]
    out: list[Integral] = []
    for c in e.children():
        for n in _outermost_integrals(c):
            if n not in out:
                out.append(n)
    return out


# ---------------------------------------------------------------------------
# sampling

def sample(e, var: Symbol, points: Sequence[float], bindings: Mapping | None = None
           ) -> list[tuple[float, float]]:
    """``[(p, e(p)), ...]`` for each point."""
    e = as_expr(e)
    extra = free_symbols(e) - {var, Symbol("pi")} - {Symbol(k) for k in _bind_names(bindings)}
    if extra:
        raise EvaluationError(f"unbound symbols {sorted(s.name for s in extra)}")
    if any(isinstance(n, Integral) for n in walk(e)):
        env = _bind_names(bindings)
        return [(float(p), eval_with_quadrature(e, {**env, var.name: p})) for p in points]
    f = _compile(e, [var], bindings)
    return [(float(p), f(float(p))) for p in points]


def grid(lo: float, hi: float, n: int) -> list[float]:
    """``n`` equally spaced points including both ends."""
    if n < 2:
        return [float(lo)]
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def format_number(v: float) -> str:
    return f"{v:.12g}"


def to_csv(rows: Sequence[Sequence[float]], header: Sequence[str]) -> str:
    lines = [",".join(header)]
    lines += [",".join(format_number(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def sup_distance(a: Sequence[float], b: Sequence[float]) -> float:
    return max((abs(x - y) for x, y in zip(a, b)), default=0.0)


def bisect_root(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12) -> float:
    """Plain bisection; ``f(lo)`` and ``f(hi)`` must differ in sign."""
    flo = f(lo)
    if flo == 0:
        return lo
    if flo * f(hi) > 0:
        raise ValueError("bisection needs a sign change")
    while hi - lo > tol:
        mid = (lo + hi) / 2
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return (lo + hi) / 2

