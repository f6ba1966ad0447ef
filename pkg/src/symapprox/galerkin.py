"""Galerkin projection for one-dimensional elliptic, spectral and evolution problems.

The weak form is supplied by the caller as an :class:`InnerProductSpec`; the
same assembly code serves exact (trigonometric, polynomial) and piecewise
(hat function) bases, the choice being carried entirely by the forms.
"""
from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from . import poly as P
from .calculus import resolve_integrals
from .errors import UnresolvedInnerProduct
from .expr import (
    PI,
    ZERO,
    Expr,
    Integral,
    Num,
    Symbol,
    Unknown,
    Wild,
    add,
    fresh_symbol,
    as_expr,
    collect_powers,
    eval_numeric,
    integral,
    mul,
    neg,
    piecewise,
    power,
    sin,
    sqrt,
    substitute,
    walk,
)
from .linalg import char_poly, linear_solve_symbolic
from .ratfunc import RationalForm, is_numeric_constant, rational_form, simplify

Form = Callable[..., Expr] | Expr


@dataclass
class InnerProductSpec:
    """Bilinear form ``a(u, v)``, linear form ``l(v)`` and optional mass form ``m(u, v)``.

    Each form is either a Python callable taking basis expressions, or an
    expression template in the placeholders ``u(x)`` and ``v(x)`` (names
    configurable), typically an ``Int(...)`` over the domain.
    """

    a_form: Form
    l_form: Form | None = None
    m_form: Form | None = None
    domain: tuple = (0, 1)
    var: Symbol = field(default_factory=lambda: Symbol("x"))
    trial: str = "u"
    test: str = "v"

    def _apply(self, form: Form, *args: Expr) -> Expr:
        if callable(form) and not isinstance(form, Expr):
            raw = form(*args)
        else:
            names = (self.trial, self.test) if len(args) == 2 else (self.test,)
            bindings = {Unknown(n, (Wild("_"),)): substitute(a, {self.var: Wild("_")})
                        for n, a in zip(names, args)}
            raw = substitute(as_expr(form), bindings)
        return resolve_integrals(as_expr(raw))

    def evaluate(self, which: str, *args: Expr, label: str = "") -> Expr:
        form = {"a": self.a_form, "l": self.l_form, "m": self.m_form}[which]
        if form is None:
            raise ValueError(f"no {which}-form supplied")
        value = self._apply(form, *args)
        if any(isinstance(n, Integral) for n in walk(value)):
            raise UnresolvedInnerProduct(f"{which}-form could not be evaluated for {label or args}")
        return simplify(value)


@dataclass(frozen=True)
class Basis:
    functions: tuple[Expr, ...]
    kind: str
    var: Symbol
    domain: tuple

    def __len__(self) -> int:
        return len(self.functions)

    def __iter__(self):
        return iter(self.functions)


def _domain(domain) -> tuple[Expr, Expr]:
    lo, hi = (as_expr(d) for d in domain)
    return lo, hi


def sine_basis(n: int, domain=(0, 1), var: Symbol = Symbol("x")) -> Basis:
    """``sin(i*pi*(x - lo)/(hi - lo))`` for ``i = 1..n``."""
    lo, hi = _domain(domain)
    s = mul(add(var, neg(lo)), power(add(hi, neg(lo)), -1))
    return Basis(tuple(sin(mul(Num(i), PI, s)) for i in range(1, n + 1)), "sine", var, (lo, hi))


def poly_basis(n: int, domain=(0, 1), var: Symbol = Symbol("x")) -> Basis:
    """``(x - lo)^i * (hi - x)`` for ``i = 1..n``."""
    lo, hi = _domain(domain)
    return Basis(tuple(mul(power(add(var, neg(lo)), i), add(hi, neg(var))) for i in range(1, n + 1)),
                 "poly", var, (lo, hi))


def hat_basis(n: int, domain=(0, 1), var: Symbol = Symbol("x")) -> Basis:
    """Piecewise-linear hats on ``n`` equally spaced interior nodes, peak value 1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    lo, hi = _domain(domain)
    if not (isinstance(lo, Num) and isinstance(hi, Num)):
        raise ValueError("hat functions need a numeric domain")
    h = (hi.value - lo.value) / (n + 1)
    hats = []
    for i in range(1, n + 1):
        left, mid, right = lo.value + (i - 1) * h, lo.value + i * h, lo.value + (i + 1) * h
        up = mul(add(var, Num(-left)), Num(1 / h))
        down = mul(add(Num(right), neg(var)), Num(1 / h))
        hats.append(piecewise(var, [(Num(left), Num(mid), up), (Num(mid), Num(right), down)]))
    return Basis(tuple(hats), "hat", var, (lo, hi))


def make_basis(kind: str, n: int, domain=(0, 1), var: Symbol = Symbol("x")) -> Basis:
    builders = {"sine": sine_basis, "poly": poly_basis, "hat": hat_basis}
    if kind not in builders:
        raise ValueError(f"unknown basis kind {kind!r}; expected one of {sorted(builders)}")
    return builders[kind](n, domain, var)


def sturm_liouville(p, q, f, domain=(0, 1), var: Symbol = Symbol("x")) -> InnerProductSpec:
    """Weak form of ``-(p u')' + q u = f`` with homogeneous Dirichlet conditions."""
    lo, hi = _domain(domain)
    p, q, f = as_expr(p), as_expr(q), as_expr(f)
    u, v = Unknown("u", (var,)), Unknown("v", (var,))
    du, dv = Unknown("u", (var,), (1,)), Unknown("v", (var,), (1,))
    a = integral(add(mul(p, du, dv), mul(q, u, v)), var, lo, hi)
    m = integral(mul(u, v), var, lo, hi)
    ell = integral(mul(f, v), var, lo, hi)
    return InnerProductSpec(a, ell, m, (lo, hi), var)


def second_order_form(coeffs, rhs=0, domain=(0, 1), var: Symbol = Symbol("x"),
                      mass=1) -> InnerProductSpec:
    """Weak form of ``L u = rhs`` with ``L u = c2 u'' + c1 u' + c0 u``.

    ``coeffs`` is ``(c0, c1, c2)``.  The second derivative is moved onto the
    test function, so ``a(w, v) = Int((L w) v)`` for every ``v`` vanishing at
    both ends while only first derivatives of ``w`` appear.  The mass form is
    ``Int(mass * w * v)``.
    """
    from .calculus import diff, integrate
    c0, c1, c2 = (as_expr(c) for c in coeffs)
    rhs, mass = as_expr(rhs), as_expr(mass)
    lo, hi = _domain(domain)
    dc2 = simplify(diff(c2, var))

    def a_form(w, v):
        dw, dv = diff(w, var), diff(v, var)
        body = add(neg(mul(c2, dw, dv)), neg(mul(dc2, dw, v)), mul(c1, dw, v), mul(c0, w, v))
        return integrate(body, var, lo, hi)

    def l_form(v):
        return integrate(mul(rhs, v), var, lo, hi)

    def m_form(w, v):
        return integrate(mul(mass, w, v), var, lo, hi)

    return InnerProductSpec(a_form, l_form, m_form, (lo, hi), var)


# ---------------------------------------------------------------------------
# assembly and solves

def assemble(ip: InnerProductSpec, basis: Basis, which: str = "a") -> list[list[Expr]]:
    """``K[j][i] = form(w_i, w_j)``."""
    ws = basis.functions
    return [[ip.evaluate(which, wi, wj, label=f"(w{i + 1}, w{j + 1})") for i, wi in enumerate(ws)]
            for j, wj in enumerate(ws)]


def load_vector(ip: InnerProductSpec, basis: Basis) -> list[Expr]:
    return [ip.evaluate("l", w, label=f"w{j + 1}") for j, w in enumerate(basis.functions)]


@dataclass
class GalerkinSolution:
    approximant: Expr
    coeffs: list[Expr]
    stiffness: list[list[Expr]]
    load: list[Expr]

    def __iter__(self):
        return iter((self.approximant, self.coeffs))


def galerkin_elliptic(ip: InnerProductSpec, basis: Basis) -> GalerkinSolution:
    """Solve ``sum_i c_i a(w_i, w_j) = l(w_j)`` and return ``u_n = sum c_i w_i``."""
    K = assemble(ip, basis, "a")
    b = load_vector(ip, basis)
    c = linear_solve_symbolic(K, b)
    u = add(*(mul(ci, wi) for ci, wi in zip(c, basis.functions)))
    return GalerkinSolution(u, c, K, b)


def orthogonality_residuals(ip: InnerProductSpec, basis: Basis, sol: GalerkinSolution) -> list[Expr]:
    """``a(u_n, w_j) - l(w_j)`` for every basis function, computed from the assembled system."""
    return [simplify(add(*(mul(K_ji, ci) for K_ji, ci in zip(row, sol.coeffs)), neg(bj)))
            for row, bj in zip(sol.stiffness, sol.load)]


# ---------------------------------------------------------------------------
# spectral problems

@dataclass
class SpectralResult:
    char_poly: Expr
    lam: Symbol
    eigenvalues: list[Expr] | None
    eigenpairs: list[tuple[float, np.ndarray]] | None
    stiffness: list[list[Expr]]
    mass: list[list[Expr]]


def _is_diagonal(A: list[list[Expr]]) -> bool:
    return all(A[i][j] == ZERO for i in range(len(A)) for j in range(len(A)) if i != j)


def _exact_sqrt(e: Expr) -> Expr:
    rf = rational_form(e)
    if not rf.num:
        return ZERO
    prod = P.p_mul(rf.num, rf.den)
    root = P.p_sqrt(prod)
    if root is None:
        return sqrt(e)
    return simplify(RationalForm(root, rf.den, rf.ctx).to_expr())


def _exact_roots(cp: Expr, lam: Symbol, n: int) -> list[Expr] | None:
    c = collect_powers(cp, lam, n)
    if n == 1:
        return [simplify(mul(neg(c[0]), power(c[1], -1)))]
    if n == 2:
        a, b, cc = c[2], c[1], c[0]
        disc = simplify(add(mul(b, b), mul(Num(-4), a, cc)))
        r = _exact_sqrt(disc)
        inv = power(mul(2, a), -1)
        roots = [simplify(mul(add(neg(b), neg(r)), inv)), simplify(mul(add(neg(b), r), inv))]
        if all(is_numeric_constant(x) for x in roots):
            roots.sort(key=lambda x: eval_numeric(x))
        return roots
    return None


def _numeric(A: list[list[Expr]]) -> np.ndarray:
    return np.array([[eval_numeric(x) for x in row] for row in A], dtype=float)


def _poly_roots(coeffs: list[float], tol: float = 1e-10) -> list[float]:
    """Real roots of a polynomial (ascending coefficients) by recursive isolation and bisection."""
    while coeffs and coeffs[-1] == 0:
        coeffs = coeffs[:-1]
    deg = len(coeffs) - 1
    if deg < 1:
        return []

    def f(x):
        return sum(c * x ** k for k, c in enumerate(coeffs))

    bound = 1 + max(abs(c / coeffs[-1]) for c in coeffs[:-1])
    crit = _poly_roots([k * c for k, c in enumerate(coeffs)][1:], tol) if deg > 1 else []
    pts = [-bound] + [x for x in crit if -bound < x < bound] + [bound]
    roots = []
    for a, b in zip(pts, pts[1:]):
        fa, fb = f(a), f(b)
        if abs(fa) < 1e-14 * (1 + abs(coeffs[0])):
            if not roots or abs(roots[-1] - a) > tol:
                roots.append(a)
            continue
        if fa * fb < 0:
            lo, hi = a, b
            while hi - lo > tol * max(1.0, abs(lo)):
                mid = (lo + hi) / 2
                if (f(mid) < 0) == (fa < 0):
                    lo = mid
                else:
                    hi = mid
            roots.append((lo + hi) / 2)
    if abs(f(pts[-1])) < 1e-14 and (not roots or abs(roots[-1] - pts[-1]) > tol):
        roots.append(pts[-1])
    return roots


def galerkin_spectral(ip: InnerProductSpec, basis: Basis, lam: Symbol = Symbol("lambda")
                      ) -> SpectralResult:
    """Characteristic polynomial ``det(K - lam M)`` and its roots.

    Roots are exact for diagonal pencils and for degree at most two; numeric
    eigenpairs are added whenever all matrix entries are numbers.
    """
    K = assemble(ip, basis, "a")
    M = assemble(ip, basis, "m")
    n = len(K)
    cp = char_poly(K, M, lam)
    if _is_diagonal(K) and _is_diagonal(M):
        exact = [simplify(mul(K[i][i], power(M[i][i], -1))) for i in range(n)]
        if all(is_numeric_constant(x) for x in exact):
            exact.sort(key=lambda x: eval_numeric(x))
    else:
        exact = _exact_roots(cp, lam, n)
    pairs = None
    if all(is_numeric_constant(x) for row in K + M for x in row):
        Kn, Mn = _numeric(K), _numeric(M)
        coeffs = [eval_numeric(c) for c in collect_powers(cp, lam, n)]
        pairs = []
        for root in _poly_roots(coeffs):
            _, _, vh = np.linalg.svd(Kn - root * Mn)
            vec = vh[-1]
            pairs.append((root, vec / np.max(np.abs(vec)) * np.sign(vec[np.argmax(np.abs(vec))])))
    return SpectralResult(cp, lam, exact, pairs, K, M)


# ---------------------------------------------------------------------------
# evolution problems

@dataclass
class EvolutionSystem:
    """``M c'(t) = -K c(t) + b``."""

    mass: list[list[Expr]]
    stiffness: list[list[Expr]]
    load: list[Expr]
    basis: Basis
    ip: InnerProductSpec

    def rates(self) -> list[list[Expr]]:
        """``A = -M^{-1} K`` so that ``c' = A c + M^{-1} b``."""
        n = len(self.mass)
        cols = [linear_solve_symbolic(self.mass, [neg(self.stiffness[r][i]) for r in range(n)])
                for i in range(n)]
        return [[cols[i][r] for i in range(n)] for r in range(n)]

    def forcing(self) -> list[Expr]:
        return linear_solve_symbolic(self.mass, self.load)

    def project(self, u0) -> list[Expr]:
        """Coefficients of the mass-orthogonal projection of ``u0`` onto the basis."""
        u0 = as_expr(u0)
        rhs = [self.ip.evaluate("m", u0, w, label=f"(u0, w{j + 1})")
               for j, w in enumerate(self.basis.functions)]
        return linear_solve_symbolic(self.mass, rhs)

    def approximant(self, coeffs: Sequence) -> Expr:
        return add(*(mul(as_expr(c), w) for c, w in zip(coeffs, self.basis.functions)))

    def simulate(self, c0: Sequence, t_span: tuple[float, float], steps: int):
        from .numvalid import rk4_system
        t = fresh_symbol("t")
        cs = [fresh_symbol("c") for _ in self.mass]
        A = self.rates()
        g = self.forcing()
        rhs = [add(*(mul(a, c) for a, c in zip(row, cs)), gi) for row, gi in zip(A, g)]
        return rk4_system(rhs, [float(eval_numeric(as_expr(v))) for v in c0], t_span, steps, t, cs)


def galerkin_evolution(ip: InnerProductSpec, basis: Basis) -> EvolutionSystem:
    """Reduce ``u_t = -A u + f`` to the ODE system ``M c' = -K c + b`` on the basis."""
    K = assemble(ip, basis, "a")
    M = assemble(ip, basis, "m")
    b = load_vector(ip, basis) if ip.l_form is not None else [ZERO] * len(K)
    return EvolutionSystem(M, K, b, basis, ip)

