"""Exact symbolic approximation: iteration, Newton, perturbation and Galerkin methods."""
from .calculus import diff, integrate, resolve_integrals, taylor
from .errors import SymApproxError
from .expr import (
    Expr,
    Num,
    Symbol,
    Unknown,
    canon,
    collect_powers,
    cos,
    exp,
    expand,
    integral,
    log,
    piecewise,
    sin,
    sqrt,
    substitute,
    symbols,
    unknown,
)
from .frechet import frechet_derivative, gateaux_check, variational_form
from .galerkin import (
    InnerProductSpec,
    galerkin_elliptic,
    galerkin_evolution,
    galerkin_spectral,
    hat_basis,
    poly_basis,
    sine_basis,
    sturm_liouville,
)
from .iterate import OperatorDef, nest, nest_list, shanks, shanks_alternate, steffensen
from .linalg import linear_solve_symbolic
from .newton import AlgebraicSystem, BvpProblem, newton_algebraic, newton_functional, quasilinearize
from .parse import parse_equation, parse_expr
from .perturb import PadeApproximant, pade, perturb_solve_algebraic, perturb_solve_ode
from .ratfunc import equivalent, is_zero, simplify
from .render import render
from .report import SolveReport, recording
from .series import Series

__version__ = "0.1.0"

__all__ = [
    "AlgebraicSystem", "BvpProblem", "Expr", "InnerProductSpec", "Num", "OperatorDef",
    "PadeApproximant", "Series", "SolveReport", "SymApproxError", "Symbol", "Unknown",
    "canon", "collect_powers", "cos", "diff", "equivalent", "exp", "expand",
    "frechet_derivative", "galerkin_elliptic", "galerkin_evolution", "galerkin_spectral",
    "gateaux_check", "hat_basis", "integral", "integrate", "is_zero", "linear_solve_symbolic",
    "log", "nest", "nest_list", "newton_algebraic", "newton_functional", "pade",
    "parse_equation", "parse_expr", "perturb_solve_algebraic", "perturb_solve_ode",
    "piecewise", "poly_basis", "quasilinearize", "recording", "render", "resolve_integrals",
    "shanks", "shanks_alternate", "simplify", "sin", "sine_basis", "sqrt", "steffensen",
    "sturm_liouville", "substitute", "symbols", "taylor", "unknown", "variational_form",
]
