import math
from fractions import Fraction

import numpy as np
import pytest

from symapprox.calculus import diff, integrate
from symapprox.errors import UnresolvedInnerProduct
from symapprox.expr import PI, ZERO, Num, Symbol, eval_numeric
from symapprox.galerkin import (
    InnerProductSpec,
    assemble,
    galerkin_elliptic,
    galerkin_evolution,
    galerkin_spectral,
    hat_basis,
    make_basis,
    orthogonality_residuals,
    poly_basis,
    sine_basis,
    sturm_liouville,
)
from symapprox.numvalid import fd_bvp, grid, sample, sup_distance
from symapprox.parse import parse_expr as P
from symapprox.ratfunc import equivalent

x = Symbol("x")

LAPLACE_A = P("Int(D(u(x),x)*D(v(x),x), x, 0, 1)")
MASS = P("Int(u(x)*v(x), x, 0, 1)")


def poisson(f):
    return InnerProductSpec(LAPLACE_A, P(f"Int(({f})*v(x), x, 0, 1)"), MASS)


def test_sine_basis_coefficients():
    sol = galerkin_elliptic(poisson("1"), sine_basis(3))
    assert sol.coeffs == [P("4/pi^3"), ZERO, P("4/(27*pi^3)")]
    assert equivalent(sol.approximant, P("4/pi^3*sin(pi*x) + 4/(27*pi^3)*sin(3*pi*x)"))


def test_zero_load_gives_zero():
    sol = galerkin_elliptic(poisson("0"), sine_basis(3))
    assert sol.coeffs == [ZERO, ZERO, ZERO] and sol.approximant == ZERO


@pytest.mark.parametrize("kind", ["sine", "poly", "hat"])
@pytest.mark.parametrize("f", ["1", "exp(x)*sin(5*x)", "x^2"])
def test_galerkin_orthogonality(kind, f):
    ip, basis = poisson(f), make_basis(kind, 3)
    sol = galerkin_elliptic(ip, basis)
    assert orthogonality_residuals(ip, basis, sol) == [ZERO] * 3
    # recompute a(u_n, w_j) - l(w_j) directly from the forms
    if kind != "hat":
        for w in basis:
            assert equivalent(ip.evaluate("a", sol.approximant, w), ip.evaluate("l", w))


@pytest.mark.parametrize("kind", ["sine", "poly", "hat"])
def test_symmetric_forms_give_symmetric_matrices(kind):
    K = assemble(sturm_liouville(P("1 + x"), P("x"), 1), make_basis(kind, 3))
    assert all(equivalent(K[i][j], K[j][i]) for i in range(3) for j in range(3))


def test_refinement_is_monotone():
    exact = P("x*(1-x)/2")
    pts = grid(0, 1, 201)
    ref = [v for _, v in sample(exact, x, pts)]
    errors = []
    for n in (1, 2, 3):
        u = galerkin_elliptic(poisson("1"), sine_basis(n)).approximant
        errors.append(sup_distance([v for _, v in sample(u, x, pts)], ref))
    assert errors[0] >= errors[1] >= errors[2]


def test_hat_basis_shape():
    (one,) = hat_basis(1).functions
    assert eval_numeric(one, {"x": 0.5}) == 1.0
    assert eval_numeric(one, {"x": 0.0}) == 0.0 == eval_numeric(one, {"x": 1.0})


def test_hat_stiffness_is_tridiagonal():
    K = assemble(poisson("1"), hat_basis(3))
    assert K == [[Num(8), Num(-4), ZERO], [Num(-4), Num(8), Num(-4)], [ZERO, Num(-4), Num(8)]]


def test_hat_solution_is_nodally_exact():
    sol = galerkin_elliptic(poisson("1"), hat_basis(3))
    assert sol.coeffs == [Num(Fraction(3, 32)), Num(Fraction(1, 8)), Num(Fraction(3, 32))]


def test_forced_problem_tracks_finite_differences():
    xs, us = fd_bvp(P("-exp(x)*sin(5*x)"), x, "u", (0, 1), (0, 0), 400)
    pts = grid(0, 1, 201)
    ref = np.interp(pts, xs, us)
    scale = float(np.max(np.abs(ref)))
    sine = galerkin_elliptic(poisson("exp(x)*sin(5*x)"), sine_basis(3)).approximant
    assert sup_distance([v for _, v in sample(sine, x, pts)], ref) < 0.1 * scale
    # linear elements are exact at the nodes in one dimension
    hat = galerkin_elliptic(poisson("exp(x)*sin(5*x)"), hat_basis(3)).approximant
    nodes = [0.25, 0.5, 0.75]
    at_nodes = [v for _, v in sample(hat, x, nodes)]
    assert sup_distance(at_nodes, np.interp(nodes, xs, us)) < 1e-5


def test_unresolved_inner_product_names_the_pair():
    ip = InnerProductSpec(LAPLACE_A, P("Int(exp(x^2)*v(x), x, 0, 1)"), MASS)
    with pytest.raises(UnresolvedInnerProduct) as info:
        galerkin_elliptic(ip, sine_basis(2))
    assert "w1" in str(info.value)


def test_callable_forms_are_accepted():
    ip = InnerProductSpec(lambda w, v: integrate(diff(w, x) * diff(v, x), x, 0, 1),
                          lambda v: integrate(v, x, 0, 1))
    sol = galerkin_elliptic(ip, sine_basis(1))
    assert sol.coeffs == [P("4/pi^3")]


def test_sine_spectrum_is_exact():
    res = galerkin_spectral(InnerProductSpec(LAPLACE_A, None, MASS), sine_basis(2))
    assert res.eigenvalues == [P("pi^2"), P("4*pi^2")]
    assert res.stiffness == [[P("pi^2/2"), ZERO], [ZERO, P("2*pi^2")]]
    assert res.mass == [[Num(Fraction(1, 2)), ZERO], [ZERO, Num(Fraction(1, 2))]]


def test_single_polynomial_rayleigh_quotient():
    res = galerkin_spectral(InnerProductSpec(LAPLACE_A, None, MASS), poly_basis(1))
    assert res.eigenvalues == [Num(10)]
    assert 10 >= math.pi ** 2
    assert equivalent(res.char_poly, P("1/3 - lambda/30"))


@pytest.mark.parametrize("kind", ["sine", "poly", "hat"])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_smallest_eigenvalue_bounds_pi_squared(kind, n):
    res = galerkin_spectral(InnerProductSpec(LAPLACE_A, None, MASS), make_basis(kind, n))
    if res.eigenpairs is not None:
        smallest = min(v for v, _ in res.eigenpairs)
    else:
        smallest = min(eval_numeric(v) for v in res.eigenvalues)
    assert smallest >= math.pi ** 2 - 1e-9


def test_numeric_eigenpairs_solve_the_pencil():
    res = galerkin_spectral(InnerProductSpec(LAPLACE_A, None, MASS), poly_basis(3))
    K = np.array([[eval_numeric(v) for v in row] for row in res.stiffness])
    M = np.array([[eval_numeric(v) for v in row] for row in res.mass])
    assert len(res.eigenpairs) == 3
    for lam, vec in res.eigenpairs:
        assert np.max(np.abs((K - lam * M) @ vec)) < 1e-6


def test_equal_stiffness_and_mass():
    basis = poly_basis(2)
    res = galerkin_spectral(InnerProductSpec(MASS, None, MASS), basis)
    M = assemble(InnerProductSpec(MASS, None, MASS), basis, "m")
    det_m = M[0][0] * M[1][1] - M[0][1] * M[1][0]
    assert equivalent(res.char_poly, det_m * P("(1 - lambda)^2"))


def test_heat_equation_modes_decouple():
    system = galerkin_evolution(InnerProductSpec(LAPLACE_A, None, MASS), sine_basis(2))
    assert system.rates() == [[P("-pi^2"), ZERO], [ZERO, P("-4*pi^2")]]
    c0 = system.project(P("sin(pi*x) + sin(2*pi*x)/2"))
    assert c0 == [Num(1), Num(Fraction(1, 2))]
    traj = system.simulate(c0, (0.0, 0.1), 200)
    c_end = traj[-1][1]
    assert c_end[0] == pytest.approx(math.exp(-math.pi ** 2 * 0.1), rel=1e-7)
    assert c_end[1] == pytest.approx(0.5 * math.exp(-4 * math.pi ** 2 * 0.1), rel=1e-6)


def test_orthogonal_initial_data_stays_zero():
    system = galerkin_evolution(InnerProductSpec(LAPLACE_A, None, MASS), sine_basis(2))
    c0 = system.project(P("sin(3*pi*x)"))
    assert c0 == [ZERO, ZERO]
    assert all(v == 0.0 for v in system.simulate(c0, (0.0, 1.0), 10)[-1][1])


def test_single_mode_rate_is_the_rayleigh_quotient():
    system = galerkin_evolution(InnerProductSpec(LAPLACE_A, None, MASS), poly_basis(1))
    assert system.rates() == [[Num(-10)]]


def test_pi_is_a_constant_in_bases():
    (w,) = sine_basis(1).functions
    assert equivalent(w, P("sin(pi*x)"))
    assert PI.name == "pi"
