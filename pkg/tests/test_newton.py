import random

import numpy as np
import pytest

from symapprox.errors import LinearBackendUnsupported, SingularSystem, SymApproxError
from symapprox.expr import Num, Symbol, Unknown, eval_numeric, substitute
from symapprox.galerkin import hat_basis, sine_basis
from symapprox.newton import (
    AlgebraicSystem,
    BvpProblem,
    jacobian,
    newton_algebraic,
    newton_functional,
    quasilinearize,
    solve_linear_bvp,
)
from symapprox.numvalid import fd_bvp, grid, sample, sup_distance
from symapprox.parse import parse_expr as P
from symapprox.ratfunc import Zeroness, equivalent, is_zero, simplify

x, y, p = Symbol("x"), Symbol("y"), Symbol("p")
u = Unknown("u", (x,))

ROSENBROCK = AlgebraicSystem([P("2*(x-1) + 4*p*x*(x^2-y)"), P("-2*p*(x^2-y)")], [x, y], [0, 0])
PRAGER = "D(u(x),x,2) + (a*D(u(x),x))^2 + 1"


def test_rosenbrock_in_two_steps():
    sol, rep = newton_algebraic(ROSENBROCK, 2)
    assert sol == {x: Num(1), y: Num(1)}
    assert rep.iterates[1] == {x: Num(1), y: Num(0)}
    assert rep.iterations_run == 2
    assert p in rep.genericity_assumptions


def test_newton_stops_once_exact():
    sol, rep = newton_algebraic(ROSENBROCK, 5)
    assert sol == {x: Num(1), y: Num(1)} and rep.iterations_run == 2


def test_babylonian_iterates():
    sol, rep = newton_algebraic(AlgebraicSystem([P("x^2 - 2")], [x], [1]), 3)
    assert [it[x] for it in rep.iterates] == [Num(1), Num(3) / 2, Num(17) / 12, Num(577) / 408]


def test_affine_system_in_one_step():
    system = AlgebraicSystem([P("2*x + y - 3"), P("x - p*y - 1")], [x, y], [7, -2])
    sol, _ = newton_algebraic(system, 1)
    assert all(is_zero(simplify(substitute(e, sol))) is Zeroness.ZERO for e in system.equations)


def test_iterate_invariance():
    two, _ = newton_algebraic(AlgebraicSystem([P("x^2 - 2")], [x], [1]), 2)
    then_one, _ = newton_algebraic(AlgebraicSystem([P("x^2 - 2")], [x], [two[x]]), 1)
    three, _ = newton_algebraic(AlgebraicSystem([P("x^2 - 2")], [x], [1]), 3)
    assert then_one == three


def test_jacobian_matches_finite_differences():
    J = jacobian(ROSENBROCK.equations, ROSENBROCK.vars)
    rng = random.Random(7)
    for _ in range(5):
        pt = {"x": rng.uniform(-2, 2), "y": rng.uniform(-2, 2), "p": rng.uniform(0.5, 3)}
        for i, f in enumerate(ROSENBROCK.equations):
            for j, v in enumerate("xy"):
                hstep = 1e-6
                plus = eval_numeric(f, {**pt, v: pt[v] + hstep})
                minus = eval_numeric(f, {**pt, v: pt[v] - hstep})
                fd = (plus - minus) / (2 * hstep)
                exact = eval_numeric(J[i][j], pt)
                assert abs(fd - exact) <= 1e-6 * (1 + abs(exact))


def test_singular_jacobian():
    with pytest.raises(SingularSystem):
        newton_algebraic(AlgebraicSystem([P("x^2 - 2")], [x], [0]), 1)


def test_system_shape_is_checked():
    with pytest.raises(ValueError):
        AlgebraicSystem([P("x")], [x, y], [0])


def prager(**kw):
    return BvpProblem(P(PRAGER), u, (0, 1), (0, 0), **kw)


def test_prager_quasilinearization_at_zero():
    lb = quasilinearize(prager())
    assert equivalent(lb.equation, P("D(h(x),x,2) + 1"))
    assert lb.boundary == (Num(0), Num(0))


def test_quasilinearization_of_linear_residual():
    bvp = BvpProblem(P("D(u(x),x,2) + u(x) - g(x)"), u, (0, 1), (0, 0))
    lb = quasilinearize(bvp, P("x*(1-x)"))
    assert equivalent(lb.equation, P("D(h(x),x,2) + h(x) + (-2 + x - x^2 - g(x))"))


def test_quasilinearization_at_constant():
    c = Symbol("c")
    bvp = BvpProblem(P("D(u(x),x) + u(x)^2"), u, (0, 1), (c, c))
    lb = quasilinearize(bvp, c)
    assert equivalent(lb.equation, P("D(h(x),x) + 2*c*h(x) + c^2"))
    assert lb.boundary == (Num(0), Num(0))


def test_prager_first_iterate():
    first, rep = newton_functional(prager(), 1)
    assert equivalent(first, P("x*(1-x)/2"))
    assert rep.iterates == [Num(0), first]


@pytest.mark.parametrize(
    "residual, boundary",
    [
        ("D(u(x),x,2) + u(x) - x", (0, 1)),
        ("D(u(x),x,2) - 3*D(u(x),x) + 2*u(x) - 1", (0, 0)),
        ("D(u(x),x,2) - 2*D(u(x),x) + u(x) - x", (0, 0)),
        ("D(u(x),x,2) - exp(x)*sin(5*x)", (1, 2)),
    ],
)
def test_affine_bvp_is_exact_after_one_step(residual, boundary):
    bvp = BvpProblem(P(residual), u, (0, 1), boundary)
    sol, _ = newton_functional(bvp, 1)
    assert is_zero(simplify(bvp.evaluate(sol))) is Zeroness.ZERO
    assert equivalent(substitute(sol, {x: Num(0)}), Num(boundary[0]))
    assert equivalent(substitute(sol, {x: Num(1)}), Num(boundary[1]))


def _prager_reference(points):
    xs, us = fd_bvp(P("-(D(u(x),x))^2 - 1"), x, "u", (0, 1), (0, 0), 400)
    return np.interp(points, xs, us)


def test_prager_galerkin_second_step_improves():
    bvp = BvpProblem(substitute(P(PRAGER), {Symbol("a"): Num(1)}), u, (0, 1), (0, 0))
    points = grid(0, 1, 101)
    ref = _prager_reference(points)
    first, _ = newton_functional(bvp, 1, sine_basis(3))
    second, rep = newton_functional(bvp, 2, sine_basis(3))
    d1 = sup_distance([v for _, v in sample(first, x, points)], ref)
    d2 = sup_distance([v for _, v in sample(second, x, points)], ref)
    assert d2 < d1
    assert len(rep.residual_samples) == 11


def test_variable_coefficients_need_galerkin():
    bvp = BvpProblem(P(PRAGER), u, (0, 1), (0, 0))
    first, _ = newton_functional(bvp, 1)
    with pytest.raises(LinearBackendUnsupported):
        solve_linear_bvp(quasilinearize(bvp, first))


def test_hat_iterates_are_not_linearized_twice():
    bvp = BvpProblem(substitute(P(PRAGER), {Symbol("a"): Num(1)}), u, (0, 1), (0, 0))
    first, _ = newton_functional(bvp, 1, hat_basis(3))
    assert eval_numeric(first, {"x": 0.5}) == pytest.approx(0.125)
    with pytest.raises(LinearBackendUnsupported):
        newton_functional(bvp, 2, hat_basis(3))


def test_residual_order_is_limited():
    with pytest.raises(SymApproxError):
        BvpProblem(P("D(u(x),x,3)"), u, (0, 1), (0, 0))
