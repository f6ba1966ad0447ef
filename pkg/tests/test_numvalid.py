import math

import numpy as np
import pytest
from conftest import exp_trig_polys, x
from hypothesis import given, settings

from symapprox.calculus import integrate
from symapprox.errors import EvaluationError, NoConvergence
from symapprox.expr import Integral, Symbol, eval_numeric
from symapprox.numvalid import (
    adaptive_simpson,
    eval_with_quadrature,
    fd_bvp,
    format_number,
    grid,
    quad,
    rk4_ivp,
    rk4_system,
    sample,
    to_csv,
)
from symapprox.parse import parse_expr as P

t, u = Symbol("t"), Symbol("u")


def test_rk4_exponential_decay():
    traj = rk4_ivp(P("-u"), 1.0, (0.0, 1.0), 1000)
    assert traj[-1][1] == pytest.approx(math.exp(-1), abs=1e-9)
    assert len(traj) == 1001


def test_rk4_constant():
    assert all(v == 2.5 for _, v in rk4_ivp(P("0"), 2.5, (0.0, 3.0), 7))


def test_rk4_bernoulli_matches_exact_solution():
    traj = rk4_ivp(P("-k*u(t) - e*u(t)^2"), 1.0, (0.0, 2.0), 400, bindings={"k": 1, "e": 0.1})
    exact = P("k/((k+e)*exp(k*t) - e)")
    worst = max(abs(v - eval_numeric(exact, {"k": 1, "e": 0.1, "t": tt})) for tt, v in traj)
    assert worst <= 1e-8


@pytest.mark.parametrize("steps", [10, 20, 40, 80])
def test_rk4_is_fourth_order(steps):
    err = abs(rk4_ivp(P("-u"), 1.0, (0.0, 1.0), steps)[-1][1] - math.exp(-1))
    err_half = abs(rk4_ivp(P("-u"), 1.0, (0.0, 1.0), 2 * steps)[-1][1] - math.exp(-1))
    assert err / err_half >= 14


def test_rk4_system_oscillator():
    y, v = Symbol("y"), Symbol("v")
    traj = rk4_system([v, -y], [0.0, 1.0], (0.0, math.pi), 400, t, [y, v])
    assert traj[-1][1][0] == pytest.approx(0.0, abs=1e-8)
    assert traj[-1][1][1] == pytest.approx(-1.0, abs=1e-8)


def test_rk4_rejects_bad_steps():
    with pytest.raises(ValueError):
        rk4_ivp(P("-u"), 1.0, (0.0, 1.0), 0)


def test_fd_quadratic_is_exact():
    xs, us = fd_bvp(P("-1"), x, "u", (0, 1), (0, 0), 50)
    assert np.max(np.abs(us - xs * (1 - xs) / 2)) <= 1e-10


def test_fd_line():
    xs, us = fd_bvp(P("0"), x, "u", (0, 1), (0, 1), 20)
    assert np.max(np.abs(us - xs)) <= 1e-12


@pytest.mark.parametrize("n", [10, 20, 40])
def test_fd_is_second_order(n):
    exact = np.vectorize(lambda s: math.sin(math.pi * s) + s)
    g = P("-pi^2*sin(pi*x)")

    def err(m):
        xs, us = fd_bvp(g, x, "u", (0, 1), (0, 1), m)
        return np.max(np.abs(us - exact(xs)))

    assert err(n) / err(2 * n) >= 3.6


def test_fd_nonlinear_prager():
    xs, us = fd_bvp(P("-(D(u(x),x))^2 - 1"), x, "u", (0, 1), (0, 0), 200)
    # with u' = tan(1/2 - x) the exact solution is log(cos(x - 1/2)/cos(1/2))
    exact = np.log(np.cos(xs - 0.5) / math.cos(0.5))
    assert np.max(np.abs(us - exact)) < 1e-5


def test_fd_reports_non_convergence():
    with pytest.raises(NoConvergence):
        fd_bvp(P("exp(u(x))*50"), x, "u", (0, 1), (0, 0), 20, max_iter=2)


def test_quadrature_examples():
    assert quad(P("x^2"), x, 0.0, 1.0) == pytest.approx(1 / 3, abs=1e-10)
    assert quad(P("0"), x, 0.0, 1.0) == 0.0
    symbolic = integrate(P("exp(x/2)*sin(w*x)"), x, 0, 1)
    assert quad(P("exp(x/2)*sin(x)"), x, 0.0, 1.0) == pytest.approx(
        eval_numeric(symbolic, {"w": 1.0}), abs=1e-9)
    assert adaptive_simpson(math.cos, 0.0, math.pi / 2) == pytest.approx(1.0, abs=1e-10)


@settings(max_examples=20)
@given(exp_trig_polys())
def test_quadrature_agrees_with_symbolic_integration(f):
    value = integrate(f, x, 0, 1)
    if isinstance(value, Integral):
        return
    assert abs(quad(f, x, 0.0, 1.0) - eval_numeric(value, {})) <= 10 * 1e-10 * (1 + abs(eval_numeric(value, {})))


def test_held_integrals_are_evaluated_by_quadrature():
    e = P("Int(exp(x^2), x, 0, t) + 1")
    assert eval_with_quadrature(e, {"t": 1.0}) == pytest.approx(2.4626517459071816, abs=1e-9)


def test_sampling():
    assert sample(P("3"), x, [0.0, 0.5, 1.0]) == [(0.0, 3.0), (0.5, 3.0), (1.0, 3.0)]
    rows = sample(P("sin(x)"), x, grid(0, math.pi, 5))
    assert [round(v, 12) for _, v in rows] == [0.0, round(math.sqrt(0.5), 12), 1.0,
                                               round(math.sqrt(0.5), 12), 0.0]
    with pytest.raises(EvaluationError):
        sample(P("a*x"), x, [0.0])
    assert sample(P("a*x"), x, [2.0], {"a": 3}) == [(2.0, 6.0)]


def test_csv_format():
    text = to_csv([(0.0, 1 / 3), (1.0, 2.0)], ["x", "approx"])
    assert text == "x,approx\n0,0.333333333333\n1,2\n"
    assert format_number(math.pi) == "3.14159265359"
