import pytest
from hypothesis import given
from hypothesis import strategies as st

from symapprox.errors import NonlocalDependence
from symapprox.expr import Integral, Num, Symbol, Unknown
from symapprox.frechet import frechet_derivative, gateaux_check, variational_form
from symapprox.parse import parse_expr as P
from symapprox.ratfunc import equivalent

x = Symbol("x")
u, v, h = (Unknown(n, (x,)) for n in ("u", "v", "h"))

DIRICHLET = "Int(1/2*D(u(x),x)^2 - f(x)*u(x), x, a, b)"
PRAGER = "D(u(x),x,2) + (a*D(u(x),x))^2 + 1"


def test_dirichlet_energy_gives_weak_form():
    got = variational_form(P(DIRICHLET), u, v)
    assert isinstance(got, Integral)
    assert equivalent(got, P("Int(D(u(x),x)*D(v(x),x) - f(x)*v(x), x, a, b)"))


@pytest.mark.parametrize(
    "F, expected",
    [
        (PRAGER, "D(h(x),x,2) + 2*a^2*D(u(x),x)*D(h(x),x)"),
        ("u(x)", "h(x)"),
        ("7*x", "0"),
        ("sin(u(x))*x", "x*cos(u(x))*h(x)"),
        ("Int(u(x)^2/2, x, 0, 1)", "Int(u(x)*h(x), x, 0, 1)"),
        ("D(u(x), x, 4)*u(x)", "D(h(x), x, 4)*u(x) + D(u(x), x, 4)*h(x)"),
    ],
)
def test_frechet_examples(F, expected):
    assert equivalent(frechet_derivative(P(F), u, h), P(expected))


def test_integral_rule_commutes():
    inner = P("exp(u(x))*D(u(x),x)")
    outer = frechet_derivative(Integral(inner, x, Num(0), Num(1)), u, h)
    assert outer == Integral(frechet_derivative(inner, u, h), x, Num(0), Num(1))


@given(st.integers(-3, 3), st.integers(-3, 3))
def test_linearity_in_direction(alpha, beta):
    F = P(PRAGER)
    g = Unknown("g", (x,))
    combo = frechet_derivative(F, u, P(f"{alpha}*h(x) + {beta}*g(x)"))
    parts = alpha * frechet_derivative(F, u, h) + beta * frechet_derivative(F, u, g)
    assert equivalent(combo, parts)


def test_leibniz_rule():
    F, G = P("u(x)^2"), P("sin(D(u(x), x))")
    lhs = frechet_derivative(F * G, u, h)
    rhs = frechet_derivative(F, u, h) * G + F * frechet_derivative(G, u, h)
    assert equivalent(lhs, rhs)


@pytest.mark.parametrize("F", ["u(x-1)", "u(x^2)", "u(0) + u(x)"])
def test_nonlocal_dependence(F):
    with pytest.raises(NonlocalDependence):
        frechet_derivative(P(F), u, h)


def test_gateaux_square():
    sym, num = gateaux_check(P("u(x)^2"), u, P("x"), Num(1), {"x": 3.0})
    assert sym == pytest.approx(6.0, abs=1e-12)
    assert num == pytest.approx(6.0, abs=1e-8)


@pytest.mark.parametrize(
    "F, phi, direction, point",
    [
        (PRAGER, "0", "sin(pi*x)", {"x": 0.3, "a": 1.0}),
        (PRAGER, "x*(1-x)/2", "x^2", {"x": 0.7, "a": 2.0}),
        ("5", "x", "1", {"x": 0.1}),
        (DIRICHLET, "x^2", "sin(x)", {"a": 0.0, "b": 1.0}),
        ("Int(u(x)^2/2, x, 0, 1)", "exp(x)", "x", {}),
    ],
)
def test_gateaux_agreement(F, phi, direction, point):
    point = dict(point)
    if "f" in F:
        F = F.replace("f(x)", "cos(x)")
    sym, num = gateaux_check(P(F), u, P(phi), P(direction), point)
    assert abs(sym - num) <= 1e-6 * (1 + abs(sym))
