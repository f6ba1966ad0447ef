import pytest
from conftest import exprs
from hypothesis import given

from symapprox.errors import ParseError
from symapprox.expr import (
    Integral,
    Num,
    Piecewise,
    Symbol,
    Unknown,
    Wild,
    cos,
    exp,
    integral,
    mul,
    sin,
)
from symapprox.parse import parse_equation, parse_expr
from symapprox.render import render

x, t, tau, w, a = (Symbol(n) for n in ("x", "t", "tau", "w", "a"))


@given(exprs())
def test_render_parse_round_trip(e):
    assert parse_expr(render(e)) == e


@pytest.mark.parametrize(
    "text",
    [
        "a*sin(w*t)",
        "D(u(t), t, 2)",
        "Int(exp(-(t - tau)/2), tau, 0, t)",
        "exp(-k*t) + e*(exp(-2*k*t) - exp(-k*t))/k",
        "Piecewise(x, [0, 1/2, 2*x], [1/2, 1, 2 - 2*x])",
        "x^(1/2) + 3*x/4",
        "u''(0) + D(u(x), x)",
    ],
)
def test_round_trip_of_canonical_strings(text):
    e = parse_expr(text)
    assert parse_expr(render(e)) == e
    assert render(parse_expr(render(e))) == render(e)


def test_golden_renderings():
    assert render(parse_expr("a*sin(w*t)")) == "a*sin(t*w)"
    assert render(parse_expr("D(u(t),t,2)")) == "D(u(t), t, 2)"
    held = integral(exp(mul(Num(-1) / 2, t, tau)) * Unknown("f", (tau,)), tau, 0, t)
    assert render(held) == "Int(exp(-t*tau/2)*f(tau), tau, 0, t)"


def test_int_is_held_and_d_is_evaluated():
    held = parse_expr("Int(x^2, x, 0, 1)")
    assert isinstance(held, Integral)
    assert parse_expr("D(x^3, x)") == mul(3, x ** 2)
    assert parse_expr("D(u(x), x)") == Unknown("u", (x,), (1,))


def test_decimal_literals_are_exact():
    assert parse_expr("0.25") == Num(1) / 4
    assert parse_expr("1.5*x") == mul(Num(3) / 2, x)


def test_star_star_is_power():
    assert parse_expr("x**2") == parse_expr("x^2")


def test_wildcards_and_primes():
    assert parse_expr("y_") == Wild("y")
    assert parse_expr("u'(x)") == Unknown("u", (x,), (1,))


def test_piecewise_parses():
    e = parse_expr("Piecewise(x, [0, 1, x])")
    assert isinstance(e, Piecewise)


def test_equation_moves_everything_left():
    assert parse_equation("x^2 = 2") == parse_expr("x^2 - 2")
    assert parse_equation("sin(x)") == sin(x)


@pytest.mark.parametrize(
    "text, position",
    [("1 +", 3), ("sin(x", 5), ("2 * * 3", 4), ("x $ y", 2)],
)
def test_parse_errors_carry_position(text, position):
    with pytest.raises(ParseError) as info:
        parse_expr(text)
    assert info.value.position == position


def test_equation_errors():
    with pytest.raises(ParseError):
        parse_equation("x = 1 = 2")
    with pytest.raises(ParseError):
        parse_equation(" = 1")


def test_latex_rendering():
    assert render(parse_expr("a/b"), "latex") == r"\frac{a}{b}"
    assert render(exp(x), "latex") == "e^{x}"
    assert render(cos(x), "latex") == r"\cos\left(x\right)"
    assert r"\int_{0}^{1}" in render(parse_expr("Int(f(x), x, 0, 1)"), "latex")
    assert r"\begin{cases}" in render(parse_expr("Piecewise(x, [0, 1, x])"), "latex")


def test_unknown_format_rejected():
    with pytest.raises(ValueError):
        render(x, "mathml")
