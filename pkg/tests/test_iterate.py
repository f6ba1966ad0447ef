import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from symapprox.errors import DegenerateSequence, UnresolvedIntegral
from symapprox.expr import Num, Symbol, Unknown, Wild, eval_numeric
from symapprox.iterate import (
    OperatorDef,
    iterate_distances,
    ivp_to_integral,
    nest,
    nest_list,
    scalar_map,
    shanks,
    shanks_alternate,
    steffensen,
)
from symapprox.numvalid import bisect_root, quad
from symapprox.parse import parse_expr as P
from symapprox.ratfunc import equivalent

x, t, tau = Symbol("x"), Symbol("t"), Symbol("tau")
A, C, r = Symbol("A"), Symbol("C"), Symbol("r")

half_plus_one = scalar_map(P("x/2 + 1"), x)
identity = scalar_map(x, x)

MOTOR_BODY = P("Int(exp(-(t - tau)/2)*(a*sin(w*tau) - u(tau)*(a*sin(w*tau))^2/2), tau, 0, t)")
motor = OperatorDef("motor", Unknown("u", (Wild("_"),)), t, MOTOR_BODY)
MOTOR_FIRST = P("4*a*w/(exp(t/2)*(1+4*w^2)) - 2*a*(2*w*cos(w*t) - sin(w*t))/(1+4*w^2)")


def test_scalar_nest():
    assert nest(half_plus_one, 0, 3) == Num(7) / 4
    assert nest_list(half_plus_one, 0, 2) == [Num(0), Num(1), Num(3) / 2]
    assert nest(identity, P("a + 1"), 5) == P("a + 1")
    assert nest_list(identity, x, 3) == [x] * 4


def test_motor_first_iterate():
    got = nest(motor, 0, 1)
    assert equivalent(got, MOTOR_FIRST)
    want = quad(P("exp(-(1 - tau)/2)*sin(tau)"), tau, 0.0, 1.0)
    assert eval_numeric(got, {"a": 1, "w": 1, "t": 1}) == pytest.approx(want, abs=1e-9)


def test_motor_second_iterate_has_periodic_part():
    second = nest_list(motor, 0, 2)[-1]
    # the exp-free part survives as t grows: the periodic steady state
    late = [eval_numeric(second, {"a": 0.5, "w": 1.0, "t": tt}) for tt in (40.0, 40.0 + 2 * math.pi)]
    assert late[0] == pytest.approx(late[1], abs=1e-6)


def test_nest_composition():
    m, n = 1, 2
    assert nest(half_plus_one, nest(half_plus_one, 0, m), n) == nest(half_plus_one, 0, m + n)


def test_fixed_point_is_preserved():
    assert nest(half_plus_one, 2, 4) == Num(2)


def test_unresolved_integral_stops_iteration():
    op = OperatorDef("g", Unknown("u", (Wild("_"),)), t, P("Int(exp(u(tau)^2), tau, 0, t)"))
    with pytest.raises(UnresolvedIntegral):
        nest(op, t, 1)
    held = nest(op, t, 1, allow_held=True)
    assert "Int" in str(held)


def test_shanks_is_exact_on_geometric_sequences():
    seq = [A + C * r ** n for n in range(3, 6)]
    assert shanks(*seq) == A
    assert shanks(1, Num(1) / 2, Num(1) / 4) == Num(0)


def test_shanks_forms_agree():
    seq = [A + C * r ** n + r ** (2 * n) for n in range(3)]
    assert equivalent(shanks(*seq), shanks_alternate(*seq))


@pytest.mark.parametrize("args", [(Num(3), Num(3), Num(3)), (Num(1), Num(2), Num(3)), (1.0, 1.0, 1.0)])
def test_shanks_degenerate(args):
    with pytest.raises(DegenerateSequence):
        shanks(*args)


def test_steffensen_linear():
    assert steffensen(half_plus_one, 0, 0) == Num(2)
    with pytest.raises(DegenerateSequence):
        steffensen(identity, 0, 0)


@given(st.integers(0, 3))
def test_steffensen_exact_on_generic_affine_maps(n):
    alpha, beta = Symbol("alpha"), Symbol("beta")
    op = scalar_map(alpha * x + beta, x)
    assert equivalent(steffensen(op, 0, n), beta / (1 - alpha))


def test_steffensen_cos_beats_plain_iteration():
    root = bisect_root(lambda v: math.cos(v) - v, 0.0, 1.0)
    assert root == pytest.approx(0.7390851332, abs=1e-10)
    accelerated = steffensen(scalar_map(P("cos(x)"), x), 0.0, 0)
    plain = math.cos(math.cos(math.cos(0.0)))
    assert abs(accelerated - root) < abs(plain - root)


def test_ivp_reformulation_reproduces_motor_kernel():
    op = ivp_to_integral(Num(1) / 2, P("a*sin(w*t) - u(t)*(a*sin(w*t))^2/2"),
                         Unknown("u", (t,)), 0)
    assert equivalent(nest(op, 0, 1), MOTOR_FIRST)


def test_iterate_distances_shrink_for_a_contraction():
    seq = nest_list(scalar_map(P("x/2 + 1"), x), 0, 4)
    d = iterate_distances(seq, t, [0.0, 1.0])
    assert d == sorted(d, reverse=True) and d[-1] < d[0]
