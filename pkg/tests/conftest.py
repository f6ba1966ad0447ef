from fractions import Fraction

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from symapprox.expr import Num, Symbol, add, cos, exp, mul, power, sin

settings.register_profile(
    "symapprox",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("symapprox")

x, a, b = Symbol("x"), Symbol("a"), Symbol("b")

small_fractions = st.builds(
    Fraction,
    st.integers(min_value=-6, max_value=6),
    st.integers(min_value=1, max_value=4),
)
nums = small_fractions.map(Num)
nonzero_nums = small_fractions.filter(lambda f: f != 0).map(Num)


def linear_args(var=x):
    """``c*var`` or ``c*var + d`` with small rational ``c != 0``."""
    return st.builds(lambda c, d: add(mul(c, var), d), nonzero_nums, nums)


def atoms(var=x):
    return st.one_of(
        nums,
        st.sampled_from([var, a, b]),
        st.builds(sin, linear_args(var)),
        st.builds(cos, linear_args(var)),
        st.builds(exp, linear_args(var)),
    )


def exprs(var=x, max_leaves=8):
    """Random expressions built from sums, products and small integer powers."""
    return st.recursive(
        atoms(var),
        lambda children: st.one_of(
            st.builds(lambda p, q: add(p, q), children, children),
            st.builds(lambda p, q: mul(p, q), children, children),
            st.builds(lambda p, k: power(p, k), children, st.integers(min_value=2, max_value=3)),
        ),
        max_leaves=max_leaves,
    )


def exp_trig_polys(var=x):
    """Sums of ``c * var^k * exp(r*var) * trig(s*var)``: the class integrated in closed form."""
    term = st.builds(
        lambda c, k, r, s, head: mul(c, power(var, k), exp(mul(r, var)),
                                     head(mul(s, var)) if s != 0 else Num(1)),
        nonzero_nums,
        st.integers(min_value=0, max_value=2),
        st.sampled_from([Num(0), Num(1), Num(-1), Num(Fraction(1, 2))]),
        st.sampled_from([Num(0), Num(1), Num(2), Num(-3)]),
        st.sampled_from([sin, cos]),
    )
    return st.lists(term, min_size=1, max_size=3).map(lambda ts: add(*ts))


def pytest_terminal_summary(terminalreporter):
    import sys

    acceptance = sys.modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in acceptance.summary_lines():
        terminalreporter.write_line(line)
