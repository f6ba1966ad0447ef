"""Immutable expression trees and their canonical constructors.

Every node is built through the smart constructors (:func:`add`, :func:`mul`,
:func:`power`, :func:`func`, ...), which flatten, fold numbers, collect like
terms and sort operands by a total order.  Building through them is what makes
an expression canonical; :func:`canon` simply rebuilds a tree bottom-up.

The class never expands products of sums on its own; :func:`expand` does that
on request and :mod:`symapprox.ratfunc` provides the full rational normal form
used for zero tests.
"""
from __future__ import annotations

import itertools
import math
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (
    DomainError,
    EvaluationError,
    NotPolynomialInSymbol,
    RewriteBudgetExceeded,
    SubstitutionIntoBoundVar,
    SymApproxError,
    UnboundSymbol,
)

KNOWN_FUNCTIONS = ("sin", "cos", "exp", "log")

# kind ranks for the total order
_R_NUM, _R_SYM, _R_MUL, _R_FUNC, _R_UNK, _R_DERIV, _R_INT, _R_PW, _R_WILD, _R_ADD = (
    0, 1, 3, 4, 5, 6, 7, 8, 9, 10)


class Expr:
    """Base class of all expression nodes.  Instances are immutable."""

    __slots__ = ("_hash", "_key")

    def _data(self) -> tuple:
        raise NotImplementedError

    def _init_hash(self) -> None:
        object.__setattr__(self, "_hash", hash((type(self).__name__, self._data())))
        object.__setattr__(self, "_key", None)

    def __setattr__(self, name, value):
        raise AttributeError("expressions are immutable")

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, Expr):
            if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
                other = Num(other)
            else:
                return NotImplemented
        return (type(self) is type(other) and self._hash == other._hash
                and self._data() == other._data())

    def __ne__(self, other) -> bool:
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    @property
    def key(self) -> tuple:
        """Sort key realising the canonical total order."""
        k = self._key
        if k is None:
            k = self._make_key()
            object.__setattr__(self, "_key", k)
        return k

    def _make_key(self) -> tuple:
        raise NotImplementedError

    def children(self) -> tuple[Expr, ...]:
        return ()

    def rebuild(self, fn: Callable[[Expr], Expr]) -> Expr:
        """Apply ``fn`` to every child and rebuild canonically."""
        return self

    # arithmetic sugar
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), neg(self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return mul(self, power(as_expr(other), MINUS_ONE))

    def __rtruediv__(self, other):
        return mul(as_expr(other), power(self, MINUS_ONE))

    def __pow__(self, other):
        return power(self, as_expr(other))

    def __rpow__(self, other):
        return power(as_expr(other), self)

    def __neg__(self):
        return neg(self)

    def __pos__(self):
        return self

    def __repr__(self) -> str:
        from .render import render
        return render(self)

    __str__ = __repr__


class Num(Expr):
    """Exact rational constant (integers are rationals with denominator 1)."""

    __slots__ = ("value",)

    def __init__(self, value):
        object.__setattr__(self, "value", Fraction(value))
        self._init_hash()

    def _data(self):
        return (self.value,)

    def _make_key(self):
        return (_R_NUM, (self.value,), ())

    @property
    def is_integer(self) -> bool:
        return self.value.denominator == 1


class Symbol(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)
        self._init_hash()

    def _data(self):
        return (self.name,)

    def _make_key(self):
        return (_R_SYM, (self.name,), ONE.key)


class Wild(Expr):
    """Pattern variable.  ``kind`` optionally restricts the node type matched."""

    __slots__ = ("name", "kind")

    def __init__(self, name: str, kind: type | None = None):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "kind", kind)
        self._init_hash()

    def _data(self):
        return (self.name, self.kind)

    def _make_key(self):
        return (_R_WILD, (self.name,), ONE.key)


class Add(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms: tuple):
        object.__setattr__(self, "terms", tuple(terms))
        self._init_hash()

    def _data(self):
        return self.terms

    def _make_key(self):
        return (_R_ADD, tuple(t.key for t in self.terms), ONE.key)

    def children(self):
        return self.terms

    def rebuild(self, fn):
        return add(*(fn(t) for t in self.terms))


class Mul(Expr):
    __slots__ = ("factors",)

    def __init__(self, factors: tuple):
        object.__setattr__(self, "factors", tuple(factors))
        self._init_hash()

    def _data(self):
        return self.factors

    def _make_key(self):
        return (_R_MUL, tuple(f.key for f in self.factors), ONE.key)

    def children(self):
        return self.factors

    def rebuild(self, fn):
        return mul(*(fn(f) for f in self.factors))


class Pow(Expr):
    __slots__ = ("base", "exp")

    def __init__(self, base: Expr, exp: Expr):
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "exp", exp)
        self._init_hash()

    def _data(self):
        return (self.base, self.exp)

    def _make_key(self):
        kb = self.base.key
        return (kb[0], kb[1], self.exp.key)

    def children(self):
        return (self.base, self.exp)

    def rebuild(self, fn):
        return power(fn(self.base), fn(self.exp))


class Func(Expr):
    """Application of a known elementary function (sin, cos, exp, log)."""

    __slots__ = ("head", "arg")

    def __init__(self, head: str, arg: Expr):
        object.__setattr__(self, "head", head)
        object.__setattr__(self, "arg", arg)
        self._init_hash()

    def _data(self):
        return (self.head, self.arg)

    def _make_key(self):
        return (_R_FUNC, (self.head, self.arg.key), ONE.key)

    def children(self):
        return (self.arg,)

    def rebuild(self, fn):
        return func(self.head, fn(self.arg))


class Unknown(Expr):
    """Application of an unknown function such as ``u(t)``.

    ``derivs`` holds the order of differentiation with respect to each
    argument slot, so ``u''(0)`` is ``Unknown("u", (0,), (2,))``.
    """

    __slots__ = ("name", "args", "derivs")

    def __init__(self, name: str, args: tuple, derivs: tuple | None = None):
        args = tuple(args)
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "args", args)
        object.__setattr__(self, "derivs", tuple(derivs) if derivs else (0,) * len(args))
        self._init_hash()

    def _data(self):
        return (self.name, self.args, self.derivs)

    def _make_key(self):
        return (_R_UNK, (self.name, self.derivs, tuple(a.key for a in self.args)), ONE.key)

    def children(self):
        return self.args

    def rebuild(self, fn):
        return Unknown(self.name, tuple(fn(a) for a in self.args), self.derivs)

    @property
    def order(self) -> int:
        return sum(self.derivs)


class Deriv(Expr):
    """Held derivative of an expression the differentiator could not resolve."""

    __slots__ = ("expr", "var", "order")

    def __init__(self, expr: Expr, var: Symbol, order: int = 1):
        object.__setattr__(self, "expr", expr)
        object.__setattr__(self, "var", var)
        object.__setattr__(self, "order", int(order))
        self._init_hash()

    def _data(self):
        return (self.expr, self.var, self.order)

    def _make_key(self):
        return (_R_DERIV, (self.expr.key, self.var.name, self.order), ONE.key)

    def children(self):
        return (self.expr,)

    def rebuild(self, fn):
        from .calculus import diff
        return diff(fn(self.expr), self.var, self.order)


class Integral(Expr):
    """Held definite integral of ``integrand`` over ``var`` from ``lo`` to ``hi``."""

    __slots__ = ("integrand", "var", "lo", "hi")

    def __init__(self, integrand: Expr, var: Symbol, lo: Expr, hi: Expr):
        object.__setattr__(self, "integrand", integrand)
        object.__setattr__(self, "var", var)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        self._init_hash()

    def _data(self):
        return (self.integrand, self.var, self.lo, self.hi)

    def _make_key(self):
        return (_R_INT, (self.integrand.key, self.var.key, self.lo.key, self.hi.key), ONE.key)

    def children(self):
        return (self.integrand, self.var, self.lo, self.hi)

    def rebuild(self, fn):
        var = fn(self.var)
        if not isinstance(var, (Symbol, Wild)):
            raise SubstitutionIntoBoundVar(f"integration variable {self.var} cannot be replaced")
        return integral(fn(self.integrand), var, fn(self.lo), fn(self.hi))


class Piecewise(Expr):
    """Piecewise function of ``var``: ``value`` on each ``[lo, hi)``, zero elsewhere."""

    __slots__ = ("var", "pieces")

    def __init__(self, var: Symbol, pieces: tuple):
        object.__setattr__(self, "var", var)
        object.__setattr__(self, "pieces", tuple(tuple(p) for p in pieces))
        self._init_hash()

    def _data(self):
        return (self.var, self.pieces)

    def _make_key(self):
        return (_R_PW, (self.var.name, tuple((lo.key, hi.key, v.key) for lo, hi, v in self.pieces)),
                ONE.key)

    def children(self):
        return tuple(itertools.chain.from_iterable(self.pieces))

    def rebuild(self, fn):
        return piecewise(self.var, [(fn(lo), fn(hi), fn(v)) for lo, hi, v in self.pieces])

    @property
    def breakpoints(self) -> list[Fraction]:
        pts = set()
        for lo, hi, _ in self.pieces:
            pts.add(lo.value)
            pts.add(hi.value)
        return sorted(pts)

    def piece_at(self, point: Fraction) -> Expr:
        """Value expression valid on an open interval just right of ``point``."""
        for lo, hi, v in self.pieces:
            if lo.value <= point < hi.value:
                return v
        return ZERO


ZERO = Num(0)
ONE = Num(1)
MINUS_ONE = Num(-1)
HALF = Num(Fraction(1, 2))
PI = Symbol("pi")


# ---------------------------------------------------------------------------
# coercion

def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not expressions")
    if isinstance(x, (int, Fraction)):
        return Num(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise DomainError(f"non-finite number {x}")
        return Num(Fraction(repr(x)))
    if isinstance(x, str):
        from .parse import parse_expr
        return parse_expr(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an expression")


def symbols(names: str) -> tuple[Symbol, ...]:
    return tuple(Symbol(n) for n in names.replace(",", " ").split())


_fresh_counter = itertools.count(1)


def fresh_symbol(base: str = "s") -> Symbol:
    return Symbol(f"{base}__{next(_fresh_counter)}")


# ---------------------------------------------------------------------------
# canonical constructors

def split_coeff(e: Expr) -> tuple[Fraction, Expr]:
    """Split ``e`` into its numeric coefficient and the remaining monomial."""
    if isinstance(e, Num):
        return e.value, ONE
    if isinstance(e, Mul) and isinstance(e.factors[0], Num):
        rest = e.factors[1:]
        return e.factors[0].value, rest[0] if len(rest) == 1 else Mul(rest)
    return Fraction(1), e


def _with_coeff(c: Fraction, m: Expr) -> Expr:
    if c == 1:
        return m
    if m is ONE or m == ONE:
        return Num(c)
    if isinstance(m, Mul):
        return Mul((Num(c),) + m.factors)
    return Mul((Num(c), m))


def add(*terms) -> Expr:
    const = Fraction(0)
    collected: dict[Expr, Fraction] = {}
    stack = [as_expr(t) for t in reversed(terms)]
    while stack:
        t = stack.pop()
        if isinstance(t, Num):
            const += t.value
        elif isinstance(t, Add):
            stack.extend(reversed(t.terms))
        else:
            c, m = split_coeff(t)
            collected[m] = collected.get(m, Fraction(0)) + c
    items = sorted(((m, c) for m, c in collected.items() if c != 0),
                   key=lambda mc: (mc[0].key, mc[1]))
    out = [_with_coeff(c, m) for m, c in items]
    if const != 0:
        out.insert(0, Num(const))
    if not out:
        return ZERO
    if len(out) == 1:
        return out[0]
    return Add(tuple(out))


def neg(e: Expr) -> Expr:
    return mul(MINUS_ONE, e)


def sub(a, b) -> Expr:
    return add(a, neg(as_expr(b)))


def div(a, b) -> Expr:
    return mul(a, power(as_expr(b), MINUS_ONE))


def mul(*factors) -> Expr:
    coeff = Fraction(1)
    exponents: dict[Expr, list[Expr]] = {}
    exp_args: list[Expr] = []
    exp_factor: Expr | None = None
    stack = [as_expr(f) for f in factors]
    while True:
        while stack:
            f = stack.pop()
            if isinstance(f, Num):
                coeff *= f.value
            elif isinstance(f, Mul):
                stack.extend(f.factors)
            elif isinstance(f, Func) and f.head == "exp":
                exp_args.append(f.arg)
            elif isinstance(f, Pow):
                exponents.setdefault(f.base, []).append(f.exp)
            else:
                exponents.setdefault(f, []).append(ONE)
        if len(exp_args) > 1 or (exp_args and exp_factor is not None):
            if exp_factor is not None:
                exp_args.append(exp_factor.arg)
                exp_factor = None
            combined = func("exp", add(*exp_args))
            exp_args = []
            if isinstance(combined, Func) and combined.head == "exp":
                exp_factor = combined
            else:
                stack.append(combined)
                continue
        elif exp_args:
            exp_factor = Func("exp", exp_args.pop())
        break
    if coeff == 0:
        return ZERO
    plain: list[Expr] = [] if exp_factor is None else [exp_factor]
    again = False
    for base, exps in exponents.items():
        r = power(base, add(*exps)) if len(exps) > 1 else power(base, exps[0])
        if isinstance(r, Num):
            coeff *= r.value
            continue
        if isinstance(r, Mul) or (isinstance(r, Func) and r.head == "exp"):
            again = True
        plain.append(r)
    if coeff == 0:
        return ZERO
    if again:
        return mul(Num(coeff), *plain)
    if not plain:
        return Num(coeff)
    if len(plain) == 1:
        single = plain[0]
        if coeff == 1:
            return single
        if isinstance(single, Add):
            return add(*(mul(Num(coeff), t) for t in single.terms))
        return Mul((Num(coeff), single))
    plain.sort(key=lambda x: x.key)
    if coeff != 1:
        plain.insert(0, Num(coeff))
    return Mul(tuple(plain))


def _exact_root(value: Fraction, q: int) -> Fraction | None:
    if value < 0:
        if q % 2 == 0:
            return None
        r = _exact_root(-value, q)
        return None if r is None else -r
    num = _int_root(value.numerator, q)
    den = _int_root(value.denominator, q)
    if num is None or den is None:
        return None
    return Fraction(num, den)


def _int_root(n: int, q: int) -> int | None:
    if n < 2:
        return n
    r = round(n ** (1.0 / q))
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand ** q == n:
            return cand
    # float inaccuracy for huge n
    lo, hi = 0, 1 << (n.bit_length() // q + 1)
    while lo <= hi:
        mid = (lo + hi) // 2
        p = mid ** q
        if p == n:
            return mid
        if p < n:
            lo = mid + 1
        else:
            hi = mid - 1
    return None


def power(b, e) -> Expr:
    b = as_expr(b)
    e = as_expr(e)
    if isinstance(e, Num):
        if e.value == 0:
            return ONE
        if e.value == 1:
            return b
    if isinstance(b, Num):
        if b.value == 1:
            return ONE
        if b.value == 0:
            if isinstance(e, Num):
                if e.value > 0:
                    return ZERO
                raise DomainError("division by zero")
            return Pow(b, e)
        if isinstance(e, Num):
            p, q = e.value.numerator, e.value.denominator
            if q == 1:
                return Num(b.value ** p)
            r = _exact_root(b.value, q)
            if r is not None:
                return Num(r ** p)
            # keep the integer part of the exponent outside: 2^(3/2) = 2*2^(1/2)
            whole = p // q
            if whole != 0:
                return mul(Num(b.value ** whole), Pow(b, Num(Fraction(p - whole * q, q))))
        return Pow(b, e)
    if isinstance(b, Func) and b.head == "exp":
        return func("exp", mul(b.arg, e))
    if isinstance(e, Num) and e.is_integer:
        if isinstance(b, Pow):
            return power(b.base, mul(b.exp, e))
        if isinstance(b, Mul):
            return mul(*(power(f, e) for f in b.factors))
    return Pow(b, e)


def _looks_negative(e: Expr) -> bool:
    if isinstance(e, Num):
        return e.value < 0
    if isinstance(e, Add):
        for t in e.terms:
            if not isinstance(t, Num):
                return split_coeff(t)[0] < 0
        return False
    return split_coeff(e)[0] < 0


def _trig(head: str, arg: Expr) -> Expr:
    q = Fraction(0)
    rest_terms = []
    for t in (arg.terms if isinstance(arg, Add) else (arg,)):
        c, m = split_coeff(t)
        if m == PI:
            q += c
        else:
            rest_terms.append(t)
    rest = add(*rest_terms)
    sign = 1
    if _looks_negative(rest) or (rest == ZERO and q < 0):
        rest = neg(rest)
        q = -q
        if head == "sin":
            sign = -sign
    q %= 2
    if q.denominator <= 2:
        for _ in range(int(q * 2)):
            if head == "sin":
                head = "cos"
            else:
                head = "sin"
                sign = -sign
        q = Fraction(0)
    arg = add(rest, mul(Num(q), PI))
    if arg == ZERO:
        val = ZERO if head == "sin" else ONE
    else:
        val = Func(head, arg)
    return val if sign == 1 else neg(val)


def func(head: str, arg) -> Expr:
    arg = as_expr(arg)
    if head == "exp":
        arg = expand(arg)
        if arg == ZERO:
            return ONE
        if isinstance(arg, Func) and arg.head == "log":
            return arg.arg
        return Func("exp", arg)
    if head == "log":
        if arg == ONE:
            return ZERO
        if isinstance(arg, Func) and arg.head == "exp":
            return arg.arg
        return Func("log", arg)
    if head in ("sin", "cos"):
        return _trig(head, expand(arg))
    raise ValueError(f"unknown function {head!r}")


def sin(x) -> Expr:
    return func("sin", x)


def cos(x) -> Expr:
    return func("cos", x)


def exp(x) -> Expr:
    return func("exp", x)


def log(x) -> Expr:
    return func("log", x)


def sqrt(x) -> Expr:
    return power(x, HALF)


def integral(integrand, var: Symbol, lo, hi) -> Expr:
    """Held integral node (no evaluation is attempted)."""
    integrand = as_expr(integrand)
    if integrand == ZERO:
        return ZERO
    lo, hi = as_expr(lo), as_expr(hi)
    if lo == hi:
        return ZERO
    return Integral(integrand, var, lo, hi)


def piecewise(var: Symbol, pieces: Iterable) -> Expr:
    cleaned = []
    for lo, hi, v in pieces:
        lo, hi, v = as_expr(lo), as_expr(hi), as_expr(v)
        if not (isinstance(lo, Num) and isinstance(hi, Num)):
            raise SymApproxError("piecewise breakpoints must be rational numbers")
        if v == ZERO or lo.value >= hi.value:
            continue
        cleaned.append((lo, hi, v))
    cleaned.sort(key=lambda p: p[0].value)
    for (_, h1, _), (l2, _, _) in zip(cleaned, cleaned[1:]):
        if l2.value < h1.value:
            raise SymApproxError("piecewise intervals overlap")
    if not cleaned:
        return ZERO
    return Piecewise(var, tuple(cleaned))


def unknown(name: str, *args, derivs=None) -> Unknown:
    return Unknown(name, tuple(as_expr(a) for a in args), derivs)


def canon(e: Expr) -> Expr:
    """Rebuild ``e`` bottom-up through the canonical constructors."""
    return e.rebuild(canon)


# ---------------------------------------------------------------------------
# traversal helpers

def walk(e: Expr):
    yield e
    for c in e.children():
        yield from walk(c)


def free_of(e: Expr, s: Expr) -> bool:
    """True when ``s`` does not occur free in ``e`` (integration variables bind)."""
    if e == s:
        return False
    if isinstance(e, Integral):
        if e.var == s:
            return free_of(e.lo, s) and free_of(e.hi, s)
        return all(free_of(c, s) for c in (e.integrand, e.lo, e.hi))
    if isinstance(e, Piecewise) and e.var == s:
        return False
    if isinstance(e, Deriv) and e.var == s:
        return False
    return all(free_of(c, s) for c in e.children())


def free_symbols(e: Expr) -> set[Symbol]:
    if isinstance(e, Symbol):
        return {e}
    if isinstance(e, Integral):
        inner = free_symbols(e.integrand) - {e.var}
        return inner | free_symbols(e.lo) | free_symbols(e.hi)
    out: set[Symbol] = set()
    if isinstance(e, Piecewise):
        out.add(e.var)
    if isinstance(e, Deriv):
        out.add(e.var)
    for c in e.children():
        out |= free_symbols(c)
    return out


def has(e: Expr, predicate: Callable[[Expr], bool]) -> bool:
    return any(predicate(n) for n in walk(e))


def terms_of(e: Expr) -> tuple[Expr, ...]:
    return e.terms if isinstance(e, Add) else (e,)


def factors_of(e: Expr) -> tuple[Expr, ...]:
    return e.factors if isinstance(e, Mul) else (e,)


def expand(e: Expr) -> Expr:
    """Distribute products and positive integer powers over sums."""
    if isinstance(e, (Num, Symbol, Wild)):
        return e
    if isinstance(e, Add):
        return add(*(expand(t) for t in e.terms))
    if isinstance(e, Mul):
        acc: list[Expr] = [ONE]
        for f in e.factors:
            f = expand(f)
            parts = f.terms if isinstance(f, Add) else (f,)
            acc = [mul(a, p) for a in acc for p in parts]
        return add(*acc)
    if isinstance(e, Pow):
        b = expand(e.base)
        if isinstance(b, Add) and isinstance(e.exp, Num) and e.exp.is_integer and e.exp.value > 1:
            result: Expr = b
            for _ in range(int(e.exp.value) - 1):
                result = add(*(mul(x, y) for x in terms_of(result) for y in b.terms))
            return result
        return power(b, e.exp)
    if isinstance(e, Func):
        return func(e.head, expand(e.arg))
    return e


# ---------------------------------------------------------------------------
# substitution

def _wild_params(key: Unknown) -> tuple[str, ...]:
    names = []
    for a in key.args:
        if not isinstance(a, Wild):
            raise SymApproxError(f"function binding {key} must use wildcard arguments")
        names.append(a.name)
    return tuple(names)


def substitute(e: Expr, bindings: Mapping) -> Expr:
    """Simultaneous, capture-free substitution followed by canonicalisation.

    Keys may be symbols, wildcards, or unknown-function patterns such as
    ``u(_)`` whose value is a template in the same wildcard(s).  Derivatives
    of a substituted unknown are differentiated accordingly.
    """
    sym_map: dict[Expr, Expr] = {}
    fun_map: dict[str, tuple[tuple[str, ...], Expr]] = {}
    for k, v in bindings.items():
        k = as_expr(k) if not isinstance(k, Expr) else k
        v = as_expr(v)
        if isinstance(k, (Symbol, Wild)):
            sym_map[Wild(k.name) if isinstance(k, Wild) else k] = v
        elif isinstance(k, Unknown):
            fun_map[k.name] = (_wild_params(k), v)
        else:
            raise SymApproxError(f"cannot substitute for {k}")
    if not sym_map and not fun_map:
        return e
    return _subst(e, sym_map, fun_map)


def _subst(e: Expr, sym_map, fun_map) -> Expr:
    if isinstance(e, Symbol):
        return sym_map.get(e, e)
    if isinstance(e, Wild):
        return sym_map.get(Wild(e.name), e)
    if isinstance(e, Num):
        return e
    if isinstance(e, Unknown):
        args = tuple(_subst(a, sym_map, fun_map) for a in e.args)
        if e.name not in fun_map:
            return Unknown(e.name, args, e.derivs)
        params, template = fun_map[e.name]
        if len(params) != len(args):
            raise SymApproxError(f"arity mismatch substituting {e.name}")
        if not any(e.derivs):
            return _subst(template, {Wild(p): a for p, a in zip(params, args)}, {})
        from .calculus import diff
        slots = [fresh_symbol("x") for _ in params]
        body = _subst(template, {Wild(p): s for p, s in zip(params, slots)}, {})
        for s, n in zip(slots, e.derivs):
            if n:
                body = diff(body, s, n)
        return _subst(body, dict(zip(slots, args)), {})
    if isinstance(e, Integral):
        var = e.var
        if var in sym_map:
            raise SubstitutionIntoBoundVar(
                f"binding targets integration variable {var.name} of {e}")
        capture = any(not free_of(v, var) for k, v in sym_map.items()
                      if not free_of(e.integrand, k))
        capture = capture or any(not free_of(t, var) for _, t in fun_map.values())
        if capture:
            new_var = fresh_symbol(var.name)
            integrand = _subst(e.integrand, {var: new_var}, {})
            var = new_var
        else:
            integrand = e.integrand
        return integral(_subst(integrand, sym_map, fun_map), var,
                        _subst(e.lo, sym_map, fun_map), _subst(e.hi, sym_map, fun_map))
    if isinstance(e, Deriv):
        from .calculus import diff
        inner_map = {k: v for k, v in sym_map.items() if k != e.var}
        d = diff(_subst(e.expr, inner_map, fun_map), e.var, e.order)
        if e.var in sym_map:
            if has(d, lambda n: isinstance(n, Deriv) and n.var == e.var):
                raise SymApproxError(f"cannot evaluate held derivative {e} at a point")
            return _subst(d, {e.var: sym_map[e.var]}, {})
        return d
    if isinstance(e, Piecewise):
        inner_map = {k: v for k, v in sym_map.items() if k != e.var}
        pieces = [(lo, hi, _subst(v, inner_map, fun_map)) for lo, hi, v in e.pieces]
        if e.var in sym_map:
            target = sym_map[e.var]
            if isinstance(target, Num):
                for lo, hi, v in pieces:
                    if lo.value <= target.value < hi.value:
                        return _subst(v, {e.var: target}, {})
                return ZERO
            if isinstance(target, (Symbol, Wild)):
                return piecewise(target, [(lo, hi, _subst(v, {e.var: target}, {}))
                                          for lo, hi, v in pieces])
            raise SymApproxError("piecewise variable may only be replaced by a number or symbol")
        return piecewise(e.var, pieces)
    return e.rebuild(lambda c: _subst(c, sym_map, fun_map))


# ---------------------------------------------------------------------------
# pattern matching and rewriting

def match(e: Expr, pattern: Expr, bindings: dict | None = None) -> dict | None:
    """Structural match of canonical ``e`` against ``pattern``.

    Returns a dict mapping wildcard names to sub-expressions, or ``None``.
    Operands of sums and products are matched in any order, but a wildcard
    stands for exactly one operand (no associative grouping).
    """
    return _match(e, pattern, {} if bindings is None else dict(bindings))


def _match(e: Expr, p: Expr, b: dict) -> dict | None:
    if isinstance(p, Wild):
        if p.kind is not None and not isinstance(e, p.kind):
            return None
        if p.name in b:
            return b if b[p.name] == e else None
        b = dict(b)
        b[p.name] = e
        return b
    if type(e) is not type(p):
        return None
    if isinstance(p, (Num, Symbol)):
        return b if p == e else None
    if isinstance(p, Func) and p.head != e.head:
        return None
    if isinstance(p, Unknown) and (p.name != e.name or p.derivs != e.derivs):
        return None
    if isinstance(p, Deriv) and p.order != e.order:
        return None
    if isinstance(p, Piecewise) and len(p.pieces) != len(e.pieces):
        return None
    pc, ec = p.children(), e.children()
    if isinstance(p, Deriv):
        pc, ec = (p.expr, p.var), (e.expr, e.var)
    elif isinstance(p, Piecewise):
        pc, ec = (p.var,) + pc, (e.var,) + ec
    if len(pc) != len(ec):
        return None
    if isinstance(p, (Add, Mul)):
        # concrete pattern operands first so that wildcards see fewer candidates
        ordered = sorted(pc, key=lambda q: isinstance(q, Wild))
        return _match_unordered(list(ec), ordered, b)
    for sub_e, sub_p in zip(ec, pc):
        b = _match(sub_e, sub_p, b)
        if b is None:
            return None
    return b


def _match_unordered(ec: list[Expr], pc: list[Expr], b: dict) -> dict | None:
    if not pc:
        return b
    head, rest = pc[0], pc[1:]
    for i, cand in enumerate(ec):
        got = _match(cand, head, b)
        if got is not None:
            done = _match_unordered(ec[:i] + ec[i + 1:], rest, got)
            if done is not None:
                return done
    return None


def wildcards(e: Expr) -> set[str]:
    return {n.name for n in walk(e) if isinstance(n, Wild)}


def instantiate(template: Expr, bindings: Mapping[str, Expr]) -> Expr:
    return substitute(template, {Wild(k): v for k, v in bindings.items()})


@dataclass(frozen=True)
class Rule:
    """Rewrite rule ``lhs -> rhs`` guarded by an optional condition on the bindings."""

    lhs: Expr
    rhs: Expr
    condition: Callable[[dict], bool] | None = field(default=None, compare=False)
    name: str = ""

    def __post_init__(self):
        missing = wildcards(self.rhs) - wildcards(self.lhs)
        if missing:
            raise ValueError(f"rule {self.name or self.lhs}: unbound wildcards {sorted(missing)}")

    def apply(self, e: Expr) -> Expr | None:
        b = match(e, self.lhs)
        if b is None:
            return None
        if self.condition is not None and not self.condition(b):
            return None
        return instantiate(self.rhs, b)


def rule(lhs, rhs, condition=None, name: str = "") -> Rule:
    return Rule(as_expr(lhs), as_expr(rhs), condition, name)


def _rewrite_pass(e: Expr, rules: list[Rule]) -> tuple[Expr, bool]:
    fired = False

    def visit(c: Expr) -> Expr:
        nonlocal fired
        new, f = _rewrite_pass(c, rules)
        fired = fired or f
        return new

    if e.children():
        if isinstance(e, Integral):
            new = integral(visit(e.integrand), e.var, visit(e.lo), visit(e.hi))
        elif isinstance(e, Deriv):
            from .calculus import diff
            new = diff(visit(e.expr), e.var, e.order)
        else:
            new = e.rebuild(visit)
    else:
        new = e
    for r in rules:
        out = r.apply(new)
        if out is not None:
            return out, True
    return new, fired


DEFAULT_MAX_PASSES = 1000


def rewrite_fixpoint(e: Expr, rules: list[Rule], max_passes: int | None = None) -> Expr:
    """Apply ``rules`` leftmost-innermost until none fires.

    Raises :class:`RewriteBudgetExceeded` when rules are still firing after
    ``max_passes`` passes (default :data:`DEFAULT_MAX_PASSES`, read at call time).
    """
    if max_passes is None:
        max_passes = DEFAULT_MAX_PASSES
    if max_passes < 1:
        raise ValueError("max_passes must be >= 1")
    e = canon(e)
    for _ in range(max_passes):
        e, fired = _rewrite_pass(e, rules)
        if not fired:
            return e
    _, fired = _rewrite_pass(e, rules)
    if fired:
        raise RewriteBudgetExceeded(f"rules still firing after {max_passes} passes")
    return e


# ---------------------------------------------------------------------------
# polynomial grading

def collect_powers(e: Expr, s: Symbol, max_order: int) -> list[Expr]:
    """Coefficients ``[c0, ..., c_max_order]`` of ``e`` as a polynomial in ``s``."""
    buckets: list[list[Expr]] = [[] for _ in range(max_order + 1)]
    for t in terms_of(expand(e)):
        k = 0
        rest = []
        for f in factors_of(t):
            if f == s:
                k += 1
            elif isinstance(f, Pow) and f.base == s and isinstance(f.exp, Num) \
                    and f.exp.is_integer and f.exp.value > 0:
                k += int(f.exp.value)
            else:
                if not free_of(f, s):
                    raise NotPolynomialInSymbol(f"{s} occurs in non-polynomial position {f}")
                rest.append(f)
        if k <= max_order:
            buckets[k].append(mul(*rest))
    return [add(*b) for b in buckets]


# ---------------------------------------------------------------------------
# numeric evaluation

_MATH = {"sin": math.sin, "cos": math.cos, "exp": math.exp, "log": math.log}


def eval_numeric(e: Expr, bindings: Mapping | None = None) -> float:
    """Evaluate ``e`` in IEEE double precision.

    ``bindings`` maps symbols (or their names) to numbers; ``pi`` is bound
    automatically.
    """
    env = _env(bindings)
    return _eval(e, env)


def _env(bindings) -> dict[str, float]:
    env = {"pi": math.pi}
    for k, v in (bindings or {}).items():
        env[k.name if isinstance(k, Symbol) else str(k)] = float(v)
    return env


def _eval(e: Expr, env: dict[str, float]) -> float:
    if isinstance(e, Num):
        return float(e.value)
    if isinstance(e, Symbol):
        try:
            return env[e.name]
        except KeyError:
            raise UnboundSymbol(f"symbol {e.name} is unbound") from None
    if isinstance(e, Add):
        return math.fsum(_eval(t, env) for t in e.terms)
    if isinstance(e, Mul):
        out = 1.0
        for f in e.factors:
            out *= _eval(f, env)
        return out
    if isinstance(e, Pow):
        b = _eval(e.base, env)
        x = _eval(e.exp, env)
        if b == 0.0 and x < 0:
            raise DomainError(f"division by zero in {e}")
        if b < 0 and not float(x).is_integer():
            raise DomainError(f"fractional power of negative number in {e}")
        try:
            return b ** x
        except OverflowError as exc:
            raise DomainError(str(exc)) from None
    if isinstance(e, Func):
        a = _eval(e.arg, env)
        if e.head == "log" and a <= 0:
            raise DomainError(f"log of non-positive value {a}")
        try:
            return _MATH[e.head](a)
        except OverflowError as exc:
            raise DomainError(str(exc)) from None
    if isinstance(e, Piecewise):
        x = env.get(e.var.name)
        if x is None:
            raise UnboundSymbol(f"symbol {e.var.name} is unbound")
        for lo, hi, v in e.pieces:
            if float(lo.value) <= x < float(hi.value):
                return _eval(v, env)
        return 0.0
    raise EvaluationError(f"cannot evaluate held or unknown form {e}")


def compile_numeric(e: Expr, args: Iterable) -> Callable[..., float]:
    """Compile ``e`` into a plain Python function of the given symbols."""
    names = [a.name if isinstance(a, Symbol) else str(a) for a in args]
    env_names = {n: f"a{i}" for i, n in enumerate(names)}
    consts: dict[str, object] = {"_m": math, "_pw": _pw_eval, "_pow": _safe_pow}

    def gen(x: Expr) -> str:
        if isinstance(x, Num):
            return repr(float(x.value))
        if isinstance(x, Symbol):
            if x.name in env_names:
                return env_names[x.name]
            if x.name == "pi":
                return repr(math.pi)
            raise UnboundSymbol(f"symbol {x.name} is unbound")
        if isinstance(x, Add):
            return "(" + " + ".join(gen(t) for t in x.terms) + ")"
        if isinstance(x, Mul):
            return "(" + " * ".join(gen(f) for f in x.factors) + ")"
        if isinstance(x, Pow):
            if isinstance(x.exp, Num) and x.exp.is_integer:
                return f"_pow({gen(x.base)}, {int(x.exp.value)})"
            return f"_pow({gen(x.base)}, {gen(x.exp)})"
        if isinstance(x, Func):
            return f"_m.{x.head}({gen(x.arg)})"
        if isinstance(x, Piecewise):
            tag = f"_p{len(consts)}"
            consts[tag] = tuple((float(lo.value), float(hi.value),
                                 compile_numeric(v, names)) for lo, hi, v in x.pieces)
            return f"_pw({gen(x.var)}, {tag}, ({''.join(env_names[n] + ', ' for n in names)}))"
        raise EvaluationError(f"cannot compile held or unknown form {x}")

    body = gen(e)
    src = f"def _f({', '.join(env_names[n] for n in names)}):\n    return {body}\n"
    ns = dict(consts)
    exec(compile(src, "<symapprox>", "exec"), ns)  # noqa: S102 - generated from a closed grammar
    fn = ns["_f"]

    def wrapped(*vals):
        try:
            return fn(*vals)
        except ZeroDivisionError:
            raise DomainError(f"division by zero in {e}") from None
        except (ValueError, OverflowError) as exc:
            raise DomainError(str(exc)) from None

    return wrapped


def _pw_eval(x, pieces, allargs):
    for lo, hi, f in pieces:
        if lo <= x < hi:
            return f(*allargs)
    return 0.0


def _safe_pow(b, x):
    if b == 0.0 and x < 0:
        raise ZeroDivisionError
    r = b ** x
    if isinstance(r, complex):
        raise ValueError("fractional power of negative number")
    return r
