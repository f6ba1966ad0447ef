"""Gaussian elimination and determinants over rational functions of the free symbols."""
from __future__ import annotations

from collections.abc import Sequence

from .errors import AmbiguousPivot, SingularSystem
from .expr import ONE, ZERO, Expr, Symbol, add, as_expr, collect_powers, expand, mul, neg, power
from .ratfunc import Zeroness, is_numeric_constant, is_zero, simplify
from .report import note_assumption, note_warning

Matrix = list[list[Expr]]


def as_matrix(rows: Sequence[Sequence]) -> Matrix:
    m = [[as_expr(x) for x in row] for row in rows]
    if m and any(len(r) != len(m[0]) for r in m):
        raise ValueError("ragged matrix")
    return m


def _choose_pivot(col: list[Expr]) -> int:
    """Index of the pivot: first surely-nonzero entry, else a first undecided one."""
    verdicts = [is_zero(x) for x in col]
    for i, v in enumerate(verdicts):
        if v is Zeroness.NONZERO:
            return i
    for i, v in enumerate(verdicts):
        if v is Zeroness.UNKNOWN:
            note_warning(f"pivot {col[i]} could not be decided; assumed nonzero")
            return i
    if any(v is Zeroness.PROBABLY_ZERO for v in verdicts):
        raise AmbiguousPivot(f"only probably-zero pivot candidates remain: {col}")
    return -1


def linear_solve_symbolic(A: Sequence[Sequence], b: Sequence) -> list[Expr]:
    """Solve ``A x = b`` exactly, treating free symbols as generic.

    Non-numeric pivots are recorded as genericity assumptions in the active
    :class:`~symapprox.report.SolveReport`.
    """
    M = as_matrix(A)
    rhs = [as_expr(x) for x in b]
    n = len(M)
    if any(len(r) != n for r in M) or len(rhs) != n:
        raise ValueError("linear_solve_symbolic needs a square system")
    M = [[simplify(x) for x in row] + [simplify(r)] for row, r in zip(M, rhs)]
    for c in range(n):
        k = _choose_pivot([M[r][c] for r in range(c, n)])
        if k < 0:
            raise SingularSystem(f"no nonzero pivot in column {c + 1}")
        k += c
        M[c], M[k] = M[k], M[c]
        piv = M[c][c]
        if not is_numeric_constant(piv):
            note_assumption(piv)
        inv = power(piv, -1)
        M[c] = [ZERO] * c + [ONE] + [simplify(mul(x, inv)) for x in M[c][c + 1:]]
        for r in range(n):
            if r == c or M[r][c] == ZERO:
                continue
            f = M[r][c]
            M[r] = [simplify(add(x, neg(mul(f, y)))) if j >= c else x
                    for j, (x, y) in enumerate(zip(M[r], M[c]))]
    return [M[r][n] for r in range(n)]


def det(A: Sequence[Sequence]) -> Expr:
    """Determinant by fraction-free (Bareiss) elimination with simplification."""
    M = [[simplify(x) for x in row] for row in as_matrix(A)]
    n = len(M)
    if n == 0:
        return ONE
    sign = ONE
    prev = ONE
    for c in range(n - 1):
        if is_zero(M[c][c]) is Zeroness.ZERO:
            for r in range(c + 1, n):
                if is_zero(M[r][c]) is not Zeroness.ZERO:
                    M[c], M[r] = M[r], M[c]
                    sign = neg(sign)
                    break
            else:
                return ZERO
        inv_prev = power(prev, -1)
        for r in range(c + 1, n):
            for j in range(c + 1, n):
                M[r][j] = simplify(mul(add(mul(M[r][j], M[c][c]), neg(mul(M[r][c], M[c][j]))),
                                       inv_prev))
            M[r][c] = ZERO
        prev = M[c][c]
    return simplify(mul(sign, M[n - 1][n - 1]))


def char_poly(K: Sequence[Sequence], M: Sequence[Sequence], lam: Symbol) -> Expr:
    """``det(K - lam*M)`` expanded as a polynomial in ``lam``."""
    Km, Mm = as_matrix(K), as_matrix(M)
    n = len(Km)
    A = [[add(Km[i][j], neg(mul(lam, Mm[i][j]))) for j in range(n)] for i in range(n)]
    d = expand(det(A))
    coeffs = collect_powers(d, lam, n)
    return add(*(mul(simplify(c), power(lam, i)) for i, c in enumerate(coeffs)))


def mat_vec(A: Matrix, v: Sequence[Expr]) -> list[Expr]:
    return [simplify(add(*(mul(a, x) for a, x in zip(row, v)))) for row in A]
