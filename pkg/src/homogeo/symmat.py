"""Small dense matrices with symbolic entries.

Sizes here are chart dimensions (at most 6 or so), so cofactor expansion
for determinants and adjugate inverses are fine and avoid pivoting
decisions that would need zero tests.
"""

from __future__ import annotations

from fractions import Fraction
from typing import List, Sequence

from . import expr as ex

__all__ = ["mat", "identity", "zeros", "mat_mul", "mat_vec", "transpose",
           "mat_add", "mat_sub", "mat_scale", "det", "inverse", "solve_mat",
           "simplify_mat"]

Matrix = List[List[ex.Expr]]


def mat(rows) -> Matrix:
    return [[ex._coerce(v) for v in row] for row in rows]


def identity(n: int) -> Matrix:
    return [[ex.ONE if i == j else ex.ZERO for j in range(n)] for i in range(n)]


def zeros(n: int, m: int | None = None) -> Matrix:
    m = n if m is None else m
    return [[ex.ZERO] * m for _ in range(n)]


def transpose(a: Matrix) -> Matrix:
    return [list(col) for col in zip(*a)]


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    n, k, m = len(a), len(b), len(b[0])
    assert len(a[0]) == k
    return [[ex.add(*[ex.mul(a[i][t], b[t][j]) for t in range(k)])
             for j in range(m)] for i in range(n)]


def mat_vec(a: Matrix, v: Sequence[ex.Expr]):
    return [ex.add(*[ex.mul(a[i][j], v[j]) for j in range(len(v))])
            for i in range(len(a))]


def mat_add(a: Matrix, b: Matrix) -> Matrix:
    return [[ex.add(x, y) for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_sub(a: Matrix, b: Matrix) -> Matrix:
    return [[ex.sub(x, y) for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_scale(a: Matrix, s) -> Matrix:
    return [[ex.mul(s, x) for x in row] for row in a]


def det(a: Matrix) -> ex.Expr:
    n = len(a)
    memo: dict = {}

    def minor(rows: tuple, cols: tuple) -> ex.Expr:
        if len(rows) == 1:
            return a[rows[0]][cols[0]]
        key = (rows, cols)
        hit = memo.get(key)
        if hit is not None:
            return hit
        r = rows[0]
        parts = []
        for k, c in enumerate(cols):
            entry = a[r][c]
            if entry.is_zero_literal():
                continue
            sub = minor(rows[1:], cols[:k] + cols[k + 1:])
            term = ex.mul(entry, sub)
            parts.append(term if k % 2 == 0 else ex.neg(term))
        out = ex.add(*parts) if parts else ex.ZERO
        memo[key] = out
        return out

    return minor(tuple(range(n)), tuple(range(n)))


def _cofactor(a: Matrix, i: int, j: int) -> ex.Expr:
    n = len(a)
    sub = [[a[r][c] for c in range(n) if c != j] for r in range(n) if r != i]
    d = det(sub) if sub else ex.ONE
    return d if (i + j) % 2 == 0 else ex.neg(d)


def inverse(a: Matrix, precomputed_det: ex.Expr | None = None) -> Matrix:
    """Adjugate inverse; entries are exact symbolic quotients by det."""
    n = len(a)
    d = det(a) if precomputed_det is None else precomputed_det
    dinv = ex.pw(d, Fraction(-1))
    return [[ex.mul(_cofactor(a, j, i), dinv) for j in range(n)] for i in range(n)]


def solve_mat(a: Matrix, b: Matrix) -> Matrix:
    """Solve a @ x = b symbolically (x = a^{-1} b)."""
    return mat_mul(inverse(a), b)


def simplify_mat(a: Matrix, constraints=()) -> Matrix:
    return [[ex.simplify(x, constraints) for x in row] for row in a]
