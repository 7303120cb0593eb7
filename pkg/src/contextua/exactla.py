"""Dense exact linear algebra over fractions.Fraction.

Systems here are small (at most a few hundred rows), so everything is
plain lists of Fractions; no pivoting heuristics beyond the caller's
column order are needed for exactness.
"""
from __future__ import annotations

from fractions import Fraction

Matrix = list[list[Fraction]]
Vector = list[Fraction]


def frac_matrix(rows) -> Matrix:
    return [[Fraction(x) for x in row] for row in rows]


def frac_vector(entries) -> Vector:
    return [Fraction(x) for x in entries]


def identity(n: int) -> Matrix:
    return [[Fraction(1) if i == j else Fraction(0) for j in range(n)] for i in range(n)]


def matmul(a: Matrix, b: Matrix) -> Matrix:
    assert len(a[0]) == len(b)
    cols = range(len(b[0]))
    return [[sum(row[k] * b[k][j] for k in range(len(b))) for j in cols] for row in a]


def matvec(a: Matrix, x: Vector) -> Vector:
    assert len(a[0]) == len(x)
    return [sum(row[k] * x[k] for k in range(len(x))) for row in a]


def transpose(a: Matrix) -> Matrix:
    return [list(col) for col in zip(*a)]


def rref(a: Matrix, b: Vector | None = None, col_order=None):
    """Reduced row echelon form of [a | b], processing columns in col_order.

    Returns (R, rhs, pivots) where pivots is a list of (row, col) pairs in
    elimination order.  Rows below len(pivots) are zero in R; a nonzero rhs
    on such a row means the system is inconsistent.
    """
    m = len(a)
    n = len(a[0]) if m else 0
    r_mat = [list(row) for row in a]
    rhs = list(b) if b is not None else None
    order = list(col_order) if col_order is not None else list(range(n))
    pivots: list[tuple[int, int]] = []
    r = 0
    for c in order:
        piv = None
        for i in range(r, m):
            if r_mat[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        r_mat[r], r_mat[piv] = r_mat[piv], r_mat[r]
        if rhs is not None:
            rhs[r], rhs[piv] = rhs[piv], rhs[r]
        inv = r_mat[r][c]
        if inv != 1:
            r_mat[r] = [x / inv for x in r_mat[r]]
            if rhs is not None:
                rhs[r] = rhs[r] / inv
        for i in range(m):
            if i != r and r_mat[i][c] != 0:
                f = r_mat[i][c]
                r_mat[i] = [x - f * y for x, y in zip(r_mat[i], r_mat[r])]
                if rhs is not None:
                    rhs[i] = rhs[i] - f * rhs[r]
        pivots.append((r, c))
        r += 1
        if r == m:
            break
    return r_mat, rhs, pivots


def rank(a: Matrix) -> int:
    if not a:
        return 0
    _, _, pivots = rref(a)
    return len(pivots)


def nullspace(a: Matrix) -> Matrix:
    """Basis of {x : a x = 0} as columns, one per free column of the RREF.

    Basis vector j has a 1 at its free column and zeros at every other free
    column, so coordinates w.r.t. this basis can be read off directly.
    Returned as a list of vectors (length n each), ordered by free column.
    """
    m = len(a)
    n = len(a[0]) if m else 0
    r_mat, _, pivots = rref(a)
    pivot_cols = [c for _, c in pivots]
    free_cols = [j for j in range(n) if j not in pivot_cols]
    basis = []
    for j in free_cols:
        vec = [Fraction(0)] * n
        vec[j] = Fraction(1)
        for row, c in pivots:
            vec[c] = -r_mat[row][j]
        basis.append(vec)
    return basis


def nullspace_free_columns(a: Matrix) -> list[int]:
    m = len(a)
    n = len(a[0]) if m else 0
    _, _, pivots = rref(a)
    pivot_cols = {c for _, c in pivots}
    return [j for j in range(n) if j not in pivot_cols]
