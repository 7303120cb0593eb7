"""Exact linear algebra: rref, rank, nullspace over Fractions."""
from fractions import Fraction

import numpy as np
import pytest

from contextua.exactla import (
    frac_matrix,
    frac_vector,
    identity,
    matmul,
    matvec,
    nullspace,
    nullspace_free_columns,
    rank,
    rref,
    transpose,
)


def _rand_frac_matrix(rng, m, n, den=7):
    return [[Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, den)))
             for _ in range(n)] for _ in range(m)]


def test_matmul_identity():
    rng = np.random.default_rng(1)
    a = _rand_frac_matrix(rng, 4, 4)
    assert matmul(a, identity(4)) == a
    assert matmul(identity(4), a) == a


def test_matvec_matches_matmul():
    rng = np.random.default_rng(2)
    a = _rand_frac_matrix(rng, 3, 5)
    x = [Fraction(k, 3) for k in range(5)]
    col = matmul(a, [[v] for v in x])
    assert matvec(a, x) == [row[0] for row in col]


def test_transpose_involution():
    rng = np.random.default_rng(3)
    a = _rand_frac_matrix(rng, 3, 6)
    assert transpose(transpose(a)) == a


def test_rref_solves_consistent_system():
    a = frac_matrix([[2, 1], [1, 3]])
    b = frac_vector([5, 10])
    r_mat, rhs, pivots = rref(a, b)
    assert len(pivots) == 2
    x = [Fraction(0)] * 2
    for row, col in pivots:
        x[col] = rhs[row]
    assert matvec(a, x) == b
    assert x == [Fraction(1), Fraction(3)]


def test_rref_flags_inconsistency():
    a = frac_matrix([[1, 1], [2, 2]])
    b = frac_vector([1, 3])
    r_mat, rhs, pivots = rref(a, b)
    assert len(pivots) == 1
    tail = [rhs[i] for i in range(len(pivots), len(a))]
    assert any(x != 0 for x in tail)


def test_rref_respects_column_order():
    a = frac_matrix([[1, 2], [2, 4]])
    _, _, pivots = rref(a, col_order=[1, 0])
    assert pivots[0][1] == 1


@pytest.mark.parametrize("seed", range(6))
def test_rank_matches_numpy(seed):
    rng = np.random.default_rng(seed)
    m, n = int(rng.integers(2, 7)), int(rng.integers(2, 7))
    a = _rand_frac_matrix(rng, m, n)
    np_rank = np.linalg.matrix_rank(np.array([[float(x) for x in r] for r in a]))
    assert rank(a) == np_rank


@pytest.mark.parametrize("seed", range(6))
def test_nullspace_is_exact_kernel(seed):
    rng = np.random.default_rng(100 + seed)
    m, n = int(rng.integers(2, 6)), int(rng.integers(3, 8))
    a = _rand_frac_matrix(rng, m, n)
    basis = nullspace(a)
    assert len(basis) == n - rank(a)
    for vec in basis:
        assert matvec(a, vec) == [Fraction(0)] * m


def test_nullspace_coordinates_read_off_free_columns():
    # each basis vector carries a 1 at its own free column, 0 at the others
    rng = np.random.default_rng(42)
    a = _rand_frac_matrix(rng, 3, 6)
    free = nullspace_free_columns(a)
    basis = nullspace(a)
    assert len(basis) == len(free)
    for k, vec in enumerate(basis):
        for j_pos, j in enumerate(free):
            assert vec[j] == (1 if j_pos == k else 0)


def test_rank_of_rank_deficient():
    a = frac_matrix([[1, 2, 3], [2, 4, 6], [1, 1, 1]])
    assert rank(a) == 2
    assert len(nullspace(a)) == 1
