"""Exact linear algebra, checked against sympy's DomainMatrix as an oracle."""

import random
from fractions import Fraction

import pytest
from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from polyvector.linalg import QMatrix, free_columns, nullspace, rank, solve


def _oracle(m: QMatrix) -> DomainMatrix:
    return DomainMatrix([[QQ(v.numerator, v.denominator) for v in row] for row in m.to_dense()],
                        m.shape, QQ)


def _random_matrix(rng, rows, cols, density=0.5):
    ent = {}
    for i in range(rows):
        for j in range(cols):
            if rng.random() < density:
                ent[(i, j)] = Fraction(rng.randint(-5, 5), rng.randint(1, 4))
    return QMatrix(rows, cols, ent)


def _low_rank(rng, rows, cols, r):
    a = _random_matrix(rng, rows, r, 0.8)
    b = _random_matrix(rng, r, cols, 0.8)
    return a @ b


@pytest.mark.parametrize("seed", range(6))
def test_rank_and_nullspace_match_sympy(seed):
    rng = random.Random(seed)
    for _ in range(50):
        rows, cols = rng.randint(0, 7), rng.randint(1, 7)
        m = _low_rank(rng, rows, cols, rng.randint(1, 4)) if rows and rng.random() < 0.5 \
            else _random_matrix(rng, rows, cols)
        oracle = _oracle(m)
        assert rank(m) == oracle.rank()
        kernel = nullspace(m)
        assert len(kernel) == cols - oracle.rank()
        for vec in kernel:
            assert m.apply(vec) == {}
        # kernel vectors are independent: the stacked matrix has full rank
        if kernel:
            assert rank(QMatrix.from_columns(cols, kernel)) == len(kernel)


def test_nullspace_normalized_on_free_columns():
    m = QMatrix.from_dense([[1, 2, 3, 4], [2, 4, 6, 9]])
    free = free_columns(m)
    assert free == [1, 2]
    for k, vec in enumerate(nullspace(m)):
        assert [vec.get(f, 0) for f in free] == [1 if i == k else 0 for i in range(len(free))]


def test_solve_consistent_and_inconsistent():
    m = QMatrix.from_dense([[1, 1], [1, -1], [2, 0]])
    x = solve(m, {0: Fraction(3), 1: Fraction(1), 2: Fraction(4)})
    assert x == {0: 2, 1: 1}
    assert solve(m, {0: Fraction(1), 1: Fraction(1), 2: Fraction(0)}) is None


def test_solve_matches_sympy_on_random_systems(rng):
    for _ in range(100):
        m = _random_matrix(rng, rng.randint(1, 6), rng.randint(1, 6))
        x0 = {j: Fraction(rng.randint(-3, 3)) for j in range(m.ncols)}
        rhs = m.apply(x0)
        x = solve(m, rhs)
        assert x is not None and m.apply(x) == rhs


def test_arithmetic_and_shapes():
    a = QMatrix.from_dense([[1, 2], [3, 4]])
    assert (a @ QMatrix.identity(2)) == a
    assert (a - a).is_zero()
    assert a.transpose()[0, 1] == 3
    assert (2 * a)[1, 1] == 8
    with pytest.raises(ValueError):
        a @ QMatrix.zeros(3, 1)
    with pytest.raises(IndexError):
        QMatrix(1, 1, {(1, 0): 1})
