import numpy as np
import pytest

from gf2 import gf2_matmul, gf2_nullspace_basis, gf2_rank, gf2_row_reduce, gf2_solve, gf2_span_rank_modulo, to_gf2


@pytest.mark.parametrize("matrix, rank", [
    ([[0, 0], [0, 0]], 0),
    ([[1, 1], [1, 1]], 1),
    ([[1, 0], [0, 1]], 2),
    ([[1, 1, 0], [0, 1, 1], [1, 0, 1]], 2),  # rows sum to zero mod 2
    ([[2, 3], [4, 5]], 1),
    (np.zeros((0, 4)), 0),
])
def test_rank_examples(matrix, rank):
    assert gf2_rank(matrix) == rank


def test_row_reduce_is_reduced():
    res = gf2_row_reduce([[0, 1, 1], [1, 1, 0], [1, 0, 1]])
    assert res.rank == 2
    assert res.pivots == (0, 1)
    for row, col in enumerate(res.pivots):
        column = res.matrix[:, col]
        assert column[row] == 1 and column.sum() == 1


def test_row_reduce_rejects_vectors():
    with pytest.raises(ValueError):
        gf2_row_reduce([1, 0, 1])


def test_nullspace_spans_kernel(rng):
    for _ in range(50):
        m, n = rng.integers(1, 7, size=2)
        mat = rng.integers(0, 2, size=(m, n))
        basis = gf2_nullspace_basis(mat)
        assert basis.shape[0] == n - gf2_rank(mat)
        for vec in basis:
            assert not gf2_matmul(mat, vec.reshape(-1, 1)).any()


def test_solve_consistent_and_inconsistent():
    mat = [[1, 1, 0], [0, 1, 1]]
    x = gf2_solve(mat, [1, 0])
    assert x is not None
    assert (gf2_matmul(mat, x.reshape(-1, 1)).reshape(-1) == to_gf2([1, 0])).all()
    assert gf2_solve([[1, 1], [1, 1]], [1, 0]) is None


def test_solve_random(rng):
    for _ in range(50):
        mat = rng.integers(0, 2, size=(5, 6))
        x_true = rng.integers(0, 2, size=6)
        rhs = gf2_matmul(mat, x_true.reshape(-1, 1)).reshape(-1)
        x = gf2_solve(mat, rhs)
        assert x is not None
        assert (gf2_matmul(mat, x.reshape(-1, 1)).reshape(-1) == rhs).all()


def test_span_rank_modulo():
    base = np.array([[1], [0], [0]])
    vectors = np.array([[1, 1], [0, 1], [0, 0]])
    # first column lies in span(base), second does not
    assert gf2_span_rank_modulo(base, vectors) == 1
    assert gf2_span_rank_modulo(base, np.zeros((3, 0), dtype=np.uint8)) == 0
