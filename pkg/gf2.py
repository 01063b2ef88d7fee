"""GF(2) linear algebra on dense numpy uint8 arrays.

Elimination is plain Gaussian with first-nonzero pivoting, so results are
deterministic given row/column order.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np


def to_gf2(matrix) -> np.ndarray:
    return np.array(matrix, dtype=np.uint8) % 2


def gf2_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # int64 product keeps the accumulation exact before reduction
    return (to_gf2(a).astype(np.int64) @ to_gf2(b).astype(np.int64) % 2).astype(np.uint8)


@dataclass(frozen=True)
class RowReduceResult:
    matrix: np.ndarray
    rank: int
    pivots: Tuple[int, ...]


def gf2_row_reduce(matrix) -> RowReduceResult:
    """Reduced row echelon form over GF(2)."""
    mat = to_gf2(matrix).copy()
    if mat.ndim != 2:
        raise ValueError("expected a 2-d array")
    m, n = mat.shape
    pivots = []
    row = 0
    for col in range(n):
        if row == m:
            break
        nz = np.nonzero(mat[row:, col])[0]
        if nz.size == 0:
            continue
        pivot = row + int(nz[0])
        if pivot != row:
            mat[[row, pivot]] = mat[[pivot, row]]
        hits = np.nonzero(mat[:, col])[0]
        for r in hits:
            if r != row:
                mat[r, :] ^= mat[row, :]
        pivots.append(col)
        row += 1
    return RowReduceResult(matrix=mat, rank=len(pivots), pivots=tuple(pivots))


def gf2_rank(matrix) -> int:
    mat = to_gf2(matrix)
    if mat.size == 0:
        return 0
    return gf2_row_reduce(mat).rank


def gf2_nullspace_basis(matrix) -> np.ndarray:
    """Rows of the result span {x : matrix @ x = 0}."""
    mat = to_gf2(matrix)
    n = mat.shape[1]
    if mat.shape[0] == 0:
        return np.eye(n, dtype=np.uint8)
    reduced = gf2_row_reduce(mat)
    pivots = set(reduced.pivots)
    basis = []
    for free in (c for c in range(n) if c not in pivots):
        vec = np.zeros(n, dtype=np.uint8)
        vec[free] = 1
        for row, col in enumerate(reduced.pivots):
            if reduced.matrix[row, free]:
                vec[col] = 1
        basis.append(vec)
    if not basis:
        return np.zeros((0, n), dtype=np.uint8)
    return np.vstack(basis)


def gf2_solve(matrix, rhs) -> np.ndarray | None:
    """One solution x of matrix @ x = rhs, or None when inconsistent."""
    mat = to_gf2(matrix)
    vec = to_gf2(rhs).reshape(-1)
    m, n = mat.shape
    if m == 0:
        return np.zeros(n, dtype=np.uint8)
    aug = np.concatenate([mat, vec.reshape(-1, 1)], axis=1)
    reduced = gf2_row_reduce(aug)
    if n in reduced.pivots:
        return None
    x = np.zeros(n, dtype=np.uint8)
    for row, col in enumerate(reduced.pivots):
        x[col] = reduced.matrix[row, n]
    return x


def gf2_span_rank_modulo(base: np.ndarray, vectors: np.ndarray) -> int:
    """Rank of the image of `vectors` (columns) in the quotient by span(`base` columns)."""
    base = to_gf2(base)
    vectors = to_gf2(vectors)
    if vectors.shape[1] == 0:
        return 0
    combined = np.concatenate([base, vectors], axis=1)
    return gf2_rank(combined) - gf2_rank(base)
