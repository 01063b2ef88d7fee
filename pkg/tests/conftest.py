import os
import sys

import numpy as np
import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if ROOT not in sys.path:
    sys.path.insert(0, ROOT)

from graded_gf2 import DifferentialSpace, GradedSpace, OrderInterval, OrderMap  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def _unitriangular_inverse(U: np.ndarray) -> np.ndarray:
    n = U.shape[0]
    inv = np.eye(n, dtype=np.int64)
    for i in range(n):
        for j in range(i):
            inv[i, j] = int(U[i, j:i] @ inv[j:i, j]) % 2
    return inv


def random_filtered_complex(rng: np.random.Generator, n: int, pair_density: float = 0.6) -> DifferentialSpace:
    """d = U D0 U^-1 with D0 a strictly grade-raising pairing and U lower unitriangular,
    so d raises grades strictly and squares to zero."""
    grades = np.sort(rng.choice(np.arange(4 * n + 4), size=n, replace=False)).astype(float) / 4
    labels = tuple(f"e{i}" for i in range(n))
    space = GradedSpace(labels, tuple(grades))
    D0 = np.zeros((n, n), dtype=np.int64)
    order = list(rng.permutation(n))
    for a, b in zip(order[::2], order[1::2]):
        if rng.random() < pair_density:
            lo, hi = sorted((int(a), int(b)))
            D0[hi, lo] = 1
    U = np.tril(rng.integers(0, 2, size=(n, n)), -1) + np.eye(n, dtype=np.int64)
    d = (U @ D0 @ _unitriangular_inverse(U)) % 2
    return DifferentialSpace(space, OrderMap.from_array(space, space, d, OrderInterval.positive()))


@pytest.fixture
def make_complex():
    return random_filtered_complex
