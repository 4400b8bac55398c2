"""Generalized linear assignment over partial-permutation matrices.

The problem is ``max trace(M^T X)`` over c-by-d binary matrices with at most
one 1 per row, at most one 1 per column, and exactly ``e`` ones in total.  It
reduces to an ordinary square assignment problem of size ``c + d - e`` by
padding ``M`` with constant blocks that sit strictly outside its value range;
the optimum of the padded problem restricted to the original block is an
optimum of the original problem.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .lap import solve_lap


@dataclass(frozen=True)
class PartialPermutation:
    """A size-e matching between row indices and column indices.

    ``pairs`` holds (row, column) tuples; each row index and each column
    index appears in at most one pair.
    """

    dims: tuple[int, int]
    pairs: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        c, d = self.dims
        e = len(self.pairs)
        if not 1 <= e <= min(c, d):
            raise ValueError(f"need 1 <= e <= min(c, d), got e={e} for dims {self.dims}")
        rows = {i for i, _ in self.pairs}
        cols = {j for _, j in self.pairs}
        if len(rows) != e or len(cols) != e:
            raise ValueError("a row or column index is matched more than once")
        if any(not (0 <= i < c and 0 <= j < d) for i, j in self.pairs):
            raise ValueError(f"pair indices out of range for dims {self.dims}")

    @property
    def e(self) -> int:
        return len(self.pairs)

    def sorted_pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(self.pairs))

    def to_dense(self, dtype=float) -> np.ndarray:
        x = np.zeros(self.dims, dtype=dtype)
        for i, j in self.pairs:
            x[i, j] = 1
        return x


def _check_shape(m: np.ndarray, e: int) -> tuple[int, int]:
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got ndim={m.ndim}")
    c, d = m.shape
    if not 1 <= e <= min(c, d):
        raise ValueError(f"need 1 <= e <= min(c, d) = {min(c, d)}, got e={e}")
    if not np.isfinite(m).all():
        raise ValueError("matrix entries must be finite")
    return c, d


def pad_matrix(m, e: int) -> np.ndarray:
    """Square padding of a c-by-d profit matrix for a size-e matching.

    Returns the (c+d-e)-square matrix::

        [ M            hi * ones(c, c-e)   ]
        [ hi * ones(d-e, d)  lo * ones(d-e, c-e) ]

    with ``lo = min(M) - 1`` and ``hi = max(M) + 1``.  When e == c == d the
    padding blocks are empty and the result equals ``M``.
    """
    m = np.asarray(m, dtype=float)
    c, d = _check_shape(m, e)
    size = c + d - e
    padded = np.empty((size, size), dtype=float)
    lo = m.min() - 1.0
    hi = m.max() + 1.0
    padded[:c, :d] = m
    padded[:c, d:] = hi
    padded[c:, :d] = hi
    padded[c:, d:] = lo
    return padded


def _solve_pair_arrays(m: np.ndarray, e: int) -> tuple[np.ndarray, np.ndarray]:
    """Rows/columns of the optimal matching, as parallel index arrays."""
    c, d = m.shape
    rows, cols = linear_sum_assignment(pad_matrix(m, e), maximize=True)
    keep = (rows < c) & (cols < d)
    rows, cols = rows[keep], cols[keep]
    # The padding construction forces exactly e survivors in the real block.
    if rows.size != e:
        raise AssertionError(f"padding yielded {rows.size} pairs, expected {e}")
    return rows, cols


def solve_glap(m, e: int) -> PartialPermutation:
    """Maximize ``trace(M^T X)`` over size-e partial permutations of M's shape.

    Solved exactly by padding to a square assignment problem (see
    :func:`pad_matrix`) and keeping the matched pairs that land in the
    original block.  Determinism follows from :func:`~.lap.solve_lap`.
    """
    m = np.asarray(m, dtype=float)
    _check_shape(m, e)
    c, d = m.shape
    assignment = solve_lap(pad_matrix(m, e))
    pairs = frozenset(
        (i, j) for i, j in enumerate(assignment.target) if i < c and j < d
    )
    if len(pairs) != e:
        raise AssertionError(f"padding yielded {len(pairs)} pairs, expected {e}")
    return PartialPermutation(dims=(c, d), pairs=pairs)


def solve_glap_dense(m, e: int) -> np.ndarray:
    """Like :func:`solve_glap` but returns the optimum as a dense 0/1 matrix.

    Skips the frozen-set boxing; this is the hot path inside the Frank-Wolfe
    iteration.
    """
    m = np.asarray(m, dtype=float)
    _check_shape(m, e)
    rows, cols = _solve_pair_arrays(m, e)
    x = np.zeros(m.shape)
    x[rows, cols] = 1.0
    return x
