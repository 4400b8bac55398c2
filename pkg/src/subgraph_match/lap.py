"""Exact square linear assignment in max-trace form.

This is the inner engine behind every generalized-assignment call in the
package: maximize ``sum_i profit[i, target[i]]`` over all permutations of a
square profit matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment


@dataclass(frozen=True)
class Assignment:
    """A row-to-column assignment; ``target[i]`` is the column given row ``i``."""

    target: tuple[int, ...]

    def __post_init__(self) -> None:
        if sorted(self.target) != list(range(len(self.target))):
            raise ValueError("target must be a permutation of 0..r-1")

    def value(self, profit: np.ndarray) -> float:
        """Total profit of this assignment on ``profit``."""
        p = np.asarray(profit, dtype=float)
        if not self.target:
            return 0.0
        return float(p[np.arange(len(self.target)), list(self.target)].sum())


def solve_lap(profit) -> Assignment:
    """Maximize ``sum_i profit[i, target[i]]`` over all row-column permutations.

    The optimum is exact: comparisons happen on the given floats, with no
    epsilon thresholds at this interface.  Ties between equally good
    assignments are broken by the fixed scan order of the underlying
    shortest-augmenting-path engine, so equal inputs always produce the same
    assignment.

    Raises:
        ValueError: if ``profit`` is not square or contains NaN/infinity.
    """
    m = np.asarray(profit, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"profit matrix must be square, got shape {m.shape}")
    if m.size and not np.isfinite(m).all():
        raise ValueError("profit matrix entries must be finite")
    rows, cols = linear_sum_assignment(m, maximize=True)
    target = np.empty(m.shape[0], dtype=np.intp)
    target[rows] = cols
    return Assignment(target=tuple(int(c) for c in target))
