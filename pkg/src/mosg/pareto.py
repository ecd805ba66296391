"""Pareto filtering in maximization orientation."""
from __future__ import annotations

import numpy as np


def pareto_indices(F, tol: float = 1e-9) -> np.ndarray:
    """Indices of a non-dominated, de-duplicated subset of rows of ``F``.

    Rows are visited by descending coordinate sum; each visited row is
    non-dominated among those left and removes every row it weakly dominates
    up to ``tol``.  Returned indices are sorted ascending.
    """
    F = np.asarray(F, dtype=float)
    if len(F) == 0:
        return np.zeros(0, dtype=np.int64)
    order = np.lexsort((np.arange(len(F)), -F.sum(axis=1)))
    alive = order
    kept = []
    while alive.size:
        p = alive[0]
        kept.append(p)
        covered = np.all(F[alive] <= F[p] + tol, axis=1)
        alive = alive[~covered]
    return np.sort(np.array(kept, dtype=np.int64))
