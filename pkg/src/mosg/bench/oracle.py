"""Exhaustive Pareto front over every I-code and every per-target alternative choice."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..discretize import ideal_profile, target_order
from ..evaluate import _alternative_matrix
from ..game import EPS, GameInstance, sse_payoffs_batch
from ..pareto import pareto_indices

MAX_CODES = 10 ** 5
MAX_COMBINATIONS = 10 ** 6


class OracleTooLarge(ValueError):
    def __init__(self, n_codes: int, worst_combinations: int):
        super().__init__(
            f"instance too large for exhaustive search: {n_codes} I-codes (limit {MAX_CODES}), "
            f"up to {worst_combinations} alternative combinations per code (limit {MAX_COMBINATIONS})")
        self.n_codes = n_codes
        self.worst_combinations = worst_combinations


@dataclass(eq=False)
class OracleFront:
    fitness: np.ndarray
    coverage: np.ndarray
    codes: np.ndarray
    n_codes: int
    n_combinations: int


def _choices(alt: np.ndarray) -> list[np.ndarray]:
    out = []
    for t in range(alt.shape[1]):
        col = alt[:, t]
        vals = np.concatenate([[0.0], col[~np.isnan(col) & (col <= 1.0 + EPS)]])
        out.append(np.unique(np.minimum(vals, 1.0)))
    return out


def oracle_size(inst: GameInstance) -> tuple[int, int]:
    order = target_order(inst)
    gm = ideal_profile(inst, order).gamma_max
    n_codes = int(np.prod(gm.astype(object)))
    # the widest code has the most alternatives per target
    alt, _ = _alternative_matrix(inst, order, gm)
    worst = int(np.prod([len(c) for c in _choices(alt)], dtype=object))
    return n_codes, worst


def oracle_front(inst: GameInstance, max_codes: int = MAX_CODES, max_combinations: int = MAX_COMBINATIONS) -> OracleFront:
    order = target_order(inst)
    gm = ideal_profile(inst, order).gamma_max
    n_codes, worst = oracle_size(inst)
    if n_codes > max_codes or worst > max_combinations:
        raise OracleTooLarge(n_codes, worst)
    best_F, best_C, best_K = [], [], []
    total = 0
    for code in itertools.product(*[range(1, int(k) + 1) for k in gm]):
        code = np.array(code, dtype=np.int64)
        alt, _ = _alternative_matrix(inst, order, code)
        grids = np.meshgrid(*_choices(alt), indexing="ij")
        C = np.stack([g.ravel() for g in grids], axis=1)
        total += len(C)
        C = C[C.sum(axis=1) <= inst.budget + EPS]
        if not len(C):
            continue
        F = sse_payoffs_batch(inst, C)[0]
        keep = pareto_indices(F)
        best_F.append(F[keep])
        best_C.append(C[keep])
        best_K.append(np.repeat(code[None], len(keep), axis=0))
    F = np.concatenate(best_F)
    C = np.concatenate(best_C)
    K = np.concatenate(best_K)
    keep = pareto_indices(F)
    return OracleFront(F[keep], C[keep], K[keep], n_codes, total)
