"""I-code evaluation: alternative sets and bit-wise greedy restoration.

Each attacker's decoded prefix induces, for every member target, the coverage
that puts that target exactly at the attacker's indifference level.  A target
attracted by several attackers thus has several candidate coverages
("alternatives").  Restoration picks one per target, scoring each candidate by
how many attackers' attacked-target indicators it would flip away from the
ideal attacked targets.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .discretize import IdealProfile, check_code
from .game import EPS, GameInstance, sse_payoffs


def divergence_single(at_a: int, at_b: int) -> int:
    return 0 if at_a == at_b else 1


def divergence_group(at_a, at_b) -> int:
    a = np.asarray(at_a)
    b = np.asarray(at_b)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return int(np.count_nonzero(a != b))


@dataclass(eq=False)
class AlternativeSet:
    """Per-target candidate coverages.

    ``values[t]`` and ``owners[t]`` are parallel, sorted ascending by value.
    Targets no attacker is attracted to have empty lists (implicit 0).
    """

    values: list[np.ndarray]
    owners: list[np.ndarray]
    excluded: list[tuple[int, int, float]] = field(default_factory=list)

    @property
    def counts(self) -> np.ndarray:
        return np.array([len(o) for o in self.owners], dtype=np.int64)

    def attraction(self, t: int) -> tuple[int, ...]:
        return tuple(int(i) for i in sorted(self.owners[t]))


@dataclass(eq=False)
class EvaluationResult:
    coverage: np.ndarray
    feasible: bool
    fitness: np.ndarray | None = None
    attacked: np.ndarray | None = None
    divergence: int | None = None
    # resources used; for infeasible results, the running sum at the point of overrun
    spent: float = 0.0
    violation: float = 0.0
    # rank of the chosen merged alternative per target (-1 when fewer than two)
    chosen_rank: np.ndarray | None = None
    steps: int = 0
    work: int = 0


def _alternative_matrix(inst: GameInstance, order: np.ndarray, code) -> tuple[np.ndarray, np.ndarray]:
    """``(N, T)`` alternatives (NaN where the target is outside the prefix)."""
    N, T = inst.num_attackers, inst.num_targets
    code = np.asarray(code)
    member = np.zeros((N, T), dtype=bool)
    rows = np.repeat(np.arange(N), code)
    cols = np.concatenate([order[i, : code[i]] for i in range(N)])
    member[rows, cols] = True
    anchor = inst.u_unc_att[np.arange(N), order[np.arange(N), code - 1]]
    with np.errstate(invalid="ignore"):
        alt = (anchor[:, None] - inst.u_unc_att) / (inst.u_cov_att - inst.u_unc_att)
    alt = np.where(member, np.maximum(alt, 0.0), np.nan)
    return alt, member


def alternatives(inst: GameInstance, order: np.ndarray, code, gamma_max=None) -> AlternativeSet:
    if gamma_max is None:
        gamma_max = np.full(inst.num_attackers, inst.num_targets)
    code = check_code(code, gamma_max)
    alt, member = _alternative_matrix(inst, order, code)
    values, owners, excluded = [], [], []
    for t in range(inst.num_targets):
        who = np.flatnonzero(member[:, t])
        v = alt[who, t]
        over = v > 1.0 + EPS
        for i, x in zip(who[over], v[over]):
            excluded.append((int(i), t, float(x)))
        who, v = who[~over], np.minimum(v[~over], 1.0)
        idx = np.argsort(v, kind="stable")
        values.append(v[idx])
        owners.append(who[idx])
    return AlternativeSet(values, owners, excluded)


def merge_alternatives(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Merge ascending values closer than EPS; returns (representatives, group id per value)."""
    if values.size == 0:
        return values, np.zeros(0, dtype=np.int64)
    new_group = np.concatenate([[False], np.diff(values) > EPS])
    gid = np.cumsum(new_group)
    reps = values[np.concatenate([[True], new_group[1:]])]
    return reps, gid


def _bsm_columns(S: np.ndarray, W: np.ndarray, valid: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized mismatch scoring over columns of ascending alternatives.

    ``S`` holds each column's alternatives sorted ascending (invalid slots at
    the bottom), ``W`` whether the owning attacker's ideal attacked target is
    this target.  Choosing the group that starts at row ``r`` drops the target
    from every attacker above row ``r`` and keeps it for the rest.  Returns the
    chosen row per column and the rank of its merged group.
    """
    prev = np.vstack([np.full((1, S.shape[1]), -np.inf), S[:-1]])
    with np.errstate(invalid="ignore"):
        start = valid & (S - prev > EPS)
    want = (W & valid).astype(np.int64)
    unwanted = (~W & valid).astype(np.int64)
    below_want = np.cumsum(want, axis=0) - want
    keep_unwanted = np.cumsum(unwanted[::-1], axis=0)[::-1]
    score = np.where(start, below_want + keep_unwanted, np.iinfo(np.int64).max)
    # argmin takes the first minimum, i.e. the smallest coverage among ties
    row = np.argmin(score, axis=0)
    rank = np.cumsum(start, axis=0)[row, np.arange(S.shape[1])] - 1
    return row, rank


def bsm_select(values: np.ndarray, owners: np.ndarray, t: int, ideal_at: np.ndarray) -> tuple[int, float]:
    """Choose among one target's ascending alternatives; returns (merged rank, coverage)."""
    values = np.asarray(values, dtype=float)
    W = (np.asarray(ideal_at)[np.asarray(owners)] == t)
    row, rank = _bsm_columns(values[:, None], W[:, None], np.ones((values.size, 1), dtype=bool))
    return int(rank[0]), float(values[row[0]])


def bitopt(inst: GameInstance, order: np.ndarray, code, ideal: IdealProfile) -> EvaluationResult:
    code = check_code(code, ideal.gamma_max)
    N, T = inst.num_attackers, inst.num_targets
    alt, member = _alternative_matrix(inst, order, code)
    alt = np.where(alt > 1.0 + EPS, np.nan, np.minimum(alt, 1.0))
    valid = ~np.isnan(alt)
    counts = valid.sum(axis=0)
    cover = np.zeros(T)
    rank = np.full(T, -1, dtype=np.int64)
    single = counts == 1
    if single.any():
        cover[single] = np.nanmax(alt[:, single], axis=0)
    work = N * T
    multi = np.flatnonzero(counts >= 2)
    if multi.size:
        sub = np.where(valid[:, multi], alt[:, multi], np.inf)
        idx = np.argsort(sub, axis=0, kind="stable")
        S = np.take_along_axis(sub, idx, axis=0)
        ok = np.isfinite(S)
        W = (ideal.ideal_at[idx] == multi[None, :])
        row, r = _bsm_columns(S, W, ok)
        cover[multi] = S[row, np.arange(multi.size)]
        rank[multi] = r
        work += int(counts[multi].sum())
    return finish_coverage(inst, ideal, cover, rank, work)


def finish_coverage(inst: GameInstance, ideal: IdealProfile, cover: np.ndarray, rank: np.ndarray,
                    work: int = 0) -> EvaluationResult:
    """Budget-check a restored coverage in target order and score it."""
    T = inst.num_targets
    running = np.cumsum(cover)
    # stop at the first overrun
    over = np.flatnonzero(running > inst.budget + EPS)
    if over.size:
        stop = int(over[0])
        partial = cover.copy()
        partial[stop + 1:] = 0.0
        # overrun of the whole restored vector, so the search can tell near misses apart
        return EvaluationResult(
            coverage=partial, feasible=False, spent=float(running[stop]),
            violation=float(running[-1] - inst.budget), chosen_rank=rank,
            steps=stop + 1, work=work)
    fit, at = sse_payoffs(inst, cover)
    work += inst.num_attackers * T
    return EvaluationResult(
        coverage=cover, feasible=True, fitness=fit, attacked=at,
        divergence=divergence_group(at, ideal.ideal_at), spent=float(running[-1]),
        chosen_rank=rank, steps=T, work=work)


def evaluate_code(inst: GameInstance, order: np.ndarray, ideal: IdealProfile, code) -> EvaluationResult:
    return bitopt(inst, order, code, ideal)
