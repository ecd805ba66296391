"""Non-dominated sorting and reference-direction survival.

Fitness arrays here are in the game's maximization orientation; survival
negates them internally and normalizes in minimization orientation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def dominance_matrix(F: np.ndarray) -> np.ndarray:
    """``D[a, b]`` is True when row ``a`` Pareto-dominates row ``b`` (maximization)."""
    ge = (F[:, None, :] >= F[None, :, :]).all(-1)
    gt = (F[:, None, :] > F[None, :, :]).any(-1)
    return ge & gt


def _sort_feasible(F: np.ndarray) -> list[np.ndarray]:
    n = len(F)
    D = dominance_matrix(F)
    dominated_by = D.sum(axis=0)
    fronts = []
    current = np.flatnonzero(dominated_by == 0)
    while current.size:
        fronts.append(current)
        dominated_by = dominated_by - D[current].sum(axis=0)
        dominated_by[current] = -1
        current = np.flatnonzero(dominated_by == 0)
    assert sum(len(f) for f in fronts) == n
    return fronts


def nondominated_sort(F, violation=None) -> list[np.ndarray]:
    """Fronts as index arrays, feasible solutions first.

    Infeasible solutions (``violation > 0``) follow all feasible fronts,
    grouped into fronts of equal violation in ascending order.
    """
    F = np.asarray(F, dtype=float)
    n = len(F)
    if violation is None:
        violation = np.zeros(n)
    violation = np.asarray(violation, dtype=float)
    feas = np.flatnonzero(violation <= 0)
    fronts = [feas[f] for f in _sort_feasible(F[feas])] if feas.size else []
    infeas = np.flatnonzero(violation > 0)
    if infeas.size:
        v = violation[infeas]
        for level in np.unique(v):
            fronts.append(infeas[v == level])
    return fronts


def ranks_from_fronts(fronts, n: int) -> np.ndarray:
    rank = np.empty(n, dtype=np.int64)
    for k, f in enumerate(fronts):
        rank[f] = k
    return rank


def _nadir(G: np.ndarray, ideal: np.ndarray, front_worst: np.ndarray) -> np.ndarray:
    """Nadir estimate from the hyperplane through the extreme points."""
    M = G.shape[1]
    W = np.full((M, M), 1e-6)
    np.fill_diagonal(W, 1.0)
    asf = ((G - ideal)[None, :, :] / W[:, None, :]).max(-1)
    extremes = G[np.argmin(asf, axis=1)]
    try:
        b = np.linalg.solve(extremes - ideal, np.ones(M))
        with np.errstate(divide="ignore"):
            intercepts = 1.0 / b
        if not np.all(np.isfinite(intercepts)) or np.any(intercepts <= 1e-6):
            raise np.linalg.LinAlgError
        nadir = ideal + intercepts
    except np.linalg.LinAlgError:
        nadir = front_worst
    return nadir


def associate(Gn: np.ndarray, dirs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nearest direction and perpendicular distance for each normalized point."""
    unit = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
    proj = Gn @ unit.T
    perp = (Gn ** 2).sum(1)[:, None] - proj ** 2
    dist = np.sqrt(np.maximum(perp, 0.0))
    niche = np.argmin(dist, axis=1)
    return niche, dist[np.arange(len(Gn)), niche]


@dataclass
class Survivors:
    index: np.ndarray
    rank: np.ndarray
    niche_dist: np.ndarray


def survive(F, violation, dirs, pop_size: int, rng: np.random.Generator) -> Survivors:
    """Select ``pop_size`` members: whole fronts first, then niching on the split front.

    ``F`` rows of infeasible members are ignored (may hold NaN).
    """
    F = np.asarray(F, dtype=float)
    violation = np.asarray(violation, dtype=float)
    n = len(F)
    if n < pop_size:
        raise ValueError(f"cannot select {pop_size} from {n}")
    fronts = nondominated_sort(np.where(np.isnan(F), 0.0, F), violation)
    rank = ranks_from_fronts(fronts, n)
    chosen, last = [], None
    for f in fronts:
        if len(chosen) + len(f) <= pop_size:
            chosen.extend(f.tolist())
            if len(chosen) == pop_size:
                break
        else:
            last = f
            break
    niche_dist = np.zeros(n)
    feasible = np.flatnonzero(violation <= 0)
    considered = np.array(chosen + ([] if last is None else last.tolist()), dtype=np.int64)
    considered_feas = considered[violation[considered] <= 0]
    if considered_feas.size:
        G = -F[considered_feas]
        ideal = G.min(axis=0)
        worst = -F[fronts[0]].min(axis=0) if feasible.size else G.max(axis=0)
        nadir = _nadir(G, ideal, worst)
        span = nadir - ideal
        span[span < 1e-12] = 1.0
        niche, dist = associate((G - ideal) / span, dirs)
        niche_dist[considered_feas] = dist
        niche_of = dict(zip(considered_feas.tolist(), niche.tolist()))
    else:
        niche_of = {}
    if last is not None:
        need = pop_size - len(chosen)
        if violation[last[0]] > 0:
            pick = rng.choice(last, size=need, replace=False)
            chosen.extend(int(p) for p in pick)
        else:
            chosen.extend(_niching(chosen, last, need, niche_of, niche_dist, len(dirs), rng))
    idx = np.array(chosen, dtype=np.int64)
    return Survivors(idx, rank[idx], niche_dist[idx])


def _niching(chosen, last, need, niche_of, dist, n_dirs, rng) -> list[int]:
    count = np.zeros(n_dirs, dtype=np.int64)
    for m in chosen:
        if m in niche_of:
            count[niche_of[m]] += 1
    pool = {}
    for m in last.tolist():
        pool.setdefault(niche_of[m], []).append(m)
    picked = []
    while len(picked) < need:
        active = np.array(sorted(pool), dtype=np.int64)
        low = count[active].min()
        j = int(rng.choice(active[count[active] == low]))
        members = pool[j]
        if count[j] == 0:
            k = int(np.argmin([dist[m] for m in members]))
        else:
            k = int(rng.integers(len(members)))
        picked.append(members.pop(k))
        count[j] += 1
        if not members:
            del pool[j]
    return picked
