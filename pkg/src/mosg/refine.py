"""Post-pass that trims coverage without losing payoff, then spends the freed budget.

Coverage vectors here are always built from attacker prefixes: given prefix
lengths ``k``, each target's coverage is either zero or the indifference
coverage some attacker's prefix asks of it.  Every accepted step must weakly
improve the fitness vector, so refinement never loses payoff.

Shrink: each attacker keeps only the shortest prefix that still earns its
current payoff; targets take the most demanding of those coverages.

Redistribute: repeatedly take the move with the best payoff gain per unit of
extra budget among (a) lengthening one attacker's prefix, rebuilding the
coverage either by max-assembly or by greedy restoration, and (b) switching
one target to another coverage value allowed by the current prefixes.
"""
from __future__ import annotations

import numpy as np

from .discretize import IdealProfile, ideal_profile, prefix_coverage
from .evaluate import _alternative_matrix, bitopt
from .game import EPS, GameInstance, attack_set, defender_payoffs, sse_payoffs_batch
from .moea.archive import ArchiveEntry, FrontArchive

MAX_STEPS = 10_000


class PrefixTable:
    """Per-attacker prefix coverages and the payoff each earns against that attacker alone."""

    def __init__(self, inst: GameInstance, order: np.ndarray, ideal: IdealProfile | None = None):
        self.inst = inst
        self.order = order
        self.ideal = ideal if ideal is not None else ideal_profile(inst, order)
        self.cov: list[np.ndarray] = []
        self.payoff: list[np.ndarray] = []
        for i in range(inst.num_attackers):
            k_max = int(self.ideal.gamma_max[i])
            cov = np.array([prefix_coverage(inst, order, i, k) for k in range(1, k_max + 1)])
            pay = np.empty(k_max)
            for k in range(k_max):
                at = attack_set(inst, i, cov[k]).attacked_target
                pay[k] = defender_payoffs(inst, cov[k])[i, at]
            self.cov.append(cov)
            self.payoff.append(pay)
        self._restored: dict[tuple, np.ndarray | None] = {}

    def restore(self, ks) -> np.ndarray | None:
        """Greedy restoration of prefix lengths ``ks`` (memoized); None when over budget."""
        key = tuple(int(k) for k in ks)
        if key not in self._restored:
            res = bitopt(self.inst, self.order, np.array(key, dtype=np.int64), self.ideal)
            self._restored[key] = res.coverage if res.feasible else None
        return self._restored[key]

    def assemble(self, ks) -> np.ndarray:
        return np.max([self.cov[i][k - 1] for i, k in enumerate(ks)], axis=0)

    def shortest(self, i: int, target: float) -> int | None:
        hits = np.flatnonzero(self.payoff[i] >= target - EPS)
        return int(hits[0]) + 1 if hits.size else None


def _best_move(inst: GameInstance, current: ArchiveEntry, codes: list, covers: list):
    """Index of the candidate with the largest gain per unit budget, or None."""
    if not covers:
        return None, None
    C = np.asarray(covers)
    spent = C.sum(axis=1)
    ok = spent <= inst.budget + EPS
    if not ok.any():
        return None, None
    F, _ = sse_payoffs_batch(inst, C)
    ok &= np.all(F >= current.fitness - EPS, axis=1)
    gain = (F - current.fitness).sum(axis=1)
    ok &= gain > EPS
    if not ok.any():
        return None, None
    extra = np.maximum(spent - current.coverage.sum(), EPS)
    ratio = np.where(ok, gain / extra, -np.inf)
    j = int(np.argmax(ratio))
    return j, F[j]


def _candidates(inst, order, table: PrefixTable, ks: np.ndarray, cover: np.ndarray):
    codes, covers = [], []
    gm = table.ideal.gamma_max
    for i in np.flatnonzero(ks < gm):
        for k in range(int(ks[i]) + 1, int(gm[i]) + 1):
            trial = ks.copy()
            trial[i] = k
            codes.append(trial)
            covers.append(table.assemble(trial))
            restored = table.restore(trial)
            if restored is not None:
                codes.append(trial)
                covers.append(restored)
    alt, _ = _alternative_matrix(inst, order, ks)
    for t in range(inst.num_targets):
        col = alt[:, t]
        for v in np.unique(np.concatenate([[0.0], col[~np.isnan(col) & (col <= 1.0)]])):
            if abs(v - cover[t]) > EPS:
                c = cover.copy()
                c[t] = v
                codes.append(ks)
                covers.append(c)
    return codes, covers


def min_cov(inst: GameInstance, order: np.ndarray, entry: ArchiveEntry, table: PrefixTable | None = None) -> ArchiveEntry:
    if table is None:
        table = PrefixTable(inst, order)
    options = [entry]

    ks = [table.shortest(i, entry.fitness[i]) for i in range(inst.num_attackers)]
    current = entry
    if all(k is not None for k in ks):
        cover = table.assemble(ks)
        F, _ = sse_payoffs_batch(inst, cover[None])
        if cover.sum() <= inst.budget + EPS and np.all(F[0] >= entry.fitness - EPS):
            current = ArchiveEntry(np.array(ks, dtype=np.int64), cover, F[0])
            options.append(current)

    for _ in range(MAX_STEPS):
        ks = np.array(current.code, dtype=np.int64)
        codes, covers = _candidates(inst, order, table, ks, current.coverage)
        j, fit = _best_move(inst, current, codes, covers)
        if j is None:
            break
        current = ArchiveEntry(codes[j], covers[j], fit)
    if current is not options[-1]:
        options.append(current)

    # each option weakly dominates the previous ones; prefer the cheapest among equals
    top = options[-1]
    ties = [o for o in options if np.all(np.abs(o.fitness - top.fitness) <= EPS)]
    return min(ties, key=lambda o: o.coverage.sum())


def refine_archive(inst: GameInstance, order: np.ndarray, archive: FrontArchive,
                   table: PrefixTable | None = None) -> FrontArchive:
    if table is None:
        table = PrefixTable(inst, order)
    refined = [min_cov(inst, order, e, table) for e in archive]
    return FrontArchive.from_entries(refined, inst.num_attackers, inst.num_targets)
