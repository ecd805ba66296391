"""Unbounded archive of mutually non-dominated solutions."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nsga3 import dominance_matrix

DEDUP_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ArchiveEntry:
    code: np.ndarray
    coverage: np.ndarray
    fitness: np.ndarray


def nondominated_mask(F: np.ndarray) -> np.ndarray:
    if len(F) == 0:
        return np.zeros(0, dtype=bool)
    return ~dominance_matrix(F).any(axis=0)


class FrontArchive:
    """Entries kept in insertion order; later near-duplicates of a fitness vector are dropped."""

    def __init__(self, n_attackers: int, n_targets: int):
        self.codes = np.zeros((0, n_attackers), dtype=np.int64)
        self.coverage = np.zeros((0, n_targets))
        self.fitness = np.zeros((0, n_attackers))

    def __len__(self) -> int:
        return len(self.fitness)

    def __iter__(self):
        for k in range(len(self)):
            yield ArchiveEntry(self.codes[k], self.coverage[k], self.fitness[k])

    def copy(self) -> "FrontArchive":
        a = FrontArchive(self.codes.shape[1], self.coverage.shape[1])
        a.codes, a.coverage, a.fitness = self.codes.copy(), self.coverage.copy(), self.fitness.copy()
        return a

    def update(self, codes, coverage, fitness) -> None:
        codes = np.asarray(codes, dtype=np.int64).reshape(-1, self.codes.shape[1])
        coverage = np.asarray(coverage, dtype=float).reshape(-1, self.coverage.shape[1])
        fitness = np.asarray(fitness, dtype=float).reshape(-1, self.fitness.shape[1])
        if len(fitness) == 0:
            return
        # cheap prefilter: drop newcomers already dominated or duplicated by the archive
        if len(self):
            keep = np.ones(len(fitness), dtype=bool)
            for k, f in enumerate(fitness):
                ge = (self.fitness >= f - DEDUP_TOL).all(axis=1)
                if ge.any():
                    keep[k] = False
            codes, coverage, fitness = codes[keep], coverage[keep], fitness[keep]
            if len(fitness) == 0:
                return
        C = np.concatenate([self.codes, codes])
        V = np.concatenate([self.coverage, coverage])
        F = np.concatenate([self.fitness, fitness])
        mask = nondominated_mask(F)
        C, V, F = C[mask], V[mask], F[mask]
        kept = []
        for k in range(len(F)):
            if kept and (np.abs(F[kept] - F[k]).max(axis=1) <= DEDUP_TOL).any():
                continue
            kept.append(k)
        self.codes, self.coverage, self.fitness = C[kept], V[kept], F[kept]

    @classmethod
    def from_entries(cls, entries, n_attackers: int, n_targets: int) -> "FrontArchive":
        a = cls(n_attackers, n_targets)
        entries = list(entries)
        if entries:
            a.update([e.code for e in entries], [e.coverage for e in entries], [e.fitness for e in entries])
        return a
