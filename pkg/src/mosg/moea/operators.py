"""Tournament selection, simulated binary crossover and polynomial mutation on integer genomes.

Variation happens in the reals; offspring are rounded to the nearest integer
and clamped into ``[1, gamma_max]``.
"""
from __future__ import annotations

import numpy as np


def tournament(rank: np.ndarray, niche_dist: np.ndarray, n_select: int, rng: np.random.Generator) -> np.ndarray:
    """Binary tournaments: lower rank wins, then smaller niche distance, then a coin flip."""
    n = len(rank)
    a = rng.integers(n, size=n_select)
    b = rng.integers(n, size=n_select)
    coin = rng.random(n_select) < 0.5
    a_wins = (rank[a] < rank[b]) | (
        (rank[a] == rank[b]) & ((niche_dist[a] < niche_dist[b]) | ((niche_dist[a] == niche_dist[b]) & coin)))
    return np.where(a_wins, a, b)


def sbx(p1: np.ndarray, p2: np.ndarray, lower: np.ndarray, upper: np.ndarray, prob: float, eta: float,
        rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Bounded simulated binary crossover on rows of ``p1``/``p2`` (float arrays)."""
    n, m = p1.shape
    c1, c2 = p1.copy(), p2.copy()
    do_pair = rng.random(n) < prob
    # each variable crosses with probability 1/2, and only where parents differ
    do_var = (rng.random((n, m)) < 0.5) & do_pair[:, None] & (np.abs(p1 - p2) > 1e-14)
    u = rng.random((n, m))
    swap = rng.random((n, m)) < 0.5
    y1, y2 = np.minimum(p1, p2), np.maximum(p1, p2)
    lo = np.broadcast_to(lower, (n, m))
    hi = np.broadcast_to(upper, (n, m))
    with np.errstate(divide="ignore", invalid="ignore"):
        delta = np.where(do_var, y2 - y1, 1.0)

        def child(beta):
            alpha = 2.0 - beta ** -(eta + 1.0)
            betaq = np.where(u <= 1.0 / alpha, (u * alpha) ** (1.0 / (eta + 1.0)),
                             (1.0 / (2.0 - u * alpha)) ** (1.0 / (eta + 1.0)))
            return betaq

        bq1 = child(1.0 + 2.0 * (y1 - lo) / delta)
        bq2 = child(1.0 + 2.0 * (hi - y2) / delta)
        k1 = 0.5 * ((y1 + y2) - bq1 * delta)
        k2 = 0.5 * ((y1 + y2) + bq2 * delta)
    k1 = np.clip(k1, lo, hi)
    k2 = np.clip(k2, lo, hi)
    k1, k2 = np.where(swap, k2, k1), np.where(swap, k1, k2)
    c1 = np.where(do_var, k1, c1)
    c2 = np.where(do_var, k2, c2)
    return c1, c2


def polynomial_mutation(x: np.ndarray, lower: np.ndarray, upper: np.ndarray, prob: float, eta: float,
                        rng: np.random.Generator) -> np.ndarray:
    n, m = x.shape
    lo = np.broadcast_to(lower, (n, m)).astype(float)
    hi = np.broadcast_to(upper, (n, m)).astype(float)
    span = hi - lo
    do = (rng.random((n, m)) < prob) & (span > 0)
    u = rng.random((n, m))
    with np.errstate(divide="ignore", invalid="ignore"):
        d1 = (x - lo) / span
        d2 = (hi - x) / span
        mpow = 1.0 / (eta + 1.0)
        left = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1) ** (eta + 1.0)
        right = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2) ** (eta + 1.0)
        dq = np.where(u < 0.5, left ** mpow - 1.0, 1.0 - right ** mpow)
    y = np.where(do, x + dq * span, x)
    return np.clip(y, lo, hi)


def round_clamp(x: np.ndarray, upper: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(x), 1, upper).astype(np.int64)


def vary(parents: np.ndarray, gamma_max: np.ndarray, rng: np.random.Generator, crossover_prob: float = 0.9,
         crossover_eta: float = 15.0, mutation_prob: float | None = None, mutation_eta: float = 20.0) -> np.ndarray:
    """Offspring codes from an even-length array of selected parent codes (paired in order)."""
    parents = np.asarray(parents, dtype=float)
    n, m = parents.shape
    if mutation_prob is None:
        mutation_prob = 1.0 / m
    lower = np.ones(m)
    upper = np.asarray(gamma_max, dtype=float)
    half = n // 2
    c1, c2 = sbx(parents[:half], parents[half: 2 * half], lower, upper, crossover_prob, crossover_eta, rng)
    kids = np.concatenate([c1, c2, parents[2 * half:]])
    kids = polynomial_mutation(kids, lower, upper, mutation_prob, mutation_eta, rng)
    return round_clamp(kids, np.asarray(gamma_max))
