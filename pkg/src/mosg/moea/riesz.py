"""Reference directions spread on the unit simplex by Riesz s-energy descent."""
from __future__ import annotations

from functools import lru_cache

import numpy as np


class ConfigError(ValueError):
    pass


def project_simplex(x: np.ndarray) -> np.ndarray:
    """Euclidean projection of each row onto the probability simplex (sort-based)."""
    n, d = x.shape
    u = np.sort(x, axis=1)[:, ::-1]
    css = np.cumsum(u, axis=1) - 1.0
    ks = np.arange(1, d + 1)
    cond = u - css / ks > 0
    rho = d - 1 - np.argmax(cond[:, ::-1], axis=1)
    theta = css[np.arange(n), rho] / (rho + 1)
    return np.maximum(x - theta[:, None], 0.0)


def riesz_energy(x: np.ndarray, s: float) -> float:
    diff = x[:, None, :] - x[None, :, :]
    d = np.sqrt((diff ** 2).sum(-1))
    iu = np.triu_indices(len(x), 1)
    return float(2.0 * np.sum(d[iu] ** -s))


def _descend(x: np.ndarray, s: float, iters: int, step: float, decay: float,
             rng: np.random.Generator) -> np.ndarray:
    n = len(x)
    eye = np.eye(n, dtype=bool)
    lr = step
    for _ in range(iters):
        diff = x[:, None, :] - x[None, :, :]
        d = np.sqrt((diff ** 2).sum(-1))
        d[eye] = np.inf
        clash = np.flatnonzero((d < 1e-10).any(axis=1))
        if clash.size:
            # projection can land two points on the same face point; pull them apart
            x[clash] = project_simplex(x[clash] + rng.normal(scale=1e-3, size=(clash.size, x.shape[1])))
            continue
        # distances are rescaled by the closest pair so d**-(s+2) cannot overflow
        scale = d.min()
        w = (d / scale) ** (-(s + 2.0))
        grad = -(w[:, :, None] * diff).sum(axis=1)
        # remove the component normal to the simplex plane before stepping
        grad -= grad.mean(axis=1, keepdims=True)
        norm = np.abs(grad).max()
        if norm == 0.0:
            break
        x = project_simplex(x - lr * grad / norm)
        lr *= decay
    return x


@lru_cache(maxsize=32)
def _cached(n_obj: int, n_points: int, seed: int, iters: int, step: float) -> np.ndarray:
    if n_obj == 1:
        return np.ones((n_points, 1))
    rng = np.random.default_rng(seed)
    x = rng.dirichlet(np.ones(n_obj), size=n_points)
    # seed the corners so the extremes are represented from the start
    x[:n_obj] = np.eye(n_obj)
    x = _descend(x, float(n_obj ** 2), iters, step, decay=0.995, rng=rng)
    x.setflags(write=False)
    return x


def riesz_directions(n_obj: int, n_points: int, seed: int = 0, iters: int = 1000, step: float = 1e-2) -> np.ndarray:
    """``(n_points, n_obj)`` simplex points with low pairwise Riesz energy (s = n_obj**2)."""
    if n_obj < 1:
        raise ConfigError("need at least one objective")
    if n_points < n_obj:
        raise ConfigError(f"need at least {n_obj} directions, got {n_points}")
    return _cached(int(n_obj), int(n_points), int(seed), int(iters), float(step))
