"""Hypervolume, IGD+ and reference-front construction.

All computations run in minimization orientation.  Functions accept
``sense="max"`` for data in the game's native orientation and negate it
(together with any reference data) on entry.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .pareto import pareto_indices

EXACT_MAX_DIM = 8
MC_SAMPLES = 10 ** 6


def _orient(x, sense: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if sense == "min":
        return x
    if sense == "max":
        return -x
    raise ValueError(f"sense must be 'min' or 'max', got {sense!r}")


def nondominated_min(P: np.ndarray) -> np.ndarray:
    """Non-dominated, de-duplicated rows of ``P`` under minimization (input order kept)."""
    if len(P) < 2:
        return P
    if len(P) > 400:
        return P[pareto_indices(-P, tol=0.0)]
    le = (P[:, None, :] <= P[None, :, :]).all(-1)
    eq = le & le.T
    dominated = (le & ~eq).any(axis=0)
    duplicate = np.triu(eq, 1).any(axis=0)
    return P[~dominated & ~duplicate]


def _hv2d(P: np.ndarray, ref: np.ndarray) -> float:
    P = P[np.lexsort((P[:, 1], P[:, 0]))]
    m = np.minimum.accumulate(np.minimum(P[:, 1], ref[1]))
    prev = np.concatenate([[ref[1]], m[:-1]])
    return float(np.sum((ref[0] - P[:, 0]) * (prev - m)))


def _hv3d(P: np.ndarray, ref: np.ndarray) -> float:
    """Sweep along the third axis, summing 2-D slabs."""
    P = P[np.argsort(P[:, 2], kind="stable")]
    z = np.concatenate([P[:, 2], [ref[2]]])
    total = 0.0
    for k in range(len(P)):
        h = z[k + 1] - z[k]
        if h > 0:
            total += _hv2d(P[: k + 1, :2], ref[:2]) * h
    return total


def _wfg(P: np.ndarray, ref: np.ndarray) -> float:
    n, d = P.shape
    if n == 0:
        return 0.0
    if n == 1:
        return float((ref - P[0]).prod())
    if d == 1:
        return float(ref[0] - P[:, 0].min())
    if d == 2:
        return _hv2d(P, ref)
    if d == 3:
        return _hv3d(P, ref)
    # worst-first order on the last axis keeps the limit sets small
    P = P[np.argsort(-P[:, -1], kind="stable")]
    total = 0.0
    for k in range(n):
        box = float((ref - P[k]).prod())
        rest = P[k + 1:]
        if len(rest):
            limited = nondominated_min(np.maximum(rest, P[k]))
            box -= _wfg(limited, ref)
        total += box
    return total


def _in_bounds(P: np.ndarray, ref: np.ndarray) -> np.ndarray:
    ok = np.all(P <= ref, axis=1)
    if not ok.all():
        warnings.warn(f"{int((~ok).sum())} point(s) do not dominate the reference point; ignored",
                      RuntimeWarning, stacklevel=3)
    return P[ok]


def hypervolume_mc(front, ref_point, samples: int = MC_SAMPLES, seed: int = 0,
                   sense: str = "min") -> tuple[float, float]:
    """Monte-Carlo estimate and standard error of the dominated hypervolume."""
    ref = _orient(ref_point, sense)
    P = _in_bounds(np.atleast_2d(_orient(front, sense)), ref)
    if len(P) == 0:
        return 0.0, 0.0
    P = nondominated_min(P)
    lo = P.min(axis=0)
    vol = float(np.prod(ref - lo))
    if vol == 0.0:
        return 0.0, 0.0
    rng = np.random.default_rng(seed)
    hits = 0
    chunk = 50_000
    for start in range(0, samples, chunk):
        m = min(chunk, samples - start)
        X = lo + rng.random((m, len(ref))) * (ref - lo)
        dominated = np.zeros(m, dtype=bool)
        for p in P:
            dominated |= np.all(X >= p, axis=1)
        hits += int(dominated.sum())
    p_hat = hits / samples
    return vol * p_hat, vol * np.sqrt(p_hat * (1.0 - p_hat) / samples)


def hypervolume(front, ref_point, sense: str = "min", samples: int = MC_SAMPLES, seed: int = 0) -> float:
    """Dominated hypervolume; exact up to eight objectives, Monte-Carlo beyond."""
    ref = _orient(ref_point, sense)
    P = np.atleast_2d(_orient(front, sense))
    if P.size == 0:
        return 0.0
    if P.shape[1] != ref.shape[0]:
        raise ValueError(f"front has {P.shape[1]} objectives, reference point {ref.shape[0]}")
    if P.shape[1] > EXACT_MAX_DIM:
        return hypervolume_mc(front, ref_point, samples, seed, sense)[0]
    P = _in_bounds(P, ref)
    if len(P) == 0:
        return 0.0
    return _wfg(nondominated_min(P), ref)


def igd_plus(front, reference, sense: str = "min") -> float:
    """``sqrt(sum_z d+(z)^2) / |Z|`` with ``d+(z) = min_a ||max(a - z, 0)||``."""
    A = np.atleast_2d(_orient(front, sense))
    Z = np.atleast_2d(_orient(reference, sense))
    if A.size == 0 or Z.size == 0:
        raise ValueError("IGD+ needs a nonempty front and reference set")
    if A.shape[1] != Z.shape[1]:
        raise ValueError("front and reference set differ in dimension")
    diff = np.maximum(A[None, :, :] - Z[:, None, :], 0.0)
    d = np.sqrt((diff ** 2).sum(-1)).min(axis=1)
    return float(np.sqrt((d ** 2).sum()) / len(Z))


@dataclass(eq=False)
class ReferenceFront:
    points: np.ndarray
    ref_point: np.ndarray
    sense: str = "min"


def build_reference(fronts, sense: str = "min") -> ReferenceFront:
    """Non-dominated subset of the union; reference point is the union's worst corner plus one."""
    fronts = [np.atleast_2d(np.asarray(f, dtype=float)) for f in fronts]
    fronts = [f for f in fronts if f.size]
    if not fronts:
        raise ValueError("need at least one nonempty front")
    U = np.concatenate([_orient(f, sense) for f in fronts])
    Z = nondominated_min(U)
    # canonical row order so the result does not depend on input order
    Z = Z[np.lexsort(Z.T[::-1])]
    ref = U.max(axis=0) + 1.0
    return ReferenceFront(_orient(Z, sense), _orient(ref, sense), sense)
