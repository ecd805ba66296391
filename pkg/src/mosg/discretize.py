"""Target orders, I-code decoding, indifference coverage and ideal solutions.

An I-code is an integer vector ``sizes`` of length N where ``sizes[i]`` is the
number of targets in attacker ``i``'s attack set.  Attack sets are always
prefixes of the attacker's order (targets sorted by descending uncovered
attacker payoff), so the code determines the whole attack group.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .game import EPS, GameInstance, attack_set, defender_payoffs


class SaturationError(ValueError):
    """Indifference coverage of a prefix would need a component above 1."""


class CodeBoundsError(ValueError):
    pass


def target_order(inst: GameInstance) -> np.ndarray:
    """``(N, T)`` int array; row ``i`` lists targets by descending ``u_unc_att[i]``."""
    # stable sort on the negated key keeps ascending index among ties
    return np.argsort(-inst.u_unc_att, axis=1, kind="stable")


def check_code(code, gamma_max) -> np.ndarray:
    c = np.asarray(code)
    gm = np.asarray(gamma_max)
    if c.shape != gm.shape:
        raise CodeBoundsError(f"code has length {c.size}, expected {gm.size}")
    if not np.issubdtype(c.dtype, np.integer):
        if not np.all(np.equal(np.mod(c, 1), 0)):
            raise CodeBoundsError(f"code {c.tolist()} has non-integer genes")
        c = c.astype(np.int64)
    bad = np.flatnonzero((c < 1) | (c > gm))
    if bad.size:
        i = int(bad[0])
        raise CodeBoundsError(f"gene {i} = {int(c[i])} outside [1, {int(gm[i])}]")
    return c


def decode(inst: GameInstance, order: np.ndarray, code) -> list[tuple[int, ...]]:
    """Attack-set members per attacker: the first ``code[i]`` targets of its order."""
    c = check_code(code, np.full(inst.num_attackers, inst.num_targets))
    return [tuple(int(t) for t in order[i, : c[i]]) for i in range(inst.num_attackers)]


def _coverage_to_level(inst: GameInstance, i: int, targets, level: float) -> np.ndarray:
    uu = inst.u_unc_att[i, targets]
    uc = inst.u_cov_att[i, targets]
    return (level - uu) / (uc - uu)


def indifference_coverage(inst: GameInstance, i: int, gamma) -> np.ndarray:
    """Coverage over the members of ``gamma`` (in the given order) equalizing attacker payoffs.

    The anchor is the last member, which stays uncovered.  Raises
    :class:`SaturationError` if some member would need coverage above 1.
    """
    gamma = np.asarray(gamma, dtype=int)
    if gamma.size == 0:
        raise ValueError("empty attack set")
    anchor = inst.u_unc_att[i, gamma[-1]]
    cov = _coverage_to_level(inst, i, gamma, anchor)
    cov[-1] = 0.0
    # prefixes of the order never need negative coverage; guard round-off
    cov = np.maximum(cov, 0.0)
    if np.any(cov > 1.0 + EPS):
        j = int(np.argmax(cov))
        raise SaturationError(
            f"attacker {i}: target {int(gamma[j])} needs coverage {cov[j]:.6g} > 1")
    return np.minimum(cov, 1.0)


def prefix_coverage(inst: GameInstance, order: np.ndarray, i: int, k: int) -> np.ndarray:
    """Full length-T coverage vector for attacker ``i``'s ``k``-prefix."""
    c = np.zeros(inst.num_targets)
    prefix = order[i, :k]
    c[prefix] = indifference_coverage(inst, i, prefix)
    return c


def _prefix_fits(inst: GameInstance, order: np.ndarray, i: int, k: int) -> bool:
    prefix = order[i, :k]
    cov = _coverage_to_level(inst, i, prefix, inst.u_unc_att[i, prefix[-1]])
    cov[-1] = 0.0
    return bool(cov.max() <= 1.0 + EPS and cov.sum() <= inst.budget + EPS)


def max_prefix(inst: GameInstance, order: np.ndarray, i: int) -> int:
    """Largest prefix length whose indifference coverage respects budget and unit caps.

    Every component grows as the prefix extends, so feasibility is monotone
    in the length and a binary search suffices.
    """
    lo, hi = 1, inst.num_targets
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if _prefix_fits(inst, order, i, mid):
            lo = mid
        else:
            hi = mid - 1
    return lo


def optimal_level(inst: GameInstance, order: np.ndarray, i: int) -> float:
    """Lowest attacker payoff level reachable for attacker ``i`` with the whole budget.

    Covering every target above level ``y`` down to ``y`` costs a piecewise
    linear, decreasing amount; the level is also floored by the covered
    payoff of any target above it (unit caps).
    """
    uu = inst.u_unc_att[i, order[i]]
    uc = inst.u_cov_att[i, order[i]]
    span = uu - uc
    T = inst.num_targets
    num = den = 0.0
    cap = -np.inf
    for k in range(T):
        # on this segment the first k+1 targets sit above the level
        num += uu[k] / span[k]
        den += 1.0 / span[k]
        cap = max(cap, uc[k])
        floor = uu[k + 1] if k + 1 < T else -np.inf
        y = max((num - inst.budget) / den, cap, floor)
        if y > floor:
            return float(y)
    return float(y)


def ideal_coverage(inst: GameInstance, order: np.ndarray, i: int) -> np.ndarray:
    level = optimal_level(inst, order, i)
    uu, uc = inst.u_unc_att[i], inst.u_cov_att[i]
    return np.clip((uu - level) / (uu - uc), 0.0, 1.0)


@dataclass(frozen=True, eq=False)
class IdealProfile:
    """Per-attacker ideal solutions.

    ``ideal_cov[i]`` spends the whole budget against attacker ``i`` alone,
    pushing its payoff level as low as budget and unit caps allow; the
    resulting defender payoffs bound every feasible fitness from above.
    ``gamma_max[i]`` is the longest prefix whose breakpoint indifference
    coverage is affordable, which is also the size of ``i``'s ideal attack set.
    """

    ideal_cov: np.ndarray
    ideal_fitness: np.ndarray
    ideal_at: np.ndarray
    gamma_max: np.ndarray


def ideal_profile(inst: GameInstance, order: np.ndarray | None = None) -> IdealProfile:
    if order is None:
        order = target_order(inst)
    N, T = inst.num_attackers, inst.num_targets
    gm = np.empty(N, dtype=np.int64)
    cov = np.zeros((N, T))
    fit = np.empty(N)
    at = np.empty(N, dtype=np.int64)
    for i in range(N):
        gm[i] = max_prefix(inst, order, i)
        cov[i] = ideal_coverage(inst, order, i)
        at[i] = attack_set(inst, i, cov[i]).attacked_target
        fit[i] = defender_payoffs(inst, cov[i])[i, at[i]]
    for a in (cov, fit, at, gm):
        a.setflags(write=False)
    return IdealProfile(cov, fit, at, gm)
