"""Security-game model: payoffs, attack sets, SSE tie-breaking and dominance.

Payoff arrays are stored attacker-major with shape ``(N, T)``.  Target and
attacker indices are zero-based everywhere in the library.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

# absolute tolerance for attack-set membership and payoff equality
EPS = 1e-9


class InstanceError(ValueError):
    """An instance violates one of the model constraints."""


class InfeasibleCoverage(ValueError):
    """Coverage spends more than the budget ``r*T``."""

    def __init__(self, violation: float):
        super().__init__(f"coverage exceeds budget by {violation:.6g}")
        self.violation = violation


class UndefinedGap(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GameInstance:
    """Payoff structure for ``N`` attackers over ``T`` targets plus resource ratio."""

    resource_ratio: float
    u_cov_att: np.ndarray
    u_unc_att: np.ndarray
    u_cov_def: np.ndarray
    u_unc_def: np.ndarray
    budget: float = field(init=False)

    def __post_init__(self):
        arrays = {}
        for name in ("u_cov_att", "u_unc_att", "u_cov_def", "u_unc_def"):
            a = np.array(getattr(self, name), dtype=float)
            if a.ndim != 2:
                raise InstanceError(f"{name} must be a 2-D (attackers x targets) array")
            a.setflags(write=False)
            arrays[name] = a
            object.__setattr__(self, name, a)
        shapes = {a.shape for a in arrays.values()}
        if len(shapes) != 1:
            raise InstanceError(f"payoff arrays disagree in shape: {sorted(shapes)}")
        n, t = arrays["u_cov_att"].shape
        if n < 1 or t < 1:
            raise InstanceError("need at least one attacker and one target")
        r = float(self.resource_ratio)
        if not (0.0 < r <= 1.0):
            raise InstanceError(f"resource ratio r={r} must lie in (0, 1]")
        for name, a in arrays.items():
            if not np.all(np.isfinite(a)):
                raise InstanceError(f"{name} contains non-finite payoffs")
        bad = np.argwhere(~(arrays["u_cov_att"] < arrays["u_unc_att"]))
        if bad.size:
            i, j = bad[0]
            raise InstanceError(
                f"attacker {i} target {j}: u_cov_att must be < u_unc_att "
                f"({arrays['u_cov_att'][i, j]} vs {arrays['u_unc_att'][i, j]})")
        bad = np.argwhere(~(arrays["u_cov_def"] >= arrays["u_unc_def"]))
        if bad.size:
            i, j = bad[0]
            raise InstanceError(
                f"attacker {i} target {j}: u_cov_def must be >= u_unc_def "
                f"({arrays['u_cov_def'][i, j]} vs {arrays['u_unc_def'][i, j]})")
        object.__setattr__(self, "resource_ratio", r)
        object.__setattr__(self, "budget", r * t)

    @property
    def num_attackers(self) -> int:
        return self.u_cov_att.shape[0]

    @property
    def num_targets(self) -> int:
        return self.u_cov_att.shape[1]

    # --- serialization -------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "n": self.num_attackers,
            "t": self.num_targets,
            "r": self.resource_ratio,
            "attackers": [
                {
                    "u_cov_att": self.u_cov_att[i].tolist(),
                    "u_unc_att": self.u_unc_att[i].tolist(),
                    "u_cov_def": self.u_cov_def[i].tolist(),
                    "u_unc_def": self.u_unc_def[i].tolist(),
                }
                for i in range(self.num_attackers)
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GameInstance":
        for key in ("n", "t", "r", "attackers"):
            if key not in d:
                raise InstanceError(f"missing field {key!r}")
        n, t = d["n"], d["t"]
        if not isinstance(n, int) or n < 1:
            raise InstanceError(f"n must be a positive integer, got {n!r}")
        if not isinstance(t, int) or t < 1:
            raise InstanceError(f"t must be a positive integer, got {t!r}")
        attackers = d["attackers"]
        if len(attackers) != n:
            raise InstanceError(f"expected {n} attackers, found {len(attackers)}")
        cols = {}
        for key in ("u_cov_att", "u_unc_att", "u_cov_def", "u_unc_def"):
            rows = []
            for i, a in enumerate(attackers):
                if key not in a:
                    raise InstanceError(f"attacker {i}: missing field {key!r}")
                if len(a[key]) != t:
                    raise InstanceError(f"attacker {i}: {key} has {len(a[key])} entries, expected {t}")
                rows.append(a[key])
            cols[key] = rows
        try:
            r = float(d["r"])
        except (TypeError, ValueError):
            raise InstanceError(f"r must be a real number, got {d['r']!r}") from None
        return cls(resource_ratio=r, **cols)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def load(cls, path) -> "GameInstance":
        try:
            d = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise InstanceError(f"{path}: not valid JSON ({exc})") from None
        return cls.from_dict(d)


@dataclass(frozen=True)
class AttackSet:
    attacker_id: int
    members: tuple[int, ...]
    attacked_target: int


class Relation(enum.Enum):
    """Relation of ``a`` to ``b``; weak dominance is DOMINATES or EQUAL."""

    DOMINATES = "dominates"
    DOMINATED = "dominated"
    INCOMPARABLE = "incomparable"
    EQUAL = "equal"


def _check_index(inst: GameInstance, i: int, t: int | None = None) -> None:
    if not 0 <= i < inst.num_attackers:
        raise IndexError(f"attacker index {i} out of range [0, {inst.num_attackers})")
    if t is not None and not 0 <= t < inst.num_targets:
        raise IndexError(f"target index {t} out of range [0, {inst.num_targets})")


def expected_attacker_payoff(inst: GameInstance, i: int, t: int, c_t: float) -> float:
    _check_index(inst, i, t)
    return c_t * inst.u_cov_att[i, t] + (1.0 - c_t) * inst.u_unc_att[i, t]


def expected_defender_payoff(inst: GameInstance, i: int, t: int, c_t: float) -> float:
    _check_index(inst, i, t)
    return c_t * inst.u_cov_def[i, t] + (1.0 - c_t) * inst.u_unc_def[i, t]


def attacker_payoffs(inst: GameInstance, cover) -> np.ndarray:
    """``(N, T)`` matrix of attacker payoffs under coverage ``cover``."""
    c = np.asarray(cover, dtype=float)
    return inst.u_unc_att + c * (inst.u_cov_att - inst.u_unc_att)


def defender_payoffs(inst: GameInstance, cover) -> np.ndarray:
    c = np.asarray(cover, dtype=float)
    return inst.u_unc_def + c * (inst.u_cov_def - inst.u_unc_def)


def _validate_cover(inst: GameInstance, cover) -> np.ndarray:
    c = np.asarray(cover, dtype=float)
    if c.shape != (inst.num_targets,):
        raise ValueError(f"coverage must have length {inst.num_targets}, got shape {c.shape}")
    if np.any(c < -EPS) or np.any(c > 1.0 + EPS):
        raise ValueError("coverage components must lie in [0, 1]")
    return c


def attack_set(inst: GameInstance, i: int, cover) -> AttackSet:
    _check_index(inst, i)
    c = _validate_cover(inst, cover)
    ua = attacker_payoffs(inst, c)[i]
    members = np.flatnonzero(ua >= ua.max() - EPS)
    ud = defender_payoffs(inst, c)[i, members]
    # argmax returns the first maximum, i.e. the lowest target index among ties
    best = members[int(np.argmax(ud >= ud.max() - EPS))]
    return AttackSet(i, tuple(int(m) for m in members), int(best))


def attacked_targets(inst: GameInstance, cover) -> np.ndarray:
    """SSE attacked target for every attacker, vectorized over attackers."""
    c = np.asarray(cover, dtype=float)
    ua = attacker_payoffs(inst, c)
    ud = defender_payoffs(inst, c)
    members = ua >= ua.max(axis=1, keepdims=True) - EPS
    masked = np.where(members, ud, -np.inf)
    best = masked >= masked.max(axis=1, keepdims=True) - EPS
    return np.argmax(best, axis=1)


def sse_payoffs(inst: GameInstance, cover) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(fitness, attacked_targets)`` without any budget check."""
    c = np.asarray(cover, dtype=float)
    at = attacked_targets(inst, c)
    rows = np.arange(inst.num_attackers)
    ud = inst.u_unc_def[rows, at] + c[at] * (inst.u_cov_def[rows, at] - inst.u_unc_def[rows, at])
    return ud, at


def sse_payoffs_batch(inst: GameInstance, covers) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise :func:`sse_payoffs` for an ``(M, T)`` stack of coverages."""
    C = np.asarray(covers, dtype=float)
    ua = inst.u_unc_att[None] + C[:, None, :] * (inst.u_cov_att - inst.u_unc_att)[None]
    ud = inst.u_unc_def[None] + C[:, None, :] * (inst.u_cov_def - inst.u_unc_def)[None]
    members = ua >= ua.max(axis=2, keepdims=True) - EPS
    masked = np.where(members, ud, -np.inf)
    best = masked >= masked.max(axis=2, keepdims=True) - EPS
    at = np.argmax(best, axis=2)
    return np.take_along_axis(ud, at[..., None], axis=2)[..., 0], at


def budget_violation(inst: GameInstance, cover) -> float:
    return float(np.sum(cover)) - inst.budget


def fitness(inst: GameInstance, cover) -> np.ndarray:
    """Defender payoff against each attacker under SSE; raises on budget overrun."""
    c = _validate_cover(inst, cover)
    v = budget_violation(inst, c)
    if v > EPS:
        raise InfeasibleCoverage(v)
    return sse_payoffs(inst, c)[0]


def dominates(a, b) -> Relation:
    """Pareto relation of ``a`` to ``b`` under maximization of every component."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    ge = np.all(a >= b)
    le = np.all(a <= b)
    if ge and le:
        return Relation.EQUAL
    if ge:
        return Relation.DOMINATES
    if le:
        return Relation.DOMINATED
    return Relation.INCOMPARABLE


def weakly_dominates(a, b) -> bool:
    return dominates(a, b) in (Relation.DOMINATES, Relation.EQUAL)


def payoff_gap(inst: GameInstance, i: int, cover, at_i: int) -> float:
    """Defender-payoff drop for attacker ``i`` if ``at_i`` leaves the attack set."""
    gamma = attack_set(inst, i, cover).members
    if len(gamma) < 2:
        raise UndefinedGap(f"attack set of attacker {i} has {len(gamma)} member(s); need >= 2")
    if at_i not in gamma:
        raise ValueError(f"target {at_i} is not in the attack set of attacker {i}")
    ud = defender_payoffs(inst, cover)[i]
    rest = [t for t in gamma if t != at_i]
    return float(ud[list(gamma)].max() - ud[rest].max())
