"""Random benchmark instances with integer payoffs."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..game import GameInstance


@dataclass
class BenchConfig:
    attackers: int = 3
    targets: int = 25
    resource_ratio: float = 0.2
    seed: int = 0
    time_cap_minutes: float = 30.0
    repeats: int = 30
    discretization: bool = True
    restoration: bool = True
    refinement: bool = True

    def __post_init__(self):
        if self.restoration and not self.discretization:
            raise ValueError("restoration requires the I-code discretization")
        if self.attackers < 1 or self.targets < 1:
            raise ValueError("need at least one attacker and one target")
        if not 0.0 < self.resource_ratio <= 1.0:
            raise ValueError(f"resource ratio {self.resource_ratio} must lie in (0, 1]")

    def to_dict(self) -> dict:
        return asdict(self)


def generate_instance(config: BenchConfig | None = None, **kw) -> GameInstance:
    """Uncovered attacker and covered defender payoffs in 1..10; the other two in -10..-1."""
    config = config or BenchConfig(**kw)
    rng = np.random.default_rng(config.seed)
    shape = (config.attackers, config.targets)
    u_unc_att = rng.integers(1, 11, size=shape)
    u_cov_def = rng.integers(1, 11, size=shape)
    u_cov_att = rng.integers(-10, 0, size=shape)
    u_unc_def = rng.integers(-10, 0, size=shape)
    return GameInstance(config.resource_ratio, u_cov_att, u_unc_att, u_cov_def, u_unc_def)
