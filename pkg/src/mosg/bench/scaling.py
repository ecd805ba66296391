"""Runtime sweeps over grids of (attackers, targets)."""
from __future__ import annotations

from dataclasses import asdict, dataclass, replace

import numpy as np

from ..moea.run import EAConfig, run
from .instances import BenchConfig, generate_instance


@dataclass
class ScalingRow:
    n: int
    t: int
    seed: int
    config: str
    hv: float
    igdplus: float
    runtime_ms: float
    timeout: bool
    eval_ms: float
    evaluations: int
    archive: int
    generations: int

    def to_dict(self) -> dict:
        return asdict(self)


def cell_seed(seed: int, index: int) -> int:
    return seed ^ index


def scaling_run(grid, ea: EAConfig | None = None, seed: int = 0, resource_ratio: float = 0.2,
                time_cap_minutes: float = 30.0) -> list[ScalingRow]:
    """Solve one generated instance per ``(n, t)`` cell, sequentially so timings do not interfere.

    A cell that exceeds the cap is stopped after its current generation and
    marked as a timeout.  HV and IGD+ are left as NaN: cells share no reference
    front.
    """
    rows = []
    for idx, (n, t) in enumerate(grid):
        s = cell_seed(seed, idx)
        bench = BenchConfig(attackers=int(n), targets=int(t), resource_ratio=resource_ratio, seed=s,
                            time_cap_minutes=time_cap_minutes)
        inst = generate_instance(bench)
        cfg = replace(ea or EAConfig.defaults_for(int(n)), seed=s, time_limit=time_cap_minutes * 60.0)
        res = run(inst, cfg)
        rows.append(ScalingRow(int(n), int(t), s, "refined" if cfg.refine else "unrefined", float("nan"),
                               float("nan"), res.total_seconds * 1000.0, res.timed_out,
                               res.eval_seconds * 1000.0, res.evaluations, len(res.archive),
                               res.generations))
    return rows


def linear_fit(x, y) -> tuple[float, float, float]:
    """Least-squares line; returns (slope, intercept, R^2)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid ** 2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2
