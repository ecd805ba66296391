"""Component ablation: the solver with parts switched off, scored on a shared reference front.

Five variants, keyed by which of (discretization, restoration, refinement) are on:

1. ``(F, F, F)`` evolve raw coverage vectors, repairing over-budget ones by rescaling
2. ``(T, F, F)`` evolve I-codes, restoring each with uniformly random alternatives
3. ``(T, F, T)`` variant 2 followed by refinement
4. ``(T, T, F)`` the full solver without refinement
5. ``(T, T, T)`` the full solver
"""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass, replace

import numpy as np

from ..discretize import IdealProfile, ideal_profile, target_order
from ..evaluate import EvaluationResult, _alternative_matrix, finish_coverage
from ..game import EPS, GameInstance, sse_payoffs_batch
from ..metrics import build_reference, hypervolume, igd_plus
from ..moea.archive import FrontArchive
from ..moea.nsga3 import survive
from ..moea.operators import polynomial_mutation, sbx, tournament
from ..moea.riesz import riesz_directions
from ..moea.run import EAConfig, run
from .instances import BenchConfig, generate_instance

VARIANTS = {
    (False, False, False): 1,
    (True, False, False): 2,
    (True, False, True): 3,
    (True, True, False): 4,
    (True, True, True): 5,
}


def variant_of(config: BenchConfig) -> int:
    key = (config.discretization, config.restoration, config.refinement)
    if key not in VARIANTS:
        raise ValueError(f"no ablation variant for flags {key}")
    return VARIANTS[key]


@dataclass
class AblationRow:
    n: int
    t: int
    seed: int
    config: int
    hv: float
    igdplus: float
    runtime_ms: float
    timeout: bool

    def to_dict(self) -> dict:
        return asdict(self)


def rescale_repair(C: np.ndarray, budget: float) -> np.ndarray:
    """``c <- c * budget / sum(c)`` for rows over budget."""
    total = C.sum(axis=1, keepdims=True)
    scale = np.where(total > budget, budget / np.maximum(total, EPS), 1.0)
    return C * scale


@dataclass
class CoverageRun:
    archive: FrontArchive
    seconds: float
    timed_out: bool


def coverage_ea(inst: GameInstance, config: EAConfig) -> CoverageRun:
    """NSGA-III directly on coverage vectors in ``[0, 1]^T`` with rescaling repair."""
    t0 = time.perf_counter()
    N, T = inst.num_attackers, inst.num_targets
    rng = np.random.default_rng(config.seed)
    dirs = riesz_directions(N, config.pop_size, seed=0)
    lower, upper = np.zeros(T), np.ones(T)
    mut = config.mutation_prob if config.mutation_prob is not None else 1.0 / T
    archive = FrontArchive(N, T)
    codes = np.zeros((config.pop_size, N), dtype=np.int64)

    def evaluate(C):
        F, _ = sse_payoffs_batch(inst, C)
        archive.update(codes[: len(C)], C, F)
        return F

    pop = rescale_repair(rng.random((config.pop_size, T)), inst.budget)
    F = evaluate(pop)
    feasible = np.zeros(config.pop_size)
    surv = survive(F, feasible, dirs, config.pop_size, rng)
    timed_out = False
    for _ in range(2, config.max_gen + 1):
        if config.time_limit is not None and time.perf_counter() - t0 > config.time_limit:
            timed_out = True
            break
        sel = tournament(surv.rank, surv.niche_dist, config.pop_size + config.pop_size % 2, rng)
        parents = pop[sel]
        half = len(parents) // 2
        c1, c2 = sbx(parents[:half], parents[half:2 * half], lower, upper,
                     config.crossover_prob, config.crossover_eta, rng)
        kids = polynomial_mutation(np.concatenate([c1, c2])[: config.pop_size], lower, upper, mut,
                                   config.mutation_eta, rng)
        kids = rescale_repair(kids, inst.budget)
        merged = np.concatenate([pop, kids])
        F = np.concatenate([F, evaluate(kids)])
        surv = survive(F, np.zeros(len(merged)), dirs, config.pop_size, rng)
        pop, F = merged[surv.index], F[surv.index]
        surv.index = np.arange(config.pop_size)
    return CoverageRun(archive, time.perf_counter() - t0, timed_out)


def random_restoration(inst: GameInstance, order: np.ndarray, ideal: IdealProfile, code,
                       seed: int = 0) -> EvaluationResult:
    """Per target, a uniform draw over the distinct values of {0} and its alternatives.

    The draw is seeded by ``(seed, *code)`` so a code always restores the same way.
    """
    code = np.asarray(code, dtype=np.int64)
    rng = np.random.default_rng([seed, *code.tolist()])
    alt, _ = _alternative_matrix(inst, order, code)
    alt = np.where(alt > 1.0 + EPS, np.nan, np.minimum(alt, 1.0))
    attracted = ~np.isnan(alt).all(axis=0)
    # per column: the zero option on top, then alternatives ascending, NaN last
    S = np.sort(np.vstack([np.zeros((1, inst.num_targets)), alt]), axis=0)
    prev = np.vstack([np.full((1, inst.num_targets), -np.inf), S[:-1]])
    with np.errstate(invalid="ignore"):
        distinct = ~np.isnan(S) & (S - prev > EPS)
    pick = (rng.random(inst.num_targets) * distinct.sum(axis=0)).astype(np.int64)
    row = np.argmax(np.cumsum(distinct, axis=0) > pick[None, :], axis=0)
    cover = np.where(attracted, S[row, np.arange(inst.num_targets)], 0.0)
    rank = np.full(inst.num_targets, -1, dtype=np.int64)
    return finish_coverage(inst, ideal, cover, rank, inst.num_attackers * inst.num_targets)


def _ea_config(bench: BenchConfig, ea: EAConfig | None) -> EAConfig:
    base = ea or EAConfig.defaults_for(bench.attackers)
    return replace(base, seed=bench.seed, time_limit=bench.time_cap_minutes * 60.0)


def variant_fronts(inst: GameInstance, bench: BenchConfig, ea: EAConfig | None = None) -> dict:
    """``{variant: (fitness array, runtime seconds, timed_out)}`` for all five variants.

    Variants 2/3 and 4/5 share one search each; the refined variant adds the
    refinement time to the runtime of the unrefined one.
    """
    cfg = _ea_config(bench, ea)
    order = target_order(inst)
    ideal = ideal_profile(inst, order)
    out = {}
    cc = coverage_ea(inst, cfg)
    out[1] = (cc.archive.fitness, cc.seconds, cc.timed_out)

    def rnd(code):
        return random_restoration(inst, order, ideal, code, cfg.seed)

    for evaluate, (plain, refined) in ((rnd, (2, 3)), (None, (4, 5))):
        res = run(inst, replace(cfg, refine=True), evaluate=evaluate, order=order, ideal=ideal)
        search = res.total_seconds - res.refine_seconds
        out[plain] = (res.unrefined.fitness, search, res.timed_out)
        out[refined] = (res.archive.fitness, res.total_seconds, res.timed_out)
    return out


def score_fronts(fronts: dict) -> dict:
    """HV and IGD+ of each front against the shared reference built from all of them."""
    ref = build_reference([f for f, *_ in fronts.values()], sense="max")
    scores = {}
    for key, (F, *_rest) in fronts.items():
        if len(F) == 0:
            scores[key] = (0.0, float("inf"))
            continue
        scores[key] = (hypervolume(F, ref.ref_point, sense="max"), igd_plus(F, ref.points, sense="max"))
    return scores


def ablation_run(bench: BenchConfig, ea: EAConfig | None = None) -> list[AblationRow]:
    """All five variants on the instance drawn from ``bench``; one row per variant."""
    inst = generate_instance(bench)
    fronts = variant_fronts(inst, bench, ea)
    scores = score_fronts(fronts)
    rows = []
    for key in sorted(fronts):
        _, seconds, timed_out = fronts[key]
        hv, igd = scores[key]
        rows.append(AblationRow(bench.attackers, bench.targets, bench.seed, key, hv, igd,
                                seconds * 1000.0, timed_out))
    return rows


def ablation_sweep(bench: BenchConfig, seeds, ea: EAConfig | None = None) -> list[AblationRow]:
    rows = []
    for s in seeds:
        rows.extend(ablation_run(replace(bench, seed=int(s)), ea))
    return rows
