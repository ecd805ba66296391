"""Evolutionary search over I-codes with an NSGA-III style survival step."""
from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from ..discretize import IdealProfile, ideal_profile, target_order
from ..evaluate import EvaluationResult, evaluate_code
from ..game import GameInstance
from .archive import FrontArchive
from .nsga3 import survive
from .operators import tournament, vary
from .riesz import ConfigError, riesz_directions


@dataclass
class EAConfig:
    pop_size: int = 400
    # total generations, the initial population counting as the first
    max_gen: int = 300
    seed: int = 0
    crossover_prob: float = 0.9
    crossover_eta: float = 15.0
    mutation_prob: float | None = None
    mutation_eta: float = 20.0
    refine: bool = True
    workers: int = 1
    # wall-clock seconds; the search stops after the generation that crosses it
    time_limit: float | None = None

    @classmethod
    def defaults_for(cls, n_attackers: int, **overrides) -> "EAConfig":
        base = dict(pop_size=50, max_gen=50) if n_attackers == 3 else {}
        base.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**base)

    def validate(self, n_attackers: int) -> None:
        if self.pop_size < n_attackers:
            raise ConfigError(f"pop_size {self.pop_size} must be >= number of attackers {n_attackers}")
        if self.max_gen < 1:
            raise ConfigError("max_gen must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ConfigError("time_limit must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class RunResult:
    archive: FrontArchive
    unrefined: FrontArchive
    initial: FrontArchive
    generations: int
    evaluations: int
    eval_seconds: float
    total_seconds: float
    history: list = field(default_factory=list)
    refine_seconds: float = 0.0
    timed_out: bool = False


# --- evaluation, optionally in worker processes ---------------------------------

_WORKER_STATE: tuple | None = None


def _init_worker(inst, order, ideal):
    global _WORKER_STATE
    _WORKER_STATE = (inst, order, ideal)


def _eval_worker(code):
    inst, order, ideal = _WORKER_STATE
    return evaluate_code(inst, order, ideal, code)


class Evaluator:
    """Memoized code evaluation; results always come back in submission order."""

    def __init__(self, inst: GameInstance, order: np.ndarray, ideal: IdealProfile, workers: int = 1,
                 evaluate: Callable | None = None):
        self.inst, self.order, self.ideal = inst, order, ideal
        self.cache: dict[tuple, EvaluationResult] = {}
        self.calls = 0
        self.seconds = 0.0
        self._evaluate = evaluate
        self._pool = None
        if workers > 1 and evaluate is None:
            self._pool = ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(inst, order, ideal))
            self._workers = workers

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def __call__(self, codes: np.ndarray) -> list[EvaluationResult]:
        t0 = time.perf_counter()
        keys = [tuple(int(g) for g in c) for c in codes]
        todo = list(dict.fromkeys(k for k in keys if k not in self.cache))
        if todo:
            arrays = [np.array(k, dtype=np.int64) for k in todo]
            if self._evaluate is not None:
                out = [self._evaluate(c) for c in arrays]
            elif self._pool is not None:
                chunk = max(1, len(arrays) // (4 * self._workers))
                out = list(self._pool.map(_eval_worker, arrays, chunksize=chunk))
            else:
                out = [evaluate_code(self.inst, self.order, self.ideal, c) for c in arrays]
            self.cache.update(zip(todo, out))
            self.calls += len(todo)
        self.seconds += time.perf_counter() - t0
        return [self.cache[k] for k in keys]


def _objectives(results: list[EvaluationResult], n: int) -> tuple[np.ndarray, np.ndarray]:
    F = np.full((len(results), n), np.nan)
    V = np.zeros(len(results))
    for k, r in enumerate(results):
        if r.feasible:
            F[k] = r.fitness
        else:
            V[k] = max(r.violation, 1e-12)
    return F, V


def _archive_feasible(archive: FrontArchive, codes, results) -> None:
    ok = [k for k, r in enumerate(results) if r.feasible]
    if ok:
        archive.update(codes[ok], [results[k].coverage for k in ok], [results[k].fitness for k in ok])


def _unique_offspring(pop, parents_fn, limit, space: int, max_tries=100):
    """Collect up to ``limit`` offspring that differ from the population and each other.

    ``space`` is the number of distinct codes; once all are seen there is nothing left to find.
    """
    seen = {tuple(c) for c in pop.tolist()}
    kept = []
    for _ in range(max_tries):
        if len(seen) >= space:
            break
        for c in parents_fn().tolist():
            t = tuple(c)
            if t not in seen:
                seen.add(t)
                kept.append(c)
                if len(kept) == limit:
                    return np.array(kept, dtype=np.int64)
    return np.array(kept, dtype=np.int64).reshape(-1, pop.shape[1])


def run(inst: GameInstance, config: EAConfig | None = None, *, evaluate: Callable | None = None,
        on_generation: Callable | None = None, order: np.ndarray | None = None,
        ideal: IdealProfile | None = None) -> RunResult:
    """Search I-codes for ``config.max_gen`` generations and return the (refined) archive.

    ``evaluate`` swaps in a different code-to-coverage restoration (used by the
    ablation variants); it must return :class:`EvaluationResult` objects.
    ``on_generation(gen, archive)`` is called after every archive update.
    """
    from ..refine import PrefixTable, refine_archive

    t_start = time.perf_counter()
    N = inst.num_attackers
    config = config or EAConfig.defaults_for(N)
    config.validate(N)
    rng = np.random.default_rng(config.seed)
    order = target_order(inst) if order is None else order
    ideal = ideal_profile(inst, order) if ideal is None else ideal
    gm = np.asarray(ideal.gamma_max)
    dirs = riesz_directions(N, config.pop_size, seed=0)
    archive = FrontArchive(N, inst.num_targets)
    space = int(np.prod(gm.astype(object)))

    with Evaluator(inst, order, ideal, config.workers, evaluate) as ev:
        pop = rng.integers(1, gm + 1, size=(config.pop_size, N))
        res = ev(pop)
        _archive_feasible(archive, pop, res)
        F, V = _objectives(res, N)
        surv = survive(F, V, dirs, config.pop_size, rng)
        initial = archive.copy()
        history = [(1, len(archive))]
        if on_generation:
            on_generation(1, archive)
        timed_out = False
        gen_done = 1
        for gen in range(2, config.max_gen + 1):
            if config.time_limit is not None and time.perf_counter() - t_start > config.time_limit:
                timed_out = True
                break
            def offspring():
                sel = tournament(surv.rank, surv.niche_dist, config.pop_size + config.pop_size % 2, rng)
                return vary(pop[sel], gm, rng, config.crossover_prob, config.crossover_eta,
                            config.mutation_prob, config.mutation_eta)

            kids = _unique_offspring(pop, offspring, config.pop_size, space)
            if len(kids):
                kid_res = ev(kids)
                _archive_feasible(archive, kids, kid_res)
                merged = np.concatenate([pop, kids])
                res = res + kid_res
                F, V = _objectives(res, N)
            else:
                merged = pop
            surv = survive(F, V, dirs, config.pop_size, rng)
            pop = merged[surv.index]
            res = [res[k] for k in surv.index]
            F, V = F[surv.index], V[surv.index]
            # ranks and niche distances now index the surviving population
            surv.index = np.arange(config.pop_size)
            history.append((gen, len(archive)))
            if on_generation:
                on_generation(gen, archive)
            gen_done = gen
        evaluations, eval_seconds = ev.calls, ev.seconds

    unrefined = archive
    t_refine = time.perf_counter()
    if config.refine:
        archive = refine_archive(inst, order, archive, PrefixTable(inst, order, ideal))
    t_end = time.perf_counter()
    return RunResult(archive, unrefined, initial, gen_done, evaluations, eval_seconds,
                     t_end - t_start, history, t_end - t_refine, timed_out)
