"""Command-line entry point: ``mosg <command> [flags]``.

Exit codes: 0 success, 1 usage error, 2 invalid input or failed
revalidation, 3 property failure, 4 time cap reached.
"""
from __future__ import annotations

import argparse
import itertools
import os
import sys
from pathlib import Path

import numpy as np

from .game import EPS, GameInstance, InstanceError, sse_payoffs_batch

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_PROPERTY, EXIT_TIMEOUT = 0, 1, 2, 3, 4
WORKERS_ENV = "MOSG_WORKERS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def _ratio(s: str) -> float:
    v = float(s)
    if not 0.0 < v <= 1.0:
        raise argparse.ArgumentTypeError(f"resource ratio must lie in (0, 1], got {s}")
    return v


def _int_list(s: str) -> list[int]:
    try:
        vals = [int(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}") from None
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError(f"expected positive integers, got {s!r}")
    return vals


def _seeds(s: str) -> list[int]:
    """``5`` means seeds 0..4; ``3,7,9`` lists them."""
    if "," in s:
        return [int(x) for x in s.split(",")]
    return list(range(int(s)))


def resolve_workers(flag: int | None) -> int:
    if flag is not None:
        return flag
    env = os.environ.get(WORKERS_ENV)
    if env is None:
        return 1
    try:
        w = int(env)
    except ValueError:
        raise UsageError(f"{WORKERS_ENV}={env!r} is not an integer") from None
    if w < 1:
        raise UsageError(f"{WORKERS_ENV} must be >= 1")
    return w


def _load_instance(path) -> GameInstance:
    try:
        return GameInstance.load(path)
    except FileNotFoundError:
        raise InstanceError(f"{path}: no such file") from None


def _prefix(p) -> Path:
    p = Path(p)
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _with(prefix: Path, suffix: str) -> Path:
    return prefix.parent / (prefix.name + suffix)


# --- commands --------------------------------------------------------------------

def cmd_gen(args) -> int:
    from .bench.instances import BenchConfig, generate_instance
    inst = generate_instance(BenchConfig(attackers=args.attackers, targets=args.targets,
                                         resource_ratio=args.resource_ratio, seed=args.seed))
    _prefix(args.out)
    inst.save(args.out)
    print(f"wrote {args.out} (N={inst.num_attackers}, T={inst.num_targets}, r={inst.resource_ratio})")
    return EXIT_OK


def cmd_solve(args) -> int:
    from .io import write_front_csv, write_json
    from .moea.run import EAConfig, run
    inst = _load_instance(args.instance)
    cfg = EAConfig.defaults_for(inst.num_attackers, pop_size=args.pop_size, max_gen=args.max_gen,
                                seed=args.seed, refine=not args.no_refine,
                                workers=resolve_workers(args.workers), time_limit=args.time_limit)
    res = run(inst, cfg)
    prefix = _prefix(args.out_prefix)
    a = res.archive
    write_front_csv(_with(prefix, ".csv"), a.fitness, a.codes, a.coverage)
    write_json(_with(prefix, ".json"), {
        "instance": str(args.instance), "config": cfg.to_dict(), "generations": res.generations,
        "evaluations": res.evaluations, "archive_size": len(a), "unrefined_size": len(res.unrefined),
        "eval_seconds": res.eval_seconds, "refine_seconds": res.refine_seconds,
        "total_seconds": res.total_seconds, "timed_out": res.timed_out,
    })
    if not args.no_plot and len(a):
        from .report import plot_front
        plot_front(a.fitness, _with(prefix, ".png"))
    print(f"{len(a)} solutions, {res.generations} generations, {res.total_seconds:.2f}s -> {prefix}.csv")
    return EXIT_TIMEOUT if res.timed_out else EXIT_OK


def cmd_oracle(args) -> int:
    from .bench.oracle import OracleTooLarge, oracle_front
    from .io import write_front_csv
    inst = _load_instance(args.instance)
    try:
        front = oracle_front(inst)
    except OracleTooLarge as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_INVALID
    prefix = _prefix(args.out_prefix)
    write_front_csv(_with(prefix, ".csv"), front.fitness, front.codes, front.coverage)
    print(f"{len(front.fitness)} Pareto points from {front.n_codes} I-codes "
          f"and {front.n_combinations} combinations -> {prefix}.csv")
    return EXIT_OK


def cmd_props(args) -> int:
    from .bench.properties import property_suite
    from .io import write_json
    report = property_suite(args.seed, args.trials)
    for line in report.lines():
        print(line)
    if args.out:
        write_json(_prefix(args.out), report.to_dict())
    return EXIT_OK if report.ok else EXIT_PROPERTY


def _ea_overrides(args, n: int, refine: bool = True):
    from .moea.run import EAConfig
    return EAConfig.defaults_for(n, pop_size=args.pop_size, max_gen=args.max_gen, refine=refine,
                                 workers=resolve_workers(args.workers))


def cmd_ablate(args) -> int:
    from .bench.ablation import ablation_sweep
    from .bench.instances import BenchConfig
    from .io import write_json, write_results_csv
    bench = BenchConfig(attackers=args.attackers, targets=args.targets, resource_ratio=args.resource_ratio,
                        time_cap_minutes=args.time_cap)
    rows = ablation_sweep(bench, args.seeds, _ea_overrides(args, args.attackers))
    prefix = _prefix(args.out_prefix)
    write_results_csv(_with(prefix, ".csv"), rows)
    write_json(_with(prefix, ".json"), {"bench": bench.to_dict(), "seeds": args.seeds,
                                        "ea": _ea_overrides(args, args.attackers).to_dict()})
    if not args.no_plot:
        from .report import plot_ablation
        plot_ablation(rows, _with(prefix, ".png"))
    for k in sorted({r.config for r in rows}):
        hv = [r.hv for r in rows if r.config == k]
        igd = [r.igdplus for r in rows if r.config == k]
        print(f"variant {k}: mean HV {np.mean(hv):.6g}  mean IGD+ {np.mean(igd):.6g}")
    return EXIT_TIMEOUT if any(r.timeout for r in rows) else EXIT_OK


def cmd_bench(args) -> int:
    from .bench.scaling import scaling_run
    from .io import write_json, write_results_csv
    grid = list(itertools.product(args.attackers, args.targets))
    ea = _ea_overrides(args, args.attackers[0], refine=not args.no_refine)
    rows = scaling_run(grid, ea, seed=args.seed, resource_ratio=args.resource_ratio,
                       time_cap_minutes=args.time_cap)
    prefix = _prefix(args.out_prefix)
    write_results_csv(_with(prefix, ".csv"), rows)
    write_json(_with(prefix, ".json"), {"grid": grid, "seed": args.seed, "ea": ea.to_dict(),
                                        "time_cap_minutes": args.time_cap})
    if not args.no_plot:
        from .report import plot_scaling
        plot_scaling(rows, _with(prefix, ".png"))
    for r in rows:
        flag = " TIMEOUT" if r.timeout else ""
        print(f"N={r.n} T={r.t}: {r.runtime_ms / 1000:.2f}s (evaluation {r.eval_ms / 1000:.2f}s){flag}")
    return EXIT_TIMEOUT if any(r.timeout for r in rows) else EXIT_OK


def _parse_ref_point(s: str, dim: int):
    if s == "auto":
        return None
    vals = [float(x) for x in s.split(",")]
    if len(vals) != dim:
        raise UsageError(f"--hv-ref has {len(vals)} values, fronts have {dim} objectives")
    return np.array(vals)


def cmd_metrics(args) -> int:
    from .io import read_front_csv
    from .metrics import build_reference, hypervolume, igd_plus
    try:
        A = read_front_csv(args.front).fitness
        Z = read_front_csv(args.ref).fitness
    except FileNotFoundError as exc:
        raise InstanceError(f"{exc.filename}: no such file") from None
    except ValueError as exc:
        raise InstanceError(str(exc)) from None
    if A.shape[1] != Z.shape[1]:
        raise InstanceError(f"front has {A.shape[1]} objectives, reference set {Z.shape[1]}")
    ref = _parse_ref_point(args.hv_ref, A.shape[1])
    if ref is None:
        ref = build_reference([A, Z], sense=args.sense).ref_point
    hv = float(hypervolume(A, ref, sense=args.sense))
    igd = igd_plus(A, Z, sense=args.sense)
    print(f"hv={hv!r}")
    print(f"igdplus={igd!r}")
    print(f"hv_ref={','.join(repr(float(x)) for x in ref)}")
    return EXIT_OK


def verify_front(inst: GameInstance, fitness, coverage, tol: float = 1e-9) -> list[str]:
    """Problems found when rechecking each row against the instance (empty when all rows pass)."""
    problems = []
    if coverage is None or coverage.shape[1] != inst.num_targets:
        return [f"front has no coverage columns for {inst.num_targets} targets"]
    if fitness.shape[1] != inst.num_attackers:
        return [f"front has {fitness.shape[1]} fitness columns, instance has {inst.num_attackers} attackers"]
    F, _ = sse_payoffs_batch(inst, np.clip(coverage, 0.0, 1.0))
    for k, c in enumerate(coverage):
        if np.any(c < -EPS) or np.any(c > 1.0 + EPS):
            problems.append(f"row {k + 1}: coverage outside [0, 1]")
        elif c.sum() > inst.budget + EPS:
            problems.append(f"row {k + 1}: spends {c.sum()!r} > budget {inst.budget!r}")
        elif np.abs(F[k] - fitness[k]).max() > tol:
            problems.append(f"row {k + 1}: stored fitness {fitness[k].tolist()} != recomputed {F[k].tolist()}")
    return problems


def cmd_verify(args) -> int:
    from .io import read_front_csv
    inst = _load_instance(args.instance)
    try:
        table = read_front_csv(args.front)
    except FileNotFoundError:
        raise InstanceError(f"{args.front}: no such file") from None
    except ValueError as exc:
        raise InstanceError(str(exc)) from None
    problems = verify_front(inst, table.fitness, table.coverage)
    for p in problems:
        print(p)
    print(f"{len(table.fitness)} rows checked, {len(problems)} problem(s)")
    return EXIT_INVALID if problems else EXIT_OK


# --- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mosg", description="Multi-attacker security game solver and benchmark harness.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a random instance")
    g.add_argument("-n", "--attackers", type=_positive_int, required=True)
    g.add_argument("-t", "--targets", type=_positive_int, required=True)
    g.add_argument("-r", "--resource-ratio", type=_ratio, default=0.2)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--out", required=True)
    g.set_defaults(func=cmd_gen)

    def ea_flags(q):
        q.add_argument("--pop-size", type=_positive_int)
        q.add_argument("--max-gen", type=_positive_int)
        q.add_argument("--workers", type=_positive_int, help=f"worker processes (default: ${WORKERS_ENV} or 1)")
        q.add_argument("--no-plot", action="store_true", help="skip the PNG figure")

    s = sub.add_parser("solve", help="run the solver on an instance file")
    s.add_argument("--instance", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--no-refine", action="store_true")
    s.add_argument("--time-limit", type=float, help="wall-clock seconds before the search stops")
    s.add_argument("--out-prefix", required=True)
    ea_flags(s)
    s.set_defaults(func=cmd_solve)

    o = sub.add_parser("oracle", help="exhaustive Pareto front of a small instance")
    o.add_argument("--instance", required=True)
    o.add_argument("--out-prefix", required=True)
    o.set_defaults(func=cmd_oracle)

    pr = sub.add_parser("props", help="run the randomized property suite")
    pr.add_argument("--trials", type=_positive_int, default=1000)
    pr.add_argument("--seed", type=int, default=0)
    pr.add_argument("--out", help="optional JSON report path")
    pr.set_defaults(func=cmd_props)

    a = sub.add_parser("ablate", help="compare solver variants with components switched off")
    a.add_argument("-n", "--attackers", type=_positive_int, default=5)
    a.add_argument("-t", "--targets", type=_positive_int, default=50)
    a.add_argument("-r", "--resource-ratio", type=_ratio, default=0.2)
    a.add_argument("--seeds", type=_seeds, default=list(range(10)), help="count, or comma-separated list")
    a.add_argument("--time-cap", type=float, default=30.0, help="minutes per variant run")
    a.add_argument("--out-prefix", required=True)
    ea_flags(a)
    a.set_defaults(func=cmd_ablate)

    b = sub.add_parser("bench", help="runtime sweep over a grid of attackers x targets")
    b.add_argument("-n", "--attackers", type=_int_list, required=True, help="comma-separated")
    b.add_argument("-t", "--targets", type=_int_list, required=True, help="comma-separated")
    b.add_argument("-r", "--resource-ratio", type=_ratio, default=0.2)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--no-refine", action="store_true")
    b.add_argument("--time-cap", type=float, default=30.0, help="minutes per cell")
    b.add_argument("--out-prefix", required=True)
    ea_flags(b)
    b.set_defaults(func=cmd_bench)

    m = sub.add_parser("metrics", help="HV and IGD+ of a front CSV against a reference CSV")
    m.add_argument("--front", required=True)
    m.add_argument("--ref", required=True)
    m.add_argument("--hv-ref", default="auto", help="'auto' or comma-separated reference point")
    m.add_argument("--sense", choices=("max", "min"), default="max",
                   help="objective orientation of the files (payoffs are maximized)")
    m.set_defaults(func=cmd_metrics)

    v = sub.add_parser("verify", help="recheck a front CSV against its instance")
    v.add_argument("--instance", required=True)
    v.add_argument("--front", required=True)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"mosg: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InstanceError, ValueError) as exc:
        print(f"mosg: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
