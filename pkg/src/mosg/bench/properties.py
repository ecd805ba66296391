"""Randomized checks of the structural claims the solver relies on.

Every check draws its instances from a seeded generator and returns a
:class:`PropertyResult` with the number of trials, the number of failures and
the first counterexample found.  Nothing here raises on a failed property.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from ..discretize import decode, ideal_profile, indifference_coverage, prefix_coverage, target_order
from ..evaluate import bitopt, evaluate_code
from ..game import (EPS, GameInstance, attack_set, defender_payoffs, expected_attacker_payoff,
                    expected_defender_payoff, fitness, payoff_gap, sse_payoffs)
from ..metrics import hypervolume, igd_plus
from ..moea.archive import ArchiveEntry
from ..refine import PrefixTable, min_cov
from .instances import generate_instance

TOL = 1e-9


@dataclass
class PropertyResult:
    name: str
    trials: int = 0
    failures: int = 0
    example: str | None = None
    notes: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def check(self, passed: bool, describe) -> None:
        self.trials += 1
        if not passed:
            self.failures += 1
            if self.example is None:
                self.example = describe() if callable(describe) else str(describe)


@dataclass
class SuiteReport:
    seed: int
    trials: int
    results: list[PropertyResult]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    def to_dict(self) -> dict:
        return {"seed": self.seed, "trials": self.trials, "ok": self.ok,
                "results": [asdict(r) for r in self.results]}

    def lines(self) -> list[str]:
        out = []
        for r in self.results:
            status = "PASS" if r.ok else "FAIL"
            extra = "".join(f" {k}={v}" for k, v in r.notes.items())
            out.append(f"{status} {r.name}: {r.failures}/{r.trials} failures{extra}")
            if r.example:
                out.append(f"     first counterexample: {r.example}")
        return out


def random_instance(rng: np.random.Generator, n_range=(1, 4), t_range=(2, 10)) -> GameInstance:
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    t = int(rng.integers(t_range[0], t_range[1] + 1))
    r = float(rng.choice([0.1, 0.2, 0.3, 0.5]))
    return generate_instance(attackers=n, targets=t, resource_ratio=r, seed=int(rng.integers(2 ** 31)))


def random_feasible_coverage(inst: GameInstance, rng: np.random.Generator) -> np.ndarray:
    """Uniform direction on the simplex, scaled to a random fraction of the budget, capped at 1."""
    c = rng.dirichlet(np.ones(inst.num_targets)) * inst.budget * rng.random()
    return np.minimum(c, 1.0)


def random_code(gamma_max, rng: np.random.Generator) -> np.ndarray:
    return np.array([rng.integers(1, g + 1) for g in gamma_max], dtype=np.int64)


# --- game model -------------------------------------------------------------------

def check_monotonicity(rng, trials) -> PropertyResult:
    res = PropertyResult("payoff monotonicity")
    for _ in range(trials):
        inst = random_instance(rng)
        i = int(rng.integers(inst.num_attackers))
        t = int(rng.integers(inst.num_targets))
        lo, hi = np.sort(rng.random(2))
        if hi - lo < 1e-12:
            hi = min(1.0, lo + 1e-3)
        a_lo = expected_attacker_payoff(inst, i, t, lo)
        a_hi = expected_attacker_payoff(inst, i, t, hi)
        d_lo = expected_defender_payoff(inst, i, t, lo)
        d_hi = expected_defender_payoff(inst, i, t, hi)
        res.check(a_hi < a_lo and d_hi >= d_lo, lambda: f"i={i} t={t} c=({lo},{hi})")
    return res


def _tied_coverage(inst, order, rng):
    """A feasible coverage where some attacker has an attack set of two or more targets."""
    ideal = ideal_profile(inst, order)
    cands = np.flatnonzero(ideal.gamma_max >= 2)
    if cands.size == 0:
        return None
    i = int(rng.choice(cands))
    k = int(rng.integers(2, ideal.gamma_max[i] + 1))
    c = prefix_coverage(inst, order, i, k)
    members = set(order[i, :k].tolist())
    # sprinkle a little coverage on non-members; it only lowers their appeal
    slack = inst.budget - c.sum()
    outside = [t for t in range(inst.num_targets) if t not in members]
    if outside and slack > 0:
        extra = rng.dirichlet(np.ones(len(outside))) * slack * rng.random()
        c[outside] = np.minimum(1.0, c[outside] + extra)
    return i, c


def _perturbation(inst, i, c, rng):
    """Single-component perturbation large enough to resolve, small enough not to cross other members."""
    gamma = attack_set(inst, i, c).members
    t = int(rng.integers(inst.num_targets))
    span = inst.u_unc_att[i, t] - inst.u_cov_att[i, t]
    lower = 4.0 * EPS / span
    ua = inst.u_unc_att[i] - c * (inst.u_unc_att[i] - inst.u_cov_att[i])
    if t in gamma:
        signs = [s for s in (1, -1) if (s > 0 and c[t] < 1.0 - 1e-3) or (s < 0 and c[t] > 1e-3)]
        if not signs:
            return None
        sign = int(rng.choice(signs))
        room = (1.0 - c[t]) if sign > 0 else c[t]
        upper = min(room, 1e-2)
    else:
        # "small": keep t strictly below the attack-set level
        margin = ua.max() - ua[t]
        sign = 1 if c[t] < 1e-3 else int(rng.choice([1, -1]))
        room = (1.0 - c[t]) if sign > 0 else c[t]
        upper = min(room, 0.5 * margin / span if sign < 0 else room, 1e-2)
    if upper <= lower:
        return None
    delta = float(rng.uniform(lower, upper))
    v = np.zeros(inst.num_targets)
    v[t] = sign * delta
    return t, v


def check_attack_set_perturbation(rng, trials) -> PropertyResult:
    res = PropertyResult("attack-set perturbation cases")
    cases = {"outside": 0, "raise_member": 0, "lower_member": 0}
    while res.trials < trials:
        inst = random_instance(rng, t_range=(3, 10))
        order = target_order(inst)
        got = _tied_coverage(inst, order, rng)
        if got is None:
            continue
        i, c = got
        pert = _perturbation(inst, i, c, rng)
        if pert is None:
            continue
        t, v = pert
        before = set(attack_set(inst, i, c).members)
        after = set(attack_set(inst, i, c + v).members)
        if t not in before:
            expect, key = before, "outside"
        elif v[t] > 0:
            expect, key = before - {t}, "raise_member"
        else:
            expect, key = {t}, "lower_member"
        cases[key] += 1
        res.check(after == expect, lambda: f"attacker {i} t'={t} v={v[t]:.3g} before={sorted(before)} "
                                           f"after={sorted(after)} expected={sorted(expect)}")
    res.notes = cases
    return res


def check_payoff_jump(rng, trials) -> PropertyResult:
    """Either the attacked target stays attackable and the payoff is unchanged, or it moves by >= gap."""
    res = PropertyResult("payoff jump bound")
    fails = {"survivor_changed": 0, "jump_below_gap": 0}
    while res.trials < trials:
        inst = random_instance(rng, t_range=(3, 10))
        order = target_order(inst)
        got = _tied_coverage(inst, order, rng)
        if got is None:
            continue
        i, c = got
        pert = _perturbation(inst, i, c, rng)
        if pert is None:
            continue
        t, v = pert
        aset = attack_set(inst, i, c)
        at = aset.attacked_target
        gap = payoff_gap(inst, i, c, at)
        before = defender_payoffs(inst, c)[i, at]
        after_set = attack_set(inst, i, c + v)
        after = defender_payoffs(inst, c + v)[i, after_set.attacked_target]
        if at in after_set.members:
            ok = abs(after - before) <= TOL
            if not ok:
                fails["survivor_changed"] += 1
        else:
            ok = abs(after - before) >= gap - TOL
            if not ok:
                fails["jump_below_gap"] += 1
        res.check(ok, lambda: f"attacker {i} at={at} t'={t} v={v[t]:.3g} gap={gap:.6g} "
                              f"payoff {before:.6g} -> {after:.6g}")
    res.notes = fails
    return res


# --- discretization --------------------------------------------------------------

def check_nested_monotonicity(rng, trials) -> PropertyResult:
    res = PropertyResult("nested prefix monotonicity")
    for _ in range(trials):
        inst = random_instance(rng)
        order = target_order(inst)
        gm = ideal_profile(inst, order).gamma_max
        i = int(rng.integers(inst.num_attackers))
        pay = []
        for k in range(1, gm[i] + 1):
            c = prefix_coverage(inst, order, i, k)
            pay.append(sse_payoffs(inst, c)[0][i])
        pay = np.array(pay)
        res.check(bool(np.all(np.diff(pay) >= -TOL)), lambda: f"attacker {i} payoffs {pay.round(6).tolist()}")
    return res


def check_decode_injective(rng, trials) -> PropertyResult:
    res = PropertyResult("decode injective")
    for _ in range(trials):
        inst = random_instance(rng)
        order = target_order(inst)
        gm = ideal_profile(inst, order).gamma_max
        a, b = random_code(gm, rng), random_code(gm, rng)
        same_code = np.array_equal(a, b)
        same_group = decode(inst, order, a) == decode(inst, order, b)
        res.check(same_code == same_group, lambda: f"codes {a.tolist()} {b.tolist()}")
    return res


def check_indifference(rng, trials) -> PropertyResult:
    res = PropertyResult("indifference equalizes payoffs")
    for _ in range(trials):
        inst = random_instance(rng)
        order = target_order(inst)
        gm = ideal_profile(inst, order).gamma_max
        i = int(rng.integers(inst.num_attackers))
        k = int(rng.integers(1, gm[i] + 1))
        gamma = order[i, :k]
        cov = indifference_coverage(inst, i, gamma)
        ua = inst.u_unc_att[i, gamma] - cov * (inst.u_unc_att[i, gamma] - inst.u_cov_att[i, gamma])
        res.check(float(np.ptp(ua)) <= TOL, lambda: f"attacker {i} prefix {k}: spread {np.ptp(ua)}")
    return res


def check_upper_bound_random(rng, trials, per_instance: int = 100) -> PropertyResult:
    res = PropertyResult("ideal bounds random coverages")
    while res.trials < trials:
        inst = random_instance(rng)
        ideal = ideal_profile(inst)
        for _ in range(min(per_instance, trials - res.trials)):
            c = random_feasible_coverage(inst, rng)
            f = fitness(inst, c)
            res.check(bool(np.all(f <= ideal.ideal_fitness + TOL)),
                      lambda: f"fitness {f.round(6).tolist()} exceeds ideal {ideal.ideal_fitness.round(6).tolist()}")
    return res


# --- evaluation ------------------------------------------------------------------

def _evaluated_codes(rng, trials):
    """Yield (inst, order, ideal, code, result) for ``trials`` random codes."""
    done = 0
    while done < trials:
        inst = random_instance(rng)
        order = target_order(inst)
        ideal = ideal_profile(inst, order)
        for _ in range(min(10, trials - done)):
            code = random_code(ideal.gamma_max, rng)
            yield inst, order, ideal, code, evaluate_code(inst, order, ideal, code)
            done += 1


def check_budget_safety(rng, trials) -> PropertyResult:
    res = PropertyResult("evaluation budget safety")
    for inst, _, _, code, r in _evaluated_codes(rng, trials):
        if r.feasible:
            ok = r.coverage.sum() <= inst.budget + TOL and np.all((r.coverage >= 0) & (r.coverage <= 1))
            ok = ok and np.allclose(r.fitness, fitness(inst, r.coverage), atol=TOL, rtol=0)
        else:
            ok = r.violation > 0
        res.check(bool(ok), lambda: f"code {code.tolist()}")
    return res


def check_upper_bound_codes(rng, trials) -> PropertyResult:
    res = PropertyResult("ideal bounds evaluated codes")
    for _, _, ideal, code, r in _evaluated_codes(rng, trials):
        if r.feasible:
            res.check(bool(np.all(r.fitness <= ideal.ideal_fitness + TOL)),
                      lambda: f"code {code.tolist()} fitness {r.fitness.round(6).tolist()}")
    return res


def check_consistency(rng, trials) -> PropertyResult:
    """Zero divergence from the ideal attacked targets should mean ideal fitness."""
    res = PropertyResult("zero divergence implies ideal fitness")
    evaluated = 0
    for inst, _, ideal, code, r in _evaluated_codes(rng, trials):
        evaluated += 1
        if r.feasible and r.divergence == 0:
            res.check(bool(np.allclose(r.fitness, ideal.ideal_fitness, atol=TOL, rtol=0)),
                      lambda: (f"N={inst.num_attackers} T={inst.num_targets} code {code.tolist()}: "
                               f"fitness {r.fitness.round(6).tolist()} vs ideal "
                               f"{ideal.ideal_fitness.round(6).tolist()}"))
    res.notes = {"codes_evaluated": evaluated}
    return res


def split_assumption_holds(result) -> bool:
    """At every contested target the smallest alternative was chosen."""
    return bool(np.all(result.chosen_rank <= 0))


def check_split_convergence(rng, trials) -> PropertyResult:
    """On runs where every restoration step picked the smallest alternative, fitness should be ideal."""
    res = PropertyResult("split assumption implies ideal fitness")
    outside = 0
    for inst, _, ideal, code, r in _evaluated_codes(rng, trials):
        if not r.feasible:
            continue
        if not split_assumption_holds(r):
            outside += 1
            continue
        res.check(bool(np.allclose(r.fitness, ideal.ideal_fitness, atol=TOL, rtol=0)),
                  lambda: (f"N={inst.num_attackers} T={inst.num_targets} code {code.tolist()}: "
                           f"fitness {r.fitness.round(6).tolist()} vs ideal "
                           f"{ideal.ideal_fitness.round(6).tolist()}"))
    res.notes = {"assumption_violated": outside}
    return res


def check_determinism(rng, trials) -> PropertyResult:
    res = PropertyResult("evaluation determinism")
    for inst, order, ideal, code, r in _evaluated_codes(rng, trials):
        again = evaluate_code(inst, order, ideal, code.copy())
        same = again.feasible == r.feasible and np.array_equal(again.coverage, r.coverage)
        if r.feasible:
            same = same and np.array_equal(again.fitness, r.fitness)
        res.check(bool(same), lambda: f"code {code.tolist()}")
    return res


def check_linear_work(rng, trials) -> PropertyResult:
    """One selection step per target, and work bounded by a small multiple of N*T."""
    res = PropertyResult("evaluation steps and work")
    for inst, _, _, code, r in _evaluated_codes(rng, trials):
        N, T = inst.num_attackers, inst.num_targets
        ok = r.work <= 3 * N * T and (r.steps == T if r.feasible else r.steps <= T)
        res.check(bool(ok), lambda: f"N={N} T={T} steps={r.steps} work={r.work}")
    return res


# --- metrics ---------------------------------------------------------------------

def check_hv_monotone(rng, trials) -> PropertyResult:
    res = PropertyResult("hypervolume monotone under insertion")
    for _ in range(trials):
        d = int(rng.integers(2, 5))
        P = rng.random((int(rng.integers(1, 8)), d))
        ref = np.ones(d) * 1.5
        q = rng.random(d)
        before = hypervolume(P, ref)
        after = hypervolume(np.vstack([P, q]), ref)
        res.check(after >= before - TOL, lambda: f"{before} -> {after}")
    return res


def check_igd_antitone(rng, trials) -> PropertyResult:
    res = PropertyResult("IGD+ antitone in front quality")
    for _ in range(trials):
        d = int(rng.integers(2, 5))
        A = rng.random((int(rng.integers(1, 8)), d))
        Z = rng.random((int(rng.integers(1, 8)), d))
        k = int(rng.integers(len(A)))
        B = A.copy()
        B[k] = A[k] - rng.random(d) * 0.2
        res.check(igd_plus(B, Z) <= igd_plus(A, Z) + TOL, lambda: f"row {k}")
    return res


def check_orientation(rng, trials) -> PropertyResult:
    res = PropertyResult("metric orientation round trip")
    for _ in range(trials):
        d = int(rng.integers(2, 5))
        A = rng.random((int(rng.integers(1, 8)), d))
        Z = rng.random((int(rng.integers(1, 8)), d))
        ref = np.ones(d) * 1.5
        hv_ok = abs(hypervolume(A, ref) - hypervolume(-A, -ref, sense="max")) <= TOL
        igd_ok = abs(igd_plus(A, Z) - igd_plus(-A, -Z, sense="max")) <= TOL
        res.check(hv_ok and igd_ok, "negated data changed a metric")
    return res


# --- refinement ------------------------------------------------------------------

def check_refinement(rng, trials) -> list[PropertyResult]:
    dom = PropertyResult("refinement weakly dominates")
    bud = PropertyResult("refinement budget")
    idem = PropertyResult("refinement idempotent")
    # draw until ``trials`` feasible entries have been refined
    for inst, order, ideal, code, r in _evaluated_codes(rng, 1000 * trials):
        if dom.trials >= trials:
            break
        if not r.feasible:
            continue
        table = PrefixTable(inst, order, ideal)
        entry = ArchiveEntry(code, r.coverage, r.fitness)
        once = min_cov(inst, order, entry, table)
        twice = min_cov(inst, order, once, table)
        dom.check(bool(np.all(once.fitness >= entry.fitness - TOL)),
                  lambda: f"code {code.tolist()} {entry.fitness.round(6).tolist()} -> {once.fitness.round(6).tolist()}")
        recomputed = fitness(inst, once.coverage)
        bud.check(bool(once.coverage.sum() <= inst.budget + TOL and np.allclose(recomputed, once.fitness, atol=TOL)),
                  lambda: f"code {code.tolist()} spends {once.coverage.sum()}")
        idem.check(bool(np.all(np.abs(twice.fitness - once.fitness) <= TOL)), lambda: f"code {code.tolist()}")
    return [dom, bud, idem]


def property_suite(seed: int = 0, trials: int = 1000) -> SuiteReport:
    """Run every property with ``trials`` trials each (refinement uses a twentieth)."""
    streams = np.random.default_rng(seed).spawn(17)
    checks = [
        check_monotonicity, check_attack_set_perturbation, check_payoff_jump,
        check_nested_monotonicity, check_decode_injective, check_indifference, check_upper_bound_random,
        check_budget_safety, check_upper_bound_codes, check_consistency, check_split_convergence,
        check_determinism, check_linear_work,
        check_hv_monotone, check_igd_antitone, check_orientation,
    ]
    results = [fn(rng, trials) for fn, rng in zip(checks, streams)]
    results.extend(check_refinement(streams[-1], max(1, trials // 20)))
    return SuiteReport(seed, trials, results)
