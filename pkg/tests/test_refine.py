import numpy as np

from mosg.bench.instances import generate_instance
from mosg.discretize import ideal_profile, target_order
from mosg.evaluate import evaluate_code
from mosg.game import fitness
from mosg.moea.archive import ArchiveEntry, FrontArchive
from mosg.moea.run import EAConfig, run
from mosg.refine import PrefixTable, min_cov, refine_archive


def entry_for(inst, code):
    order = target_order(inst)
    ideal = ideal_profile(inst, order)
    r = evaluate_code(inst, order, ideal, code)
    assert r.feasible
    return order, ArchiveEntry(np.asarray(code), r.coverage, r.fitness)


def test_single_attacker_reaches_longest_prefix():
    # with one attacker, extending the prefix never hurts; refinement climbs to gamma_max
    for s in range(10):
        inst = generate_instance(attackers=1, targets=8, seed=s)
        order, e = entry_for(inst, [1])
        out = min_cov(inst, order, e)
        ideal = ideal_profile(inst, order)
        best = evaluate_code(inst, order, ideal, ideal.gamma_max).fitness
        assert out.fitness[0] >= best[0] - 1e-9


def test_no_headroom_returns_same_fitness():
    inst = generate_instance(attackers=1, targets=8, seed=3)
    order = target_order(inst)
    ideal = ideal_profile(inst, order)
    _, e = entry_for(inst, ideal.gamma_max)
    once = min_cov(inst, order, e)
    twice = min_cov(inst, order, once)
    np.testing.assert_allclose(twice.fitness, once.fitness)


def test_slack_outside_attack_sets_is_removed():
    for s in range(30):
        inst = generate_instance(attackers=2, targets=8, resource_ratio=0.5, seed=s)
        order, e = entry_for(inst, [1, 1])
        # targets no attacker looks at under zero coverage
        quiet = [t for t in range(8) if t not in order[:, :2]]
        c = e.coverage.copy()
        c[quiet[0]] = 0.3
        noisy = ArchiveEntry(e.code, c, fitness(inst, c))
        np.testing.assert_allclose(noisy.fitness, e.fitness)
        out = min_cov(inst, order, noisy)
        assert np.all(out.fitness >= noisy.fitness - 1e-9)
        if np.allclose(out.fitness, noisy.fitness):
            assert out.coverage[quiet[0]] == 0.0


def test_random_archives_weakly_improve():
    for s in range(5):
        inst = generate_instance(attackers=3, targets=6, resource_ratio=0.3, seed=s)
        res = run(inst, EAConfig(pop_size=12, max_gen=5, seed=s, refine=False))
        order = target_order(inst)
        table = PrefixTable(inst, order)
        for e in res.archive:
            out = min_cov(inst, order, e, table)
            assert np.all(out.fitness >= e.fitness - 1e-9)
            assert out.coverage.sum() <= inst.budget + 1e-9
            np.testing.assert_allclose(fitness(inst, out.coverage), out.fitness, atol=1e-9)


def test_refine_archive_edges():
    inst = generate_instance(attackers=2, targets=5, seed=0)
    order = target_order(inst)
    assert len(refine_archive(inst, order, FrontArchive(2, 5))) == 0
    _, e = entry_for(inst, [1, 1])
    single = FrontArchive.from_entries([e], 2, 5)
    out = refine_archive(inst, order, single)
    assert len(out) == 1
    assert np.all(out.fitness[0] >= e.fitness - 1e-9)


def test_every_unrefined_entry_is_covered():
    inst = generate_instance(attackers=3, targets=12, seed=7)
    res = run(inst, EAConfig(pop_size=20, max_gen=10, seed=7))
    for f in res.unrefined.fitness:
        assert np.any(np.all(res.archive.fitness >= f - 1e-9, axis=1))
