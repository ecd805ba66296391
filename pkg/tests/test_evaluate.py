import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mosg.bench.instances import generate_instance
from mosg.discretize import CodeBoundsError, ideal_profile, prefix_coverage, target_order
from mosg.evaluate import alternatives, bitopt, bsm_select, divergence_group, divergence_single, evaluate_code
from mosg.game import EPS, fitness

from conftest import make_instance


def setup(inst):
    order = target_order(inst)
    return order, ideal_profile(inst, order)


def reference_restore(inst, order, ideal, code):
    """Target-by-target restoration written as plain loops."""
    alts = alternatives(inst, order, code, ideal.gamma_max)
    cover = np.zeros(inst.num_targets)
    for t in range(inst.num_targets):
        vals, owners = alts.values[t], alts.owners[t]
        if len(vals) == 0:
            continue
        if len(vals) == 1:
            cover[t] = vals[0]
            continue
        best = None
        for k, v in enumerate(vals):
            if k and v - vals[k - 1] <= EPS:
                continue
            score = 0
            for a, j in zip(vals, owners):
                wants = ideal.ideal_at[j] == t
                loses = a < v - EPS
                score += int(wants and loses) + int(not wants and not loses)
            if best is None or score < best[0]:
                best = (score, v)
        cover[t] = best[1]
    return cover


def test_divergence_single():
    assert divergence_single(3, 3) == 0
    assert divergence_single(3, 1) == 1
    assert divergence_single(1, 3) == divergence_single(3, 1)


def test_divergence_group():
    assert divergence_group([1, 2, 3], [1, 2, 3]) == 0
    assert divergence_group([1, 2, 3], [0, 0, 0]) == 3
    with pytest.raises(ValueError):
        divergence_group([1, 2], [1])


@given(*[st.lists(st.integers(0, 2), min_size=4, max_size=4) for _ in range(3)])
def test_divergence_triangle(a, b, c):
    assert divergence_group(a, c) <= divergence_group(a, b) + divergence_group(b, c)


def test_alternatives_figure_fixture(fig_instance):
    order, ideal = setup(fig_instance)
    alts = alternatives(fig_instance, order, [1, 2], ideal.gamma_max)
    assert alts.attraction(0) == (1,)
    assert alts.attraction(3) == (0, 1)
    assert alts.attraction(1) == () and alts.attraction(2) == ()
    assert alts.values[0][0] == pytest.approx(1.0 / 14.0)


def test_alternatives_record_exclusions():
    # attacker 1 needs coverage above 1 on target 0 to be indifferent with target 1
    inst = make_instance([[9, 1], [9, 1]], u_cov_att=[[-9, -9], [5, -9]], r=1.0)
    order = target_order(inst)
    alts = alternatives(inst, order, [2, 2])
    assert [(i, t) for i, t, _ in alts.excluded] == [(1, 0)]
    assert alts.attraction(0) == (0,)


def test_bsm_prefers_ideal_and_smallest():
    # the smaller value keeps the target for both owners; the larger one drops owner 0
    rank, v = bsm_select(np.array([0.1, 0.4]), np.array([0, 1]), 5, np.array([5, 5]))
    assert (rank, v) == (0, 0.1)
    rank, v = bsm_select(np.array([0.1, 0.4]), np.array([0, 1]), 5, np.array([2, 5]))
    assert v == 0.4 and rank == 1


def test_all_ones_is_zero_coverage(small_instance):
    order, ideal = setup(small_instance)
    r = evaluate_code(small_instance, order, ideal, np.ones(3, dtype=int))
    assert r.feasible
    np.testing.assert_array_equal(r.coverage, np.zeros(6))
    np.testing.assert_allclose(r.fitness, fitness(small_instance, np.zeros(6)))


def test_single_attacker_longest_prefix():
    for s in range(20):
        inst = generate_instance(attackers=1, targets=8, seed=s)
        order, ideal = setup(inst)
        r = evaluate_code(inst, order, ideal, ideal.gamma_max)
        expect = fitness(inst, prefix_coverage(inst, order, 0, int(ideal.gamma_max[0])))
        np.testing.assert_allclose(r.fitness, expect)
        assert r.fitness[0] <= ideal.ideal_fitness[0] + 1e-9


def test_singletons_forced():
    # disjoint top targets: every target is attracted by at most one attacker
    inst = make_instance([[9, 8, 1, 1], [1, 1, 9, 8]], r=0.5)
    order, ideal = setup(inst)
    r = bitopt(inst, order, [2, 2], ideal)
    expect = np.maximum(prefix_coverage(inst, order, 0, 2), prefix_coverage(inst, order, 1, 2))
    np.testing.assert_allclose(r.coverage, expect)
    assert np.all(r.chosen_rank == -1)


def test_infeasible_is_a_result():
    for s in range(200):
        inst = generate_instance(attackers=4, targets=8, resource_ratio=0.1, seed=s)
        order, ideal = setup(inst)
        r = bitopt(inst, order, ideal.gamma_max, ideal)
        if not r.feasible:
            assert r.violation > 0
            assert r.fitness is None
            assert r.steps <= inst.num_targets
            return
    pytest.fail("no infeasible code found")


def test_bounds_error(small_instance):
    order, ideal = setup(small_instance)
    with pytest.raises(CodeBoundsError):
        evaluate_code(small_instance, order, ideal, [0, 1, 1])


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 4), st.integers(2, 9), st.data())
def test_matches_loop_implementation(seed, n, t, data):
    inst = generate_instance(attackers=n, targets=t, resource_ratio=0.3, seed=seed)
    order, ideal = setup(inst)
    code = [data.draw(st.integers(1, int(g))) for g in ideal.gamma_max]
    r = bitopt(inst, order, code, ideal)
    expect = reference_restore(inst, order, ideal, code)
    if r.feasible:
        np.testing.assert_allclose(r.coverage, expect, atol=1e-12)
    else:
        assert expect.sum() > inst.budget


def test_choice_is_in_cartesian_product():
    rng = np.random.default_rng(4)
    for s in range(60):
        inst = generate_instance(attackers=2, targets=4, resource_ratio=0.5, seed=s)
        order, ideal = setup(inst)
        code = [rng.integers(1, g + 1) for g in ideal.gamma_max]
        alts = alternatives(inst, order, code, ideal.gamma_max)
        options = [np.unique(np.concatenate([[0.0], v])) for v in alts.values]
        r = bitopt(inst, order, code, ideal)
        combos = np.array(list(itertools.product(*options)))
        assert np.abs(combos - r.coverage).max(axis=1).min() <= 1e-12
