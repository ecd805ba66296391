import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mosg.bench.instances import generate_instance
from mosg.moea.archive import FrontArchive, nondominated_mask
from mosg.moea.nsga3 import nondominated_sort, survive
from mosg.moea.operators import vary
from mosg.moea.riesz import ConfigError, project_simplex, riesz_directions, riesz_energy
from mosg.moea.run import EAConfig, run


def brute_fronts(F):
    """Peel fronts by checking every pair (maximization)."""
    left = list(range(len(F)))
    fronts = []
    while left:
        front = [a for a in left if not any(np.all(F[b] >= F[a]) and np.any(F[b] > F[a]) for b in left)]
        fronts.append(sorted(front))
        left = [a for a in left if a not in front]
    return fronts


class TestRiesz:
    def test_two_objectives_three_points(self):
        D = riesz_directions(2, 3)
        D = D[np.argsort(D[:, 0])]
        np.testing.assert_allclose(D, [[0, 1], [0.5, 0.5], [1, 0]], atol=0.05)

    @pytest.mark.parametrize("n,p", [(3, 10), (4, 20), (5, 30)])
    def test_on_simplex(self, n, p):
        D = riesz_directions(n, p)
        assert np.all(D >= 0)
        np.testing.assert_allclose(D.sum(axis=1), 1.0, atol=1e-9)

    def test_too_few_points(self):
        with pytest.raises(ConfigError):
            riesz_directions(4, 3)

    def test_descent_lowers_energy(self):
        rng = np.random.default_rng(0)
        start = rng.dirichlet(np.ones(3), size=15)
        assert riesz_energy(riesz_directions(3, 15), 9.0) < riesz_energy(start, 9.0)

    def test_spacing_when_doubling(self):
        def min_dist(D):
            d = np.sqrt(((D[:, None] - D[None]) ** 2).sum(-1))
            return d[np.triu_indices(len(D), 1)].min()
        # on the 2-simplex spacing scales like 1/sqrt(P); doubling P may shrink it by about 1/sqrt(2)
        for p in (10, 20, 40):
            assert min_dist(riesz_directions(3, 2 * p)) >= 0.5 * min_dist(riesz_directions(3, p))

    def test_projection(self):
        x = np.array([[0.2, 0.2, 0.2], [2.0, -1.0, 0.0]])
        np.testing.assert_allclose(project_simplex(x), [[1 / 3] * 3, [1.0, 0.0, 0.0]])


class TestSorting:
    def test_incomparable_single_front(self):
        F = np.array([[0, 3], [1, 2], [2, 1], [3, 0]])
        assert [f.tolist() for f in nondominated_sort(F)] == [[0, 1, 2, 3]]

    def test_chain(self):
        F = np.array([[1, 1], [3, 3], [2, 2]])
        assert [f.tolist() for f in nondominated_sort(F)] == [[1], [2], [0]]

    def test_random_against_pairwise(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            F = rng.integers(0, 6, size=(50, 3)).astype(float)
            assert [sorted(f.tolist()) for f in nondominated_sort(F)] == brute_fronts(F)

    def test_infeasible_after_feasible(self):
        F = np.array([[1.0, 1.0], [np.nan, np.nan], [0.0, 0.0], [np.nan, np.nan]])
        fronts = nondominated_sort(np.nan_to_num(F), violation=[0, 2.0, 0, 1.0])
        assert [f.tolist() for f in fronts] == [[0], [2], [3], [1]]


class TestSurvival:
    def test_identity_when_sizes_match(self):
        rng = np.random.default_rng(0)
        F = rng.random((12, 3))
        s = survive(F, np.zeros(12), riesz_directions(3, 12), 12, rng)
        assert sorted(s.index.tolist()) == list(range(12))

    def test_empty_niche_takes_closest(self):
        # the first front is the origin, which fills niche 0; the split front offers two
        # candidates for the empty niche 1 and the closer one must win
        dirs = np.array([[1.0, 0.0], [0.0, 1.0]])
        G = np.array([[0.0, 0.0], [1.0, 0.02], [0.02, 1.0], [0.3, 0.9]])
        s = survive(-G, np.zeros(4), dirs, 2, np.random.default_rng(0))
        assert sorted(s.index.tolist()) == [0, 2]

    def test_degenerate_span(self):
        F = np.ones((6, 3))
        s = survive(F, np.zeros(6), riesz_directions(3, 6), 3, np.random.default_rng(0))
        assert len(s.index) == 3 and len(set(s.index.tolist())) == 3


class TestVariation:
    def test_no_change_without_operators(self):
        rng = np.random.default_rng(0)
        parents = rng.integers(1, 6, size=(10, 3))
        kids = vary(parents, np.array([5, 5, 5]), rng, crossover_prob=0.0, mutation_prob=0.0)
        np.testing.assert_array_equal(kids, parents)

    def test_bounds(self):
        rng = np.random.default_rng(0)
        gm = np.array([1, 4, 9, 30])
        parents = np.column_stack([rng.integers(1, g + 1, size=100_000) for g in gm])
        kids = vary(parents, gm, rng, mutation_prob=0.5)
        assert kids.min() >= 1 and np.all(kids <= gm)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_seeded_stream(self, seed):
        gm = np.array([3, 7, 12])
        parents = np.random.default_rng(seed).integers(1, 4, size=(20, 3))
        a = vary(parents, gm, np.random.default_rng(seed))
        b = vary(parents, gm, np.random.default_rng(seed))
        np.testing.assert_array_equal(a, b)


class TestArchive:
    def test_keeps_nondominated_and_dedupes(self):
        a = FrontArchive(2, 1)
        a.update([[1, 1], [2, 2], [3, 3]], [[0.1], [0.2], [0.3]], [[1, 1], [2, 0], [1, 1]])
        a.update([[4, 4]], [[0.4]], [[0, 0]])
        assert a.fitness.tolist() == [[1, 1], [2, 0]]
        assert a.codes.tolist() == [[1, 1], [2, 2]]
        assert nondominated_mask(a.fitness).all()


class TestRun:
    def test_minimal_run(self):
        inst = generate_instance(attackers=3, targets=6, seed=1)
        res = run(inst, EAConfig(pop_size=3, max_gen=1, refine=False))
        assert len(res.archive) >= 1
        assert nondominated_mask(res.archive.fitness).all()

    def test_reproducible(self):
        inst = generate_instance(attackers=3, targets=10, seed=2)
        cfg = EAConfig(pop_size=20, max_gen=10, seed=5)
        a, b = run(inst, cfg), run(inst, cfg)
        np.testing.assert_array_equal(a.archive.fitness, b.archive.fitness)
        np.testing.assert_array_equal(a.archive.coverage, b.archive.coverage)

    def test_worker_count_does_not_matter(self):
        inst = generate_instance(attackers=3, targets=10, seed=3)
        a = run(inst, EAConfig(pop_size=20, max_gen=5, seed=1))
        b = run(inst, EAConfig(pop_size=20, max_gen=5, seed=1, workers=2))
        np.testing.assert_array_equal(a.archive.fitness, b.archive.fitness)

    def test_config_validation(self):
        inst = generate_instance(attackers=4, targets=5, seed=0)
        with pytest.raises(ConfigError):
            run(inst, EAConfig(pop_size=3, max_gen=2))
        with pytest.raises(ConfigError):
            run(inst, EAConfig(pop_size=10, max_gen=0))

    def test_time_limit_marks_timeout(self):
        inst = generate_instance(attackers=3, targets=30, seed=0)
        res = run(inst, EAConfig(pop_size=20, max_gen=10_000, time_limit=0.5, refine=False))
        assert res.timed_out
        assert res.generations < 10_000

    def test_defaults_for_three_attackers(self):
        assert (EAConfig.defaults_for(3).pop_size, EAConfig.defaults_for(3).max_gen) == (50, 50)
        assert EAConfig.defaults_for(5).pop_size == 400
