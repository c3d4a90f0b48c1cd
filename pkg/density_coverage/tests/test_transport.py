import itertools

import numpy as np
import pytest
from density_coverage.transport import (
    DiscreteMeasure,
    EmpiricalDistribution,
    FieldExhaustedError,
    TransportPlan,
    barycenter_spread,
    local_transport_plan,
    subsample_measure,
    transport_cost,
    update_empirical,
    wasserstein2,
    weighted_barycenter,
)


def brute_force_w2sq(x, y):
    # uniform measures of equal size: some permutation is optimal
    n = x.shape[0]
    return min(np.mean(np.sum((x - y[list(p)]) ** 2, axis=1)) for p in itertools.permutations(range(n)))


def test_measure_defaults_to_uniform():
    mu = DiscreteMeasure([[0.0], [1.0], [2.0], [3.0]])
    np.testing.assert_allclose(mu.masses, np.full(4, 0.25))
    assert mu.dim == 1


def test_measure_masses_must_sum_to_one():
    with pytest.raises(AssertionError, match="Masses must sum to 1."):
        DiscreteMeasure([[0.0], [1.0]], [0.5, 0.6])


def test_w2_of_identical_measures_is_zero(rng):
    pts = rng.standard_normal((6, 2))
    assert wasserstein2(DiscreteMeasure(pts), DiscreteMeasure(pts)) == pytest.approx(0.0, abs=1e-12)


def test_w2_between_diracs():
    a = DiscreteMeasure([[0.0, 0.0]])
    b = DiscreteMeasure([[3.0, 4.0]])
    assert wasserstein2(a, b) == pytest.approx(5.0)


def test_w2_of_translated_measure(rng):
    mu = DiscreteMeasure(rng.standard_normal((5, 3)))
    assert wasserstein2(mu, mu.shifted([1.0, 2.0, 2.0])) == pytest.approx(3.0, rel=1e-10)


def test_w2_matches_permutation_oracle():
    rng = np.random.default_rng(11)
    for _ in range(200):
        n = rng.integers(1, 5)
        d = rng.integers(1, 4)
        x = rng.standard_normal((n, d))
        y = rng.standard_normal((n, d))
        w2 = wasserstein2(DiscreteMeasure(x), DiscreteMeasure(y))
        assert w2 ** 2 == pytest.approx(brute_force_w2sq(x, y), abs=1e-8)


def test_w2_matches_lp_oracle():
    rng = np.random.default_rng(12)
    for _ in range(200):
        n, N = rng.integers(1, 5, size=2)
        a = rng.uniform(0.1, 1.0, n)
        b = rng.uniform(0.1, 1.0, N)
        rho = DiscreteMeasure(rng.standard_normal((n, 2)), a / a.sum())
        nu = DiscreteMeasure(rng.standard_normal((N, 2)), b / b.sum())
        exact = wasserstein2(rho, nu) ** 2
        oracle = wasserstein2(rho, nu, solver="lp") ** 2
        assert exact == pytest.approx(oracle, abs=1e-8)


def test_w2_metric_axioms():
    rng = np.random.default_rng(13)
    for _ in range(200):
        a, b, c = (DiscreteMeasure(rng.standard_normal((rng.integers(1, 5), 2))) for _ in range(3))
        assert wasserstein2(a, b) == pytest.approx(wasserstein2(b, a), abs=1e-10)
        assert wasserstein2(a, c) <= wasserstein2(a, b) + wasserstein2(b, c) + 1e-9


def test_w2_plan_marginals(rng):
    rho = DiscreteMeasure(rng.standard_normal((4, 2)))
    nu = DiscreteMeasure(rng.standard_normal((3, 2)), [0.2, 0.3, 0.5])
    w2, plan = wasserstein2(rho, nu, return_plan=True)
    np.testing.assert_allclose(plan.row_sums(4), rho.masses, atol=1e-12)
    np.testing.assert_allclose(plan.col_sums(3), nu.masses, atol=1e-12)
    assert w2 ** 2 == pytest.approx(transport_cost_matrix(plan, rho, nu), abs=1e-12)


def transport_cost_matrix(plan, rho, nu):
    return sum(p * np.sum((rho.points[i] - nu.points[j]) ** 2) for i, j, p in plan.entries)


def test_w2_unknown_solver():
    a = DiscreteMeasure([[0.0]])
    with pytest.raises(ValueError, match="Unknown transport solver"):
        wasserstein2(a, a, solver="sinkhorn")


def test_local_plan_fills_nearest_first():
    samples = np.array([[0.0], [1.0], [2.0], [3.0]])
    caps = np.full(4, 0.25)
    plan = local_transport_plan(np.array([0.9]), samples, caps, 0.4)
    assert plan.targets.tolist() == [1, 0]
    np.testing.assert_allclose(plan.masses, [0.25, 0.15])
    assert plan.total_mass == pytest.approx(0.4)
    np.testing.assert_array_equal(plan.sources, np.zeros(2, dtype=int))


def test_local_plan_breaks_ties_by_index():
    samples = np.array([[-1.0], [1.0]])
    plan = local_transport_plan(np.array([0.0]), samples, np.array([0.5, 0.5]), 0.1)
    assert plan.targets.tolist() == [0]


def test_local_plan_skips_exhausted_samples():
    samples = np.array([[0.0], [1.0], [5.0]])
    plan = local_transport_plan(np.array([0.0]), samples, np.array([0.0, 0.2, 0.8]), 0.3)
    assert plan.targets.tolist() == [1, 2]
    np.testing.assert_allclose(plan.masses, [0.2, 0.1])


def test_local_plan_single_sample_field():
    plan = local_transport_plan(np.array([3.0, 3.0]), np.array([[1.0, 2.0]]), np.array([1.0]), 0.01)
    np.testing.assert_allclose(weighted_barycenter(plan, np.array([[1.0, 2.0]])), [1.0, 2.0])


def test_local_plan_raises_when_exhausted():
    with pytest.raises(FieldExhaustedError):
        local_transport_plan(np.array([0.0]), np.array([[0.0], [1.0]]), np.array([0.01, 0.0]), 0.05)


def test_local_plan_partial():
    plan = local_transport_plan(np.array([0.0]), np.array([[0.0], [1.0]]), np.array([0.01, 0.0]), 0.05, allow_partial=True)
    assert plan.total_mass == pytest.approx(0.01)


def test_local_plan_respects_candidates():
    samples = np.array([[0.0], [1.0], [2.0]])
    plan = local_transport_plan(np.array([0.0]), samples, np.full(3, 1 / 3), 0.1, candidates=np.array([2]))
    assert plan.targets.tolist() == [2]


def test_local_plan_is_optimal_against_brute_force():
    rng = np.random.default_rng(4)
    for _ in range(50):
        samples = rng.standard_normal((4, 2))
        caps = rng.uniform(0.05, 0.3, 4)
        source = rng.standard_normal(2)
        mass = 0.5 * caps.sum()
        greedy = transport_cost(local_transport_plan(source, samples, caps, mass), samples, source)
        # the optimum of a single-source LP fills samples in distance order, so no split of
        # the mass over any order can be cheaper
        d2 = np.sum((samples - source) ** 2, axis=1)
        best = np.inf
        for order in itertools.permutations(range(4)):
            left, cost = mass, 0.0
            for j in order:
                take = min(caps[j], left)
                cost += take * d2[j]
                left -= take
            best = min(best, cost)
        assert greedy == pytest.approx(best, abs=1e-12)


def test_barycenter_decomposition_identity():
    rng = np.random.default_rng(21)
    for _ in range(1000):
        d = rng.integers(1, 4)
        k = rng.integers(1, 6)
        points = rng.standard_normal((k, d))
        plan = TransportPlan(np.zeros(k), np.arange(k), rng.uniform(0.0, 1.0, k) + 1e-3)
        y = rng.standard_normal(d)
        q_bar = weighted_barycenter(plan, points)
        lhs = transport_cost(plan, points, y)
        rhs = plan.total_mass * np.sum((y - q_bar) ** 2) + barycenter_spread(plan, points)
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-14)


def test_barycenter_needs_mass():
    plan = TransportPlan([], [], [])
    with pytest.raises(AssertionError, match="The transport plan must carry positive mass."):
        weighted_barycenter(plan, np.zeros((2, 1)))


def test_empirical_distribution_bookkeeping():
    dist = EmpiricalDistribution([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]])
    assert dist.num_points == 3
    for k in range(1, 5):
        dist = update_empirical(dist, np.full((3, 2), float(k)))
        assert dist.num_points == (k + 1) * 3
        assert dist.points.shape == ((k + 1) * 3, 2)
    np.testing.assert_allclose(dist.as_measure().masses, np.full(15, 1 / 15))


def test_empirical_update_is_a_mixture():
    dist = EmpiricalDistribution([[0.0], [2.0]])
    new = update_empirical(dist, [[4.0], [6.0]])
    # (k+1)/(k+2) of the old mean plus 1/(k+2) of the new outputs
    assert np.mean(new.points) == pytest.approx(0.5 * 1.0 + 0.5 * 5.0)
    assert dist.num_points == 2


def test_empirical_update_needs_one_output_per_agent():
    dist = EmpiricalDistribution([[0.0], [2.0]])
    with pytest.raises(AssertionError, match="There must be exactly one output per agent."):
        update_empirical(dist, [[1.0]])


def test_subsample_measure(rng):
    mu = DiscreteMeasure(rng.standard_normal((50, 2)))
    small = subsample_measure(mu, 10, rng)
    assert small.num_points == 10
    assert subsample_measure(mu, 100, rng) is mu


def test_empirical_update_moves_distance_boundedly():
    rng = np.random.default_rng(71)
    for _ in range(100):
        rho = DiscreteMeasure(rng.uniform(-1.0, 1.0, (3, 2)), rng.dirichlet(np.ones(3)))
        dist = EmpiricalDistribution(rng.uniform(-1.0, 1.0, (3, 2)))
        for _ in range(int(rng.integers(0, 4))):
            dist = update_empirical(dist, rng.uniform(-1.0, 1.0, (3, 2)))
        new = update_empirical(dist, rng.uniform(-1.0, 1.0, (3, 2)))

        support = np.vstack([rho.points, new.points])
        diam_sq = max(np.sum((p - q) ** 2) for p in support for q in support)
        old_sq = wasserstein2(rho, dist.as_measure()) ** 2
        new_sq = wasserstein2(rho, new.as_measure()) ** 2
        assert new_sq - old_sq <= 2 / (dist.k + 2) * (diam_sq + old_sq) + 1e-9
