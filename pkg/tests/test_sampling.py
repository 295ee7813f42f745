"""Proposal construction and weighted drawing.

The proposal assigns each domain item an unnormalized mass of
p*sqrt(c(1-g)^2 + alpha^2 (1-c) g^2) when predicted positive and
p*(1-alpha)*sqrt(c g^2) when predicted negative, normalized over the domain.
Tests transcribe that formula independently, check the normalization and
positivity guarantees, and verify the samplers draw from exactly that
distribution, deterministically under a fixed generator.
"""

import numpy as np
import pytest

from conftest import build_pool
from lowshot import (
    AllZeroMassError,
    EmptyInputError,
    SamplingPlan,
    importance_distribution,
    restrict_domain,
    sample_until_new,
    uniform_plan,
    weighted_sample,
)


def reference_mass(probs, yhat, g, alpha, domain, pool_size):
    """Independent transcription of the proposal formula."""
    p = 1.0 / pool_size
    c = np.asarray(probs, dtype=float)
    pos = p * np.sqrt(c * (1.0 - g) ** 2 + alpha**2 * (1.0 - c) * g**2)
    neg = p * (1.0 - alpha) * np.sqrt(c * g**2)
    raw = np.where(np.asarray(yhat) == 1, pos, neg)
    mass = np.zeros(pool_size)
    mass[domain] = raw[domain]
    return mass / mass.sum()


class TestImportanceDistribution:
    def test_matches_reference_formula(self):
        rng = np.random.default_rng(51)
        for _ in range(200):
            n = int(rng.integers(3, 50))
            probs = rng.uniform(0.05, 0.95, n)
            yhat = rng.integers(0, 2, n)
            g = float(rng.uniform(0.05, 0.95))
            alpha = float(rng.uniform(0.05, 0.95))
            k = int(rng.integers(1, n + 1))
            domain = np.sort(rng.choice(n, size=k, replace=False))
            plan = importance_distribution(probs, yhat, g, alpha, domain, n)
            np.testing.assert_allclose(
                plan.mass, reference_mass(probs, yhat, g, alpha, domain, n),
                atol=1e-12)
            assert abs(plan.mass.sum() - 1.0) <= 1e-9
            assert set(plan.domain) <= set(domain.tolist())
            assert np.all(plan.mass[plan.domain] > 0)
            outside = np.setdiff1d(np.arange(n), plan.domain)
            assert np.all(plan.mass[outside] == 0.0)

    def test_precision_only_with_no_predicted_positives_has_no_mass(self):
        probs = np.full(6, 0.5)
        yhat = np.zeros(6, dtype=int)
        with pytest.raises(AllZeroMassError):
            importance_distribution(probs, yhat, 0.5, 1.0, np.arange(6), 6)

    def test_probabilities_on_the_boundary_rejected(self):
        for bad in (0.0, 1.0):
            probs = np.array([0.5, bad, 0.5])
            with pytest.raises(ValueError):
                importance_distribution(probs, [1, 1, 1], 0.5, 0.5, np.arange(3), 3)

    def test_empty_domain_rejected(self):
        with pytest.raises(EmptyInputError):
            importance_distribution(np.full(4, 0.5), [1, 0, 1, 0], 0.5, 0.5, [], 4)


class TestSamplingPlanValidation:
    def test_mass_must_cover_the_pool(self):
        with pytest.raises(ValueError):
            SamplingPlan(domain=np.array([0]), mass=np.array([1.0]), pool_size=2)

    def test_mass_must_normalize(self):
        with pytest.raises(ValueError):
            SamplingPlan(domain=np.array([0, 1]), mass=np.array([0.7, 0.7]), pool_size=2)

    def test_mass_outside_domain_must_vanish(self):
        with pytest.raises(ValueError):
            SamplingPlan(domain=np.array([0]), mass=np.array([0.9, 0.1]), pool_size=2)

    def test_population_density_is_one_over_pool(self):
        plan = uniform_plan(8)
        assert plan.p_x == 0.125


class TestUniformPlan:
    def test_full_pool_mass_is_exactly_one_over_n(self):
        plan = uniform_plan(5)
        np.testing.assert_array_equal(plan.domain, np.arange(5))
        assert np.all(plan.mass == 1.0 / 5.0)

    def test_subdomain_mass(self):
        plan = uniform_plan(6, domain=[5, 1, 3])
        np.testing.assert_array_equal(plan.domain, [1, 3, 5])
        np.testing.assert_array_equal(plan.mass[[1, 3, 5]], 1.0 / 3.0)
        np.testing.assert_array_equal(plan.mass[[0, 2, 4]], 0.0)


class TestWeightedSample:
    def test_deterministic_under_a_fixed_generator(self):
        plan = uniform_plan(100)
        a = weighted_sample(plan, 50, np.random.default_rng(7))
        b = weighted_sample(plan, 50, np.random.default_rng(7))
        np.testing.assert_array_equal(a, b)

    def test_draw_frequencies_concentrate_on_the_plan(self):
        mass = np.array([0.5, 0.2, 0.15, 0.1, 0.05])
        plan = SamplingPlan(domain=np.arange(5), mass=mass, pool_size=5)
        n = 200_000
        draws = weighted_sample(plan, n, np.random.default_rng(8))
        freq = np.bincount(draws, minlength=5) / n
        sigma = np.sqrt(mass * (1 - mass) / n)
        assert np.all(np.abs(freq - mass) < 4 * sigma + 1e-12)

    def test_at_least_one_draw_required(self):
        with pytest.raises(ValueError):
            weighted_sample(uniform_plan(3), 0, np.random.default_rng(0))


class TestSampleUntilNew:
    def test_quota_of_distinct_unknown_items(self):
        plan = uniform_plan(20)
        known = frozenset(range(10))
        drawn, fresh = sample_until_new(plan, 5, np.random.default_rng(9), known)
        assert len(fresh) == 5
        assert len(set(fresh)) == 5
        assert set(fresh).isdisjoint(known)
        assert set(fresh) <= set(drawn)
        # the quota completes on the final draw; nothing after it is kept
        assert drawn[-1] == fresh[-1]

    def test_known_and_duplicate_draws_are_retained(self):
        # two-item domain heavily tilted to a known item: the drawn multiset
        # must keep the known hits that cost no budget
        mass = np.array([0.95, 0.05])
        plan = SamplingPlan(domain=np.arange(2), mass=mass, pool_size=2)
        drawn, fresh = sample_until_new(plan, 1, np.random.default_rng(0), {0})
        assert fresh == [1]
        assert drawn.count(0) >= 1
        assert drawn[-1] == 1

    def test_target_must_be_positive(self):
        with pytest.raises(ValueError):
            sample_until_new(uniform_plan(4), 0, np.random.default_rng(0))

    def test_deterministic_under_seed(self):
        plan = uniform_plan(50)
        a = sample_until_new(plan, 12, np.random.default_rng(11))
        b = sample_until_new(plan, 12, np.random.default_rng(11))
        assert a == b


class TestRestrictDomain:
    def _pool(self, rng, n=200, n_pred=10):
        scores = rng.uniform(0, 1, n)
        predicted = np.zeros(n, dtype=int)
        predicted[np.argsort(-scores)[:n_pred]] = 1
        return build_pool(scores, predicted)

    def test_size_grows_linearly_with_iteration(self):
        rng = np.random.default_rng(61)
        pool = self._pool(rng)
        for idx in range(4):
            domain = restrict_domain(pool, idx, 3)
            assert domain.size == min(pool.size, 3 * (idx + 1) * 10)

    def test_domain_is_the_top_scored_slice(self):
        rng = np.random.default_rng(62)
        pool = self._pool(rng)
        domain = restrict_domain(pool, 0, 3)
        top = np.sort(np.argsort(-pool.scores, kind="stable")[:30])
        np.testing.assert_array_equal(domain, top)

    def test_domains_are_nested_as_iterations_advance(self):
        rng = np.random.default_rng(63)
        pool = self._pool(rng)
        previous = set()
        for idx in range(5):
            current = set(restrict_domain(pool, idx, 3).tolist())
            assert previous <= current
            previous = current

    def test_capped_at_the_pool_size(self):
        rng = np.random.default_rng(64)
        pool = self._pool(rng, n=40, n_pred=10)
        domain = restrict_domain(pool, 5, 3)
        np.testing.assert_array_equal(domain, np.arange(40))

    def test_no_predicted_positives_returns_everything(self):
        pool = build_pool([0.1, 0.9, 0.5], [0, 0, 0])
        np.testing.assert_array_equal(restrict_domain(pool, 0, 3), np.arange(3))
