import numpy as np
import pytest
from scipy import integrate, stats

from relfuse.bsp import (
    BetaStacyProcess,
    DiscreteCdf,
    LifetimeSample,
    dp_prior,
)
from relfuse.oracle import (
    DiscreteCdfSampler,
    StructuralLifetime,
    WeibullLifetime,
    censoring_rate,
    exact_three_beta_product_pdf,
    kaplan_meier,
    simulate_bsp_paths,
    simulate_lifetimes,
    three_beta_product_cdf_grid,
)
from relfuse.rbd import component, parallel, series


class TestKaplanMeier:
    def test_censored_worked_example(self):
        data = [LifetimeSample(1.0, 1), LifetimeSample(2.0, 0), LifetimeSample(3.0, 1)]
        km = kaplan_meier(data)
        np.testing.assert_array_equal(km.grid, [1.0, 3.0])
        np.testing.assert_allclose(km.values, [1 / 3, 1.0], atol=1e-15)

    def test_ties(self):
        data = [LifetimeSample(2.0, 1), LifetimeSample(2.0, 0), LifetimeSample(3.0, 1)]
        km = kaplan_meier(data)
        np.testing.assert_array_equal(km.grid, [2.0, 3.0])
        np.testing.assert_allclose(km.values, [1 / 3, 1.0], atol=1e-15)

    def test_requires_a_failure(self):
        with pytest.raises(ValueError):
            kaplan_meier([LifetimeSample(1.0, 0)])
        with pytest.raises(ValueError):
            kaplan_meier([])


class TestPathSimulation:
    def test_deterministic_per_seed(self):
        prior = dp_prior(np.array([1.0, 2.0]), np.array([0.4, 1.0]), 3.0)
        a = simulate_bsp_paths(prior, 500, seed=11)
        b = simulate_bsp_paths(prior, 500, seed=11)
        np.testing.assert_array_equal(a.mean, b.mean)
        c = simulate_bsp_paths(prior, 500, seed=12)
        assert not np.array_equal(a.mean, c.mean)

    def test_mean_matches_base_measure(self):
        prior = dp_prior(np.array([1.0, 2.0, 3.0]), np.array([0.2, 0.6, 1.0]), 4.0)
        res = simulate_bsp_paths(prior, 40000, seed=5)
        z = np.abs(res.mean - prior.base.values) / np.maximum(res.mean_se, 1e-12)
        assert z[:-1].max() < 4.0
        assert res.mean[-1] == 1.0
        assert res.mean_se[-1] == 0.0

    def test_zero_precision_interior_jump_rejected(self):
        prior = dp_prior(np.array([1.0, 2.0]), np.array([0.4, 1.0]), 0.0)
        with pytest.raises(ValueError, match="nonpositive beta shapes"):
            simulate_bsp_paths(prior, 10, seed=1)

    def test_zero_mass_jump_is_skipped(self):
        prior = BetaStacyProcess(
            DiscreteCdf(np.array([1.0, 2.0]), np.array([0.4, 0.4])),
            np.array([2.0, 2.0]),
        )
        res = simulate_bsp_paths(prior, 2000, seed=3)
        np.testing.assert_array_equal(res.mean[0:2][0], res.mean[1])


class TestThreeBetaProduct:
    def test_density_normalizes(self):
        total, err = integrate.quad(lambda y: float(exact_three_beta_product_pdf(y)), 0.0, 1.0)
        assert total == pytest.approx(1.0, abs=1e-6)

    def test_density_mean(self):
        m, _ = integrate.quad(lambda y: y * float(exact_three_beta_product_pdf(y)), 0.0, 1.0)
        assert m == pytest.approx(4 / 11, abs=1e-6)

    def test_density_endpoints(self):
        assert exact_three_beta_product_pdf(0.0) == 0.0
        assert float(exact_three_beta_product_pdf(1.0)) == pytest.approx(0.0, abs=1e-8)

    def test_density_rejects_outside_unit_interval(self):
        with pytest.raises(ValueError):
            exact_three_beta_product_pdf(1.5)

    def test_cdf_grid_is_proper(self):
        grid, cdf = three_beta_product_cdf_grid()
        assert cdf[0] == 0.0
        assert cdf[-1] == pytest.approx(1.0, abs=1e-6)
        assert np.all(np.diff(cdf) >= -1e-12)

    def test_matches_beta_product_mc(self):
        # The closed form is the density of Beta(9,3) * Beta(8,3) * Beta(4,2);
        # simulation of that product must match it.
        rng = np.random.default_rng(77)
        draws = (
            rng.beta(9, 3, 200000) * rng.beta(8, 3, 200000) * rng.beta(4, 2, 200000)
        )
        grid, cdf = three_beta_product_cdf_grid()
        emp = np.searchsorted(np.sort(draws), grid) / draws.size
        assert np.max(np.abs(emp - cdf)) < 0.005


class TestSamplers:
    def test_weibull_cdf_matches_scipy(self):
        w = WeibullLifetime(2.2, 1400.0)
        t = np.array([200.0, 900.0, 2500.0])
        np.testing.assert_allclose(
            w.cdf(t), stats.weibull_min.cdf(t, 2.2, scale=1400.0), atol=1e-12
        )

    def test_weibull_sample_moments(self):
        w = WeibullLifetime(2.0, 100.0)
        draws = w.sample(np.random.default_rng(1), 200000)
        assert draws.mean() == pytest.approx(100.0 * np.sqrt(np.pi) / 2, rel=0.01)

    def test_discrete_sampler_hits_atoms(self):
        cdf = DiscreteCdf(np.array([1.0, 2.0, 5.0]), np.array([0.3, 0.8, 1.0]))
        sampler = DiscreteCdfSampler(cdf)
        draws = sampler.sample(np.random.default_rng(2), 100000)
        assert set(np.unique(draws)) == {1.0, 2.0, 5.0}
        assert np.mean(draws == 1.0) == pytest.approx(0.3, abs=0.01)

    def test_structural_sampling_matches_exact_cdf(self):
        tree = series(component("a"), parallel(component("b"), component("c")))
        leaves = {
            "a": WeibullLifetime(2.0, 100.0),
            "b": WeibullLifetime(1.5, 80.0),
            "c": WeibullLifetime(2.5, 120.0),
        }
        sampler = StructuralLifetime(tree, leaves)
        draws = sampler.sample(np.random.default_rng(3), 100000)
        for t in (40.0, 80.0, 150.0):
            emp = np.mean(draws <= t)
            assert emp == pytest.approx(sampler.cdf(t), abs=0.01)

    def test_structural_requires_all_leaves(self):
        tree = series(component("a"), component("b"))
        with pytest.raises(ValueError, match="no sampler"):
            StructuralLifetime(tree, {"a": WeibullLifetime(2.0, 1.0)})


class TestCensoringCalibration:
    def test_discrete_rate_solves_exact_equation(self):
        cdf = DiscreteCdf(np.array([1.0, 3.0, 7.0]), np.array([0.25, 0.7, 1.0]))
        sampler = DiscreteCdfSampler(cdf)
        lam = censoring_rate(sampler, 0.2)
        assert sampler.censored_probability(lam) == pytest.approx(0.2, abs=1e-9)

    def test_weibull_rate_calibrates_share(self):
        w = WeibullLifetime(2.2, 1400.0)
        lam = censoring_rate(w, 0.15)
        rng = np.random.default_rng(9)
        t = w.sample(rng, 400000)
        c = rng.exponential(1.0 / lam, size=400000)
        assert np.mean(c < t) == pytest.approx(0.15, abs=0.005)

    def test_rate_is_cached(self):
        w = WeibullLifetime(2.0, 100.0)
        assert censoring_rate(w, 0.15) is censoring_rate(w, 0.15)


class TestSimulateLifetimes:
    def test_deterministic_and_order_independent(self):
        samplers = {"a": WeibullLifetime(2.0, 100.0), "b": WeibullLifetime(1.5, 50.0)}
        flipped = {"b": samplers["b"], "a": samplers["a"]}
        one = simulate_lifetimes(samplers, 20, 0.15, seed=4)
        two = simulate_lifetimes(flipped, 20, 0.15, seed=4)
        assert {d.label: d for d in one} == {d.label: d for d in two}
        three = simulate_lifetimes(samplers, 20, 0.15, seed=5)
        assert {d.label: d for d in one} != {d.label: d for d in three}

    def test_shapes_and_positivity(self):
        datasets = simulate_lifetimes({"a": WeibullLifetime(2.0, 100.0)}, 30, 0.15, seed=1)
        assert len(datasets) == 1
        assert len(datasets[0]) == 30
        assert all(s.time > 0 for s in datasets[0].samples)

    def test_mean_censored_share(self):
        sampler = {"a": WeibullLifetime(2.2, 1400.0)}
        total, censored = 0, 0
        for seed in range(10000):
            (ds,) = simulate_lifetimes(sampler, 30, 0.15, seed=seed)
            total += len(ds)
            censored += sum(1 - s.event for s in ds.samples)
        assert censored / total == pytest.approx(0.15, abs=0.01)

    def test_rejects_bad_arguments(self):
        sampler = {"a": WeibullLifetime(2.0, 1.0)}
        with pytest.raises(ValueError):
            simulate_lifetimes(sampler, 0, 0.15, seed=1)
        with pytest.raises(ValueError):
            simulate_lifetimes(sampler, 5, 1.5, seed=1)
        with pytest.raises(ValueError):
            simulate_lifetimes(sampler, 5, 0.15, seed=-1)
