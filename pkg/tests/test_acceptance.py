"""End-to-end acceptance checks for the whole package.

Each test prints one summary line so a full run reads as a checklist.  All
randomness is seeded; every tolerance is asserted, never loosened at runtime.
"""

import time
import warnings

import numpy as np
import pytest
from scipy import integrate, stats

from relfuse.bsp import (
    BetaStacyProcess,
    DiscreteCdf,
    LifetimeSample,
    beta_match,
    dp_prior,
    mean,
    posterior_update,
    second_moment,
)
from relfuse.cli import EXIT_OK, main
from relfuse.demo import demo_config
from relfuse.errors import PrecisionRecoveryWarning
from relfuse.fusion import MomentCurve, combine_series, moments_of, recover_precision
from relfuse.oracle import (
    exact_three_beta_product_pdf,
    kaplan_meier,
    simulate_bsp_paths,
    three_beta_product_cdf_grid,
)
from relfuse.pipeline import curve_export, fit_system, fit_system_only
from relfuse.validation import check_fusion_mc, check_series_degenerate


def _random_bsp(rng, max_points):
    n = int(rng.integers(2, max_points + 1))
    grid = np.unique(np.round(rng.uniform(0.1, 30.0, n), 6))
    vals = np.clip(np.sort(rng.uniform(0.0, 1.0, grid.size)), 1e-4, 0.999)
    if rng.random() < 0.3:
        vals[-1] = 1.0
    prec = rng.lognormal(1.0, 1.2, grid.size)
    return BetaStacyProcess(DiscreteCdf(grid, vals), prec)


def _random_censored(rng, n_max=50):
    n = int(rng.integers(2, n_max + 1))
    times = np.round(rng.exponential(10.0, n), 2) + 0.01
    events = (rng.random(n) > 0.3).astype(int)
    if events.sum() == 0:
        events[int(rng.integers(0, n))] = 1
    return [LifetimeSample(float(t), int(e)) for t, e in zip(times, events)]


def _best_time(fn, repeats=5):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def test_01_prior_only_exactness():
    prior = dp_prior([1.0, 2.0, 3.0], [1 / 3, 2 / 3, 1.0], 3.0)
    post = posterior_update(prior, [])
    err = float(np.max(np.abs(post.base.values - prior.base.values)))
    defined = ~np.isnan(prior.precision)
    err = max(err, float(np.max(np.abs(post.precision[defined] - prior.precision[defined]))))
    assert np.array_equal(post.grid, prior.grid)
    assert np.array_equal(np.isnan(post.precision), ~defined)
    assert err <= 1e-12
    elapsed = _best_time(lambda: posterior_update(prior, []))
    assert elapsed < 1e-3
    print(f"\ncriterion 1 PASS: prior-only identity, max error {err:.2e}, {elapsed*1e6:.0f} us")


def test_02_data_only_exactness():
    data = [LifetimeSample(float(t), 1) for t in (1.0, 2.0, 3.0)]
    post = posterior_update(BetaStacyProcess.noninformative(), data)
    base_err = float(np.max(np.abs(post.base.values - np.array([1 / 3, 2 / 3, 1.0]))))
    prec_err = float(np.max(np.abs(post.precision[:2] - 3.0)))
    assert base_err <= 1e-12 and prec_err <= 1e-12
    assert np.isnan(post.precision[2])
    # The exported precision column carries the left limit through the
    # terminal point, so it reads as the constant sample size.
    exported = curve_export(post).precision
    assert np.max(np.abs(exported - 3.0)) <= 1e-12
    elapsed = _best_time(lambda: posterior_update(BetaStacyProcess.noninformative(), data))
    assert elapsed < 1e-3
    print(
        f"criterion 2 PASS: empirical CDF with precision 3, max error "
        f"{max(base_err, prec_err):.2e}, {elapsed*1e6:.0f} us"
    )


def test_03_kaplan_meier_equivalence():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(1000):
        samples = _random_censored(rng)
        km = kaplan_meier(samples)
        post = posterior_update(BetaStacyProcess.noninformative(), samples)
        est = np.array([mean(post, float(t)) for t in km.grid])
        worst = max(worst, float(np.max(np.abs(est - km.values))))
        assert worst <= 1e-12
    print(f"criterion 3 PASS: Kaplan-Meier equivalence on 1000 datasets, worst {worst:.2e}")


def test_04_second_moment_oracle():
    rng = np.random.default_rng(7)
    worst_z = 0.0
    t0 = time.perf_counter()
    for _ in range(100):
        proc = _random_bsp(rng, max_points=20)
        ps = simulate_bsp_paths(proc, 200000, int(rng.integers(0, 2**63)))
        for i, t in enumerate(proc.grid):
            closed_m = mean(proc, float(t))
            closed_s = second_moment(proc, float(t))
            for emp, se, closed in (
                (ps.mean[i], ps.mean_se[i], closed_m),
                (ps.second_moment[i], ps.second_moment_se[i], closed_s),
            ):
                if se == 0.0:
                    assert emp == closed
                else:
                    worst_z = max(worst_z, abs(emp - closed) / se)
    elapsed = time.perf_counter() - t0
    assert worst_z <= 4.0
    assert elapsed <= 60.0
    print(
        f"criterion 4 PASS: closed-form moments vs 200000 paths x 100 processes, "
        f"worst |z| {worst_z:.2f}, {elapsed:.1f} s"
    )


def test_05_fusion_against_monte_carlo():
    result = check_fusion_mc(seed=13, n_cases=100)
    assert result.passed, result.detail

    degenerate = check_series_degenerate()
    assert degenerate.passed, degenerate.detail
    zero = MomentCurve(np.array([1.0]), np.zeros(1), np.zeros(1))
    fused = combine_series(zero, zero)
    assert fused.second[0] == 0.0
    # Expanding the cross term through the means instead of the survival
    # moments evaluates to 2 on this pair; the implementation must not.
    wrong = 1.0 * 1.0 + 1.0 - 2.0 * 0.0 * 0.0
    assert wrong == 2.0
    print(f"criterion 5 PASS: fusion vs Monte Carlo on 100 cases ({result.detail}); "
          f"degenerate series second moment 0, rejected form gives {wrong:g}")


def test_06_moment_match_roundtrip():
    rng = np.random.default_rng(17)
    worst = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        for _ in range(100):
            proc = _random_bsp(rng, max_points=12)
            curve = moments_of(posterior_update(proc, []))
            back = recover_precision(curve)
            again = moments_of(posterior_update(back, []))
            worst = max(
                worst,
                float(np.max(np.abs(again.first - curve.first))),
                float(np.max(np.abs(again.second - curve.second))),
            )
    assert worst <= 1e-9
    print(f"criterion 6 PASS: moment roundtrip on 100 curves, sup error {worst:.2e}")


def test_07_beta_approximation_quality():
    total, _ = integrate.quad(lambda y: float(exact_three_beta_product_pdf(y)), 0.0, 1.0)
    assert total == pytest.approx(1.0, abs=1e-6)
    m, _ = integrate.quad(lambda y: y * float(exact_three_beta_product_pdf(y)), 0.0, 1.0)
    assert m == pytest.approx(4 / 11, abs=1e-6)

    # Exact product moments: E[Y] = 4/11 and E[Y^2] = 150/1001.
    shape = beta_match(4 / 11, 150 / 1001)
    grid, cdf = three_beta_product_cdf_grid()
    ks = float(np.max(np.abs(stats.beta.cdf(grid, shape.a, shape.b) - cdf)))
    assert ks <= 0.05

    # Same conclusion from simulated moments of the product.
    rng = np.random.default_rng(23)
    draws = rng.beta(9, 3, 200000) * rng.beta(8, 3, 200000) * rng.beta(4, 2, 200000)
    sampled = beta_match(float(draws.mean()), float((draws * draws).mean()))
    ks_mc = float(np.max(np.abs(stats.beta.cdf(grid, sampled.a, sampled.b) - cdf)))
    assert ks_mc <= 0.05
    print(
        f"criterion 7 PASS: density integral {total:.8f}, mean {m:.8f}, "
        f"KS {ks:.4f} (exact moments) / {ks_mc:.4f} (sampled moments)"
    )


def test_08_demo_scale_runtime(tmp_path):
    sim_dir = tmp_path / "sim"
    assert main(["simulate", "--seed", "0", "--out", str(sim_dir)]) == EXIT_OK
    out_dir = tmp_path / "fit"
    args = [
        "fit",
        "--rbd", str(sim_dir / "system.rbd"),
        "--data", str(sim_dir / "lifetimes.csv"),
        "--out", str(out_dir),
        "--svg",
    ]
    t0 = time.perf_counter()
    code = main(args)
    elapsed = time.perf_counter() - t0
    assert code == EXIT_OK
    assert (out_dir / "system_cdf.csv").exists()
    assert elapsed <= 2.0
    print(f"criterion 8 PASS: 13-node demo fit end to end in {elapsed*1e3:.0f} ms")


def test_09_hierarchical_bands_are_narrower():
    cfg = demo_config()
    wins = 0
    for seed in range(100):
        datasets = cfg.simulate(seed)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", PrecisionRecoveryWarning)
            hier = curve_export(fit_system(cfg.spec, datasets).posterior)
        sysonly = curve_export(fit_system_only(cfg.spec, datasets).posterior)
        shared = np.intersect1d(hier.t, sysonly.t)
        hi = np.searchsorted(hier.t, shared)
        si = np.searchsorted(sysonly.t, shared)
        hier_width = float(np.mean(hier.upper[hi] - hier.lower[hi]))
        sys_width = float(np.mean(sysonly.upper[si] - sysonly.lower[si]))
        wins += hier_width < sys_width
    assert wins >= 95
    print(f"criterion 9 PASS: hierarchical bands narrower in {wins}/100 replicates")


def test_10_coverage_calibration():
    cfg = demo_config()
    covered = 0
    for seed in range(200):
        datasets = cfg.simulate(seed)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", PrecisionRecoveryWarning)
            curve = curve_export(fit_system(cfg.spec, datasets).posterior)
        i = curve.t.size // 2
        truth = float(cfg.true_system_cdf(float(curve.t[i])))
        covered += bool(curve.lower[i] <= truth <= curve.upper[i])
    rate = covered / 200.0
    assert 0.85 <= rate <= 0.99
    print(f"criterion 10 PASS: coverage {covered}/200 = {rate:.3f} at the median grid time")
