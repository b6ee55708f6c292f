"""Independent reference routes used to verify the estimation code.

Everything here is deliberately implemented without reusing the closed-form
moment or posterior machinery: the Kaplan-Meier estimator is a direct
product-limit computation, path simulation draws actual beta jump variables,
and the three-beta product density is an explicit closed form.  Agreement
between these routes and the estimation code is what the test suite and the
``validate`` command check.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .bsp import BetaStacyProcess, DiscreteCdf, LifetimeSample
from .dataio import Dataset
from .rbd import RbdNode

__all__ = [
    "PathStats",
    "simulate_bsp_paths",
    "kaplan_meier",
    "exact_three_beta_product_pdf",
    "three_beta_product_cdf_grid",
    "WeibullLifetime",
    "DiscreteCdfSampler",
    "StructuralLifetime",
    "censoring_rate",
    "simulate_lifetimes",
]

MAX_SEED = 2**64 - 1


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not (0 <= seed <= MAX_SEED):
        raise ValueError("seed must fit in an unsigned 64-bit integer")
    return seed


@dataclass(frozen=True)
class PathStats:
    """Per-grid-point Monte Carlo summaries of simulated CDF paths."""

    grid: np.ndarray
    mean: np.ndarray
    second_moment: np.ndarray
    mean_se: np.ndarray
    second_moment_se: np.ndarray
    n_paths: int


def simulate_bsp_paths(process: BetaStacyProcess, n_paths: int, seed: int) -> PathStats:
    """Sample CDF paths from a beta-Stacy law and summarize them pointwise.

    A path is built from independent jump variables: at grid point j with
    base value G_j, left value G_{j-1}, and precision a_j,

        W_j ~ Beta(a_j (G_j - G_{j-1}), a_j (1 - G_j)),

    the survival path is the running product of (1 - W_j), and F = 1 - R.
    Zero-mass jumps contribute W_j = 0; a jump where the base reaches 1
    contributes W_j = 1.  Positive-mass jumps require strictly positive
    precision, otherwise the beta shapes degenerate.
    """
    n_paths = int(n_paths)
    if n_paths <= 0:
        raise ValueError("n_paths must be positive")
    seed = _check_seed(seed)
    if not process.estimable.all():
        raise ValueError("cannot simulate paths beyond the estimable range")
    grid = process.grid
    if grid.size == 0:
        raise ValueError("process grid is empty")
    g = process.base.values
    g_prev = np.concatenate(([0.0], g[:-1]))
    rng = np.random.default_rng(seed)
    surv = np.ones(n_paths)
    f_paths = np.empty((grid.size, n_paths))
    for j in range(grid.size):
        if g[j] >= 1.0:
            w = 1.0
        elif g[j] == g_prev[j]:
            w = 0.0
        else:
            a = process.precision[j] * (g[j] - g_prev[j])
            b = process.precision[j] * (1.0 - g[j])
            if not (a > 0.0 and b > 0.0):
                raise ValueError(
                    f"nonpositive beta shapes at positive-mass jump t={grid[j]:g}"
                )
            w = rng.beta(a, b, size=n_paths)
        surv = surv * (1.0 - w)
        f_paths[j] = 1.0 - surv
    mean = f_paths.mean(axis=1)
    second = np.mean(f_paths * f_paths, axis=1)
    root_n = math.sqrt(n_paths)
    mean_se = f_paths.std(axis=1, ddof=1) / root_n
    second_se = (f_paths * f_paths).std(axis=1, ddof=1) / root_n
    return PathStats(grid.copy(), mean, second, mean_se, second_se, n_paths)


def kaplan_meier(samples: Iterable[LifetimeSample]) -> DiscreteCdf:
    """Product-limit estimate of the CDF from right-censored lifetimes.

    Jumps only at distinct observed failure times; censored units tied with
    failures count as still at risk there.  Raises if no failures occurred.
    """
    samples = tuple(samples)
    if not samples:
        raise ValueError("Kaplan-Meier needs at least one sample")
    times = np.array([s.time for s in samples], dtype=np.float64)
    events = np.array([s.event for s in samples], dtype=np.int64)
    fail_times = np.unique(times[events == 1])
    if fail_times.size == 0:
        raise ValueError("Kaplan-Meier needs at least one observed failure")
    sorted_times = np.sort(times)
    at_risk = times.size - np.searchsorted(sorted_times, fail_times, side="left")
    deaths = np.array([np.sum((times == t) & (events == 1)) for t in fail_times], dtype=np.float64)
    surv = np.cumprod(1.0 - deaths / at_risk)
    return DiscreteCdf(fail_times, 1.0 - surv)


def exact_three_beta_product_pdf(y) -> np.ndarray:
    """Exact density of the product of Beta(9,3), Beta(8,3), Beta(4,2) variables.

    Closed form on [0, 1], with logarithmic terms:

        g(y) = 3960/7 y^3 - 1980 y^4 + 99000 y^7
               + (374220 + 356400 log y) y^8
               - (443520 - 237600 log y) y^9
               - 198000/7 y^10,

    and g(0) = 0.  Used as the quadrature reference when checking how well a
    moment-matched beta approximates a product of betas.
    """
    y_arr = np.asarray(y, dtype=np.float64)
    if np.any(y_arr < 0.0) or np.any(y_arr > 1.0):
        raise ValueError("product density is supported on [0, 1]")
    safe = np.where(y_arr > 0.0, y_arr, 1.0)
    log_y = np.log(safe)
    out = (
        3960.0 / 7.0 * safe**3
        - 1980.0 * safe**4
        + 99000.0 * safe**7
        + (374220.0 + 356400.0 * log_y) * safe**8
        - (443520.0 - 237600.0 * log_y) * safe**9
        - 198000.0 / 7.0 * safe**10
    )
    out = np.where(y_arr > 0.0, out, 0.0)
    return float(out) if np.isscalar(y) or y_arr.ndim == 0 else out


def three_beta_product_cdf_grid(n: int = 4001) -> tuple[np.ndarray, np.ndarray]:
    """Exact CDF of the three-beta product on a uniform grid, by quadrature."""
    ys = np.linspace(0.0, 1.0, int(n))
    cdf = integrate.cumulative_trapezoid(exact_three_beta_product_pdf(ys), ys, initial=0.0)
    return ys, cdf


class WeibullLifetime:
    """Weibull lifetime sampler with the usual shape/scale parameterization."""

    def __init__(self, shape: float, scale: float):
        if shape <= 0.0 or scale <= 0.0:
            raise ValueError("Weibull shape and scale must be positive")
        self.shape = float(shape)
        self.scale = float(scale)
        self._rate_cache: dict[float, float] = {}

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.scale * rng.weibull(self.shape, size=n)

    def cdf(self, t) -> np.ndarray:
        t_arr = np.asarray(t, dtype=np.float64)
        out = -np.expm1(-np.power(np.maximum(t_arr, 0.0) / self.scale, self.shape))
        return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out

    def time_scale(self) -> float:
        return self.scale


class DiscreteCdfSampler:
    """Inverse-transform sampler for a proper discrete CDF."""

    def __init__(self, cdf: DiscreteCdf):
        if cdf.grid.size == 0 or cdf.values[-1] != 1.0:
            raise ValueError("sampling requires a proper CDF ending at 1")
        self.discrete = cdf
        self._rate_cache: dict[float, float] = {}

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        u = rng.random(n)
        idx = np.searchsorted(self.discrete.values, u, side="left")
        return self.discrete.grid[np.minimum(idx, self.discrete.grid.size - 1)]

    def cdf(self, t):
        return self.discrete.at(t)

    def time_scale(self) -> float:
        return float(np.median(self.discrete.grid))

    def censored_probability(self, lam: float) -> float:
        # P(C < T) with C ~ Exp(lam): exact sum over the atoms of T.
        masses = np.diff(np.concatenate(([0.0], self.discrete.values)))
        return float(np.sum(masses * -np.expm1(-lam * self.discrete.grid)))


class StructuralLifetime:
    """Lifetime of a block diagram node driven by per-component samplers.

    A series group fails when its first child fails (minimum), a parallel
    group when its last child fails (maximum).  The exact CDF follows the
    same recursion with survival products and CDF products.
    """

    def __init__(self, node: RbdNode, leaves: Mapping[str, WeibullLifetime]):
        missing = [c.id for c in node.iter_components() if c.id not in leaves]
        if missing:
            raise ValueError(f"no sampler for components: {', '.join(sorted(missing))}")
        self.node = node
        self.leaves = dict(leaves)
        self._rate_cache: dict[float, float] = {}

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self._sample_node(self.node, rng, n)

    def _sample_node(self, node: RbdNode, rng: np.random.Generator, n: int) -> np.ndarray:
        if node.kind == "component":
            return self.leaves[node.id].sample(rng, n)
        draws = np.stack([self._sample_node(c, rng, n) for c in node.children])
        return draws.min(axis=0) if node.kind == "series" else draws.max(axis=0)

    def cdf(self, t):
        return self._cdf_node(self.node, t)

    def _cdf_node(self, node: RbdNode, t):
        if node.kind == "component":
            return self.leaves[node.id].cdf(t)
        parts = [self._cdf_node(c, t) for c in node.children]
        if node.kind == "parallel":
            out = parts[0]
            for p in parts[1:]:
                out = out * p
            return out
        surv = 1.0 - parts[0]
        for p in parts[1:]:
            surv = surv * (1.0 - p)
        return 1.0 - surv

    def time_scale(self) -> float:
        return float(np.median([s.time_scale() for s in self.leaves.values()]))


def _censored_probability(sampler, lam: float) -> float:
    """P(censor time < lifetime) under Exp(lam) censoring."""
    if lam <= 0.0:
        return 0.0
    exact = getattr(sampler, "censored_probability", None)
    if exact is not None:
        return exact(lam)
    value, _ = integrate.quad(
        lambda t: lam * math.exp(-lam * t) * (1.0 - float(sampler.cdf(t))),
        0.0,
        np.inf,
        limit=200,
    )
    return value


def censoring_rate(sampler, censor_fraction: float) -> float:
    """Exponential censoring rate giving the requested expected censored share.

    Solved by bisection on P(C < T), which increases monotonically in the
    rate.  Results are cached on the sampler, keyed by the fraction.
    """
    censor_fraction = float(censor_fraction)
    if not (0.0 <= censor_fraction < 1.0):
        raise ValueError("censor fraction must lie in [0, 1)")
    if censor_fraction == 0.0:
        return 0.0
    cache = getattr(sampler, "_rate_cache", None)
    if cache is not None and censor_fraction in cache:
        return cache[censor_fraction]
    hi = 1.0 / max(sampler.time_scale(), 1e-300)
    while _censored_probability(sampler, hi) < censor_fraction:
        hi *= 2.0
        if hi > 1e300:
            raise RuntimeError("failed to bracket the censoring rate")
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _censored_probability(sampler, mid) < censor_fraction:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * hi:
            break
    rate = 0.5 * (lo + hi)
    if cache is not None:
        cache[censor_fraction] = rate
    return rate


def simulate_lifetimes(
    samplers: Mapping[str, object],
    n_per_node: int,
    censor_fraction: float,
    seed: int,
) -> list[Dataset]:
    """Draw right-censored lifetime datasets, one per node label.

    Lifetimes come from each node's sampler; censoring times are exponential
    with a per-node rate calibrated so the expected censored share equals
    ``censor_fraction``.  The observed time is the minimum of the two and
    ties count as failures.  Draw streams are derived deterministically from
    the seed per sorted node label, so identical seeds give byte-identical
    datasets regardless of mapping order.
    """
    n_per_node = int(n_per_node)
    if n_per_node <= 0:
        raise ValueError("n_per_node must be positive")
    censor_fraction = float(censor_fraction)
    if not (0.0 <= censor_fraction < 1.0):
        raise ValueError("censor fraction must lie in [0, 1)")
    seed = _check_seed(seed)
    root_seq = np.random.SeedSequence(seed)
    order = sorted(samplers)
    streams = dict(zip(order, root_seq.spawn(len(order))))
    datasets = []
    for label, sampler in samplers.items():
        rng = np.random.default_rng(streams[label])
        lifetimes = np.maximum(np.asarray(sampler.sample(rng, n_per_node), dtype=np.float64), 1e-12)
        if censor_fraction > 0.0:
            rate = censoring_rate(sampler, censor_fraction)
            censors = rng.exponential(1.0 / rate, size=n_per_node)
            observed = np.minimum(lifetimes, censors)
            events = (lifetimes <= censors).astype(int)
        else:
            observed = lifetimes
            events = np.ones(n_per_node, dtype=int)
        datasets.append(
            Dataset(label, tuple(LifetimeSample(float(t), int(e)) for t, e in zip(observed, events)))
        )
    return datasets
