"""Experiment harness: confronts exact computations and Monte Carlo with
the limit statements the package is built around.

Every check is deterministic given (env_seed, master_seed): Monte Carlo
work is split into fixed-size replicas whose streams derive from the
master seed and the replica index, so the numbers do not depend on the
worker count.  "Quenched" means one environment seed per report;
aggregation across seeds happens by running the check repeatedly.

Scientific outcomes are data, not process failures: a check returns its
numbers and lets callers (tests, CSV consumers) decide what to assert.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import DomainError
from .genealogy import (
    RunSequence,
    ancestry_chain,
    build_runs,
    exact_ancestry_law,
    product_ancestry_law,
    total_variation,
)
from .kernel import MemoryKernel, Regime
from .markov import MarkovModel
from .ratefn import RateFunction
from .rng import stream
from .runlength import RunLengthDist
from .sim import (
    memory_log_mgf_ladder,
    residual_time,
    sample_clock_batch,
    simulate_direct,
    timechange_batch,
)

__all__ = [
    "ScgfReport",
    "ResidualReport",
    "SumAsymptoticsReport",
    "AncestryGofReport",
    "KsReport",
    "TailReport",
    "scgf_slope_check",
    "residual_check",
    "sum_asymptotics_check",
    "ancestry_gof",
    "equivalence_ks",
    "tail_exponent_estimate",
    "probe_function",
]

_STREAM_ENV = 0          # reserved by genealogy.build_runs
_STREAM_DIRECT = 1
_STREAM_TIMECHANGE = 2
_STREAM_TAILS = 3
_STREAM_GOF = 4

_WILSON_Z = 1.959963984540054  # two-sided 95%


def _map_replicas(fn, payloads, workers: int):
    """Run ``fn`` over payloads, optionally in processes; order-preserving."""
    if workers <= 1 or len(payloads) <= 1:
        return [fn(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, payloads))


def _chunk_sizes(total: int, chunk: int) -> list[int]:
    """Fixed partition of ``total`` into replicas (independent of workers)."""
    full, rem = divmod(total, chunk)
    return [chunk] * full + ([rem] if rem else [])


# ---------------------------------------------------------------------------
# exact-MGF slope convergence
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScgfReport:
    xi_grid: np.ndarray
    horizons: np.ndarray
    s_values: np.ndarray
    values: np.ndarray       # shape (len(xi), len(horizons))
    slopes: np.ndarray
    lambda_theory: np.ndarray
    abs_gaps: np.ndarray
    env_seed: int

    def rows(self) -> list[dict]:
        out = []
        for i, xi in enumerate(self.xi_grid):
            for j, h in enumerate(self.horizons):
                out.append({
                    "xi": float(xi),
                    "horizon": float(h),
                    "s_of_t": float(self.s_values[j]),
                    "exact_log_mgf": float(self.values[i, j]),
                    "slope_fit": float(self.slopes[i]),
                    "lambda_theory": float(self.lambda_theory[i]),
                    "abs_gap": float(self.abs_gaps[i]),
                })
        return out


def scgf_slope_check(kernel: MemoryKernel, dist: RunLengthDist, xi_grid,
                     horizon_ladder, env_seed: int) -> ScgfReport:
    """Regress the exact conditional log-MGF of the memory clock against
    the scale function across a horizon ladder; the slope should match
    the clock cumulant at each xi."""
    horizons = np.asarray(sorted(horizon_ladder), dtype=float)
    if len(horizons) < 4:
        raise DomainError("horizon ladder needs at least 4 points for a slope fit")
    if np.any(np.diff(horizons) <= 0):
        raise DomainError("horizon ladder must be strictly increasing")
    xi_grid = np.asarray(xi_grid, dtype=float)
    runs = build_runs(dist, kernel, horizon=float(horizons[-1]), seed=env_seed)
    s_values = np.asarray([kernel.scale(h) for h in horizons])
    values = np.empty((len(xi_grid), len(horizons)))
    slopes = np.empty(len(xi_grid))
    lam = np.array([dist.scgf(float(xi)) for xi in xi_grid])
    for i, xi in enumerate(xi_grid):
        values[i] = memory_log_mgf_ladder(runs, horizons, float(xi))
        slopes[i] = np.polyfit(s_values, values[i], 1)[0] if xi != 0.0 else 0.0
    return ScgfReport(
        xi_grid=xi_grid, horizons=horizons, s_values=s_values, values=values,
        slopes=slopes, lambda_theory=lam, abs_gaps=np.abs(slopes - lam),
        env_seed=env_seed,
    )


# ---------------------------------------------------------------------------
# residual decay
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ResidualReport:
    regime: Regime
    rows: list = field(default_factory=list)  # dicts per (seed, horizon)

    def max_ratio(self, min_horizon: float = 0.0) -> float:
        vals = [r["ratio"] for r in self.rows if r["horizon"] >= min_horizon]
        return max(vals) if vals else math.nan


def residual_check(kernel: MemoryKernel, dist: RunLengthDist, horizon_ladder,
                   env_seeds) -> ResidualReport:
    """Residual time A(t) against the scale s(t) along a ladder, one row
    per (environment seed, horizon).  Steep-regime configurations are
    expected to decay per seed; flat-regime ones only in probability, so
    callers treat those rows as report-only."""
    horizons = np.asarray(sorted(horizon_ladder), dtype=float)
    rows = []
    for seed in env_seeds:
        runs = build_runs(dist, kernel, horizon=float(horizons[-1]), seed=int(seed))
        for h in horizons:
            i_t, a = residual_time(runs, float(h))
            s = float(kernel.scale(h))
            rows.append({
                "env_seed": int(seed),
                "horizon": float(h),
                "s_of_t": s,
                "i_of_t": int(i_t),
                "residual_a": float(a),
                "ratio": float(a / s),
                "regime": kernel.regime.value,
            })
    return ResidualReport(regime=kernel.regime, rows=rows)


# ---------------------------------------------------------------------------
# sum asymptotics
# ---------------------------------------------------------------------------


def probe_function(name: str, xi: float | None = None):
    """Supported test functions for the sum-asymptotics checks."""
    if name == "one":
        return lambda x: np.ones_like(np.asarray(x, dtype=float))
    if name == "identity":
        return lambda x: np.asarray(x, dtype=float)
    if name == "exp_ratio":
        if xi is None or xi == 0:
            raise DomainError("exp_ratio needs a nonzero xi")
        return lambda x: np.exp(xi * np.asarray(x, dtype=float)) / xi - np.asarray(x, dtype=float)
    if name == "exp2_ratio":
        if xi is None or xi == 0:
            raise DomainError("exp2_ratio needs a nonzero xi")
        return lambda x: np.exp(2 * xi * np.asarray(x, dtype=float)) / (2 * xi)
    raise DomainError(f"unknown test function {name!r}")


@dataclass(frozen=True)
class SumAsymptoticsReport:
    variant: str
    rows: list  # dicts per ladder n


def sum_asymptotics_check(dist: RunLengthDist, n_ladder, env_seed: int, *,
                          variant: str = "log_power", b: float = 0.0,
                          delta: float = 0.5, g=None,
                          g_name: str = "one") -> SumAsymptoticsReport:
    """Partial sums of g(L_{i+1}) * (log T_i)^b / T_i  (variant
    ``log_power``) or of delta * g(L_{i+1}) * T_i^(delta-1) (variant
    ``power``) against their predicted leading terms.

    For negative or non-integer b, indices with T_i <= 1 are skipped (the
    log factor is singular or undefined there; the predictions are
    asymptotic and indifferent to finitely many initial terms).
    """
    if g is None:
        g = probe_function(g_name)
    ns = sorted(int(n) for n in n_ladder)
    runs = build_runs(dist, MemoryKernel.log_power(1, 1), count=ns[-1] + 1, seed=env_seed)
    t_arr = runs.times[1: ns[-1] + 1]          # T_1 .. T_nmax
    g_arr = np.asarray(g(runs.lengths[1: ns[-1] + 1]), dtype=float)  # g(L_{i+1})
    mean_g = dist.expect(lambda x: float(np.asarray(g(x)).ravel()[0]))
    mean_l = dist.mean
    if variant == "log_power":
        logt = np.log(t_arr)
        if b < 0 or float(b) != int(b):
            keep = logt > 0.0
        else:
            keep = np.ones_like(logt, dtype=bool)
        with np.errstate(divide="ignore", invalid="ignore"):
            powed = np.where(keep, np.where(logt > 0, logt, 1.0) ** b, 0.0)
            if b == 0:
                powed = np.where(keep, 1.0, 0.0)
        terms = np.where(keep, g_arr * powed / t_arr, 0.0)
    elif variant == "power":
        terms = delta * g_arr * t_arr ** (delta - 1.0)
    else:
        raise DomainError(f"unknown variant {variant!r}")
    cum = np.cumsum(terms)
    rows = []
    for n in ns:
        empirical = float(cum[n - 1])
        if variant == "power":
            predicted = mean_g / mean_l ** (1.0 - delta) * n**delta
        elif b == -1:
            predicted = mean_g / mean_l * math.log(math.log(n))
        else:
            predicted = mean_g / ((b + 1.0) * mean_l) * math.log(n) ** (b + 1.0)
        rows.append({
            "variant": variant if variant == "power" else f"log_power(b={b:g})",
            "n": n,
            "empirical_sum": empirical,
            "predicted_leading": float(predicted),
            "remainder": float(empirical - predicted),
        })
    return SumAsymptoticsReport(variant=variant, rows=rows)


# ---------------------------------------------------------------------------
# ancestry goodness of fit
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AncestryGofReport:
    target: int
    tv_exact: float
    chi2_stat: float
    chi2_dof: int
    p_value: float
    samples: int


def ancestry_gof(runs: RunSequence, target: int, samples: int,
                 master_seed: int) -> AncestryGofReport:
    """(a) exact total-variation distance between the enumerated ancestry
    law and the independent-Bernoulli product law; (b) chi-square of
    parent-chain samples against the product law (cells with expected
    count below 5 are pooled)."""
    exact = exact_ancestry_law(runs, target)
    product = product_ancestry_law(runs, target)
    tv = total_variation(exact, product)

    rng = stream(master_seed, _STREAM_GOF)
    counts: dict = {}
    for _ in range(samples):
        anc = ancestry_chain(runs, target, rng)
        key = tuple(int(b) for b in anc.bits)
        counts[key] = counts.get(key, 0) + 1

    cells = sorted(product)
    observed, expected = [], []
    pool_obs = pool_exp = 0.0
    for key in cells:
        e = product[key] * samples
        o = counts.get(key, 0)
        if e < 5.0:
            pool_obs += o
            pool_exp += e
        else:
            observed.append(o)
            expected.append(e)
    if pool_exp > 0:
        observed.append(pool_obs)
        expected.append(pool_exp)
    observed = np.asarray(observed, dtype=float)
    expected = np.asarray(expected, dtype=float)
    chi2 = float(np.sum((observed - expected) ** 2 / expected))
    dof = len(observed) - 1
    p_value = float(stats.chi2.sf(chi2, dof))
    return AncestryGofReport(
        target=target, tv_exact=tv, chi2_stat=chi2, chi2_dof=dof,
        p_value=p_value, samples=samples,
    )


# ---------------------------------------------------------------------------
# distributional equivalence of the two simulators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KsReport:
    t: float
    samples_per_arm: int
    ks_distance: float
    critical_value: float
    reject: bool
    alpha: float


_EQ_CHUNK = 12_500


def _direct_chunk(payload) -> np.ndarray:
    runs, model, t, master_seed, replica, size = payload
    rng = stream(master_seed, _STREAM_DIRECT, replica)
    out = np.empty(size)
    for k in range(size):
        out[k], _ = simulate_direct(runs, model, t, rng)
    return out


def _timechange_chunk(payload) -> np.ndarray:
    runs, model, t, master_seed, replica, size = payload
    rng = stream(master_seed, _STREAM_TIMECHANGE, replica)
    return np.asarray(timechange_batch(runs, model, t, rng, size), dtype=float)


def equivalence_ks(kernel: MemoryKernel, dist: RunLengthDist, model: MarkovModel,
                   t: float, samples_per_arm: int, *, master_seed: int,
                   env_seed: int, workers: int = 1,
                   alpha: float = 1e-3) -> KsReport:
    """Two-sample Kolmogorov-Smirnov distance between the literal
    simulator and the time-change simulator at one query time (1-d)."""
    if model.dimension != 1:
        raise DomainError("equivalence check is defined for 1-d models")
    runs = build_runs(dist, kernel, horizon=float(t), seed=env_seed)
    sizes = _chunk_sizes(samples_per_arm, _EQ_CHUNK)
    direct_payloads = [(runs, model, t, master_seed, r, m) for r, m in enumerate(sizes)]
    tc_payloads = [(runs, model, t, master_seed, r, m) for r, m in enumerate(sizes)]
    arm_a = np.concatenate(_map_replicas(_direct_chunk, direct_payloads, workers))
    arm_b = np.concatenate(_map_replicas(_timechange_chunk, tc_payloads, workers))
    ks = float(stats.ks_2samp(arm_a, arm_b, method="asymp").statistic)
    c_alpha = math.sqrt(-math.log(alpha / 2.0) / 2.0)
    critical = c_alpha * math.sqrt(2.0 / samples_per_arm)
    return KsReport(
        t=float(t), samples_per_arm=samples_per_arm, ks_distance=ks,
        critical_value=critical, reject=ks > critical, alpha=alpha,
    )


# ---------------------------------------------------------------------------
# tail exponents
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TailReport:
    x_grid: np.ndarray
    horizons: np.ndarray
    rows: list
    env_seed: int
    samples: int

    def cell(self, x: float, horizon: float) -> dict:
        for r in self.rows:
            if r["x"] == x and r["horizon"] == horizon:
                return r
        raise KeyError((x, horizon))


_TAIL_CHUNK = 250_000


def _tail_chunk(payload) -> np.ndarray:
    runs, model, t, thresholds, master_seed, t_index, replica, size = payload
    rng = stream(master_seed, _STREAM_TAILS, t_index, replica)
    endpoints = timechange_batch(runs, model, t, rng, size)
    mag = np.abs(np.asarray(endpoints, dtype=float))
    return np.array([int(np.sum(mag >= th)) for th in thresholds], dtype=np.int64)


def tail_exponent_estimate(kernel: MemoryKernel, dist: RunLengthDist,
                           model: MarkovModel, x_grid, horizon_ladder,
                           samples: int, *, master_seed: int, env_seed: int,
                           workers: int = 1, min_hits: int = 100) -> TailReport:
    """Naive-MC estimate of the quenched tail decay exponents
    log P(|X(t)| >= x*s(t)) / s(t) along a horizon ladder, with Wilson
    95% bounds.  Cells with fewer than ``min_hits`` tail hits are flagged
    unresolved and carry no exponent estimate -- never a fabricated one.
    """
    x_grid = np.asarray(sorted(x_grid), dtype=float)
    horizons = np.asarray(sorted(horizon_ladder), dtype=float)
    rf = RateFunction(dist, model)
    theory = np.array([rf.tail_exponent(float(x)) for x in x_grid])
    runs = build_runs(dist, kernel, horizon=float(horizons[-1]), seed=env_seed)
    rows = []
    for t_index, t in enumerate(horizons):
        s_t = float(kernel.scale(t))
        thresholds = x_grid * s_t
        sizes = _chunk_sizes(samples, _TAIL_CHUNK)
        payloads = [
            (runs, model, float(t), thresholds, master_seed, t_index, r, m)
            for r, m in enumerate(sizes)
        ]
        hit_blocks = _map_replicas(_tail_chunk, payloads, workers)
        hits = np.sum(np.stack(hit_blocks, axis=0), axis=0)
        for xi_idx, x in enumerate(x_grid):
            h = int(hits[xi_idx])
            p_hat = h / samples
            resolved = h >= min_hits
            if h > 0:
                emp = math.log(p_hat) / s_t
                lo, hi = _wilson_bounds(h, samples)
                w_lo = math.log(lo) / s_t if lo > 0 else None
                w_hi = math.log(hi) / s_t
            else:
                emp = w_lo = w_hi = None
            rows.append({
                "x": float(x),
                "horizon": float(t),
                "s_of_t": s_t,
                "samples": samples,
                "tail_hits": h,
                "p_hat": p_hat,
                "empirical_exponent": emp,
                "wilson_lo": w_lo,
                "wilson_hi": w_hi,
                "neg_rate_theory": float(-theory[xi_idx]),
                "resolved": bool(resolved),
            })
    return TailReport(x_grid=x_grid, horizons=horizons, rows=rows,
                      env_seed=env_seed, samples=samples)


def _wilson_bounds(hits: int, n: int, z: float = _WILSON_Z) -> tuple[float, float]:
    p = hits / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = (z / denom) * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    return max(center - half, 0.0), min(center + half, 1.0)
