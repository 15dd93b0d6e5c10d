"""Verification harness: reduced-size versions of every check (the
full-size runs live in the acceptance suite)."""

import math

import numpy as np
import pytest

from reloc_ldp import MarkovModel, MemoryKernel, RunLengthDist, build_runs
from reloc_ldp.errors import DomainError
from reloc_ldp.verify import (
    ancestry_gof,
    equivalence_ks,
    residual_check,
    scgf_slope_check,
    sum_asymptotics_check,
    probe_function,
    tail_exponent_estimate,
)

UNIFORM = MemoryKernel.log_power(1, 1)
STEEP = MemoryKernel.stretched_exp(1, 0.5)
DET1 = RunLengthDist.deterministic(1)

pytestmark = pytest.mark.filterwarnings("ignore::RuntimeWarning")


# -- slope convergence ---------------------------------------------------------------


def test_scgf_slope_unit_environment():
    report = scgf_slope_check(UNIFORM, DET1, [0.5, 1.0], [1e3, 1e4, 1e5, 1e6], env_seed=0)
    for i, xi in enumerate(report.xi_grid):
        assert report.abs_gaps[i] < 0.02 * report.lambda_theory[i]
    rows = report.rows()
    assert len(rows) == 2 * 4
    assert rows[0]["s_of_t"] == pytest.approx(math.log(1e3))


def test_scgf_slope_zero_xi_gives_zeros():
    report = scgf_slope_check(UNIFORM, DET1, [0.0], [1e3, 1e4, 1e5, 1e6], env_seed=0)
    assert np.all(report.values == 0.0)
    assert report.slopes[0] == 0.0


def test_scgf_slope_steep_kernel_normalisation():
    # slope of the exact memory log-MGF against gamma*t^delta approaches
    # the clock cumulant when E[L] = 1
    report = scgf_slope_check(STEEP, DET1, [1.0], [1e3, 1e4, 1e5, 1e6], env_seed=0)
    lam = DET1.scgf(1.0)
    assert report.slopes[0] == pytest.approx(lam, rel=0.05)


def test_scgf_pointwise_gaps_shrink_along_ladder():
    # steep-regime default seeds: |value/s(t) - clock cumulant| decreases in t
    for kern, dist in ((UNIFORM, DET1), (STEEP, DET1)):
        report = scgf_slope_check(kern, dist, [1.0], [1e3, 1e4, 1e5, 1e6], env_seed=0)
        lam = report.lambda_theory[0]
        gaps = np.abs(report.values[0] / report.s_values - lam)
        assert np.all(np.diff(gaps) < 0)


def test_scgf_slope_ladder_validation():
    with pytest.raises(DomainError):
        scgf_slope_check(UNIFORM, DET1, [1.0], [1e3, 1e4, 1e5], env_seed=0)
    with pytest.raises(DomainError):
        scgf_slope_check(UNIFORM, DET1, [1.0], [1e3, 1e3, 1e4, 1e5], env_seed=0)


# -- residual ------------------------------------------------------------------------


def test_residual_steep_configs_decay():
    report = residual_check(STEEP, RunLengthDist.stretched_exp_tail(2, 1),
                            [1e3, 1e4, 1e5], env_seeds=[0, 1, 2])
    assert report.regime.value == "steep"
    assert len(report.rows) == 9
    assert report.max_ratio(min_horizon=1e5) < 0.1
    for row in report.rows:
        assert row["ratio"] >= 0.0


def test_residual_default_seed_whole_ladder():
    # stretched kernel with kappa=2 tails: the whole ladder stays under 0.1
    report = residual_check(STEEP, RunLengthDist.stretched_exp_tail(2, 1),
                            [1e3, 1e4, 1e5, 1e6], env_seeds=[0])
    assert report.max_ratio() < 0.1


def test_residual_flat_regime_report_only():
    report = residual_check(MemoryKernel.log_power(1, 0), DET1, [1e2, 1e3], env_seeds=[0])
    assert report.regime.value == "flat"
    assert all(row["regime"] == "flat" for row in report.rows)


# -- sum asymptotics -----------------------------------------------------------------


def test_harmonic_sum_remainder():
    report = sum_asymptotics_check(DET1, [10_000, 100_000], env_seed=0,
                                   variant="log_power", b=0.0)
    euler = 0.5772156649015329
    for row in report.rows:
        assert abs(row["remainder"] - euler) < 0.01


def test_log_inverse_sum_bounded():
    report = sum_asymptotics_check(DET1, [1_000, 10_000, 100_000], env_seed=0,
                                   variant="log_power", b=-1.0)
    remainders = [row["remainder"] for row in report.rows]
    assert max(remainders) - min(remainders) < 0.05
    assert all(abs(r) < 2.0 for r in remainders)


def test_power_sum_gap_shrinks_against_log():
    report = sum_asymptotics_check(DET1, [1_000, 10_000, 100_000], env_seed=0,
                                   variant="power", delta=0.5)
    ratios = [abs(row["remainder"]) / math.log(row["n"]) for row in report.rows]
    assert ratios[0] > ratios[1] > ratios[2]


def test_sum_check_random_lengths_match_prediction():
    dist = RunLengthDist.uniform(0.5, 1.5)
    report = sum_asymptotics_check(dist, [200_000], env_seed=3,
                                   variant="log_power", b=0.0)
    row = report.rows[0]
    # remainder is O(1); the leading term is log(n) ~ 12.2
    assert abs(row["remainder"]) < 1.0


def test_probe_function_registry():
    f = probe_function("exp_ratio", xi=2.0)
    assert f(0.0) == pytest.approx(0.5)
    g = probe_function("exp2_ratio", xi=1.0)
    assert g(0.0) == pytest.approx(0.5)
    assert probe_function("identity")(3.0) == 3.0
    with pytest.raises(DomainError):
        probe_function("nope")
    with pytest.raises(DomainError):
        probe_function("exp_ratio")


# -- ancestry gof --------------------------------------------------------------------


def test_ancestry_gof_unit_weights():
    runs = build_runs(DET1, UNIFORM, count=8, seed=0)
    rep = ancestry_gof(runs, 6, samples=20_000, master_seed=11)
    assert rep.tv_exact < 1e-10
    assert rep.p_value > 1e-3


def test_ancestry_gof_steep_weights():
    runs = build_runs(DET1, STEEP, count=8, seed=0)
    rep = ancestry_gof(runs, 6, samples=20_000, master_seed=12)
    assert rep.tv_exact < 1e-10
    assert rep.p_value > 1e-3


# -- equivalence ---------------------------------------------------------------------


def test_equivalence_small_lattice():
    rep = equivalence_ks(UNIFORM, DET1, MarkovModel.lattice_walk(1), 50,
                         20_000, master_seed=21, env_seed=0)
    assert not rep.reject
    assert rep.ks_distance < rep.critical_value


def test_equivalence_requires_1d():
    with pytest.raises(DomainError):
        equivalence_ks(UNIFORM, DET1, MarkovModel.brownian(2), 10.0, 100,
                       master_seed=0, env_seed=0)


def test_equivalence_worker_count_invariant():
    kwargs = dict(master_seed=22, env_seed=1)
    a = equivalence_ks(UNIFORM, DET1, MarkovModel.lattice_walk(1), 30, 25_000,
                       workers=1, **kwargs)
    b = equivalence_ks(UNIFORM, DET1, MarkovModel.lattice_walk(1), 30, 25_000,
                       workers=2, **kwargs)
    assert a.ks_distance == b.ks_distance


# -- tails ---------------------------------------------------------------------------


def test_tail_estimate_structure_and_flags():
    model = MarkovModel.lattice_walk(1)
    rep = tail_exponent_estimate(UNIFORM, DET1, model, [0.0, 0.4, 0.8, 5.0],
                                 [55, 148], samples=40_000,
                                 master_seed=31, env_seed=0)
    by_cell = {(r["x"], r["horizon"]): r for r in rep.rows}
    # x = 0: every sample is a hit, exponent exactly 0
    for t in (55.0, 148.0):
        cell = by_cell[(0.0, t)]
        assert cell["tail_hits"] == cell["samples"]
        assert cell["empirical_exponent"] == 0.0
        assert cell["resolved"]
    # x = 5 is far beyond reach at these horizons: unresolved, no estimate
    deep = by_cell[(5.0, 148.0)]
    assert not deep["resolved"]
    if deep["tail_hits"] == 0:
        assert deep["empirical_exponent"] is None
    # resolved exponents are negative, decrease as x grows, and sit inside
    # their Wilson bounds; theory columns are populated
    lo_cell, hi_cell = by_cell[(0.4, 148.0)], by_cell[(0.8, 148.0)]
    assert lo_cell["neg_rate_theory"] < 0.0
    assert lo_cell["resolved"] and hi_cell["resolved"]
    assert hi_cell["empirical_exponent"] < lo_cell["empirical_exponent"] < 0.0
    for cell in (lo_cell, hi_cell):
        assert cell["wilson_lo"] <= cell["empirical_exponent"] <= cell["wilson_hi"]


def test_tail_estimate_worker_count_invariant():
    model = MarkovModel.lattice_walk(1)
    kwargs = dict(master_seed=32, env_seed=0)
    a = tail_exponent_estimate(UNIFORM, DET1, model, [0.5], [55], samples=30_000,
                               workers=1, **kwargs)
    b = tail_exponent_estimate(UNIFORM, DET1, model, [0.5], [55], samples=30_000,
                               workers=2, **kwargs)
    assert a.rows == b.rows
