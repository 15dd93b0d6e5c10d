"""Run-length families: sampling, moments, and the clock cumulant."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from reloc_ldp import RunLengthDist, stream
from reloc_ldp.errors import DomainError

DET1 = RunLengthDist.deterministic(1)
UNIF01 = RunLengthDist.uniform(0, 1)
STRETCH21 = RunLengthDist.stretched_exp_tail(2, 1)

ALL = [DET1, UNIF01, RunLengthDist.uniform(0.5, 1.5), STRETCH21,
       RunLengthDist.stretched_exp_tail(1.5, 2.0)]


# -- construction ---------------------------------------------------------------


@pytest.mark.parametrize(
    "factory",
    [
        lambda: RunLengthDist.deterministic(0),
        lambda: RunLengthDist.uniform(1, 1),
        lambda: RunLengthDist.uniform(-0.5, 1),
        lambda: RunLengthDist.stretched_exp_tail(1.0, 1.0),
        lambda: RunLengthDist.stretched_exp_tail(2.0, 0.0),
    ],
)
def test_invalid_parameters_rejected(factory):
    with pytest.raises(DomainError):
        factory()


def test_heavy_tail_names_rejected_with_reason():
    for name in ("geometric", "exponential"):
        with pytest.raises(DomainError, match="A2"):
            RunLengthDist.from_name(name)


def test_integer_valued_flag():
    assert DET1.integer_valued
    assert RunLengthDist.deterministic(3).integer_valued
    assert not RunLengthDist.deterministic(1.5).integer_valued
    assert not UNIF01.integer_valued
    assert not STRETCH21.integer_valued


# -- sampling --------------------------------------------------------------------


def test_deterministic_sample():
    rng = stream(0, 0)
    assert DET1.sample(rng) == 1.0
    assert np.all(DET1.sample(rng, 100) == 1.0)


def test_uniform_sample_mean_band():
    draws = UNIF01.sample(stream(1, 0), 1_000_000)
    assert abs(draws.mean() - 0.5) < 0.002  # 3-sigma band is ~0.00087
    assert np.all(draws > 0)


def test_stretched_tail_probability():
    # P(L >= 1) = exp(-1) for scale 1, any kappa
    draws = STRETCH21.sample(stream(2, 0), 1_000_000)
    assert abs(np.mean(draws >= 1.0) - math.exp(-1.0)) < 0.0015
    assert np.all(draws > 0)


@pytest.mark.parametrize("dist", ALL)
def test_samples_strictly_positive(dist):
    draws = np.atleast_1d(dist.sample(stream(3, 0), 10_000))
    assert np.all(draws > 0)


def test_stretched_mean_matches_samples():
    draws = STRETCH21.sample(stream(4, 0), 500_000)
    se = draws.std() / math.sqrt(len(draws))
    assert abs(draws.mean() - STRETCH21.mean) < 4 * se


# -- clock cumulant ---------------------------------------------------------------


def test_scgf_values():
    assert DET1.scgf(1.0) == pytest.approx(math.e - 2.0, rel=1e-12)
    assert UNIF01.scgf(2.0) == pytest.approx((math.e**2 - 1) / 2.0 - 2.0, rel=1e-12)
    for dist in ALL:
        assert dist.scgf(0.0) == 0.0


def test_scgf_uniform_matches_quadrature_oracle():
    # independent oracle: direct quadrature of the defining expectation
    for xi in (0.5, 2.0, -1.0):
        num, _ = integrate.quad(
            lambda x: (math.exp(xi * x) - 1.0 - xi * x), 0.0, 1.0, epsabs=1e-14
        )
        assert UNIF01.scgf(xi) == pytest.approx(num / (xi * 0.5), rel=1e-10)


def test_scgf_deterministic_matches_direct_formula():
    for xi in (0.25, 1.0, 3.0, -2.0):
        direct = (math.exp(xi) - 1.0 - xi) / xi
        assert DET1.scgf(xi) == pytest.approx(direct, rel=1e-12)


def test_scgf_sign_and_nonnegativity():
    # nonnegative on xi >= 0 (the domain the composed rate machinery uses);
    # the defining ratio is nonpositive for xi < 0
    for dist in ALL:
        for xi in np.linspace(0.0, 10.0, 41):
            if xi > 0 and xi * dist.support_max > 700:
                continue
            assert dist.scgf(float(xi)) >= 0.0
        for xi in np.linspace(-10.0, -0.25, 20):
            assert dist.scgf(float(xi)) <= 0.0


def test_scgf_linear_bound_near_zero():
    # |scgf(xi)| <= C |xi| with C = E[L^2]/E[L], up to tiny slack
    for dist in ALL:
        c = dist.moment(2) / dist.mean
        for xi in (1e-8, 1e-5, 1e-3, -1e-3, -1e-8):
            assert abs(dist.scgf(xi)) <= c * abs(xi) * (1 + 1e-6)


def test_scgf_central_differences_stable():
    # numerical differentiability: halving the step barely moves the slope
    for dist in ALL:
        for xi in (-3.0, -0.5, 0.0, 0.5, 3.0):
            g = {}
            for h in (1e-4, 5e-5):
                g[h] = (dist.scgf(xi + h) - dist.scgf(xi - h)) / (2 * h)
            assert g[1e-4] == pytest.approx(g[5e-5], rel=1e-5, abs=1e-8)


def test_scgf_monte_carlo_consistency():
    # (1/N) sum (e^{xi L} - 1 - xi L)/(xi mean) agrees within 4 SE
    xi = 1.0
    for dist in (UNIF01, STRETCH21):
        draws = np.atleast_1d(dist.sample(stream(5, 0), 1_000_000))
        vals = (np.exp(xi * draws) - 1.0 - xi * draws) / (xi * dist.mean)
        se = vals.std() / math.sqrt(len(vals))
        assert abs(vals.mean() - dist.scgf(xi)) < 4 * se


def test_expect_helper():
    assert DET1.expect(lambda x: x * x) == 1.0
    assert UNIF01.expect(lambda x: x) == pytest.approx(0.5, rel=1e-10)
    assert STRETCH21.expect(lambda x: x * x) == pytest.approx(STRETCH21.moment(2), rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(
    kappa=st.floats(1.2, 4.0),
    scale=st.floats(0.25, 3.0),
    xi=st.floats(-4.0, 4.0),
)
def test_scgf_sign_property_stretched(kappa, scale, xi):
    dist = RunLengthDist.stretched_exp_tail(kappa, scale)
    val = dist.scgf(xi)
    if xi > 0:
        assert val >= 0.0
    elif xi < 0:
        assert val <= 0.0
    else:
        assert val == 0.0
