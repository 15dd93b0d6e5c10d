"""Kernel family: pointwise values, log-space cumulative, inversion, scale."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from reloc_ldp import MemoryKernel, Regime
from reloc_ldp.errors import DomainError

UNIFORM = MemoryKernel.log_power(1, 1)
STEEP = MemoryKernel.stretched_exp(1, 0.5)


def kernels():
    return [
        UNIFORM,
        STEEP,
        MemoryKernel.log_power(2, 1),
        MemoryKernel.log_power(0.5, 0),
        MemoryKernel.log_power(1.5, 0.25),
        MemoryKernel.stretched_exp(2, 0.3),
    ]


# -- construction ------------------------------------------------------------


@pytest.mark.parametrize(
    "factory",
    [
        lambda: MemoryKernel.log_power(0, 1),
        lambda: MemoryKernel.log_power(-1, 1),
        lambda: MemoryKernel.log_power(1, -0.5),
        lambda: MemoryKernel.stretched_exp(0, 0.5),
        lambda: MemoryKernel.stretched_exp(1, 0.6),
        lambda: MemoryKernel.stretched_exp(1, 0),
    ],
)
def test_invalid_parameters_rejected(factory):
    with pytest.raises(DomainError):
        factory()


def test_regime_classification():
    assert MemoryKernel.log_power(1, 1).regime is Regime.STEEP
    assert MemoryKernel.log_power(2, 0.5).regime is Regime.STEEP
    assert MemoryKernel.stretched_exp(1, 0.5).regime is Regime.STEEP
    assert MemoryKernel.log_power(1, 0).regime is Regime.FLAT
    assert MemoryKernel.log_power(0.5, 1).regime is Regime.FLAT
    assert MemoryKernel.log_power(0.5, 0).regime is Regime.FLAT


# -- density -------------------------------------------------------------------


def test_uniform_kernel_density_is_one():
    for x in [0.0, 0.3, 1.0, 7.5, 1e6]:
        assert UNIFORM.density(x) == pytest.approx(1.0, abs=1e-15)


def test_density_values():
    # 0.5 * 4**(-1/2) * e**2
    assert STEEP.density(4.0) == pytest.approx(0.25 * math.e**2, rel=1e-14)
    # (2/e) * 1 * e at x = e-1 for the shifted log-power form
    assert MemoryKernel.log_power(2, 1).density(math.e - 1.0) == pytest.approx(2.0, rel=1e-13)


def test_density_domain_errors():
    with pytest.raises(DomainError):
        STEEP.density(0.0)
    with pytest.raises(DomainError):
        STEEP.density(-1.0)
    with pytest.raises(DomainError):
        MemoryKernel.log_power(0.5, 0).density(0.0)
    # shifted form is finite at 0 for alpha >= 1
    assert MemoryKernel.log_power(2, 1).density(0.0) == 0.0


# -- cumulative ---------------------------------------------------------------


def test_log_cumulative_values():
    assert UNIFORM.log_cumulative(0.0) == -np.inf
    assert UNIFORM.log_cumulative(10.0) == pytest.approx(math.log(10.0), rel=1e-14)
    assert STEEP.log_cumulative(4.0) == pytest.approx(math.log(math.e**2 - 1.0), rel=1e-14)


def test_log_cumulative_matches_quadrature():
    # independent oracle: adaptive quadrature of the density
    for kern in kernels():
        for x in [0.5, 2.0, 10.0]:
            val, _ = integrate.quad(kern.density, 1e-300, x, limit=400)
            assert kern.log_cumulative(x) == pytest.approx(math.log(val), rel=1e-10)


def test_log_cumulative_never_overflows():
    out = STEEP.log_cumulative(1e12)
    assert math.isfinite(out)
    assert out == pytest.approx(1e6, rel=1e-12)


def test_uniform_kernel_cumulative_is_identity():
    xs = np.logspace(-6, 6, 25)
    np.testing.assert_allclose(np.exp(UNIFORM.log_cumulative(xs)), xs, rtol=1e-12)


# -- inversion ---------------------------------------------------------------


def test_inverse_cumulative_values():
    assert UNIFORM.inverse_cumulative(math.log(7.0)) == pytest.approx(7.0, rel=1e-12)
    assert STEEP.inverse_cumulative(math.log(math.e**2 - 1.0)) == pytest.approx(4.0, rel=1e-12)
    for kern in kernels():
        assert kern.inverse_cumulative(-np.inf) == 0.0


def test_inverse_cumulative_domain_errors():
    with pytest.raises(DomainError):
        UNIFORM.inverse_cumulative(np.inf)
    with pytest.raises(DomainError):
        UNIFORM.inverse_cumulative(np.nan)


@pytest.mark.parametrize("kern", kernels())
def test_round_trip_on_log_grid(kern):
    xs = np.logspace(-6, 12, 40)
    back = kern.inverse_cumulative(kern.log_cumulative(xs))
    np.testing.assert_allclose(back, xs, rtol=1e-9)


@pytest.mark.parametrize("kern", kernels())
def test_cumulative_strictly_increasing(kern):
    xs = np.logspace(-6, 10, 60)
    vals = kern.log_cumulative(xs)
    assert np.all(np.diff(vals) > 0)


@pytest.mark.parametrize("kern", kernels())
def test_cumulative_derivative_matches_density(kern):
    # d/dx M = density, via central differences of log M multiplied by M
    for x in [0.5, 1.0, 3.0, 20.0, 500.0]:
        h = 1e-6 * x
        dlog = (kern.log_cumulative(x + h) - kern.log_cumulative(x - h)) / (2 * h)
        deriv = dlog * math.exp(kern.log_cumulative(x))
        assert deriv == pytest.approx(kern.density(x), rel=1e-6)


@settings(max_examples=60, deadline=None)
@given(
    alpha=st.floats(0.3, 4.0),
    beta=st.one_of(st.just(0.0), st.floats(1e-6, 3.0)),
    logx=st.floats(-6.0, 10.0),
)
def test_round_trip_log_power_property(alpha, beta, logx):
    kern = MemoryKernel.log_power(alpha, beta)
    x = 10.0**logx
    assert kern.inverse_cumulative(kern.log_cumulative(x)) == pytest.approx(x, rel=1e-9)


@settings(max_examples=60, deadline=None)
@given(
    gamma=st.floats(0.1, 5.0),
    delta=st.floats(0.05, 0.5),
    logx=st.floats(-6.0, 10.0),
)
def test_round_trip_stretched_property(gamma, delta, logx):
    kern = MemoryKernel.stretched_exp(gamma, delta)
    x = 10.0**logx
    assert kern.inverse_cumulative(kern.log_cumulative(x)) == pytest.approx(x, rel=1e-9)


# -- scale ---------------------------------------------------------------------


def test_scale_values():
    assert MemoryKernel.log_power(2, 0.5).scale(math.exp(3.0)) == pytest.approx(9.0, rel=1e-13)
    assert MemoryKernel.log_power(2, 0).scale(math.exp(math.e)) == pytest.approx(2.0, rel=1e-13)
    assert MemoryKernel.stretched_exp(2, 0.5).scale(25.0) == pytest.approx(10.0, rel=1e-13)


def test_scale_floors():
    with pytest.raises(DomainError):
        MemoryKernel.log_power(1, 1).scale(1.0)
    with pytest.raises(DomainError):
        MemoryKernel.log_power(1, 0).scale(math.e)
    with pytest.raises(DomainError):
        STEEP.scale(0.0)
    assert STEEP.scale(1e-6) > 0
