"""Run-length distributions and the limiting clock cumulant function.

Admissible families all have an everywhere-finite moment generating
function (bounded support, or survival exp(-(x/scale)**kappa) with
kappa > 1) and no atom at zero.  Geometric and exponential run lengths
are deliberately not representable here: their MGF blows up at finite
argument, which breaks every limit statement this package verifies.

The central scalar quantity is::

    scgf(xi) = E[exp(xi*L) - 1 - xi*L] / (xi * E[L]),   scgf(0) = 0,

the limiting scaled cumulant generating function of the memory clock of
the relocation process.  It is computed in closed form for the bounded
families and by adaptive quadrature for the stretched-exponential tail.
"""

from __future__ import annotations

import enum
import functools
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import DomainError, NumericError

__all__ = ["RunLengthFamily", "RunLengthDist"]


class RunLengthFamily(enum.Enum):
    DETERMINISTIC = "deterministic"
    UNIFORM = "uniform"
    STRETCHED_EXP_TAIL = "stretched_exp_tail"


def _expm1m(z):
    """exp(z) - 1 - z, elementwise, accurate near z == 0."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 1e-5
    zs = np.where(small, z, 0.0)
    series = zs * zs / 2.0 * (1.0 + zs / 3.0 + zs * zs / 12.0)
    with np.errstate(over="ignore"):
        direct = np.expm1(np.where(small, 0.0, z)) - np.where(small, 0.0, z)
    return np.where(small, series, direct)


@dataclass(frozen=True)
class RunLengthDist:
    """Immutable spec of one run-length distribution."""

    family: RunLengthFamily
    c: float = 0.0
    a: float = 0.0
    b: float = 0.0
    kappa: float = 0.0
    scale: float = 0.0

    def __post_init__(self):
        f = self.family
        if f is RunLengthFamily.DETERMINISTIC:
            if not (self.c > 0):
                raise DomainError("deterministic run length requires c > 0 (no atom at 0)")
        elif f is RunLengthFamily.UNIFORM:
            if not (0 <= self.a < self.b):
                raise DomainError("uniform run length requires 0 <= a < b")
        elif f is RunLengthFamily.STRETCHED_EXP_TAIL:
            if not (self.kappa > 1):
                raise DomainError(
                    "stretched-exponential tail requires kappa > 1: at kappa <= 1 "
                    "the moment generating function is no longer finite everywhere"
                )
            if not (self.scale > 0):
                raise DomainError("stretched-exponential tail requires scale > 0")
        else:
            raise DomainError(f"unknown run-length family {f!r}")

    @classmethod
    def deterministic(cls, c: float) -> "RunLengthDist":
        return cls(RunLengthFamily.DETERMINISTIC, c=float(c))

    @classmethod
    def uniform(cls, a: float, b: float) -> "RunLengthDist":
        return cls(RunLengthFamily.UNIFORM, a=float(a), b=float(b))

    @classmethod
    def stretched_exp_tail(cls, kappa: float, scale: float) -> "RunLengthDist":
        return cls(RunLengthFamily.STRETCHED_EXP_TAIL, kappa=float(kappa), scale=float(scale))

    @classmethod
    def from_name(cls, name: str, **params) -> "RunLengthDist":
        """Factory used by config parsing; rejects non-admissible names."""
        if name in ("geometric", "exponential"):
            raise DomainError(
                f"A2: {name} run-lengths are excluded (the moment generating "
                "function must be finite for every argument; these tails are "
                "too heavy)"
            )
        try:
            family = RunLengthFamily(name)
        except ValueError:
            raise DomainError(f"unknown run-length family {name!r}") from None
        return cls(family, **params)

    # -- moments ----------------------------------------------------------

    def moment(self, k: int) -> float:
        """E[L**k] in closed form."""
        f = self.family
        if f is RunLengthFamily.DETERMINISTIC:
            return self.c**k
        if f is RunLengthFamily.UNIFORM:
            a, b = self.a, self.b
            return (b ** (k + 1) - a ** (k + 1)) / ((k + 1) * (b - a))
        return self.scale**k * special.gamma(1.0 + k / self.kappa)

    @property
    def mean(self) -> float:
        return self.moment(1)

    def expect(self, fn) -> float:
        """E[fn(L)] by closed form or adaptive quadrature."""
        f = self.family
        if f is RunLengthFamily.DETERMINISTIC:
            return float(fn(self.c))
        if f is RunLengthFamily.UNIFORM:
            val, _ = integrate.quad(fn, self.a, self.b, epsabs=0.0, epsrel=1e-11, limit=200)
            return val / (self.b - self.a)
        kappa, scale = self.kappa, self.scale
        val, _ = integrate.quad(
            lambda y: fn(scale * y ** (1.0 / kappa)) * math.exp(-y),
            0.0, np.inf, epsabs=1e-14, epsrel=1e-11, limit=400,
        )
        return val

    @property
    def support_max(self) -> float:
        """Upper end of the support (inf for unbounded tails)."""
        f = self.family
        if f is RunLengthFamily.DETERMINISTIC:
            return self.c
        if f is RunLengthFamily.UNIFORM:
            return self.b
        return math.inf

    @property
    def integer_valued(self) -> bool:
        """True iff every draw is a (positive) integer."""
        return (
            self.family is RunLengthFamily.DETERMINISTIC
            and float(self.c).is_integer()
        )

    # -- sampling ----------------------------------------------------------

    def sample(self, rng: np.random.Generator, size=None):
        """Draw from the distribution; strictly positive by construction."""
        f = self.family
        if f is RunLengthFamily.DETERMINISTIC:
            return self.c if size is None else np.full(size, self.c)
        if f is RunLengthFamily.UNIFORM:
            u = rng.random(size)
            # 1 - u lies in (0, 1], so draws stay strictly above a (even a == 0)
            return self.a + (self.b - self.a) * (1.0 - u)
        e = rng.standard_exponential(size)
        while np.any(e <= 0.0):
            e = np.where(e <= 0.0, rng.standard_exponential(size), e)
        return self.scale * e ** (1.0 / self.kappa)

    # -- limiting clock cumulant -------------------------------------------

    def scgf(self, xi: float) -> float:
        """E[exp(xi*L) - 1 - xi*L] / (xi*E[L]); 0 at xi == 0 by continuity.

        Nonnegative for xi >= 0 (and nonpositive for xi <= 0): the
        numerator is always nonnegative while the denominator carries the
        sign of xi.  The composed rate machinery only ever evaluates it at
        nonnegative arguments.
        """
        xi = float(xi)
        m1 = self.mean
        if abs(xi) * max(1.0, m1) < 1e-6:
            # Taylor expansion of the centred numerator; avoids the 0/0 limit
            return (
                self.moment(2) / 2.0
                + xi * self.moment(3) / 6.0
                + xi * xi * self.moment(4) / 24.0
            ) * xi / m1
        return self._centered_mean(xi) / (xi * m1)

    def _centered_mean(self, xi: float) -> float:
        """E[exp(xi*L) - 1 - xi*L]."""
        f = self.family
        if f is not RunLengthFamily.STRETCHED_EXP_TAIL and xi * self.support_max > 700.0:
            raise NumericError(
                f"exp(xi*L) overflows double precision at xi={xi:g} for this support"
            )
        if f is RunLengthFamily.DETERMINISTIC:
            return float(_expm1m(xi * self.c))
        if f is RunLengthFamily.UNIFORM:
            a, b = self.a, self.b
            exp_part = (math.expm1(xi * b) - math.expm1(xi * a)) / xi
            return (exp_part - (b - a) - xi * (b * b - a * a) / 2.0) / (b - a)
        return _stretched_centered_mean(self.kappa, self.scale, xi)


def _expm1m_over_z2(z: float) -> float:
    """(exp(z) - 1 - z) / z**2, accurate through z == 0 (-> 1/2)."""
    if abs(z) < 1e-5:
        return 0.5 + z / 6.0 + z * z / 24.0
    return (math.expm1(z) - z) / (z * z)


@functools.lru_cache(maxsize=4096)
def _stretched_centered_mean(kappa: float, scale: float, xi: float) -> float:
    """E[exp(xi*L) - 1 - xi*L] for survival exp(-(x/scale)**kappa).

    Substituting y = (x/scale)**kappa turns the law into Exp(1), so the
    target is  integral of (exp(xi*scale*y**(1/kappa)) - 1 - ...) * exp(-y).
    The xi**2 factor is pulled out analytically, keeping the integrand O(1)
    as xi -> 0 so the adaptive rule can certify relative accuracy.  The
    integrand peak (xi > 0) sits at y* = (xi*scale/kappa)**(kappa/(kappa-1));
    the integral is split there so the adaptive rule cannot miss it.  The
    entire MGF (kappa > 1) makes the tail decay super-exponentially, so the
    infinite upper limit is safe.
    """

    def integrand(y):
        x = scale * y ** (1.0 / kappa)
        z = xi * x
        if z > 690.0:
            # exp(z) alone would overflow, but exp(z - y) is the true
            # magnitude; x*x/z**2 == 1/xi**2 and the -1-z terms are
            # relatively below 1e-290 here
            expo = z - y
            return math.exp(expo) / (xi * xi) if expo > -745.0 else 0.0
        return x * x * _expm1m_over_z2(z) * math.exp(-y)

    pieces = [0.0]
    if xi > 0:
        ystar = (xi * scale / kappa) ** (kappa / (kappa - 1.0))
        if ystar > 1e-8:
            pieces.append(ystar)
    pieces.append(np.inf)
    total = 0.0
    worst = 0.0
    with warnings.catch_warnings():
        # the explicit error-estimate check below is the convergence gate
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for lo, hi in zip(pieces[:-1], pieces[1:]):
            val, err = integrate.quad(integrand, lo, hi, epsabs=0.0, epsrel=1e-11, limit=400)
            if not math.isfinite(val):
                raise NumericError(
                    f"quadrature for the clock cumulant diverged on [{lo:g},{hi}] at xi={xi:g}"
                )
            total += val
            worst = max(worst, err)
    if worst > 1e-9 * max(abs(total), 5e-324):
        raise NumericError(
            f"quadrature for the clock cumulant did not converge at xi={xi:g}: "
            f"value={total:g}, error estimate={worst:g}"
        )
    return total * xi * xi
