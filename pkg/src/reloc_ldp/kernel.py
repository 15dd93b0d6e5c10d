"""Memory kernels: relocation-weight densities and their cumulative integrals.

Two parametric families are supported, both defined on x >= 0:

* ``log_power`` (parameters alpha > 0, beta >= 0), in shifted form::

      mu(x) = alpha/(x+1) * log(1+x)**(alpha-1) * exp(beta * log(1+x)**alpha)
      M(x)  = (exp(beta * log(1+x)**alpha) - 1) / beta        (beta != 0)
      M(x)  = log(1+x)**alpha                                 (beta == 0)

  The shift x -> x+1 inside the logarithms is applied for every (alpha,
  beta): it keeps the density integrable at 0 and well defined on (0, 1)
  for non-integer alpha, and changes nothing asymptotically.

* ``stretched_exp`` (parameters gamma > 0, 0 < delta <= 1/2)::

      mu(x) = gamma*delta * x**(delta-1) * exp(gamma * x**delta)
      M(x)  = exp(gamma * x**delta) - 1

All cumulative arithmetic is carried out in log space: M(x) overflows the
double range at modest x for the stretched-exponential family, while
log M(x) stays small.  ``log_cumulative`` returns -inf at x == 0 (empty
integral) and ``inverse_cumulative`` inverts it in closed form.

The scale function ``scale(t)`` is the natural speed at which the
relocation count of the process grows: ``log(t)**alpha`` (steep
log-power), ``alpha*log(log(t))`` (flat log-power, beta == 0) or
``gamma*t**delta``.  Its small-t domain floors (t > 1, t > e, t > 0
respectively) are artifact choices: the asymptotic theory does not
prescribe behaviour at small t.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = ["KernelFamily", "Regime", "MemoryKernel"]

_E = math.e


class KernelFamily(enum.Enum):
    LOG_POWER = "log_power"
    STRETCHED_EXP = "stretched_exp"


class Regime(enum.Enum):
    """Steep kernels give almost-sure limit statements, flat ones only
    in-probability statements (scale grows at least/slower than log t)."""

    STEEP = "steep"
    FLAT = "flat"


def _log_expm1(y):
    """log(exp(y) - 1), elementwise, without overflow; -inf at y == 0."""
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    big = y > 30.0
    with np.errstate(divide="ignore"):
        out[big] = y[big] + np.log1p(-np.exp(-y[big]))
        out[~big] = np.log(np.expm1(y[~big]))
    return out


def _softplus(u):
    """log(1 + exp(u)), elementwise; equals 0 at u == -inf."""
    return np.logaddexp(0.0, u)


def _as_input(x, template):
    return float(x) if np.isscalar(template) else x


@dataclass(frozen=True)
class MemoryKernel:
    """Immutable spec of one memory kernel; all methods are pure."""

    family: KernelFamily
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        if self.family is KernelFamily.LOG_POWER:
            if not (self.alpha > 0):
                raise DomainError("log_power kernel requires alpha > 0")
            if not (self.beta >= 0):
                raise DomainError("log_power kernel requires beta >= 0")
            if 0.0 < self.beta < 1e-12:
                raise DomainError(
                    "log_power beta below 1e-12 is numerically indistinguishable "
                    "from beta = 0; use beta = 0 (flat family) instead"
                )
        elif self.family is KernelFamily.STRETCHED_EXP:
            if not (self.gamma > 0):
                raise DomainError("stretched_exp kernel requires gamma > 0")
            if not (0 < self.delta <= 0.5):
                raise DomainError(
                    "stretched_exp kernel requires delta in (0, 1/2]; steeper "
                    "kernels fall outside the regime this package verifies"
                )
        else:
            raise DomainError(f"unknown kernel family {self.family!r}")

    @classmethod
    def log_power(cls, alpha: float, beta: float) -> "MemoryKernel":
        return cls(KernelFamily.LOG_POWER, alpha=float(alpha), beta=float(beta))

    @classmethod
    def stretched_exp(cls, gamma: float, delta: float) -> "MemoryKernel":
        return cls(KernelFamily.STRETCHED_EXP, gamma=float(gamma), delta=float(delta))

    # -- classification -------------------------------------------------

    @property
    def regime(self) -> Regime:
        """Exactly one regime per kernel: steep iff scale(t) >= log t."""
        if self.family is KernelFamily.STRETCHED_EXP:
            return Regime.STEEP
        if self.beta != 0.0 and self.alpha >= 1.0:
            return Regime.STEEP
        return Regime.FLAT

    @property
    def is_uniform(self) -> bool:
        """True iff the density is identically 1 (alpha == beta == 1)."""
        return (
            self.family is KernelFamily.LOG_POWER
            and self.alpha == 1.0
            and self.beta == 1.0
        )

    # -- pointwise density ----------------------------------------------

    def density(self, x):
        """Relocation-weight density mu(x); scalar or elementwise.

        x == 0 is accepted only where the shifted form is finite
        (log_power with alpha >= 1).
        """
        xa = np.asarray(x, dtype=float)
        if np.any(xa < 0):
            raise DomainError("kernel density needs x >= 0")
        if self.family is KernelFamily.STRETCHED_EXP:
            if np.any(xa == 0.0) and self.delta < 1.0:
                raise DomainError("stretched_exp density is singular at x = 0")
            g, d = self.gamma, self.delta
            out = g * d * xa ** (d - 1.0) * np.exp(g * xa**d)
            return _as_input(out, x)
        a, b = self.alpha, self.beta
        if np.any(xa == 0.0) and a < 1.0:
            raise DomainError("log_power density is singular at x = 0 for alpha < 1")
        z = np.log1p(xa)
        with np.errstate(divide="ignore", invalid="ignore"):
            zpow = np.where(z > 0, z ** (a - 1.0), 1.0 if a == 1.0 else 0.0)
        out = a / (xa + 1.0) * zpow * np.exp(b * z**a)
        return _as_input(out, x)

    # -- cumulative integral in log space --------------------------------

    def log_cumulative(self, x):
        """log M(x) with M(x) = integral of the density over [0, x].

        Returns -inf at x == 0.  Never overflows: computed from the
        closed forms via expm1/log1p identities.
        """
        xa = np.asarray(x, dtype=float)
        if np.any(xa < 0):
            raise DomainError("log_cumulative needs x >= 0")
        if self.family is KernelFamily.STRETCHED_EXP:
            out = _log_expm1(self.gamma * xa**self.delta)
            return _as_input(out, x)
        a, b = self.alpha, self.beta
        z = np.log1p(xa) ** a
        if b == 0.0:
            with np.errstate(divide="ignore"):
                out = np.log(z)
        else:
            out = _log_expm1(b * z) - math.log(b)
        return _as_input(out, x)

    def inverse_cumulative(self, log_v):
        """Closed-form inverse of ``log_cumulative``; accepts -inf (-> 0)."""
        va = np.asarray(log_v, dtype=float)
        if np.any(np.isnan(va)) or np.any(va == np.inf):
            raise DomainError("inverse_cumulative needs log_v in [-inf, inf)")
        if self.family is KernelFamily.STRETCHED_EXP:
            out = (_softplus(va) / self.gamma) ** (1.0 / self.delta)
            return _as_input(out, log_v)
        a, b = self.alpha, self.beta
        if b == 0.0:
            out = np.expm1(np.exp(va / a))
        else:
            z = _softplus(va + math.log(b)) / b
            out = np.expm1(z ** (1.0 / a))
        return _as_input(out, log_v)

    # -- large-deviation scale -------------------------------------------

    def scale_floor(self) -> float:
        """Smallest t (exclusive) at which scale(t) is positive."""
        if self.family is KernelFamily.STRETCHED_EXP:
            return 0.0
        return 1.0 if self.beta != 0.0 else _E

    def scale(self, t):
        """Speed s(t) of the large-deviation statements at horizon t."""
        ta = np.asarray(t, dtype=float)
        if np.any(ta <= self.scale_floor()):
            raise DomainError(
                f"scale(t) needs t > {self.scale_floor():g} for this kernel"
            )
        if self.family is KernelFamily.STRETCHED_EXP:
            out = self.gamma * ta**self.delta
        elif self.beta != 0.0:
            out = np.log(ta) ** self.alpha
        else:
            out = self.alpha * np.log(np.log(ta))
        return _as_input(out, t)

    def describe(self) -> str:
        if self.family is KernelFamily.LOG_POWER:
            return f"log_power(alpha={self.alpha:g}, beta={self.beta:g})"
        return f"stretched_exp(gamma={self.gamma:g}, delta={self.delta:g})"
