"""Underlying Markov motions between relocations.

Only run *endpoints* are ever sampled here: ``evolve`` draws the value of
the motion after a given duration, exactly, with no interior path.  That
is all the limit theorems need, and it is exact for both families:

* ``brownian(d)``    -- standard d-dimensional Brownian motion
                        (continuous time), long-run cumulant |zeta|^2/2.
* ``lattice_walk(d)``-- the nearest-neighbour walk on Z^d that moves one
                        unit along a uniformly chosen axis each step
                        (discrete time); long-run cumulant
                        log(mean_j cosh zeta_j), i.e. log cosh zeta in 1-d.
                        In one dimension an arbitrary bounded integer step
                        law may be supplied instead.

Bounded steps keep exp-moments finite at every argument, which the tail
machinery requires.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnsupportedConfigError

__all__ = ["TimeMode", "MarkovFamily", "MarkovModel"]


class TimeMode(enum.Enum):
    CONTINUOUS = "continuous"
    DISCRETE = "discrete"


class MarkovFamily(enum.Enum):
    BROWNIAN = "brownian"
    LATTICE_WALK = "lattice"


@dataclass(frozen=True)
class MarkovModel:
    family: MarkovFamily
    dimension: int = 1
    step_values: tuple = ()
    step_probs: tuple = ()

    def __post_init__(self):
        if self.dimension < 1 or int(self.dimension) != self.dimension:
            raise DomainError("dimension must be a positive integer")
        if self.step_values:
            if self.family is not MarkovFamily.LATTICE_WALK or self.dimension != 1:
                raise UnsupportedConfigError(
                    "custom step laws are supported for the 1-d lattice walk only"
                )
            vals, probs = self.step_values, self.step_probs
            if len(vals) != len(probs) or not vals:
                raise DomainError("step_values and step_probs must be equal-length, nonempty")
            if any(float(v) != int(v) for v in vals):
                raise DomainError("lattice step values must be integers")
            if any(p <= 0 for p in probs) or abs(sum(probs) - 1.0) > 1e-12:
                raise DomainError("step probabilities must be positive and sum to 1")

    @classmethod
    def brownian(cls, dimension: int = 1) -> "MarkovModel":
        return cls(MarkovFamily.BROWNIAN, dimension=int(dimension))

    @classmethod
    def lattice_walk(cls, dimension: int = 1, steps=None, probs=None) -> "MarkovModel":
        if steps is None:
            return cls(MarkovFamily.LATTICE_WALK, dimension=int(dimension))
        return cls(
            MarkovFamily.LATTICE_WALK,
            dimension=int(dimension),
            step_values=tuple(int(v) for v in steps),
            step_probs=tuple(float(p) for p in probs),
        )

    # -- structure ---------------------------------------------------------

    @property
    def time_mode(self) -> TimeMode:
        if self.family is MarkovFamily.BROWNIAN:
            return TimeMode.CONTINUOUS
        return TimeMode.DISCRETE

    @property
    def is_isotropic(self) -> bool:
        """Rotation-invariant in law (Brownian motion only)."""
        return self.family is MarkovFamily.BROWNIAN

    @property
    def is_symmetric_1d(self) -> bool:
        """1-d with an even step law, so exp-moments are even in zeta."""
        if self.dimension != 1:
            return False
        if self.family is MarkovFamily.BROWNIAN or not self.step_values:
            return True
        law = dict(zip(self.step_values, self.step_probs))
        return all(abs(law.get(-v, 0.0) - p) < 1e-12 for v, p in law.items())

    # -- endpoint sampling ---------------------------------------------------

    def _check_duration(self, duration: float) -> float:
        if duration < 0:
            raise DomainError("duration must be nonnegative")
        if self.time_mode is TimeMode.DISCRETE and float(duration) != int(duration):
            raise DomainError("discrete-time models need integer durations")
        return float(duration)

    def evolve(self, start, duration, rng: np.random.Generator):
        """Sample the motion started at ``start`` after ``duration``.

        Duration 0 returns ``start`` unchanged (exactly).
        """
        duration = self._check_duration(duration)
        d = self.dimension
        if self.family is MarkovFamily.BROWNIAN:
            noise = rng.standard_normal(d if d > 1 else None)
            out = np.asarray(start, dtype=float) + math.sqrt(duration) * noise
            return out if d > 1 else float(out)
        n = int(duration)
        if d == 1:
            if not self.step_values:
                return int(start) + int(2 * rng.binomial(n, 0.5) - n)
            counts = rng.multinomial(n, self.step_probs)
            return int(start) + int(np.dot(counts, self.step_values))
        counts = rng.multinomial(n, [1.0 / (2 * d)] * (2 * d))
        disp = counts[0::2] - counts[1::2]
        return np.asarray(start, dtype=int) + disp

    def evolve_batch(self, start, durations, rng: np.random.Generator):
        """Vectorised ``evolve`` for many independent durations.

        Supports Brownian motion in any dimension and the 1-d lattice
        walk; used by the Monte Carlo harnesses.
        """
        durations = np.asarray(durations, dtype=float)
        if np.any(durations < 0):
            raise DomainError("durations must be nonnegative")
        m = durations.shape[0]
        if self.family is MarkovFamily.BROWNIAN:
            d = self.dimension
            if d == 1:
                return start + np.sqrt(durations) * rng.standard_normal(m)
            return np.asarray(start, dtype=float) + np.sqrt(durations)[:, None] * rng.standard_normal((m, d))
        if self.dimension != 1:
            raise UnsupportedConfigError("batch endpoints: lattice walk is 1-d only")
        steps = durations.astype(np.int64)
        if np.any(steps != durations):
            raise DomainError("discrete-time models need integer durations")
        if not self.step_values:
            return int(start) + 2 * rng.binomial(steps, 0.5) - steps
        out = np.full(m, int(start), dtype=np.int64)
        vals = np.asarray(self.step_values, dtype=np.int64)
        for n in np.unique(steps):
            sel = np.flatnonzero(steps == n)
            counts = rng.multinomial(int(n), self.step_probs, size=sel.size)
            out[sel] += counts @ vals
        return out

    # -- long-run cumulant ----------------------------------------------------

    def scgf(self, zeta):
        """Long-run scaled cumulant generating function of the motion.

        Independent of the start point; equals |zeta|^2/2 for Brownian
        motion and the per-step log-MGF for lattice walks.
        """
        if self.family is MarkovFamily.BROWNIAN:
            z = np.asarray(zeta, dtype=float)
            return float(np.dot(z.ravel(), z.ravel())) / 2.0
        if self.dimension == 1:
            z = float(np.asarray(zeta, dtype=float).ravel()[0])
            if not self.step_values:
                # log cosh without overflow at large |z|
                az = abs(z)
                return az + math.log1p(math.exp(-2.0 * az)) - math.log(2.0)
            vals = np.asarray(self.step_values, dtype=float)
            probs = np.asarray(self.step_probs, dtype=float)
            mx = np.max(z * vals)
            return mx + math.log(float(np.dot(probs, np.exp(z * vals - mx))))
        z = np.asarray(zeta, dtype=float)
        if z.shape != (self.dimension,):
            raise DomainError(f"zeta must have shape ({self.dimension},)")
        # log(mean_j cosh z_j) as a logsumexp over the 2d signed exponents
        from scipy.special import logsumexp

        return float(logsumexp(np.concatenate([z, -z])) - math.log(2 * self.dimension))

    def describe(self) -> str:
        if self.family is MarkovFamily.BROWNIAN:
            return f"brownian(d={self.dimension})"
        if self.step_values:
            return f"lattice(d=1, steps={self.step_values}, probs={self.step_probs})"
        return f"lattice(d={self.dimension})"
