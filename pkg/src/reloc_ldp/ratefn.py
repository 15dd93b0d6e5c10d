"""Composed rate machinery: clock cumulant composed with the motion
cumulant, its numerical convex conjugate, and tail exponents.

The scaled cumulant generating function of the process position is the
composition  lambda_X(zeta) = clock_scgf(motion_scgf(zeta)); its convex
conjugate

    conj(x) = sup_t { x*t - F(t) }

is computed by geometric bracket expansion followed by golden-section
search on the concave objective.  Convexity of the composition is *not*
assumed: the search empirically monitors concavity of the objective and
flags violations on the result instead of silently returning garbage.

The tail exponent at radius x is  inf over |y| >= x of conj(|y|).  For a
symmetric (even) composition the conjugate is convex and even, hence
nondecreasing on [0, inf), so the infimum is attained at radius x and the
radial reduction is rigorous.  Anisotropic models in dimension > 1 are
rejected rather than silently mishandled.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericError, UnsupportedConfigError
from .markov import MarkovModel
from .runlength import RunLengthDist

__all__ = ["BracketPolicy", "LegendreResult", "legendre_transform", "RateFunction"]


@dataclass(frozen=True)
class BracketPolicy:
    """How far the conjugate search may expand before declaring divergence."""

    initial_half_width: float = 1.0
    growth: float = 2.0
    max_half_width: float = 1e12
    argmax_tol: float = 1e-10


@dataclass(frozen=True)
class LegendreResult:
    value: float
    argmax: float
    concave_ok: bool


def _golden(objective, lo: float, hi: float, tol: float) -> float:
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = objective(c), objective(d)
    while (b - a) > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = objective(d)
    return (a + b) / 2.0


def _parabolic_polish(objective, t0: float) -> float:
    """One parabolic-vertex step around t0.

    Comparison search alone cannot localise the argmax past ~sqrt(eps)
    of the value scale; fitting the vertex through three points spaced
    well above the roundoff floor recovers ~1e-9 absolute accuracy.
    """
    w = 3e-5 * max(1.0, abs(t0))
    ts = (t0 - w, t0, t0 + w)
    vs = tuple(objective(t) for t in ts)
    if not all(np.isfinite(v) for v in vs):
        return t0
    num = (w * w) * (vs[1] - vs[2]) - (w * w) * (vs[1] - vs[0])
    den = w * (vs[1] - vs[2]) + w * (vs[1] - vs[0])
    if den <= 0.0:
        return t0
    vertex = t0 - 0.5 * num / den
    # den > 0 certifies local concavity of the fit, so the vertex (clamped
    # to the probe window) is at least as good as t0 up to roundoff
    return min(max(vertex, ts[0]), ts[2])


def legendre_transform(f, x: float, policy: BracketPolicy | None = None) -> LegendreResult:
    """Convex conjugate sup_t {x*t - f(t)} of a scalar function finite on R.

    Expands a symmetric bracket geometrically until the maximiser is
    interior, then golden-sections to ``policy.argmax_tol``.  Raises
    ``NumericError`` if the objective is still climbing at the bracket
    cap (conjugate infinite or growth mismatch).
    """
    policy = policy or BracketPolicy()

    def objective(t: float) -> float:
        return x * t - f(t)

    # expand until the best sampled point is interior (works for
    # extended-value objectives that are -inf on part of the line)
    half = policy.initial_half_width
    lo, hi = -half, half
    samples = {lo: objective(lo), 0.0: objective(0.0), hi: objective(hi)}
    while True:
        t_best = max(samples, key=samples.get)
        if lo < t_best < hi:
            break
        half *= policy.growth
        if half > policy.max_half_width:
            raise NumericError(
                f"conjugate objective still increasing at |t| = {half:g}; "
                "the conjugate appears infinite at this point"
            )
        if t_best == hi:
            hi = half
            samples[hi] = objective(hi)
        else:
            lo = -half
            samples[lo] = objective(lo)
    concave_ok = _chord_concave(objective, lo, hi)
    if not concave_ok:
        warnings.warn(
            "conjugate objective is not numerically concave on the bracket; "
            "result is a local search value",
            RuntimeWarning,
            stacklevel=2,
        )
    t_star = _golden(objective, lo, hi, policy.argmax_tol)
    t_star = _parabolic_polish(objective, t_star)
    return LegendreResult(value=float(objective(t_star)), argmax=float(t_star),
                          concave_ok=concave_ok)


def _chord_concave(objective, lo: float, hi: float) -> bool:
    """Chord test on a coarse probe: every finite interior point must sit
    on or above the chord of its finite neighbours."""
    probes = np.linspace(lo, hi, 9)
    vals = np.array([objective(float(t)) for t in probes])
    finite = np.isfinite(vals)
    ts, vs = probes[finite], vals[finite]
    if len(vs) < 3:
        return True
    scale = max(1.0, float(np.max(np.abs(vs))))
    for k in range(1, len(vs) - 1):
        chord = vs[k - 1] + (vs[k + 1] - vs[k - 1]) * (ts[k] - ts[k - 1]) / (ts[k + 1] - ts[k - 1])
        if vs[k] < chord - 1e-9 * scale:
            return False
    return True


@dataclass(frozen=True)
class RateFunction:
    """Composed position cumulant and its conjugate for one model pair."""

    runlength: RunLengthDist
    model: MarkovModel
    policy: BracketPolicy = field(default_factory=BracketPolicy)

    @property
    def dimension(self) -> int:
        return self.model.dimension

    def position_scgf(self, zeta) -> float:
        """Composition clock_scgf(motion_scgf(zeta)); 0 at zeta = 0."""
        return self.runlength.scgf(self.model.scgf(zeta))

    def _radial_scgf(self, r: float) -> float:
        if self.dimension == 1:
            return self.position_scgf(r)
        unit = np.zeros(self.dimension)
        unit[0] = 1.0
        return self.position_scgf(r * unit)

    def _check_radial(self) -> None:
        if self.dimension == 1:
            if not self.model.is_symmetric_1d:
                raise UnsupportedConfigError(
                    "tail exponents need an even step law in 1-d"
                )
            return
        if not self.model.is_isotropic:
            raise UnsupportedConfigError(
                "tail exponents in dimension > 1 need an isotropic motion; "
                "got an anisotropic model"
            )

    def conjugate(self, x: float) -> LegendreResult:
        """Convex conjugate of the radial position cumulant at radius x."""
        self._check_radial()
        return legendre_transform(self._radial_scgf, float(x), self.policy)

    def tail_exponent(self, x: float) -> float:
        """inf over |y| >= x of the conjugate; the decay rate of
        P(|position| >= x * scale) on the scale axis.

        Radial reduction: the radial cumulant is even (symmetric motion),
        so its conjugate is even and convex with minimum 0 at the origin,
        hence nondecreasing in |y|; the infimum sits at radius x.
        """
        if x < 0:
            raise DomainError("x must be nonnegative")
        if x == 0.0:
            return 0.0
        return max(self.conjugate(x).value, 0.0)

    def diagnostics(self, zeta_grid) -> dict:
        """Numerical health report on a 1-d grid: finiteness everywhere,
        gradient stability under step halving, convexity of samples.
        Diagnostics, not proofs."""
        grid = np.asarray(zeta_grid, dtype=float)
        vals = np.array([self._radial_scgf(float(z)) for z in grid])
        finite = bool(np.all(np.isfinite(vals)))
        h1 = 1e-5
        g1 = np.array(
            [(self._radial_scgf(z + h1) - self._radial_scgf(z - h1)) / (2 * h1) for z in grid]
        )
        h2 = h1 / 2.0
        g2 = np.array(
            [(self._radial_scgf(z + h2) - self._radial_scgf(z - h2)) / (2 * h2) for z in grid]
        )
        grad_stable = bool(np.all(np.abs(g1 - g2) <= 1e-4 * (1.0 + np.abs(g2))))
        second = np.diff(vals, 2)
        convex_samples = bool(np.all(second >= -1e-9))
        return {
            "finite_on_grid": finite,
            "gradient_stable": grad_stable,
            "convex_on_grid": convex_samples,
            "values": vals,
        }
