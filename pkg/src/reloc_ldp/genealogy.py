"""Quenched run environments and the run-ancestry structure.

A ``RunSequence`` freezes one environment: run lengths L_i, relocation
times T_i = L_1 + ... + L_i, and the kernel-induced run weights

    W_i = M(T_i) - M(T_{i-1}),        S_i = W_1 + ... + W_i = M(T_i),

all stored in log space.  The Bernoulli ratios W_i/S_i are computed as
``-expm1(log M(T_{i-1}) - log M(T_i))`` rather than ``exp(log W - log S)``:
steep kernels have ratios near 1, where the subtractive form keeps full
precision.

Ancestry of a target run n (which earlier runs its relocation chain
passes through) can be sampled two ways that are equal in law:

* ``ancestry_chain``     -- walk the parent chain literally: the parent of
  run j is run i with probability W_i / S_{j-1}.
* ``ancestry_bernoulli`` -- draw the ancestor indicators directly as
  independent Bernoulli(W_i/S_i) variables.

``exact_ancestry_law`` enumerates every parent chain of a small target
(n <= 12) and returns the exact joint law of the indicator vector; it is
the brute-force oracle against which the Bernoulli product form is
checked to ~1e-15.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, DomainError
from .kernel import MemoryKernel
from .rng import stream
from .runlength import RunLengthDist

__all__ = [
    "RunSequence",
    "AncestryVector",
    "build_runs",
    "ancestry_bernoulli",
    "ancestry_chain",
    "exact_ancestry_law",
    "product_ancestry_law",
    "total_variation",
]

_BLOCK = 1 << 16


@dataclass(frozen=True)
class RunSequence:
    """One quenched environment (immutable, shareable across threads).

    Run i (1-based, i = 1..count) has length ``lengths[i-1]`` and covers
    [times[i-1], times[i]); ``times`` carries a leading 0 and
    ``log_prefix`` a leading -inf so that T_{i-1} and log S_{i-1} are
    plain array lookups.
    """

    kernel: MemoryKernel
    lengths: np.ndarray
    times: np.ndarray        # (count+1,), times[0] == 0
    log_weights: np.ndarray  # (count,), log W_i
    log_prefix: np.ndarray   # (count+1,), log S_i with log_prefix[0] == -inf
    ratios: np.ndarray       # (count,), W_i / S_i in (0, 1], ratios[0] == 1

    @property
    def count(self) -> int:
        return len(self.lengths)

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @classmethod
    def from_lengths(cls, lengths, kernel: MemoryKernel) -> "RunSequence":
        lengths = np.asarray(lengths, dtype=float)
        if lengths.ndim != 1 or len(lengths) == 0:
            raise DomainError("need at least one run length")
        if np.any(lengths <= 0):
            raise DomainError("run lengths must be strictly positive")
        times = np.concatenate([[0.0], np.cumsum(lengths)])
        log_prefix = np.concatenate([[-np.inf], kernel.log_cumulative(times[1:])])
        ratios = -np.expm1(log_prefix[:-1] - log_prefix[1:])
        with np.errstate(divide="ignore"):
            log_weights = log_prefix[1:] + np.log(ratios)
        return cls(
            kernel=kernel,
            lengths=lengths,
            times=times,
            log_weights=log_weights,
            log_prefix=log_prefix,
            ratios=ratios,
        )


def build_runs(
    dist: RunLengthDist,
    kernel: MemoryKernel,
    *,
    horizon: float | None = None,
    count: int | None = None,
    seed: int = 0,
) -> RunSequence:
    """Draw a quenched environment; deterministic function of ``seed``.

    With ``horizon`` the sequence extends until T_n > horizon (so any
    query time t <= horizon lies strictly inside it); with ``count`` it
    has exactly that many runs.
    """
    if (horizon is None) == (count is None):
        raise DomainError("specify exactly one of horizon= or count=")
    rng = stream(seed, 0)
    if count is not None:
        if count < 1:
            raise DomainError("count must be >= 1")
        lengths = np.asarray(dist.sample(rng, int(count)), dtype=float)
        return RunSequence.from_lengths(lengths, kernel)
    if horizon <= 0:
        raise DomainError("horizon must be positive")
    blocks = []
    total = 0.0
    while total <= horizon:
        block = np.asarray(dist.sample(rng, _BLOCK), dtype=float)
        blocks.append(block)
        total += float(block.sum())
    lengths = np.concatenate(blocks)
    cut = int(np.searchsorted(np.cumsum(lengths), horizon, side="right")) + 1
    return RunSequence.from_lengths(lengths[:cut], kernel)


@dataclass(frozen=True)
class AncestryVector:
    """Ancestor indicators of one target run.

    ``bits[i-1]`` tells whether run i (1 <= i < target) is an ancestor;
    ``chain`` lists the ancestor indices in decreasing order and
    ``depth`` is its length.  Run 1 is an ancestor of every target >= 2.
    """

    target: int
    bits: np.ndarray
    chain: np.ndarray = field(init=False)

    def __post_init__(self):
        chain = np.flatnonzero(self.bits)[::-1] + 1
        object.__setattr__(self, "chain", chain)

    @property
    def depth(self) -> int:
        return len(self.chain)


def _check_target(runs: RunSequence, target: int) -> None:
    if not 2 <= target <= runs.count:
        raise DomainError(f"target must lie in [2, {runs.count}], got {target}")


def ancestry_bernoulli(runs: RunSequence, target: int, rng: np.random.Generator) -> AncestryVector:
    """Ancestor indicators as independent Bernoulli(W_i/S_i) draws."""
    _check_target(runs, target)
    bits = rng.random(target - 1) < runs.ratios[: target - 1]
    return AncestryVector(target=target, bits=bits)


def ancestry_chain(runs: RunSequence, target: int, rng: np.random.Generator) -> AncestryVector:
    """Ancestor indicators by walking the parent chain literally."""
    _check_target(runs, target)
    lp = runs.log_prefix
    bits = np.zeros(target - 1, dtype=bool)
    j = target
    while j > 1:
        u = rng.random()
        level = math.log(u) + lp[j - 1] if u > 0.0 else -np.inf
        parent = int(np.searchsorted(lp[1:j], level, side="left")) + 1
        parent = min(parent, j - 1)
        bits[parent - 1] = True
        j = parent
    return AncestryVector(target=target, bits=bits)


_EXACT_CAP = 12


def exact_ancestry_law(runs: RunSequence, target: int) -> dict:
    """Exact joint law of the ancestor indicators of a small target.

    Sums over every decreasing parent chain target -> ... -> 1 (there are
    2**(target-2) of them), weighting each transition j -> i by
    W_i / S_{j-1}.  Returns {bit tuple: probability}.
    """
    _check_target(runs, target)
    if target > _EXACT_CAP:
        raise CapacityError(
            f"exact ancestry law enumerates 2**(n-2) chains; capped at n = {_EXACT_CAP}"
        )
    lw, lp = runs.log_weights, runs.log_prefix
    law: dict = {}
    bits = np.zeros(target - 1, dtype=bool)

    def descend(j: int, prob: float) -> None:
        if j == 1:
            key = tuple(int(b) for b in bits)
            law[key] = law.get(key, 0.0) + prob
            return
        for i in range(1, j):
            bits[i - 1] = True
            descend(i, prob * math.exp(lw[i - 1] - lp[j - 1]))
            bits[i - 1] = False

    descend(target, 1.0)
    total = sum(law.values())
    if abs(total - 1.0) > 1e-12:
        raise AssertionError(f"chain probabilities sum to {total}, not 1")
    return law


def product_ancestry_law(runs: RunSequence, target: int) -> dict:
    """Joint law under independent Bernoulli(W_i/S_i) indicators."""
    _check_target(runs, target)
    if target > _EXACT_CAP:
        raise CapacityError(f"product law enumeration capped at n = {_EXACT_CAP}")
    p = runs.ratios[: target - 1]
    law: dict = {}
    m = target - 1
    for mask in range(1 << m):
        bits = tuple((mask >> k) & 1 for k in range(m))
        prob = 1.0
        for k, b in enumerate(bits):
            prob *= p[k] if b else (1.0 - p[k])
            if prob == 0.0:
                break
        if prob > 0.0:
            law[bits] = prob
    return law


def total_variation(law_a: dict, law_b: dict) -> float:
    keys = set(law_a) | set(law_b)
    return 0.5 * sum(abs(law_a.get(k, 0.0) - law_b.get(k, 0.0)) for k in keys)
