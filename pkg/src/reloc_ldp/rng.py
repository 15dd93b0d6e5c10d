"""Deterministic, splittable random streams.

Every stochastic routine takes a caller-owned ``numpy.random.Generator``.
Parallel work derives one independent stream per logical replica from
``(master_seed, *path)`` via ``SeedSequence`` spawn keys, so results are
a function of the seed and the replica layout only -- never of thread or
process count, scheduling, or chunk boundaries.
"""

from __future__ import annotations

import numpy as np

__all__ = ["stream"]


def stream(master_seed: int, *path: int) -> np.random.Generator:
    """Independent generator addressed by (master_seed, *path)."""
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(p) for p in path))
    return np.random.default_rng(ss)
