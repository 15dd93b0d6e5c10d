"""Simulation and numerical verification of random walks with
reinforced relocations: exact samplers for the model and its time-change
representation, exact conditional cumulant computations, and the
numerical rate-function machinery for the quenched tail behaviour."""

__version__ = "0.1.0"

from .genealogy import (
    AncestryVector,
    RunSequence,
    ancestry_bernoulli,
    ancestry_chain,
    build_runs,
    exact_ancestry_law,
    product_ancestry_law,
    total_variation,
)
from .kernel import KernelFamily, MemoryKernel, Regime
from .markov import MarkovFamily, MarkovModel, TimeMode
from .ratefn import BracketPolicy, LegendreResult, RateFunction, legendre_transform
from .rng import stream
from .runlength import RunLengthDist, RunLengthFamily
from .sim import (
    RelocationTrace,
    TimeChangeSample,
    memory_log_mgf,
    memory_log_mgf_ladder,
    offset_mgf,
    residual_time,
    sample_clock,
    sample_clock_batch,
    sample_offsets,
    simulate_direct,
    simulate_timechange,
    timechange_batch,
)

__all__ = [
    "__version__",
    "AncestryVector",
    "BracketPolicy",
    "KernelFamily",
    "LegendreResult",
    "MarkovFamily",
    "MarkovModel",
    "MemoryKernel",
    "RateFunction",
    "Regime",
    "RelocationTrace",
    "RunLengthDist",
    "RunLengthFamily",
    "RunSequence",
    "TimeChangeSample",
    "TimeMode",
    "ancestry_bernoulli",
    "ancestry_chain",
    "build_runs",
    "exact_ancestry_law",
    "legendre_transform",
    "memory_log_mgf",
    "memory_log_mgf_ladder",
    "offset_mgf",
    "product_ancestry_law",
    "residual_time",
    "sample_clock",
    "sample_clock_batch",
    "sample_offsets",
    "simulate_direct",
    "simulate_timechange",
    "stream",
    "timechange_batch",
    "total_variation",
]
