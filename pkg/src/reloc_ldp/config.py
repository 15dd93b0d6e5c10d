"""Experiment configuration: flat dotted-key JSON in, validated spec out.

A config file is a single JSON object with flat, dotted-namespace keys
(``kernel.family``, ``scgf.xi_grid``, ...).  Parsing is strict: unknown
keys, missing sections, inadmissible families, or incompatible time
domains are rejected with messages naming the violated assumption, e.g.

    A2: geometric run-lengths are excluded (...)

Scientific check outcomes never appear here -- an admissible config that
produces a failing check is still a valid config.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import DomainError
from .kernel import KernelFamily, MemoryKernel
from .markov import MarkovFamily, MarkovModel, TimeMode
from .runlength import RunLengthDist

__all__ = ["ExperimentConfig", "parse_config", "load_config", "EXPERIMENT_KINDS"]

EXPERIMENT_KINDS = ("scgf", "tails", "equivalence", "ancestry", "sums", "residual")

_KERNEL_KEYS = {"kernel.family", "kernel.alpha", "kernel.beta", "kernel.gamma", "kernel.delta"}
_RUNLENGTH_KEYS = {
    "runlength.family", "runlength.c", "runlength.a", "runlength.b",
    "runlength.kappa", "runlength.scale",
}
_MARKOV_KEYS = {"markov.family", "markov.dimension", "markov.steps", "markov.probs"}
_SEED_KEYS = {"seeds.master", "seeds.env"}
_EXEC_KEYS = {"execution.workers", "execution.out"}
_KIND_KEYS = {
    "scgf": {"scgf.xi_grid", "scgf.horizon_ladder"},
    "tails": {"tails.x_grid", "tails.horizon_ladder", "tails.samples"},
    "equivalence": {"equivalence.t", "equivalence.samples_per_arm"},
    "ancestry": {"ancestry.targets", "ancestry.samples", "ancestry.run_count"},
    "sums": {"sums.variant", "sums.b", "sums.delta", "sums.g", "sums.xi", "sums.n_ladder"},
    "residual": {"residual.horizon_ladder", "residual.env_seeds"},
}


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    kernel: MemoryKernel
    runlength: RunLengthDist
    markov: MarkovModel | None
    params: dict
    master_seed: int
    env_seed: int
    workers_default: int | None = None
    out_default: str | None = None
    raw: dict = field(default_factory=dict, compare=False)


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            flat = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DomainError(f"config is not valid JSON: {exc}") from None
    if not isinstance(flat, dict):
        raise DomainError("config must be a JSON object with flat dotted keys")
    return parse_config(flat)


def _need(flat: dict, key: str):
    if key not in flat:
        raise DomainError(f"missing config key {key!r}")
    return flat[key]


def _positive_int(value, key: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value <= 0:
        raise DomainError(f"{key} must be a positive integer")
    return value


def _number_list(value, key: str) -> tuple:
    if not isinstance(value, list) or not value:
        raise DomainError(f"{key} must be a nonempty JSON array of numbers")
    out = []
    for v in value:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise DomainError(f"{key} must contain numbers only")
        out.append(float(v))
    return tuple(out)


def _parse_kernel(flat: dict) -> MemoryKernel:
    name = _need(flat, "kernel.family")
    try:
        family = KernelFamily(name)
    except ValueError:
        raise DomainError(
            f"unknown kernel family {name!r}; supported: log_power, stretched_exp"
        ) from None
    if family is KernelFamily.LOG_POWER:
        return MemoryKernel.log_power(_need(flat, "kernel.alpha"), _need(flat, "kernel.beta"))
    return MemoryKernel.stretched_exp(_need(flat, "kernel.gamma"), _need(flat, "kernel.delta"))


def _parse_runlength(flat: dict) -> RunLengthDist:
    name = _need(flat, "runlength.family")
    if name == "deterministic":
        return RunLengthDist.from_name(name, c=float(_need(flat, "runlength.c")))
    if name == "uniform":
        return RunLengthDist.from_name(
            name, a=float(_need(flat, "runlength.a")), b=float(_need(flat, "runlength.b"))
        )
    if name == "stretched_exp_tail":
        return RunLengthDist.from_name(
            name,
            kappa=float(_need(flat, "runlength.kappa")),
            scale=float(_need(flat, "runlength.scale")),
        )
    # delegates the A2 message for geometric/exponential and unknowns
    return RunLengthDist.from_name(name)


def _parse_markov(flat: dict) -> MarkovModel:
    name = _need(flat, "markov.family")
    try:
        family = MarkovFamily(name)
    except ValueError:
        raise DomainError(
            f"unknown markov family {name!r}; supported: brownian, lattice"
        ) from None
    dim = _positive_int(_need(flat, "markov.dimension"), "markov.dimension")
    if family is MarkovFamily.BROWNIAN:
        if "markov.steps" in flat or "markov.probs" in flat:
            raise DomainError("markov.steps/probs apply to the lattice walk only")
        return MarkovModel.brownian(dim)
    steps = flat.get("markov.steps")
    probs = flat.get("markov.probs")
    if (steps is None) != (probs is None):
        raise DomainError("markov.steps and markov.probs must be given together")
    return MarkovModel.lattice_walk(dim, steps=steps, probs=probs)


def parse_config(flat: dict) -> ExperimentConfig:
    kind = _need(flat, "experiment.kind")
    if kind not in EXPERIMENT_KINDS:
        raise DomainError(
            f"unknown experiment kind {kind!r}; supported: {', '.join(EXPERIMENT_KINDS)}"
        )

    allowed = (
        {"experiment.kind"} | _KERNEL_KEYS | _RUNLENGTH_KEYS | _MARKOV_KEYS
        | _SEED_KEYS | _EXEC_KEYS | _KIND_KEYS[kind]
    )
    unknown = set(flat) - allowed
    if unknown:
        raise DomainError(f"unknown config keys: {', '.join(sorted(unknown))}")

    kernel = _parse_kernel(flat)
    runlength = _parse_runlength(flat)
    needs_markov = kind in ("equivalence", "tails")
    markov = None
    if any(k in flat for k in _MARKOV_KEYS):
        markov = _parse_markov(flat)
    if needs_markov and markov is None:
        raise DomainError(f"experiment kind {kind!r} needs a markov.* section")

    if markov is not None and markov.time_mode is TimeMode.DISCRETE:
        if not runlength.integer_valued:
            raise DomainError(
                "time domains must match: the lattice walk is discrete-time, so "
                "run lengths must be integer-valued (deterministic with integer c); "
                f"got {runlength.family.value}"
            )

    master_seed = _need(flat, "seeds.master")
    env_seed = _need(flat, "seeds.env")
    if not isinstance(master_seed, int) or isinstance(master_seed, bool) or master_seed < 0:
        raise DomainError("seeds.master must be a nonnegative integer")
    if not isinstance(env_seed, int) or isinstance(env_seed, bool) or env_seed < 0:
        raise DomainError("seeds.env must be a nonnegative integer")

    params = _parse_kind_params(kind, flat, kernel, markov)

    workers_default = flat.get("execution.workers")
    if workers_default is not None:
        workers_default = _positive_int(workers_default, "execution.workers")
    out_default = flat.get("execution.out")

    return ExperimentConfig(
        kind=kind, kernel=kernel, runlength=runlength, markov=markov,
        params=params, master_seed=master_seed, env_seed=env_seed,
        workers_default=workers_default, out_default=out_default, raw=dict(flat),
    )


def _check_horizons(horizons, kernel: MemoryKernel, key: str, minimum: int = 1):
    if len(horizons) < minimum:
        raise DomainError(f"{key} needs at least {minimum} entries")
    if any(h2 <= h1 for h1, h2 in zip(horizons, horizons[1:])):
        raise DomainError(f"{key} must be strictly increasing")
    floor = kernel.scale_floor()
    if horizons[0] <= floor:
        raise DomainError(
            f"{key}: horizons must exceed the kernel scale floor {floor:g}"
        )


def _check_integer_times(values, key: str):
    if any(float(v) != int(v) for v in values):
        raise DomainError(
            f"{key}: discrete-time configurations need integer query times"
        )


def _parse_kind_params(kind: str, flat: dict, kernel: MemoryKernel,
                       markov: MarkovModel | None) -> dict:
    discrete = markov is not None and markov.time_mode is TimeMode.DISCRETE
    if kind == "scgf":
        xi_grid = _number_list(_need(flat, "scgf.xi_grid"), "scgf.xi_grid")
        ladder = _number_list(_need(flat, "scgf.horizon_ladder"), "scgf.horizon_ladder")
        _check_horizons(ladder, kernel, "scgf.horizon_ladder", minimum=4)
        return {"xi_grid": xi_grid, "horizon_ladder": ladder}
    if kind == "tails":
        x_grid = _number_list(_need(flat, "tails.x_grid"), "tails.x_grid")
        if any(x < 0 for x in x_grid):
            raise DomainError("tails.x_grid must be nonnegative")
        ladder = _number_list(_need(flat, "tails.horizon_ladder"), "tails.horizon_ladder")
        _check_horizons(ladder, kernel, "tails.horizon_ladder")
        samples = _positive_int(_need(flat, "tails.samples"), "tails.samples")
        if discrete:
            _check_integer_times(ladder, "tails.horizon_ladder")
        return {"x_grid": x_grid, "horizon_ladder": ladder, "samples": samples}
    if kind == "equivalence":
        t = float(_need(flat, "equivalence.t"))
        if t <= 0:
            raise DomainError("equivalence.t must be positive")
        if discrete:
            _check_integer_times([t], "equivalence.t")
        samples = _positive_int(_need(flat, "equivalence.samples_per_arm"),
                                "equivalence.samples_per_arm")
        return {"t": t, "samples_per_arm": samples}
    if kind == "ancestry":
        targets = _number_list(_need(flat, "ancestry.targets"), "ancestry.targets")
        if any(float(n) != int(n) or n < 2 for n in targets):
            raise DomainError("ancestry.targets must be integers >= 2")
        samples = _positive_int(_need(flat, "ancestry.samples"), "ancestry.samples")
        run_count = _positive_int(_need(flat, "ancestry.run_count"), "ancestry.run_count")
        if run_count < max(targets):
            raise DomainError("ancestry.run_count must cover the largest target")
        return {"targets": tuple(int(n) for n in targets), "samples": samples,
                "run_count": run_count}
    if kind == "sums":
        variant = _need(flat, "sums.variant")
        if variant not in ("log_power", "power"):
            raise DomainError("sums.variant must be 'log_power' or 'power'")
        n_ladder = _number_list(_need(flat, "sums.n_ladder"), "sums.n_ladder")
        if any(float(n) != int(n) or n < 2 for n in n_ladder):
            raise DomainError("sums.n_ladder must contain integers >= 2")
        params = {
            "variant": variant,
            "n_ladder": tuple(int(n) for n in n_ladder),
            "g": flat.get("sums.g", "one"),
            "xi": flat.get("sums.xi"),
        }
        if variant == "log_power":
            params["b"] = float(_need(flat, "sums.b"))
        else:
            params["delta"] = float(_need(flat, "sums.delta"))
            if not 0 < params["delta"] <= 0.5:
                raise DomainError("sums.delta must lie in (0, 1/2]")
        return params
    if kind == "residual":
        ladder = _number_list(_need(flat, "residual.horizon_ladder"), "residual.horizon_ladder")
        _check_horizons(ladder, kernel, "residual.horizon_ladder")
        seeds = _need(flat, "residual.env_seeds")
        if not isinstance(seeds, list) or not seeds or not all(
            isinstance(s, int) and not isinstance(s, bool) and s >= 0 for s in seeds
        ):
            raise DomainError("residual.env_seeds must be a nonempty array of nonnegative integers")
        return {"horizon_ladder": ladder, "env_seeds": tuple(seeds)}
    raise DomainError(f"unhandled kind {kind!r}")
