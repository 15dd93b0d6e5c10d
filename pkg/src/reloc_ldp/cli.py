"""Experiment runner CLI.

    reloc-ldp run <config.json> [--workers N] [--out DIR]
    reloc-ldp validate <config.json>
    reloc-ldp schema <kind>

Exit codes: 0 success (scientific outcomes live in the CSV, not the exit
code), 2 invalid config (message names the violated assumption), 3
runtime or numeric failure.  Worker count is taken from --workers, then
the RELOC_LDP_WORKERS environment variable, then the config's
execution.workers, then 1; it never changes the output bytes.
"""

from __future__ import annotations

import argparse
import os
import sys
import traceback

import numpy as np

from . import __version__
from .config import EXPERIMENT_KINDS, ExperimentConfig, load_config
from .csvio import SCHEMAS, ensure_dir, schema_header, write_csv, write_metadata
from .errors import DomainError, NumericError, UnsupportedConfigError
from .genealogy import build_runs
from .ratefn import RateFunction
from .verify import (
    ancestry_gof,
    equivalence_ks,
    residual_check,
    scgf_slope_check,
    sum_asymptotics_check,
    tail_exponent_estimate,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _resolve_workers(flag: int | None, config: ExperimentConfig) -> int:
    if flag is not None:
        return max(1, flag)
    env = os.environ.get("RELOC_LDP_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise DomainError("RELOC_LDP_WORKERS must be an integer") from None
    if config.workers_default is not None:
        return config.workers_default
    return 1


def _dense_grid(values, points: int = 201) -> np.ndarray:
    lo, hi = min(values), max(values)
    if lo == hi:
        return np.array([lo], dtype=float)
    return np.linspace(lo, hi, points)


def _run_scgf(config: ExperimentConfig, workers: int):
    report = scgf_slope_check(
        config.kernel, config.runlength,
        config.params["xi_grid"], config.params["horizon_ladder"],
        env_seed=config.env_seed,
    )
    grid = _dense_grid(config.params["xi_grid"])
    theory_rows = [
        {"xi": float(x), "lambda_theory": config.runlength.scgf(float(x))}
        for x in grid
    ]
    return report.rows(), theory_rows


def _run_tails(config: ExperimentConfig, workers: int):
    report = tail_exponent_estimate(
        config.kernel, config.runlength, config.markov,
        config.params["x_grid"], config.params["horizon_ladder"],
        config.params["samples"],
        master_seed=config.master_seed, env_seed=config.env_seed,
        workers=workers,
    )
    rf = RateFunction(config.runlength, config.markov)
    grid = _dense_grid(config.params["x_grid"])
    theory_rows = [
        {"x": float(x), "neg_rate_theory": -rf.tail_exponent(float(x))}
        for x in grid
    ]
    return report.rows, theory_rows


def _run_equivalence(config: ExperimentConfig, workers: int):
    report = equivalence_ks(
        config.kernel, config.runlength, config.markov,
        config.params["t"], config.params["samples_per_arm"],
        master_seed=config.master_seed, env_seed=config.env_seed,
        workers=workers,
    )
    row = {
        "t": report.t,
        "samples_per_arm": report.samples_per_arm,
        "ks_distance": report.ks_distance,
        "critical_value": report.critical_value,
        "reject": report.reject,
        "alpha": report.alpha,
    }
    return [row], None


def _run_ancestry(config: ExperimentConfig, workers: int):
    runs = build_runs(config.runlength, config.kernel,
                      count=config.params["run_count"], seed=config.env_seed)
    rows = []
    for target in config.params["targets"]:
        rep = ancestry_gof(runs, target, config.params["samples"], config.master_seed)
        rows.append({
            "target_n": rep.target,
            "samples": rep.samples,
            "tv_exact": rep.tv_exact,
            "chi2_stat": rep.chi2_stat,
            "chi2_dof": rep.chi2_dof,
            "p_value": rep.p_value,
        })
    return rows, None


def _run_sums(config: ExperimentConfig, workers: int):
    p = config.params
    kwargs = {"variant": p["variant"], "g_name": p["g"]}
    if p.get("xi") is not None:
        from .verify import probe_function

        kwargs["g"] = probe_function(p["g"], xi=p["xi"])
    if p["variant"] == "log_power":
        kwargs["b"] = p["b"]
    else:
        kwargs["delta"] = p["delta"]
    report = sum_asymptotics_check(config.runlength, p["n_ladder"],
                                   config.env_seed, **kwargs)
    return report.rows, None


def _run_residual(config: ExperimentConfig, workers: int):
    report = residual_check(config.kernel, config.runlength,
                            config.params["horizon_ladder"],
                            config.params["env_seeds"])
    return report.rows, None


_RUNNERS = {
    "scgf": _run_scgf,
    "tails": _run_tails,
    "equivalence": _run_equivalence,
    "ancestry": _run_ancestry,
    "sums": _run_sums,
    "residual": _run_residual,
}


def run_experiment(config: ExperimentConfig, workers: int, out_dir) -> list[str]:
    """Execute one experiment; returns the paths written."""
    out = ensure_dir(out_dir)
    rows, theory_rows = _RUNNERS[config.kind](config, workers)
    csv_name = f"{config.kind}.csv"
    write_csv(out / csv_name, config.kind, rows)
    written = [str(out / csv_name)]
    theory_name = None
    if theory_rows is not None:
        theory_name = f"{config.kind}_theory.csv"
        write_csv(out / theory_name, f"{config.kind}_theory", theory_rows)
        written.append(str(out / theory_name))
    meta_name = f"{config.kind}.meta.json"
    write_metadata(
        out / meta_name,
        kind=config.kind,
        config_echo=config.raw,
        seeds={"master": config.master_seed, "env": config.env_seed},
        library_version=__version__,
        csv_name=csv_name,
        theory_csv_name=theory_name,
    )
    written.append(str(out / meta_name))
    return written


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="reloc-ldp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--workers", type=int, default=None)
    p_run.add_argument("--out", default=None)

    p_val = sub.add_parser("validate", help="validate a config and exit")
    p_val.add_argument("config")

    p_schema = sub.add_parser("schema", help="print the CSV header for a kind")
    p_schema.add_argument("kind", choices=sorted(SCHEMAS))

    args = parser.parse_args(argv)

    if args.command == "schema":
        print(schema_header(args.kind))
        return EXIT_OK

    try:
        config = load_config(args.config)
    except (DomainError, UnsupportedConfigError, OSError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "validate":
        print(f"ok: {config.kind} experiment, kinds available: {', '.join(EXPERIMENT_KINDS)}")
        return EXIT_OK

    try:
        workers = _resolve_workers(args.workers, config)
        out_dir = args.out or config.out_default or "."
        written = run_experiment(config, workers, out_dir)
    except (DomainError, UnsupportedConfigError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, Exception) as exc:  # noqa: BLE001 - runtime failures exit 3
        if isinstance(exc, KeyboardInterrupt):
            raise
        print(f"runtime failure: {exc}", file=sys.stderr)
        traceback.print_exc()
        return EXIT_RUNTIME
    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
