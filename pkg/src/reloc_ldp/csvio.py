"""Versioned CSV schemas and deterministic writers.

Output contract: UTF-8, LF line endings, header row always present,
floats rendered with shortest round-trip precision (``repr``), booleans
as 1/0, missing values as empty fields.  Identical rows produce identical
bytes, which the worker-count determinism guarantee depends on.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1

SCHEMAS = {
    "scgf": ["xi", "horizon", "s_of_t", "exact_log_mgf", "slope_fit",
             "lambda_theory", "abs_gap"],
    "scgf_theory": ["xi", "lambda_theory"],
    "tails": ["x", "horizon", "s_of_t", "samples", "tail_hits", "p_hat",
              "empirical_exponent", "wilson_lo", "wilson_hi",
              "neg_rate_theory", "resolved"],
    "tails_theory": ["x", "neg_rate_theory"],
    "equivalence": ["t", "samples_per_arm", "ks_distance", "critical_value",
                    "reject", "alpha"],
    "ancestry": ["target_n", "samples", "tv_exact", "chi2_stat", "chi2_dof",
                 "p_value"],
    "sums": ["variant", "n", "empirical_sum", "predicted_leading", "remainder"],
    "residual": ["env_seed", "horizon", "s_of_t", "i_of_t", "residual_a",
                 "ratio", "regime"],
}


def schema_header(kind: str) -> str:
    return ",".join(SCHEMAS[kind])


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))  # shortest round-trip; plain float repr
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path, kind: str, rows: list[dict]) -> None:
    columns = SCHEMAS[kind]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(c)) for c in columns])


def write_metadata(path, *, kind: str, config_echo: dict, seeds: dict,
                   library_version: str, csv_name: str,
                   theory_csv_name: str | None = None) -> None:
    record = {
        "schema": {"kind": kind, "version": SCHEMA_VERSION},
        "columns": SCHEMAS[kind],
        "config": config_echo,
        "seeds": seeds,
        "library_version": library_version,
        "csv": csv_name,
    }
    if theory_csv_name is not None:
        record["theory_csv"] = theory_csv_name
        record["theory_columns"] = SCHEMAS[f"{kind}_theory"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_metadata(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
