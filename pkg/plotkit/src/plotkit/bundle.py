"""Report-bundle discovery and strict schema validation.

A bundle directory is whatever ``reloc-ldp run`` produced: per experiment
kind one ``<kind>.csv``, one ``<kind>.meta.json`` sidecar, and for some
kinds a ``<kind>_theory.csv`` with densely sampled theory curves.  This
package consumes those files and nothing else -- it never recomputes
theory values beyond reading the columns the producer wrote.

Validation is strict and fails loudly: unknown or mismatched schema
versions, missing columns (named in the error), and empty data are all
hard errors rather than best-effort renders.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

__all__ = ["SchemaError", "Table", "Report", "ReportBundle", "load_bundle"]

SUPPORTED_SCHEMA_VERSION = 1

REQUIRED_COLUMNS = {
    "scgf": ["xi", "horizon", "s_of_t", "exact_log_mgf", "slope_fit",
             "lambda_theory", "abs_gap"],
    "tails": ["x", "horizon", "s_of_t", "samples", "tail_hits", "p_hat",
              "empirical_exponent", "wilson_lo", "wilson_hi",
              "neg_rate_theory", "resolved"],
    "equivalence": ["t", "samples_per_arm", "ks_distance", "critical_value",
                    "reject", "alpha"],
    "ancestry": ["target_n", "samples", "tv_exact", "chi2_stat", "chi2_dof",
                 "p_value"],
    "sums": ["variant", "n", "empirical_sum", "predicted_leading", "remainder"],
    "residual": ["env_seed", "horizon", "s_of_t", "i_of_t", "residual_a",
                 "ratio", "regime"],
}
REQUIRED_THEORY_COLUMNS = {
    "scgf": ["xi", "lambda_theory"],
    "tails": ["x", "neg_rate_theory"],
}


class SchemaError(ValueError):
    """Bundle contents do not match the published CSV contract."""


@dataclass(frozen=True)
class Table:
    columns: list
    rows: list  # list of dicts, values as strings ('' marks missing)

    def column(self, name: str, kind: float | str = float) -> list:
        if name not in self.columns:
            raise SchemaError(f"missing column {name!r}")
        out = []
        for row in self.rows:
            cell = row[name]
            if cell == "":
                out.append(None)
            elif kind is float:
                out.append(float(cell))
            else:
                out.append(cell)
        return out


@dataclass(frozen=True)
class Report:
    kind: str
    csv_path: Path
    meta_path: Path
    table: Table
    theory: Table | None


@dataclass(frozen=True)
class ReportBundle:
    directory: Path
    reports: list


def _read_table(path: Path, required: list) -> Table:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path.name}: empty file, header row required") from None
        rows = [dict(zip(header, row)) for row in reader if row]
    for col in required:
        if col not in header:
            raise SchemaError(f"{path.name}: missing column {col!r}")
    if not rows:
        raise SchemaError(f"{path.name}: no data rows")
    return Table(columns=header, rows=rows)


def _load_report(meta_path: Path) -> Report:
    with open(meta_path, "r", encoding="utf-8") as fh:
        meta = json.load(fh)
    schema = meta.get("schema", {})
    kind = schema.get("kind")
    version = schema.get("version")
    if kind not in REQUIRED_COLUMNS:
        raise SchemaError(f"{meta_path.name}: unknown experiment kind {kind!r}")
    if version != SUPPORTED_SCHEMA_VERSION:
        raise SchemaError(
            f"{meta_path.name}: schema version {version!r} unsupported "
            f"(this renderer reads version {SUPPORTED_SCHEMA_VERSION})"
        )
    csv_path = meta_path.parent / meta["csv"]
    table = _read_table(csv_path, REQUIRED_COLUMNS[kind])
    theory = None
    if meta.get("theory_csv"):
        theory = _read_table(meta_path.parent / meta["theory_csv"],
                             REQUIRED_THEORY_COLUMNS[kind])
    return Report(kind=kind, csv_path=csv_path, meta_path=meta_path,
                  table=table, theory=theory)


def load_bundle(directory) -> ReportBundle:
    directory = Path(directory)
    metas = sorted(directory.glob("*.meta.json"))
    if not metas:
        raise SchemaError(f"no *.meta.json records found in {directory}")
    reports = [_load_report(m) for m in metas]
    return ReportBundle(directory=directory, reports=reports)
