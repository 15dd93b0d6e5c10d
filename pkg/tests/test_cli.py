"""CLI contract: exit codes, schemas, determinism, metadata round-trip."""

import json
import math
from pathlib import Path

import pytest

from reloc_ldp.cli import main
from reloc_ldp.config import load_config, parse_config
from reloc_ldp.csvio import SCHEMAS, schema_header
from reloc_ldp.errors import DomainError


def write_config(tmp_path: Path, flat: dict, name: str = "config.json") -> Path:
    path = tmp_path / name
    path.write_text(json.dumps(flat), encoding="utf-8")
    return path


def scgf_config(ladder=(100.0, 1000.0, 10_000.0, 100_000.0)) -> dict:
    return {
        "experiment.kind": "scgf",
        "kernel.family": "log_power",
        "kernel.alpha": 1.0,
        "kernel.beta": 1.0,
        "runlength.family": "deterministic",
        "runlength.c": 1.0,
        "seeds.master": 1234,
        "seeds.env": 7,
        "scgf.xi_grid": [0.5, 1.0],
        "scgf.horizon_ladder": list(ladder),
    }


# -- config parsing -------------------------------------------------------------------


def test_parse_and_echo_round_trip():
    flat = scgf_config()
    config = parse_config(flat)
    assert parse_config(config.raw) == config


def test_heavy_tail_rejected_with_assumption_name():
    flat = scgf_config()
    flat["runlength.family"] = "geometric"
    with pytest.raises(DomainError, match="A2"):
        parse_config(flat)


def test_time_domain_mismatch_rejected():
    flat = {
        "experiment.kind": "equivalence",
        "kernel.family": "log_power",
        "kernel.alpha": 1.0,
        "kernel.beta": 1.0,
        "runlength.family": "uniform",
        "runlength.a": 0.5,
        "runlength.b": 1.5,
        "markov.family": "lattice",
        "markov.dimension": 1,
        "seeds.master": 1,
        "seeds.env": 2,
        "equivalence.t": 50,
        "equivalence.samples_per_arm": 100,
    }
    with pytest.raises(DomainError, match="time domains"):
        parse_config(flat)


def test_unknown_keys_rejected():
    flat = scgf_config()
    flat["scgf.bogus"] = 1
    with pytest.raises(DomainError, match="unknown config keys"):
        parse_config(flat)


def test_kernel_domain_enforced():
    flat = scgf_config()
    flat["kernel.family"] = "stretched_exp"
    del flat["kernel.alpha"], flat["kernel.beta"]
    flat["kernel.gamma"] = 1.0
    flat["kernel.delta"] = 0.75
    with pytest.raises(DomainError, match="delta"):
        parse_config(flat)


def test_ladder_validation():
    flat = scgf_config(ladder=(100.0, 1000.0, 10_000.0))
    with pytest.raises(DomainError, match="at least 4"):
        parse_config(flat)


# -- CLI ------------------------------------------------------------------------------


def test_schema_command(capsys):
    assert main(["schema", "scgf"]) == 0
    out = capsys.readouterr().out.strip()
    assert out == schema_header("scgf")
    assert out.split(",") == SCHEMAS["scgf"]


def test_validate_ok_and_bad(tmp_path, capsys):
    ok = write_config(tmp_path, scgf_config())
    assert main(["validate", str(ok)]) == 0
    bad_flat = scgf_config()
    bad_flat["runlength.family"] = "exponential"
    bad = write_config(tmp_path, bad_flat, "bad.json")
    assert main(["validate", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "A2" in err


def test_missing_file_exit_2(tmp_path):
    assert main(["run", str(tmp_path / "nope.json")]) == 2


def test_run_scgf_writes_artifacts(tmp_path):
    cfg = write_config(tmp_path, scgf_config())
    out = tmp_path / "out"
    assert main(["run", str(cfg), "--out", str(out)]) == 0

    csv_path = out / "scgf.csv"
    lines = csv_path.read_text(encoding="utf-8").split("\n")
    assert lines[0] == schema_header("scgf")
    assert "\r" not in csv_path.read_text(encoding="utf-8")
    n_rows = len([ln for ln in lines[1:] if ln])
    assert n_rows == 2 * 4

    # full round-trip float precision
    row = dict(zip(lines[0].split(","), lines[1].split(",")))
    assert float(row["s_of_t"]) == math.log(100.0)

    theory = (out / "scgf_theory.csv").read_text(encoding="utf-8").split("\n")
    assert theory[0] == schema_header("scgf_theory")

    meta = json.loads((out / "scgf.meta.json").read_text(encoding="utf-8"))
    assert meta["schema"]["kind"] == "scgf"
    assert meta["csv"] == "scgf.csv"
    echoed = parse_config(meta["config"])
    assert echoed == load_config(str(cfg))


def test_run_deterministic_across_worker_counts(tmp_path):
    flat = {
        "experiment.kind": "tails",
        "kernel.family": "log_power",
        "kernel.alpha": 1.0,
        "kernel.beta": 1.0,
        "runlength.family": "deterministic",
        "runlength.c": 1.0,
        "markov.family": "lattice",
        "markov.dimension": 1,
        "seeds.master": 9,
        "seeds.env": 0,
        "tails.x_grid": [0.5],
        "tails.horizon_ladder": [55],
        "tails.samples": 30_000,
    }
    cfg = write_config(tmp_path, flat)
    blobs = []
    for workers, sub in ((1, "w1"), (2, "w2")):
        out = tmp_path / sub
        assert main(["run", str(cfg), "--workers", str(workers), "--out", str(out)]) == 0
        blobs.append((out / "tails.csv").read_bytes()
                     + (out / "tails_theory.csv").read_bytes()
                     + (out / "tails.meta.json").read_bytes())
    assert blobs[0] == blobs[1]


def test_workers_env_var(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("RELOC_LDP_WORKERS", "2")
    cfg = write_config(tmp_path, scgf_config(ladder=(100.0, 200.0, 400.0, 800.0)))
    out = tmp_path / "env_out"
    assert main(["run", str(cfg), "--out", str(out)]) == 0
    assert (out / "scgf.csv").exists()
