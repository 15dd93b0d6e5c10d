#!/usr/bin/env python3
"""Run every example config in scripts/configs and collect the CSVs.

    python scripts/run_all_experiments.py [--out DIR] [--workers N]

Outputs land in DIR/<config-stem>/ (default scripts/out).  If the
figure package is installed, render the results afterwards with

    reloc-plot DIR/<config-stem> --out DIR/<config-stem>/figures
"""

import argparse
import sys
import time
from pathlib import Path

from reloc_ldp.cli import main as reloc_main

HERE = Path(__file__).resolve().parent


def run() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default=str(HERE / "out"))
    parser.add_argument("--workers", type=int, default=2)
    parser.add_argument("--only", default=None, help="substring filter on config names")
    args = parser.parse_args()

    configs = sorted((HERE / "configs").glob("*.json"))
    if args.only:
        configs = [c for c in configs if args.only in c.name]
    if not configs:
        print("no configs matched", file=sys.stderr)
        return 1

    failures = 0
    for config in configs:
        out_dir = Path(args.out) / config.stem
        t0 = time.time()
        code = reloc_main([
            "run", str(config), "--workers", str(args.workers), "--out", str(out_dir),
        ])
        status = "ok" if code == 0 else f"exit {code}"
        print(f"{config.name:28s} -> {out_dir}  [{status}, {time.time() - t0:.1f}s]")
        failures += code != 0
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(run())
