"""Figure CLI:  reloc-plot <dir-with-csvs> --out <dir> [--format svg|png]"""

from __future__ import annotations

import argparse
import sys

from .bundle import SchemaError, load_bundle
from .render import render_bundle


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="reloc-plot", description=__doc__)
    parser.add_argument("directory", help="directory holding <kind>.csv and <kind>.meta.json files")
    parser.add_argument("--out", required=True, help="output directory for figures + index.html")
    parser.add_argument("--format", choices=("svg", "png"), default="svg")
    args = parser.parse_args(argv)
    try:
        bundle = load_bundle(args.directory)
        written = render_bundle(bundle, args.out, fmt=args.format)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
