"""Figure renderer for reloc-ldp experiment outputs.

Consumes the CSV + metadata files the experiment CLI writes (schema
version 1) and produces one comparison figure per experiment kind plus a
static HTML index.  Deterministic: identical inputs give byte-identical
SVG output."""

__version__ = "0.1.0"

from .bundle import Report, ReportBundle, SchemaError, Table, load_bundle
from .render import render_bundle

__all__ = [
    "__version__",
    "Report",
    "ReportBundle",
    "SchemaError",
    "Table",
    "load_bundle",
    "render_bundle",
]
