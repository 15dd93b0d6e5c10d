"""Figure templates: one figure per experiment CSV plus an HTML index.

Rendering is a pure function of the input files.  SVG output is pinned
byte-stable: fixed hash salt for element ids, no creation date, text kept
as text.  Theory curves come from the producer's theory CSVs; nothing is
recomputed here and unresolved Monte Carlo cells are drawn as hollow
markers, never interpolated over.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .bundle import Report, ReportBundle, SchemaError  # noqa: E402

__all__ = ["render_bundle"]

_RC = {
    "svg.hashsalt": "reloc-plot",
    "svg.fonttype": "none",
    "figure.figsize": (7.0, 4.5),
    "figure.dpi": 110,
    "axes.grid": True,
    "grid.alpha": 0.3,
}

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _series(values):
    """Group row indices by a key column value, preserving first-seen order."""
    order = []
    groups = {}
    for i, v in enumerate(values):
        if v not in groups:
            groups[v] = []
            order.append(v)
        groups[v].append(i)
    return [(v, groups[v]) for v in order]


def _render_scgf(report: Report, ax) -> None:
    t = report.table
    xi = t.column("xi")
    slope = t.column("slope_fit")
    lam = t.column("lambda_theory")
    pts = sorted({(x, s, l) for x, s, l in zip(xi, slope, lam)})
    ax.plot([p[0] for p in pts], [p[1] for p in pts], "o", color=_COLORS[1],
            label="fitted slope of exact log-MGF vs s(t)", zorder=3)
    if report.theory is not None:
        tx = report.theory.column("xi")
        ty = report.theory.column("lambda_theory")
        ax.plot(tx, ty, "-", color=_COLORS[0], label="clock cumulant (theory)")
    ax.set_xlabel("xi")
    ax.set_ylabel("slope / cumulant value")
    ax.set_title("Memory-clock cumulant: fitted slopes vs theory")
    ax.legend()


def _render_tails(report: Report, ax) -> None:
    t = report.table
    x = t.column("x")
    s_of_t = t.column("s_of_t")
    emp = t.column("empirical_exponent")
    resolved = [c == "1" for c in t.column("resolved", kind=str)]
    for ci, (s_val, idx) in enumerate(_series(s_of_t)):
        color = _COLORS[ci % len(_COLORS)]
        solid_x = [x[i] for i in idx if emp[i] is not None and resolved[i]]
        solid_y = [emp[i] for i in idx if emp[i] is not None and resolved[i]]
        hollow_x = [x[i] for i in idx if emp[i] is not None and not resolved[i]]
        hollow_y = [emp[i] for i in idx if emp[i] is not None and not resolved[i]]
        ax.scatter(solid_x, solid_y, color=color, s=28,
                   label=f"empirical, s(t) = {s_val:g}", zorder=3)
        if hollow_x:
            ax.scatter(hollow_x, hollow_y, facecolors="none", edgecolors=color,
                       s=28, label=f"unresolved, s(t) = {s_val:g}", zorder=3)
    if report.theory is not None:
        tx = report.theory.column("x")
        ty = report.theory.column("neg_rate_theory")
        ax.plot(tx, ty, "-", color="black", label="-(tail exponent), theory")
    ax.set_xlabel("x (radius in units of s(t))")
    ax.set_ylabel("log P(|X(t)| >= x s(t)) / s(t)")
    ax.set_title("Quenched tail exponents: ladder vs theory")
    ax.legend(fontsize=8)


def _render_residual(report: Report, ax) -> None:
    t = report.table
    horizon = t.column("horizon")
    ratio = t.column("ratio")
    seed = t.column("env_seed", kind=str)
    for ci, (s_val, idx) in enumerate(_series(seed)):
        ax.plot([horizon[i] for i in idx], [ratio[i] for i in idx],
                "o-", color=_COLORS[ci % len(_COLORS)], label=f"env seed {s_val}")
    ax.set_xscale("log")
    ax.set_xlabel("horizon t")
    ax.set_ylabel("A(t) / s(t)")
    regime = t.column("regime", kind=str)[0]
    ax.set_title(f"Residual time against scale ({regime} regime)")
    ax.legend(fontsize=8)


def _render_equivalence(report: Report, ax) -> None:
    t = report.table
    ts = t.column("t")
    ks = t.column("ks_distance")
    crit = t.column("critical_value")
    pos = np.arange(len(ts))
    ax.bar(pos, ks, width=0.5, color=_COLORS[0], label="two-sample KS distance")
    ax.plot(pos, crit, "_", markersize=30, color=_COLORS[1], label="critical value")
    ax.set_xticks(pos)
    ax.set_xticklabels([f"t = {v:g}" for v in ts])
    ax.set_ylabel("KS distance")
    ax.set_title("Direct vs time-change simulators")
    ax.legend()


def _render_ancestry(report: Report, ax) -> None:
    t = report.table
    n = t.column("target_n")
    tv = [max(v, 1e-18) for v in t.column("tv_exact")]
    pv = t.column("p_value")
    ax.semilogy(n, tv, "o-", color=_COLORS[0], label="exact TV vs Bernoulli product")
    ax.axhline(1e-10, color="gray", linestyle="--", label="1e-10 tolerance")
    ax2 = ax.twinx()
    ax2.plot(n, pv, "s", color=_COLORS[2], label="chi-square p-value")
    ax2.set_ylim(0, 1.05)
    ax2.set_ylabel("chi-square p-value")
    ax2.grid(False)
    ax.set_xlabel("target run n")
    ax.set_ylabel("total variation")
    ax.set_title("Ancestry law vs independent-Bernoulli product")
    lines, labels = ax.get_legend_handles_labels()
    lines2, labels2 = ax2.get_legend_handles_labels()
    ax.legend(lines + lines2, labels + labels2, fontsize=8)


def _render_sums(report: Report, ax) -> None:
    t = report.table
    n = t.column("n")
    rem = t.column("remainder")
    variant = t.column("variant", kind=str)
    for ci, (v, idx) in enumerate(_series(variant)):
        ax.plot([n[i] for i in idx], [rem[i] for i in idx], "o-",
                color=_COLORS[ci % len(_COLORS)], label=v)
    ax.set_xscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("empirical sum minus predicted leading term")
    ax.set_title("Partial-sum remainders")
    ax.legend(fontsize=8)


_TEMPLATES = {
    "scgf": _render_scgf,
    "tails": _render_tails,
    "residual": _render_residual,
    "equivalence": _render_equivalence,
    "ancestry": _render_ancestry,
    "sums": _render_sums,
}

_INDEX_HEAD = """<!DOCTYPE html>
<html lang="en">
<head>
<meta charset="utf-8">
<title>reloc-ldp report</title>
<style>
body { font-family: sans-serif; max-width: 960px; margin: 2em auto; }
figure { margin: 2em 0; }
img { max-width: 100%; border: 1px solid #ccc; }
</style>
</head>
<body>
<h1>reloc-ldp experiment report</h1>
"""


def render_bundle(bundle: ReportBundle, out_dir, fmt: str = "svg") -> list:
    """Render one figure per report plus index.html; returns paths written."""
    if fmt not in ("svg", "png"):
        raise SchemaError(f"unsupported figure format {fmt!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    entries = []
    with matplotlib.rc_context(_RC):
        for report in bundle.reports:
            template = _TEMPLATES.get(report.kind)
            if template is None:
                raise SchemaError(f"no figure template for kind {report.kind!r}")
            fig, ax = plt.subplots()
            try:
                template(report, ax)
                fig.tight_layout()
                fig_path = out / f"{report.kind}.{fmt}"
                fig.savefig(fig_path, format=fmt, metadata=_figure_metadata(fmt))
            finally:
                plt.close(fig)
            written.append(fig_path)
            entries.append(report.kind)
    index = out / "index.html"
    with open(index, "w", encoding="utf-8", newline="") as fh:
        fh.write(_INDEX_HEAD)
        for kind in entries:
            fh.write(f'<figure>\n<h2>{kind}</h2>\n<img src="{kind}.{fmt}" alt="{kind}">\n</figure>\n')
        fh.write("</body>\n</html>\n")
    written.append(index)
    return written


def _figure_metadata(fmt: str):
    if fmt == "svg":
        return {"Date": None}  # drop the creation timestamp: re-renders must be byte-identical
    return None
