"""Matplotlib rendering of benchmark tables to image files."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .benchmark import BenchmarkTable  # noqa: E402


def render_coverage_figure(table: BenchmarkTable, path: str) -> None:
    """Grouped bars: % bounded vs % constrained per corpus file."""
    rows = [r for r in table.rows if r.loops > 0]
    names = [r.name for r in rows]
    bounded = [r.pct_bounded() or 0.0 for r in rows]
    constrained = [r.pct_constrained() or 0.0 for r in rows]

    width = 0.4
    xs = range(len(rows))
    fig, ax = plt.subplots(figsize=(max(6.0, 0.55 * len(rows) + 2), 4.0))
    ax.bar([x - width / 2 for x in xs], bounded, width, label="loop bounds",
           color="#4878d0")
    ax.bar([x + width / 2 for x in xs], constrained, width,
           label="flow constraints", color="#ee854a")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(names, rotation=60, ha="right", fontsize=8)
    ax.set_ylabel("loops analyzed (%)")
    ax.set_ylim(0, 105)
    ax.legend(loc="lower right", fontsize=8)
    ax.set_title("Corpus coverage by analysis")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_runtime_figure(table: BenchmarkTable, path: str) -> None:
    """Per-file analysis runtimes (log scale keeps the outliers readable)."""
    rows = table.rows
    names = [r.name for r in rows]
    bound_ms = [max(r.bound_millis, 1e-3) for r in rows]
    flow_ms = [max(r.flow_millis, 1e-3) for r in rows]

    width = 0.4
    xs = range(len(rows))
    fig, ax = plt.subplots(figsize=(max(6.0, 0.55 * len(rows) + 2), 4.0))
    ax.bar([x - width / 2 for x in xs], bound_ms, width, label="loop bounds",
           color="#4878d0")
    ax.bar([x + width / 2 for x in xs], flow_ms, width,
           label="flow constraints", color="#ee854a")
    ax.set_yscale("log")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(names, rotation=60, ha="right", fontsize=8)
    ax.set_ylabel("runtime (ms)")
    ax.legend(loc="upper right", fontsize=8)
    ax.set_title("Analysis runtime per corpus file")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
