"""Benchmark harness over a corpus directory.

Analyzes every ``*.c`` file in the corpus and produces a coverage table:
per file, the number of loops, the percentage bounded by the traditional
analysis, the percentage constrained by the solver-based analysis, and the
per-analysis runtimes. Because the constraint analysis imposes strictly
more prerequisites, constrained loops are expected to be a subset of
bounded loops; violations are collected rather than silently ignored.

``write_outputs`` emits the table as text, CSV and JSON, plus coverage and
runtime figures rendered to PNG files.
"""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass, field
from typing import Optional

from .report import AnalyzeOptions, FileReport, analyze_file


@dataclass
class BenchmarkRow:
    name: str
    loops: int
    bounded: int
    constrained: int
    bound_millis: float
    flow_millis: float

    def pct_bounded(self) -> Optional[float]:
        return 100.0 * self.bounded / self.loops if self.loops else None

    def pct_constrained(self) -> Optional[float]:
        return 100.0 * self.constrained / self.loops if self.loops else None


@dataclass
class BenchmarkTable:
    rows: list[BenchmarkRow] = field(default_factory=list)
    subset_violations: list[str] = field(default_factory=list)
    parse_errors: list[str] = field(default_factory=list)
    file_millis: dict[str, float] = field(default_factory=dict)

    def totals(self) -> BenchmarkRow:
        return BenchmarkRow(
            name="Total",
            loops=sum(r.loops for r in self.rows),
            bounded=sum(r.bounded for r in self.rows),
            constrained=sum(r.constrained for r in self.rows),
            bound_millis=sum(r.bound_millis for r in self.rows),
            flow_millis=sum(r.flow_millis for r in self.rows),
        )

    @property
    def subset_holds(self) -> bool:
        return not self.subset_violations

    def to_json(self) -> dict:
        def row_json(r: BenchmarkRow) -> dict:
            return {"name": r.name, "loops": r.loops,
                    "bounded": r.bounded, "constrained": r.constrained,
                    "pct_bounded": r.pct_bounded(),
                    "pct_constrained": r.pct_constrained(),
                    "bound_millis": r.bound_millis,
                    "flow_millis": r.flow_millis}

        return {"rows": [row_json(r) for r in self.rows],
                "totals": row_json(self.totals()),
                "subset_holds": self.subset_holds,
                "subset_violations": self.subset_violations,
                "parse_errors": self.parse_errors}


def corpus_files(corpus_dir: str) -> list[str]:
    return sorted(
        os.path.join(corpus_dir, name)
        for name in os.listdir(corpus_dir)
        if name.endswith(".c"))


def run_benchmark(corpus_dir: str,
                  options: Optional[AnalyzeOptions] = None) -> BenchmarkTable:
    options = options or AnalyzeOptions()
    table = BenchmarkTable()
    for path in corpus_files(corpus_dir):
        name = os.path.splitext(os.path.basename(path))[0]
        report, _ = analyze_file(path, options)
        if report.parse_error:
            table.parse_errors.append(report.parse_error)
            continue
        table.rows.append(_row_of(name, report))
        table.file_millis[name] = report.millis
        for record in report.loops:
            if record.is_constrained and not record.is_bounded:
                table.subset_violations.append(
                    f"{name}: loop at label {record.label} is constrained "
                    "but not bounded")
    return table


def _row_of(name: str, report: FileReport) -> BenchmarkRow:
    return BenchmarkRow(
        name=name,
        loops=report.total_loops,
        bounded=report.bounded,
        constrained=report.constrained,
        bound_millis=sum(r.bound_millis or 0.0 for r in report.loops),
        flow_millis=sum(r.flow_millis or 0.0 for r in report.loops),
    )


def load_seeds(path: str) -> list[dict[str, int]]:
    """Oracle input seeds for a corpus file: ``X.c`` -> ``X.inputs.json``
    holding a list of parameter maps; missing file means one empty seed."""
    seed_path = os.path.splitext(path)[0] + ".inputs.json"
    if not os.path.exists(seed_path):
        return [{}]
    with open(seed_path, encoding="utf-8") as fh:
        seeds = json.load(fh)
    return [{str(k): int(v) for k, v in seed.items()} for seed in seeds]


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def _pct_text(pct: Optional[float]) -> str:
    return "--" if pct is None else f"{pct:.1f}%"


def format_table(table: BenchmarkTable) -> str:
    header = (f"{'Benchmark':<24} {'Loops':>5} {'Loopbounds':>11} "
              f"{'Runtime':>9} {'Constraints':>12} {'Runtime':>9}")
    lines = [header, "-" * len(header)]
    for r in table.rows:
        lines.append(
            f"{r.name:<24} {r.loops:>5} {_pct_text(r.pct_bounded()):>11} "
            f"{r.bound_millis:>7.1f}ms {_pct_text(r.pct_constrained()):>12} "
            f"{r.flow_millis:>7.1f}ms")
    totals = table.totals()
    lines.append("-" * len(header))
    lines.append(
        f"{'Total':<24} {totals.loops:>5} "
        f"{_pct_text(totals.pct_bounded()):>11} {totals.bound_millis:>7.1f}ms "
        f"{_pct_text(totals.pct_constrained()):>12} "
        f"{totals.flow_millis:>7.1f}ms")
    if not table.subset_holds:
        lines.append("")
        lines.append("WARNING: constrained loops are not a subset of "
                     "bounded loops:")
        lines.extend(f"  {v}" for v in table.subset_violations)
    return "\n".join(lines) + "\n"


def table_to_csv(table: BenchmarkTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["benchmark", "loops", "bounded", "pct_bounded",
                     "bound_millis", "constrained", "pct_constrained",
                     "flow_millis"])
    for r in table.rows + [table.totals()]:
        writer.writerow([
            r.name, r.loops, r.bounded,
            "" if r.pct_bounded() is None else f"{r.pct_bounded():.1f}",
            f"{r.bound_millis:.3f}", r.constrained,
            "" if r.pct_constrained() is None else f"{r.pct_constrained():.1f}",
            f"{r.flow_millis:.3f}"])
    return buf.getvalue()


def write_outputs(table: BenchmarkTable, out_dir: str,
                  figures: bool = True) -> list[str]:
    """Write coverage.{txt,csv,json} and (optionally) the PNG figures;
    returns the paths written."""
    os.makedirs(out_dir, exist_ok=True)
    written = []

    def put(name: str, text: str) -> None:
        path = os.path.join(out_dir, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        written.append(path)

    put("coverage.txt", format_table(table))
    put("coverage.csv", table_to_csv(table))
    put("coverage.json", json.dumps(table.to_json(), indent=2))
    if figures:
        from .figures import render_coverage_figure, render_runtime_figure
        coverage_png = os.path.join(out_dir, "coverage.png")
        runtime_png = os.path.join(out_dir, "runtime.png")
        render_coverage_figure(table, coverage_png)
        render_runtime_figure(table, runtime_png)
        written.extend([coverage_png, runtime_png])
    return written
