"""Analysis pipeline orchestration and report assembly.

``analyze_source`` / ``analyze_file`` run parse -> interval analysis ->
loop recognition -> {loop bounds, flow constraints} and collect one record
per syntactic loop. Reports serialize to JSON (docs/report-schema.md) and
can be re-emitted as annotated source with pragma comments:

    // #pragma loopcount loopbound(10)
    // #pragma loopcount flowconstraint(7, 25)

Two runs on the same input differ only in the millisecond fields.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Optional

from . import flowcon, interval, loopbound, looprec
from .ast_nodes import Program, walk_stmts
from .frontend import ParseError, format_expr, parse, unparse
from .looprec import LoopDescriptor, Rejection


@dataclass
class AnalyzeOptions:
    mode: str = "both"            # bounds | constraints | both
    inline_depth: int = 1
    solver_budget: Optional[int] = None
    enum_cap: Optional[int] = None

    def solver_opts(self) -> dict:
        opts: dict = {"propagation_budget": self.solver_budget}
        if self.enum_cap is not None:
            opts["node_cap"] = self.enum_cap
        return opts


@dataclass
class LoopRecord:
    label: int
    function: str
    line: int
    descriptor: Optional[LoopDescriptor] = None
    rejection: Optional[Rejection] = None
    bound: Optional[loopbound.BoundResult] = None
    bound_millis: Optional[float] = None
    flow: Optional[flowcon.FlowResult] = None
    flow_millis: Optional[float] = None

    @property
    def is_bounded(self) -> bool:
        return self.bound is not None and self.bound.is_bound

    @property
    def is_constrained(self) -> bool:
        return isinstance(self.flow, flowcon.FlowConstraint)

    def to_json(self) -> dict:
        out: dict = {"label": self.label, "function": self.function,
                     "line": self.line}
        if self.descriptor is not None:
            d = self.descriptor
            out["descriptor"] = {
                "iter_var": d.iter_var,
                "direction": d.direction,
                "rel": d.rel,
                "init": format_expr(d.init_expr),
                "bound": format_expr(d.bound_expr),
                "step": format_expr(d.step_expr),
                "classes": [c.value for c in d.classes],
                "depth": d.nesting_depth,
                "parent": d.parent,
            }
        if self.rejection is not None:
            out["rejection"] = {"reason": self.rejection.reason.value,
                                "detail": self.rejection.detail}
        if self.bound is not None:
            out["loopbound"] = {
                "result": {"kind": self.bound.kind, "n": self.bound.n,
                           "reason": self.bound.reason or None},
                "millis": self.bound_millis,
            }
        if self.flow is not None:
            if isinstance(self.flow, flowcon.FlowConstraint):
                result = {"kind": "flowconstraint", "n": self.flow.n,
                          "relative_to": self.flow.relative_to,
                          "exact": self.flow.exact, "depth": self.flow.depth}
            else:
                result = {"kind": "rejected", "detail": self.flow.detail}
            out["flowconstraint"] = {"result": result,
                                     "millis": self.flow_millis}
        return out


@dataclass
class FileReport:
    file: str
    parse_error: Optional[str] = None
    loops: list[LoopRecord] = field(default_factory=list)
    millis: float = 0.0

    @property
    def total_loops(self) -> int:
        return len(self.loops)

    @property
    def bounded(self) -> int:
        return sum(1 for r in self.loops if r.is_bounded)

    @property
    def constrained(self) -> int:
        return sum(1 for r in self.loops if r.is_constrained)

    def pct_bounded(self) -> Optional[float]:
        if not self.loops:
            return None
        return 100.0 * self.bounded / self.total_loops

    def pct_constrained(self) -> Optional[float]:
        if not self.loops:
            return None
        return 100.0 * self.constrained / self.total_loops

    def to_json(self) -> dict:
        return {
            "file": self.file,
            "parse_error": self.parse_error,
            "loops": [r.to_json() for r in self.loops],
            "totals": {
                "loops": self.total_loops,
                "bounded": self.bounded,
                "constrained": self.constrained,
                "pct_bounded": self.pct_bounded(),
                "pct_constrained": self.pct_constrained(),
                "millis": self.millis,
            },
        }


@dataclass
class AnalysisReport:
    files: list[FileReport] = field(default_factory=list)
    options: Optional[AnalyzeOptions] = None

    @property
    def parse_errors(self) -> list[str]:
        return [f.parse_error for f in self.files if f.parse_error]

    def totals(self) -> dict:
        loops = sum(f.total_loops for f in self.files)
        bounded = sum(f.bounded for f in self.files)
        constrained = sum(f.constrained for f in self.files)
        return {
            "files": len(self.files),
            "loops": loops,
            "bounded": bounded,
            "constrained": constrained,
            "pct_bounded": 100.0 * bounded / loops if loops else None,
            "pct_constrained": 100.0 * constrained / loops if loops else None,
            "millis": sum(f.millis for f in self.files),
        }

    def to_json(self) -> dict:
        out = {"files": [f.to_json() for f in self.files],
               "totals": self.totals()}
        if self.options is not None:
            out["options"] = {
                "mode": self.options.mode,
                "inline_depth": self.options.inline_depth,
                "solver_budget": self.options.solver_budget,
                "enum_cap": self.options.enum_cap,
            }
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=False)


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------

def analyze_program(program: Program, options: Optional[AnalyzeOptions] = None,
                    filename: str = "<string>") -> FileReport:
    options = options or AnalyzeOptions()
    t0 = time.perf_counter()
    itv = interval.analyze(program, inline_depth=options.inline_depth)
    results = looprec.find_loops(program, itv)

    flows: dict[int, tuple[flowcon.FlowResult, float]] = {}
    if options.mode in ("constraints", "both"):
        flows = flowcon.analyze_program_flows(results, itv,
                                              **options.solver_opts())

    report = FileReport(file=filename)
    for r in results:
        if isinstance(r, Rejection):
            record = LoopRecord(r.loop_label, _function_of(program, r.loop_label),
                                r.span.line, rejection=r)
        else:
            record = LoopRecord(r.loop_label, r.function, _line_of(program, r),
                                descriptor=r)
            if options.mode in ("bounds", "both"):
                record.bound, record.bound_millis = \
                    loopbound.timed_loop_bound(r, itv)
            if r.loop_label in flows:
                record.flow, record.flow_millis = flows[r.loop_label]
        report.loops.append(record)
    report.millis = (time.perf_counter() - t0) * 1000.0
    return report


def _line_of(program: Program, d: LoopDescriptor) -> int:
    stmt = program.statement_by_label(d.loop_label)
    return stmt.span.line if stmt is not None else 0


def _function_of(program: Program, label: int) -> str:
    for fn in program.functions:
        if any(s.label == label for s in walk_stmts(fn.body)):
            return fn.name
    return "?"


def analyze_source(text: str, options: Optional[AnalyzeOptions] = None,
                   filename: str = "<string>"
                   ) -> tuple[FileReport, Optional[Program]]:
    try:
        program = parse(text, filename)
    except ParseError as exc:
        return FileReport(file=filename, parse_error=str(exc)), None
    return analyze_program(program, options, filename), program


def analyze_file(path: str, options: Optional[AnalyzeOptions] = None
                 ) -> tuple[FileReport, Optional[Program]]:
    with open(path, encoding="utf-8") as fh:
        return analyze_source(fh.read(), options, filename=path)


def run(paths: list[str], options: Optional[AnalyzeOptions] = None
        ) -> tuple[AnalysisReport, dict[str, Program]]:
    """Analyze every file; parse errors are reported per file and do not
    stop the run."""
    report = AnalysisReport(options=options or AnalyzeOptions())
    programs: dict[str, Program] = {}
    for path in paths:
        file_report, program = analyze_file(path, options)
        report.files.append(file_report)
        if program is not None:
            programs[path] = program
    return report, programs


# ---------------------------------------------------------------------------
# Annotated source output
# ---------------------------------------------------------------------------

def annotations_for(report: FileReport) -> list[tuple[int, str]]:
    """Pragma payloads for every analyzed loop of one file."""
    out: list[tuple[int, str]] = []
    for record in report.loops:
        if record.is_bounded:
            out.append((record.label, f"loopbound({record.bound.n})"))
        if record.is_constrained:
            flow = record.flow
            out.append((record.label,
                        f"flowconstraint({record.label}, {flow.n})"))
    return out


def annotated_source(program: Program, report: FileReport) -> str:
    return unparse(program, annotations_for(report))


# ---------------------------------------------------------------------------
# Plain-text rendering
# ---------------------------------------------------------------------------

def _pct_text(pct: Optional[float]) -> str:
    return "--" if pct is None else f"{pct:.1f}%"


def format_report(report: AnalysisReport) -> str:
    lines: list[str] = []
    header = (f"{'File':<32} {'Loops':>5} {'Loopbounds':>11} "
              f"{'Constraints':>12} {'Millis':>8}")
    lines.append(header)
    lines.append("-" * len(header))
    for f in report.files:
        if f.parse_error:
            lines.append(f"{f.file:<32} parse error: {f.parse_error}")
            continue
        lines.append(f"{f.file:<32} {f.total_loops:>5} "
                     f"{_pct_text(f.pct_bounded()):>11} "
                     f"{_pct_text(f.pct_constrained()):>12} "
                     f"{f.millis:>8.1f}")
    totals = report.totals()
    lines.append("-" * len(header))
    lines.append(f"{'Total':<32} {totals['loops']:>5} "
                 f"{_pct_text(totals['pct_bounded']):>11} "
                 f"{_pct_text(totals['pct_constrained']):>12} "
                 f"{totals['millis']:>8.1f}")
    return "\n".join(lines) + "\n"


def format_loop_details(report: FileReport) -> str:
    lines = []
    for r in report.loops:
        parts = [f"  loop @{r.line} (label {r.label}, {r.function})"]
        if r.rejection is not None:
            parts.append(f"rejected {r.rejection.reason.value}: "
                         f"{r.rejection.detail}")
        else:
            if r.bound is not None:
                parts.append(f"bound: {r.bound}")
            if r.flow is not None:
                if isinstance(r.flow, flowcon.FlowConstraint):
                    exact = "exact" if r.flow.exact else "over-approx"
                    parts.append(f"flow: {r.flow.n} ({exact}, "
                                 f"depth {r.flow.depth})")
                else:
                    parts.append(f"flow rejected: {r.flow.detail}")
        lines.append(" - ".join(parts))
    return "\n".join(lines)
