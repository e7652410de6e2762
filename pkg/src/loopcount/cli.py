"""Command line interface.

Two modes share one command:

  * file mode:    loopcount file.c [...] [--json out.json] [--annotate]
  * corpus mode:  loopcount --corpus DIR [--out DIR]

Corpus mode writes the coverage table as text/CSV/JSON plus rendered
figures into the output directory. Exit codes: 0 success, 1 parse errors,
2 internal invariant violation.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Optional

from .benchmark import format_table, run_benchmark, write_outputs
from .report import (
    AnalyzeOptions, annotated_source, format_loop_details, format_report, run,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="loopcount",
        description="Loop bound and flow constraint analysis for a C subset")
    parser.add_argument("files", nargs="*", help="source files to analyze")
    parser.add_argument("--corpus", metavar="DIR",
                        help="run the benchmark harness over a corpus directory")
    parser.add_argument("--mode", choices=["bounds", "constraints", "both"],
                        default="both", help="which analyses to run")
    parser.add_argument("--json", metavar="PATH",
                        help="write the JSON report to PATH")
    parser.add_argument("--annotate", action="store_true",
                        help="write <file>.annotated.c with pragma comments")
    parser.add_argument("--out", metavar="DIR", default="loopcount-out",
                        help="output directory for corpus mode "
                             "(default: %(default)s)")
    parser.add_argument("--no-figures", action="store_true",
                        help="skip figure rendering in corpus mode")
    parser.add_argument("--solver-budget", type=int, metavar="N",
                        help="per-propagator firing budget")
    parser.add_argument("--enum-cap", type=int, metavar="N",
                        help="search node cap for counting/enumeration")
    parser.add_argument("--inline-depth", type=int, default=1, metavar="N",
                        help="call inlining depth of the interval analysis")
    parser.add_argument("--details", action="store_true",
                        help="print per-loop results")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    options = AnalyzeOptions(
        mode=args.mode,
        inline_depth=args.inline_depth,
        solver_budget=args.solver_budget,
        enum_cap=args.enum_cap,
    )
    try:
        if args.corpus:
            return _corpus_mode(args, options)
        if not args.files:
            build_parser().print_usage()
            return 1
        return _file_mode(args, options)
    except AssertionError as exc:
        print(f"internal invariant violation: {exc}", file=sys.stderr)
        return 2


def _corpus_mode(args: argparse.Namespace, options: AnalyzeOptions) -> int:
    table = run_benchmark(args.corpus, options)
    print(format_table(table), end="")
    written = write_outputs(table, args.out, figures=not args.no_figures)
    for path in written:
        print(f"wrote {path}")
    if table.parse_errors:
        for err in table.parse_errors:
            print(f"parse error: {err}", file=sys.stderr)
        return 1
    return 0


def _file_mode(args: argparse.Namespace, options: AnalyzeOptions) -> int:
    report, programs = run(args.files, options)
    print(format_report(report), end="")
    if args.details:
        for file_report in report.files:
            if file_report.loops:
                print(f"\n{file_report.file}:")
                print(format_loop_details(file_report))
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(report.dumps())
        print(f"wrote {args.json}")
    if args.annotate:
        for file_report in report.files:
            program = programs.get(file_report.file)
            if program is None:
                continue
            out_path = _annotated_path(file_report.file)
            with open(out_path, "w", encoding="utf-8") as fh:
                fh.write(annotated_source(program, file_report))
            print(f"wrote {out_path}")
    return 1 if report.parse_errors else 0


def _annotated_path(path: str) -> str:
    base, ext = os.path.splitext(path)
    return f"{base}.annotated{ext or '.c'}"


if __name__ == "__main__":
    sys.exit(main())
