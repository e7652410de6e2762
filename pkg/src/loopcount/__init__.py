"""loopcount: loop bound and flow constraint analysis for a C subset.

The pipeline: parse (frontend) -> interval analysis (interval) -> loop
recognition with safety checks (looprec) -> per-loop bounds (loopbound)
and nest-level flow constraints via the finite-domain solver (fdsolver,
flowcon). The driver modules (report, benchmark, cli) orchestrate runs,
and interp provides the concrete execution oracle used by the test suite.
"""

from .ast_nodes import Program
from .frontend import ParseError, UnknownLabelError, parse, parse_file, unparse
from .interp import ExecutionProfile, interpret
from .interval import (
    AbstractBool, AbstractState, Interval, analyze, combine, eval_expr,
    transfer, widen_interval,
)
from .fdsolver import (
    BudgetExceededError, Constraint, Csp, FdDomain, LinExpr,
    UnboundedDomainError, domain_count, make_domain, parse_csp,
)
from .looprec import LoopDescriptor, RejectReason, Rejection, ValueClass, find_loops
from .loopbound import BoundResult, LoopParams, derive_params, evaluate_bound, loop_bound, simplify
from .flowcon import (
    FlowConstraint, FlowRejection, analyze_nest, degenerate_to_loop_bound,
    translate_nest,
)
from .report import AnalysisReport, AnalyzeOptions, analyze_file, analyze_source, run

__version__ = "0.1.0"

__all__ = [
    "AbstractBool", "AbstractState", "AnalysisReport", "AnalyzeOptions",
    "BoundResult", "BudgetExceededError", "Constraint", "Csp",
    "ExecutionProfile", "FdDomain", "FlowConstraint", "FlowRejection",
    "Interval", "LinExpr", "LoopDescriptor", "LoopParams", "ParseError",
    "Program", "RejectReason", "Rejection", "UnboundedDomainError",
    "UnknownLabelError", "ValueClass", "analyze", "analyze_file",
    "analyze_nest", "analyze_source", "combine", "degenerate_to_loop_bound",
    "derive_params", "domain_count", "eval_expr", "evaluate_bound",
    "find_loops", "interpret", "loop_bound", "make_domain", "parse",
    "parse_csp", "parse_file", "run", "simplify", "transfer",
    "translate_nest", "unparse", "widen_interval",
]
