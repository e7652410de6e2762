"""Flow constraints: counting the iteration space of a loop nest.

Every loop of a nest contributes one solver variable standing for the
values its counter takes at body entries, bounded by the translated init
and exit expressions plus a congruence tying consecutive values to the
stride:

    direction   init              test              step
    up          I >= InitExpr     I <= TestExpr     (I - InitExpr) mod c = 0
    down        I <= InitExpr     I >= TestExpr     (I - InitExpr) mod c = 0

Expressions are translated recursively: outer iteration variables map to
their solver variables, and anything else is replaced by the interval
endpoint that enlarges the iteration space (sound, possibly inexact).
The solution count of the variables up to depth k is then an upper bound
on how often the depth-k loop body runs per execution of the scope holding
the outermost loop.

Stride handling: the congruence needs a constant stride and a lossless
init translation. When the stride exceeds 1 but the init is only known as
an interval, the congruence is dropped and the init widens to its interval
bound; the count is then an overestimation bounded by a factor of
(init_max - init_min), and the result is flagged inexact.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional, Union

from .ast_nodes import BinOp, Expr, Lit, Unary, Var
from .fdsolver import (
    BudgetExceededError, Constraint, Csp, LinExpr, UnboundedDomainError,
)
from .interval import (
    Interval, IntervalResult, eval_interval, is_finite,
)
from .loopbound import BoundResult
from .looprec import FindResult, LoopDescriptor, Rejection


@dataclass(frozen=True)
class FlowConstraint:
    loop_label: int
    n: int
    relative_to: int          # label of the scope holding the outermost loop
    exact: bool
    depth: int


@dataclass(frozen=True)
class FlowRejection:
    loop_label: int
    detail: str


FlowResult = Union[FlowConstraint, FlowRejection]


@dataclass
class NestTranslation:
    csp: Csp
    var_by_name: dict[str, int] = field(default_factory=dict)
    var_by_label: dict[int, int] = field(default_factory=dict)
    exact_by_label: dict[int, bool] = field(default_factory=dict)


class _NotLinear(Exception):
    """Expression mixes iteration variables non-linearly."""


class _NoBound(Exception):
    """Endpoint substitution hit an infinite bound; the constraint is
    dropped (which can only enlarge the counted space)."""


# ---------------------------------------------------------------------------
# Expression translation
# ---------------------------------------------------------------------------

class _Translator:
    """Translate an AST expression to a LinExpr over solver variables.

    ``enlarging='lo'`` means a non-iteration subexpression is replaced by
    the lower end of its interval (appropriate in a lower-bounding
    position), and 'hi' the upper end; subtraction and negative
    coefficients flip the direction. ``lossy`` records whether any
    substitution happened.
    """

    def __init__(self, iter_vars: dict[str, int], state) -> None:
        self.iter_vars = iter_vars
        self.state = state
        self.lossy = False

    def _endpoint(self, e: Expr, enlarging: str) -> LinExpr:
        itv = eval_interval(e, self.state) if not self.state.is_bottom \
            else Interval(1, 0)
        if itv.is_bottom:
            raise _NoBound(f"{e!r} is unreachable")
        bound = itv.lo if enlarging == "lo" else itv.hi
        if not is_finite(bound):
            raise _NoBound(f"{e!r} has no finite bound")
        self.lossy = True
        return LinExpr.const(int(bound))

    def translate(self, e: Expr, enlarging: str) -> LinExpr:
        if isinstance(e, Lit):
            return LinExpr.const(e.value)
        if isinstance(e, Var):
            if e.name in self.iter_vars:
                return LinExpr.var(self.iter_vars[e.name])
            return self._endpoint(e, enlarging)
        free = e.variables() & self.iter_vars.keys()
        if not free:
            return self._endpoint(e, enlarging)
        flip = {"lo": "hi", "hi": "lo"}
        if isinstance(e, Unary) and e.op == "-":
            return self.translate(e.operand, flip[enlarging]).scaled(-1)
        if isinstance(e, BinOp) and e.op == "+":
            return (self.translate(e.left, enlarging)
                    + self.translate(e.right, enlarging))
        if isinstance(e, BinOp) and e.op == "-":
            return (self.translate(e.left, enlarging)
                    - self.translate(e.right, flip[enlarging]))
        if isinstance(e, BinOp) and e.op == "*":
            for factor, other in ((e.left, e.right), (e.right, e.left)):
                k = self._constant_of(factor)
                if k is None:
                    continue
                direction = enlarging if k >= 0 else flip[enlarging]
                return self.translate(other, direction).scaled(k)
            raise _NotLinear(f"non-constant product over iteration variables")
        raise _NotLinear(
            f"{type(e).__name__} is not linear in iteration variables")

    def _constant_of(self, e: Expr) -> Optional[int]:
        if e.variables() & self.iter_vars.keys():
            return None
        if self.state.is_bottom:
            return None
        itv = eval_interval(e, self.state)
        if itv.is_singleton() and is_finite(itv.lo):
            return int(itv.lo)
        return None

    def translate_exact(self, e: Expr) -> Optional[LinExpr]:
        """Lossless translation or None (used for congruence init parts)."""
        saved = self.lossy
        self.lossy = False
        try:
            out = self.translate(e, "lo")
            return None if self.lossy else out
        except (_NotLinear, _NoBound):
            return None
        finally:
            self.lossy = saved


# ---------------------------------------------------------------------------
# Nest translation
# ---------------------------------------------------------------------------

def stride_overestimation_applies(d: LoopDescriptor, itv: IntervalResult,
                                  outer_vars: tuple[str, ...] = ()) -> bool:
    """True when |step| > 1 but the init is not exactly representable over
    outer iteration variables, so the congruence must be dropped (bounded
    overestimation, see module docstring)."""
    head = itv.head(d.loop_label)
    if head.is_bottom:
        return False
    step = eval_interval(d.step_expr, head)
    if step.is_singleton() and is_finite(step.lo) and abs(int(step.lo)) <= 1:
        return False
    fake_ids = {name: k for k, name in enumerate(outer_vars)}
    tr = _Translator(fake_ids, itv.before(d.init_label))
    return tr.translate_exact(d.init_expr) is None


def translate_nest(nest: list[LoopDescriptor], itv: IntervalResult,
                   propagation_budget: Optional[int] = None,
                   node_cap: Optional[int] = None) -> Union[NestTranslation, FlowRejection]:
    """Build the CSP for a chain of loops, outermost first.

    Preconditions: every descriptor is normalized (<= / >=) and each loop
    after the first is directly nested in its predecessor.
    """
    kwargs = {}
    if node_cap is not None:
        kwargs["node_cap"] = node_cap
    csp = Csp(propagation_budget, **kwargs)
    out = NestTranslation(csp)
    iter_vars: dict[str, int] = {}
    for d in nest:
        rejection = _translate_loop(d, itv, csp, iter_vars, out)
        if rejection is not None:
            return rejection
    return out


def _translate_loop(d: LoopDescriptor, itv: IntervalResult, csp: Csp,
                    iter_vars: dict[str, int],
                    out: NestTranslation) -> Optional[FlowRejection]:
    up = d.direction == "up"
    head = itv.head(d.loop_label)
    init_state = itv.before(d.init_label)
    var = csp.new_var()
    exact = True

    # init: lower bound for up loops, upper bound for down loops.
    # A post() reporting inconsistency just means an empty iteration
    # space, which counting reports as 0.
    init_tr = _Translator(iter_vars, init_state)
    try:
        init_lin = init_tr.translate(d.init_expr, "lo" if up else "hi")
        init_kind = "ge" if up else "le"
        csp.post(Constraint(init_kind, LinExpr.var(var), init_lin))
    except _NotLinear as exc:
        return FlowRejection(d.loop_label, f"init: {exc}")
    except _NoBound:
        return FlowRejection(
            d.loop_label, "init expression has no usable interval bound")
    exact = exact and not init_tr.lossy

    # exit conditions: the primary plus any extra normalized conjuncts
    for cond in (d.condition(), *d.extra_conditions):
        cond_tr = _Translator(iter_vars, head)
        try:
            enlarging = "hi" if cond.rel == "<=" else "lo"
            bound_lin = cond_tr.translate(cond.bound, enlarging)
            kind = "le" if cond.rel == "<=" else "ge"
            csp.post(Constraint(kind, LinExpr.var(var), bound_lin))
            exact = exact and not cond_tr.lossy
        except _NotLinear as exc:
            if cond is d.condition():
                return FlowRejection(d.loop_label, f"exit condition: {exc}")
            exact = False  # dropped early exit only enlarges the space
        except _NoBound:
            if cond is d.condition():
                return FlowRejection(
                    d.loop_label, "exit bound has no usable interval bound")
            exact = False

    # congruence (I - InitExpr) mod |c| = 0: needs a constant stride and a
    # lossless init; otherwise apply the stride-overestimation rule.
    step_itv = eval_interval(d.step_expr, head) if not head.is_bottom \
        else Interval(1, 0)
    stride: Optional[int] = None
    if step_itv.is_singleton() and is_finite(step_itv.lo):
        stride = abs(int(step_itv.lo))
    exact_init = _Translator(iter_vars, init_state).translate_exact(d.init_expr)
    if stride is not None and exact_init is not None:
        # posted even at stride 1 (where it constrains nothing), mirroring
        # the init/test/step triple the nest translation always produces
        csp.post(Constraint.congruence_zero(
            LinExpr.var(var) - exact_init, stride))
    else:
        if stride is None or stride > 1:
            exact = False  # congruence dropped: bounded overestimation

    iter_vars[d.iter_var] = var
    out.var_by_name[d.iter_var] = var
    out.var_by_label[d.loop_label] = var
    out.exact_by_label[d.loop_label] = exact
    return None


# ---------------------------------------------------------------------------
# Counting
# ---------------------------------------------------------------------------

def analyze_nest(nest: list[LoopDescriptor], itv: IntervalResult,
                 propagation_budget: Optional[int] = None,
                 node_cap: Optional[int] = None) -> list[FlowResult]:
    """One flow constraint per nest depth, outermost first.

    The depth-k count is taken over the first k variables of a fresh
    translation, so each reported n is an upper bound for the depth-k
    body relative to the scope of the outermost loop.
    """
    results: list[FlowResult] = []
    relative_to = nest[0].scope_label
    for depth in range(1, len(nest) + 1):
        prefix = nest[:depth]
        d = prefix[-1]
        translation = translate_nest(prefix, itv, propagation_budget, node_cap)
        if isinstance(translation, FlowRejection):
            results.append(translation)
            continue
        csp = translation.csp
        try:
            n = csp.count_solutions(list(translation.var_by_label.values()))
        except UnboundedDomainError:
            results.append(FlowRejection(d.loop_label,
                                         "iteration space is unbounded"))
            continue
        except BudgetExceededError:
            results.append(FlowRejection(d.loop_label,
                                         "enumeration budget exceeded"))
            continue
        exact = all(translation.exact_by_label[x.loop_label] for x in prefix)
        results.append(FlowConstraint(d.loop_label, n, relative_to, exact, depth))
    return results


def degenerate_to_loop_bound(d: LoopDescriptor, itv: IntervalResult,
                             **solver_opts) -> BoundResult:
    """Depth-1 flow analysis reported in the loop-bound result type."""
    outcome = analyze_nest([d], itv, **solver_opts)[0]
    if isinstance(outcome, FlowConstraint):
        return BoundResult.bound(outcome.n)
    if "unbounded" in outcome.detail:
        return BoundResult.unbounded(outcome.detail)
    return BoundResult.not_applicable(outcome.detail)


# ---------------------------------------------------------------------------
# Whole-program orchestration
# ---------------------------------------------------------------------------

def chains_from_results(results: list[FindResult]) -> dict[int, Union[list[LoopDescriptor], FlowRejection]]:
    """For every accepted loop, its ancestor chain (outermost first), or a
    rejection when some enclosing loop is itself not analyzable."""
    by_label: dict[int, FindResult] = {r.loop_label: r for r in results}
    out: dict[int, Union[list[LoopDescriptor], FlowRejection]] = {}
    for r in results:
        if isinstance(r, Rejection):
            continue
        chain: list[LoopDescriptor] = [r]
        cursor = r
        broken: Optional[FlowRejection] = None
        while cursor.parent is not None:
            above = by_label.get(cursor.parent)
            if not isinstance(above, LoopDescriptor):
                broken = FlowRejection(
                    r.loop_label,
                    f"enclosing loop at label {cursor.parent} is not "
                    "iteration-variable based")
                break
            chain.append(above)
            cursor = above
        out[r.loop_label] = broken if broken else list(reversed(chain))
    return out


def analyze_program_flows(results: list[FindResult], itv: IntervalResult,
                          propagation_budget: Optional[int] = None,
                          node_cap: Optional[int] = None
                          ) -> dict[int, tuple[FlowResult, float]]:
    """Flow constraint (or rejection) with elapsed milliseconds per
    accepted loop."""
    flows: dict[int, tuple[FlowResult, float]] = {}
    for label, chain in chains_from_results(results).items():
        t0 = time.perf_counter()
        if isinstance(chain, FlowRejection):
            flows[label] = (chain, (time.perf_counter() - t0) * 1000.0)
            continue
        outcome = analyze_nest(chain, itv, propagation_budget, node_cap)[-1]
        flows[label] = (outcome, (time.perf_counter() - t0) * 1000.0)
    return flows
