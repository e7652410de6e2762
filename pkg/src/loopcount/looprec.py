"""Recognition of iteration-variable based loops.

A loop qualifies when it has an initialization ``i = a`` (the for-init, or
the statement immediately preceding a while), at least one exit comparison
``i rel b`` among the top-level conjuncts of its condition, and exactly one
monotone step ``i = i + c`` / ``i = i - c``. Qualifying loops must then pass
four safety conditions, checked in order with the first failure reported:

  C1  the counter is written nowhere else inside the loop
  C2  the counter's address is never taken in its scope
  C3  the intervals of a and b are disjoint (or touch in one value), the
      step's sign is unambiguous, and b - a moves the same way as the step
  C4  the exit relation induces a partial order; < and > are rewritten to
      <= / >= by adjusting b, while == and != additionally need the
      termination proof (b - a) mod c == 0 over constant a, b, c

Descriptors returned by ``find_loops`` are already normalized: their
relation is <= (up) or >= (down).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

from .ast_nodes import (
    Assign, BinOp, Block, CallStmt, COMPARISONS, Decl, Expr, Function, If,
    Lit, Loop, Program, SourceSpan, Stmt, Unary, Var, stmt_exprs, walk_exprs,
    walk_stmts,
)
from .interval import (
    AbstractState, Interval, IntervalResult, eval_interval, is_finite,
)


class ValueClass(Enum):
    """How an expression behaves across the iterations of one loop."""
    CONSTANT = "constant"            # loop invariant with a singleton interval
    LOOP_INVARIANT = "loop-invariant"
    VARIABLE = "variable"


class RejectReason(Enum):
    NOT_ITERATION_VARIABLE_BASED = "not-iteration-variable-based"
    C1 = "C1"
    C2 = "C2"
    C3 = "C3"
    C4 = "C4"


@dataclass(frozen=True)
class Rejection:
    loop_label: int
    reason: RejectReason
    detail: str
    span: SourceSpan


@dataclass(frozen=True)
class Condition:
    """One normalized exit comparison ``i rel bound``."""
    rel: str
    bound: Expr


@dataclass(frozen=True)
class LoopDescriptor:
    loop_label: int                 # l2: the loop head / condition
    iter_var: str
    init_label: int                 # l1
    init_expr: Expr                 # a
    cond_label: int                 # same statement as loop_label
    rel: str                        # "<=" (up) or ">=" (down) once normalized
    bound_expr: Expr                # b
    step_label: int                 # l3
    step_expr: Expr                 # c (signed; negative for down loops)
    direction: str                  # "up" | "down"
    classes: tuple[ValueClass, ValueClass, ValueClass]  # of a, b, c
    nesting_depth: int
    parent: Optional[int]           # enclosing loop label, if any
    scope_label: int                # enclosing block of the loop statement
    function: str
    extra_conditions: tuple[Condition, ...] = ()
    written: frozenset[str] = frozenset()  # scalars possibly written in the loop

    def condition(self) -> Condition:
        return Condition(self.rel, self.bound_expr)

    def is_invariant_expr(self, e: Expr) -> bool:
        """Loop invariance of an arbitrary expression over this loop."""
        if _has_opaque_reads(e):
            return False
        return not (e.variables() & self.written)


FindResult = Union[LoopDescriptor, Rejection]


# ---------------------------------------------------------------------------
# Syntactic helpers
# ---------------------------------------------------------------------------

def split_conjuncts(e: Expr) -> list[Expr]:
    """Flatten top-level && into a list; anything else is a single conjunct."""
    if isinstance(e, BinOp) and e.op == "&&":
        return split_conjuncts(e.left) + split_conjuncts(e.right)
    return [e]


def _step_expr_of(stmt: Stmt, var: str) -> Optional[Expr]:
    """The signed step c if stmt has the shape ``var = var + c`` (or - c)."""
    if not isinstance(stmt, Assign) or stmt.name != var:
        return None
    rhs = stmt.value
    if not isinstance(rhs, BinOp) or rhs.op not in ("+", "-"):
        return None
    if isinstance(rhs.left, Var) and rhs.left.name == var:
        other = rhs.right
        if var in other.variables():
            return None
        return other if rhs.op == "+" else Unary("-", other)
    if rhs.op == "+" and isinstance(rhs.right, Var) and rhs.right.name == var:
        other = rhs.left
        if var in other.variables():
            return None
        return other
    return None


def _address_taken_in(e: Expr, var: str) -> bool:
    for sub in walk_exprs(e):
        if (isinstance(sub, Unary) and sub.op == "&"
                and isinstance(sub.operand, Var) and sub.operand.name == var):
            return True
    return False


def _writes_var(stmt: Stmt, var: str, global_names: set[str] = frozenset()) -> bool:
    """Direct write, or a call that may write the variable (any call can
    write a global; address-taken arguments cover the rest)."""
    if isinstance(stmt, (Assign, Decl)) and stmt.name == var:
        return True
    if isinstance(stmt, CallStmt):
        if var in global_names:
            return True
        return any(_address_taken_in(a, var) for a in stmt.args)
    return False


def written_scalars(stmts: list[Stmt], global_names: set[str]) -> set[str]:
    """Scalar names possibly written by any of the statements (calls havoc
    every global and every address-taken argument)."""
    out: set[str] = set()
    for s in stmts:
        if isinstance(s, (Assign, Decl)):
            out.add(s.name)
        elif isinstance(s, CallStmt):
            out |= global_names
            for a in s.args:
                for e in walk_exprs(a):
                    if (isinstance(e, Unary) and e.op == "&"
                            and isinstance(e.operand, Var)):
                        out.add(e.operand.name)
    return out


def _has_opaque_reads(e: Expr) -> bool:
    from .ast_nodes import Index
    return any(isinstance(sub, (Index,)) or
               (isinstance(sub, Unary) and sub.op == "&")
               for sub in walk_exprs(e))


# ---------------------------------------------------------------------------
# Interval-backed helpers
# ---------------------------------------------------------------------------

def sgn_strict(itv: Interval) -> Optional[int]:
    """Sign of an interval when both bounds agree and exclude zero."""
    if itv.is_bottom:
        return None
    if itv.lo > 0:
        return 1
    if itv.hi < 0:
        return -1
    return None


def sgn_directed(itv: Interval) -> Optional[int]:
    """Direction of b - a, tolerating a touch at zero on the far side.

    (0, 9) counts as +1 and (-9, 0) as -1: the one-value overlap that C3
    explicitly permits shows up as a zero endpoint here.
    """
    if itv.is_bottom:
        return None
    if itv.lo >= 0 and itv.hi >= 1:
        return 1
    if itv.hi <= 0 and itv.lo <= -1:
        return -1
    return None


def _overlap_at_most_one(a: Interval, b: Interval) -> bool:
    if a.is_bottom or b.is_bottom:
        return True
    lo = max(a.lo, b.lo)
    hi = min(a.hi, b.hi)
    if lo > hi:
        return True
    return lo == hi


# ---------------------------------------------------------------------------
# Loop context collection
# ---------------------------------------------------------------------------

@dataclass
class LoopContext:
    """A syntactic loop plus everything recognition needs around it."""
    loop: Loop
    function: Function
    parent: Optional[Loop]
    depth: int
    scope_label: int                 # enclosing block's label
    preceding: Optional[Stmt]        # sibling just before (init for whiles)
    body_stmts: list[Stmt] = field(default_factory=list)  # body + step, flat

    def __post_init__(self) -> None:
        self.body_stmts = list(walk_stmts(self.loop.body))
        if self.loop.step is not None:
            self.body_stmts.extend(walk_stmts(self.loop.step))


def collect_loops(program: Program) -> list[LoopContext]:
    """All loops in source order with their nesting context."""
    out: list[LoopContext] = []

    def visit(stmt: Stmt, fn: Function, parent: Optional[Loop], depth: int,
              scope: int, preceding: Optional[Stmt]) -> None:
        if isinstance(stmt, Block):
            prev: Optional[Stmt] = None
            for child in stmt.stmts:
                visit(child, fn, parent, depth, stmt.label, prev)
                prev = child
        elif isinstance(stmt, If):
            visit(stmt.then, fn, parent, depth, scope, None)
            if stmt.orelse is not None:
                visit(stmt.orelse, fn, parent, depth, scope, None)
        elif isinstance(stmt, Loop):
            out.append(LoopContext(stmt, fn, parent, depth, scope, preceding))
            visit(stmt.body, fn, stmt, depth + 1, scope, None)

    for fn in program.functions:
        visit(fn.body, fn, None, 0, fn.body.label, None)
    return out


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------

def classify(e: Expr, ctx: LoopContext, itv: IntervalResult,
             global_names: set[str]) -> ValueClass:
    """Value class of ``e`` with respect to the iterations of ``ctx.loop``."""
    if _has_opaque_reads(e):
        return ValueClass.VARIABLE
    written = written_scalars(ctx.body_stmts, global_names)
    if e.variables() & written:
        return ValueClass.VARIABLE
    state = itv.head(ctx.loop.label)
    if state.is_bottom:
        return ValueClass.LOOP_INVARIANT
    for name in e.variables():
        if not state.get(name).is_singleton():
            return ValueClass.LOOP_INVARIANT
    return ValueClass.CONSTANT


# ---------------------------------------------------------------------------
# Extraction and safety checks
# ---------------------------------------------------------------------------

@dataclass
class _Candidate:
    iter_var: str
    init_stmt: Stmt
    init_expr: Expr
    step_stmt: Stmt
    step_expr: Expr
    conditions: list[tuple[str, Expr]]  # (rel with i on the left, bound expr)


def _extract(ctx: LoopContext) -> Union[_Candidate, Rejection]:
    loop = ctx.loop

    def reject(detail: str) -> Rejection:
        return Rejection(loop.label, RejectReason.NOT_ITERATION_VARIABLE_BASED,
                         detail, loop.span)

    init_stmt = loop.init if loop.init is not None else ctx.preceding
    if init_stmt is None:
        return reject("no initialization statement precedes the loop")
    if isinstance(init_stmt, Assign):
        iter_var, init_expr = init_stmt.name, init_stmt.value
    elif isinstance(init_stmt, Decl) and init_stmt.init is not None:
        iter_var, init_expr = init_stmt.name, init_stmt.init
    else:
        return reject("no initialization of an integer variable")

    conditions: list[tuple[str, Expr]] = []
    for conj in split_conjuncts(loop.cond):
        if not (isinstance(conj, BinOp) and conj.op in COMPARISONS):
            continue
        left, right = conj.left, conj.right
        if isinstance(left, Var) and left.name == iter_var \
                and iter_var not in right.variables():
            conditions.append((conj.op, right))
        elif isinstance(right, Var) and right.name == iter_var \
                and iter_var not in left.variables():
            flipped = {"<": ">", ">": "<", "<=": ">=", ">=": "<=",
                       "==": "==", "!=": "!="}[conj.op]
            conditions.append((flipped, left))
    if not conditions:
        return reject(f"no exit condition on {iter_var!r}")

    # The step must run exactly once per iteration: it is either the
    # for-step or a top-level statement of the loop body. A step buried in
    # an if or an inner loop may not execute on some paths, which would
    # break monotone progress.
    step_stmt: Optional[Stmt] = None
    step_expr: Optional[Expr] = None
    if loop.step is not None and _writes_var(loop.step, iter_var):
        step_expr = _step_expr_of(loop.step, iter_var)
        if step_expr is None:
            return reject(f"step statement does not advance {iter_var!r} "
                          "monotonically")
        step_stmt = loop.step
    else:
        top_level = (loop.body.stmts if isinstance(loop.body, Block)
                     else [loop.body])
        shaped = [(s, _step_expr_of(s, iter_var)) for s in top_level
                  if _step_expr_of(s, iter_var) is not None]
        if not shaped:
            return reject(f"no monotone iteration step on {iter_var!r} "
                          "executed once per iteration")
        if len(shaped) > 1:
            return reject(f"more than one iteration step on {iter_var!r}")
        step_stmt, step_expr = shaped[0]
    return _Candidate(iter_var, init_stmt, init_expr, step_stmt, step_expr,
                      conditions)


def _check_c1(cand: _Candidate, ctx: LoopContext,
              global_names: set[str]) -> Optional[Rejection]:
    for s in ctx.body_stmts:
        if s is cand.step_stmt:
            continue
        if _writes_var(s, cand.iter_var, global_names):
            return Rejection(
                ctx.loop.label, RejectReason.C1,
                f"{cand.iter_var!r} may be written at label {s.label} "
                "inside the loop", s.span)
    return None


def _check_c2(cand: _Candidate, ctx: LoopContext,
              program: Program, global_names: set[str]) -> Optional[Rejection]:
    scopes = (program.functions if cand.iter_var in global_names
              else [ctx.function])
    for fn in scopes:
        for stmt in walk_stmts(fn.body):
            for e in stmt_exprs(stmt):
                if _address_taken_in(e, cand.iter_var):
                    return Rejection(
                        ctx.loop.label, RejectReason.C2,
                        f"address of {cand.iter_var!r} taken at label {stmt.label}",
                        stmt.span)
    return None


@dataclass
class _Directed:
    direction: str
    step_sign: int
    a_itv: Interval
    primary: tuple[str, Expr]
    extras: list[tuple[str, Expr]]


def _difference_interval(bound: Expr, cand: _Candidate, ctx: LoopContext,
                         head: AbstractState,
                         global_names: set[str]) -> Interval:
    """Interval of b - a, computed on the symbolically simplified
    difference so invariant terms cancel (e.g. (n+5) - n is exactly 5 even
    when n itself is unknown)."""
    from .loopbound import simplify
    written = written_scalars(ctx.body_stmts, global_names)

    def invariant(e: Expr) -> bool:
        return not _has_opaque_reads(e) and not (e.variables() & written)

    diff = simplify(BinOp("-", bound, cand.init_expr), invariant)
    return eval_interval(diff, head)


def _check_c3(cand: _Candidate, ctx: LoopContext, itv: IntervalResult,
              global_names: set[str]) -> Union[_Directed, Rejection]:
    loop = ctx.loop

    def reject(detail: str, span: SourceSpan) -> Rejection:
        return Rejection(loop.label, RejectReason.C3, detail, span)

    head = itv.head(loop.label)
    if head.is_bottom:
        return reject("loop head is unreachable", loop.span)
    step_itv = eval_interval(cand.step_expr, head)
    step_sign = sgn_strict(step_itv)
    if step_sign is None:
        return reject(f"step interval {step_itv} has ambiguous sign", loop.span)

    a_state = itv.before(cand.init_stmt.label)
    a_itv = eval_interval(cand.init_expr, a_state) if not a_state.is_bottom \
        else Interval(1, 0)
    if a_itv.is_bottom:
        return reject("initialization is unreachable", loop.span)

    # A condition is direction-consistent when the (simplified) b - a
    # difference strictly moves the step's way; a zero touch on the far
    # side is the one-value overlap the condition explicitly tolerates.
    primary: Optional[tuple[str, Expr]] = None
    extras: list[tuple[str, Expr]] = []
    diffs: list[Interval] = []
    for rel, bound in cand.conditions:
        diff_itv = _difference_interval(bound, cand, ctx, head, global_names)
        diffs.append(diff_itv)
        if sgn_directed(diff_itv) == step_sign and primary is None:
            primary = (rel, bound)
        else:
            extras.append((rel, bound))
    if primary is None:
        b_itv = eval_interval(cand.conditions[0][1], head)
        if not _overlap_at_most_one(a_itv, b_itv):
            return reject(
                f"intervals of init {a_itv} and bound {b_itv} overlap in "
                "more than one value", loop.span)
        return reject(
            f"sgn(b - a) does not match the step direction "
            f"(b - a in {diffs[0]}, step {step_itv})", loop.span)
    direction = "up" if step_sign > 0 else "down"
    return _Directed(direction, step_sign, a_itv, primary, extras)


def _const_value(e: Expr, state: AbstractState) -> Optional[int]:
    v = eval_interval(e, state)
    if v.is_singleton() and is_finite(v.lo):
        return int(v.lo)
    return None


def normalize_condition(rel: str, bound: Expr, direction: str,
                        a_val: Optional[int], c_val: Optional[int],
                        b_state: AbstractState) -> Optional[Condition]:
    """Rewrite one comparison to <= (up) or >= (down); None if impossible."""
    up = direction == "up"
    if rel == "<" and up:
        return Condition("<=", _minus_one(bound))
    if rel == ">" and not up:
        return Condition(">=", _plus_one(bound))
    if rel in ("<=",) and up:
        return Condition("<=", bound)
    if rel in (">=",) and not up:
        return Condition(">=", bound)
    if rel in ("==", "!="):
        b_val = _const_value(bound, b_state)
        if a_val is None or b_val is None or c_val in (None, 0):
            return None
        if (b_val - a_val) % c_val != 0:
            return None
        if rel == "!=":
            target = b_val - (1 if up else -1)
        else:
            # a != b is guaranteed by C3, so an ==-loop never runs its body.
            target = a_val - (1 if up else -1)
        return Condition("<=" if up else ">=", Lit(target))
    return None


def _minus_one(e: Expr) -> Expr:
    if isinstance(e, Lit):
        return Lit(e.value - 1)
    return BinOp("-", e, Lit(1))


def _plus_one(e: Expr) -> Expr:
    if isinstance(e, Lit):
        return Lit(e.value + 1)
    return BinOp("+", e, Lit(1))


def check_safety(cand: _Candidate, ctx: LoopContext, program: Program,
                 itv: IntervalResult,
                 global_names: set[str]) -> Union[LoopDescriptor, Rejection]:
    """Run C1..C4 in order; build the normalized descriptor on success."""
    r = _check_c1(cand, ctx, global_names)
    if r is not None:
        return r
    r = _check_c2(cand, ctx, program, global_names)
    if r is not None:
        return r
    directed = _check_c3(cand, ctx, itv, global_names)
    if isinstance(directed, Rejection):
        return directed

    head = itv.head(ctx.loop.label)
    a_state = itv.before(cand.init_stmt.label)
    a_val = _const_value(cand.init_expr, a_state)
    c_val = _const_value(cand.step_expr, head)

    primary_rel, primary_bound = directed.primary
    primary_norm = normalize_condition(
        primary_rel, primary_bound, directed.direction, a_val, c_val, head)
    if primary_norm is None:
        return Rejection(
            ctx.loop.label, RejectReason.C4,
            f"exit relation {primary_rel!r} cannot be normalized to a "
            "partial order (termination unproven)", ctx.loop.span)

    extra_norm: list[Condition] = []
    for rel, bound in directed.extras:
        norm = normalize_condition(rel, bound, directed.direction,
                                    a_val, c_val, head)
        if norm is None:
            # Early exits that cannot be normalized only shrink the
            # iteration space; dropping them is sound.
            continue
        extra_norm.append(norm)

    classes = (
        classify(cand.init_expr, ctx, itv, global_names),
        classify(primary_norm.bound, ctx, itv, global_names),
        classify(cand.step_expr, ctx, itv, global_names),
    )
    return LoopDescriptor(
        loop_label=ctx.loop.label,
        iter_var=cand.iter_var,
        init_label=cand.init_stmt.label,
        init_expr=cand.init_expr,
        cond_label=ctx.loop.label,
        rel=primary_norm.rel,
        bound_expr=primary_norm.bound,
        step_label=cand.step_stmt.label,
        step_expr=cand.step_expr,
        direction=directed.direction,
        classes=classes,
        nesting_depth=ctx.depth,
        parent=ctx.parent.label if ctx.parent is not None else None,
        scope_label=ctx.scope_label,
        function=ctx.function.name,
        extra_conditions=tuple(extra_norm),
        written=frozenset(written_scalars(ctx.body_stmts, global_names)),
    )


def find_loops(program: Program, itv: IntervalResult) -> list[FindResult]:
    """One descriptor or rejection per syntactic loop, in source order."""
    global_names = {d.name for d in program.globals if d.array_size is None}
    results: list[FindResult] = []
    for ctx in collect_loops(program):
        cand = _extract(ctx)
        if isinstance(cand, Rejection):
            results.append(cand)
            continue
        results.append(check_safety(cand, ctx, program, itv, global_names))
    return results


def descriptors_by_label(results: list[FindResult]) -> dict[int, FindResult]:
    return {r.loop_label: r for r in results}
