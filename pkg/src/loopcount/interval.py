"""Forward interval data-flow analysis with aggressive widening.

The carrier is a map from variable names to integer intervals whose bounds
may be -inf/+inf; a distinguished Bottom state marks unreachable or
not-yet-computed points. Missing variables are implicitly top, so states
stay small and canonical (no top entries, and a bottom binding collapses
the whole state).

Lattice operations:

  * ``combine`` joins pairwise: (min of lows, max of highs)
  * ``widen`` keeps a bound that did not change and jumps a changed bound
    straight to the matching infinity (applied at loop heads from the
    second visit on, so every variable stabilizes after at most two jumps)

Multiplication and division evaluate all four corner products; a two-corner
shortcut is unsound for sign-mixed operands (e.g. (-2,3)*(-5,4) must
include 3*-5 = -15). Division by an interval containing 0 gives top.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import ClassVar, Optional, Union

from .ast_nodes import (
    ArrayAssign, Assign, BinOp, Block, CallStmt, COMPARISONS, Decl, Empty,
    Expr, If, Index, Lit, Loop, Program, Return, Stmt, Unary, Var, walk_exprs,
)
from .interp import c_div

NEG_INF = -math.inf
POS_INF = math.inf

Bound = Union[int, float]  # an int, or one of the two infinities


def is_finite(b: Bound) -> bool:
    return not isinstance(b, float)


# ---------------------------------------------------------------------------
# Guarded bound arithmetic (never produces nan)
# ---------------------------------------------------------------------------

def _badd(a: Bound, b: Bound) -> Bound:
    if is_finite(a) and is_finite(b):
        return a + b
    if a is NEG_INF or b is NEG_INF:
        # callers never add opposite infinities (checked by construction)
        assert a is not POS_INF and b is not POS_INF
        return NEG_INF
    return POS_INF


def _bneg(a: Bound) -> Bound:
    if is_finite(a):
        return -a
    return NEG_INF if a == POS_INF else POS_INF


def _bmul(a: Bound, b: Bound) -> Bound:
    if a == 0 or b == 0:
        return 0
    if is_finite(a) and is_finite(b):
        return a * b
    return POS_INF if (a > 0) == (b > 0) else NEG_INF


def _bdiv(a: Bound, b: Bound) -> Bound:
    """Truncating division for corner evaluation; b is never 0."""
    if not is_finite(a):
        return a if b > 0 else _bneg(a)
    if not is_finite(b):
        return 0
    return c_div(a, b)


# ---------------------------------------------------------------------------
# Intervals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    """Closed integer interval [lo, hi]; lo > hi encodes the empty (bottom)
    interval and is canonicalized so all empties compare equal."""
    lo: Bound
    hi: Bound

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            object.__setattr__(self, "lo", POS_INF)
            object.__setattr__(self, "hi", NEG_INF)

    @property
    def is_bottom(self) -> bool:
        return self.lo > self.hi

    @property
    def is_top(self) -> bool:
        return self.lo == NEG_INF and self.hi == POS_INF

    def contains(self, v: int) -> bool:
        return (not self.is_bottom) and self.lo <= v <= self.hi

    def is_singleton(self) -> bool:
        return not self.is_bottom and self.lo == self.hi

    def __str__(self) -> str:
        if self.is_bottom:
            return "[bot]"
        return f"[{self.lo}, {self.hi}]"


TOP = Interval(NEG_INF, POS_INF)
BOTTOM = Interval(POS_INF, NEG_INF)


def singleton(n: int) -> Interval:
    return Interval(n, n)


class AbstractBool(Enum):
    """Three-valued truth of a condition: (1,1), (0,0), or unknown."""
    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"


def join_intervals(a: Interval, b: Interval) -> Interval:
    if a.is_bottom:
        return b
    if b.is_bottom:
        return a
    return Interval(min(a.lo, b.lo), max(a.hi, b.hi))


def widen_interval(old: Interval, new: Interval) -> Interval:
    """Keep unchanged bounds, jump changed ones to the matching infinity."""
    if old.is_bottom:
        return new
    if new.is_bottom:
        return old
    lo = old.lo if old.lo == new.lo else NEG_INF
    hi = old.hi if old.hi == new.hi else POS_INF
    return Interval(lo, hi)


def interval_add(a: Interval, b: Interval) -> Interval:
    if a.is_bottom or b.is_bottom:
        return BOTTOM
    return Interval(_badd(a.lo, b.lo), _badd(a.hi, b.hi))


def interval_neg(a: Interval) -> Interval:
    if a.is_bottom:
        return BOTTOM
    return Interval(_bneg(a.hi), _bneg(a.lo))


def interval_sub(a: Interval, b: Interval) -> Interval:
    return interval_add(a, interval_neg(b))


def interval_mul(a: Interval, b: Interval) -> Interval:
    if a.is_bottom or b.is_bottom:
        return BOTTOM
    corners = [_bmul(a.lo, b.lo), _bmul(a.lo, b.hi),
               _bmul(a.hi, b.lo), _bmul(a.hi, b.hi)]
    return Interval(min(corners), max(corners))


def interval_div(a: Interval, b: Interval) -> Interval:
    """C-truncating division; a divisor interval containing 0 yields top."""
    if a.is_bottom or b.is_bottom:
        return BOTTOM
    if b.contains(0):
        return TOP
    corners = [_bdiv(a.lo, b.lo), _bdiv(a.lo, b.hi),
               _bdiv(a.hi, b.lo), _bdiv(a.hi, b.hi)]
    return Interval(min(corners), max(corners))


def interval_mod(a: Interval, b: Interval) -> Interval:
    """C remainder: result sign follows the dividend, |r| < max|b|."""
    if a.is_bottom or b.is_bottom:
        return BOTTOM
    if b.contains(0):
        return TOP
    mag = max(abs(b.lo), abs(b.hi))  # may be inf
    lo: Bound = 0
    hi: Bound = 0
    if a.lo < 0:
        lo = a.lo if not is_finite(mag) else max(-(mag - 1), a.lo)
    if a.hi > 0:
        hi = a.hi if not is_finite(mag) else min(mag - 1, a.hi)
    return Interval(lo, hi)


def compare_intervals(op: str, a: Interval, b: Interval) -> AbstractBool:
    if a.is_bottom or b.is_bottom:
        return AbstractBool.UNKNOWN
    if op == "==":
        if a.is_singleton() and b.is_singleton():
            return AbstractBool.TRUE if a.lo == b.lo else AbstractBool.FALSE
        if a.hi < b.lo or a.lo > b.hi:
            return AbstractBool.FALSE
        return AbstractBool.UNKNOWN
    if op == "!=":
        if a.is_singleton() and b.is_singleton():
            return AbstractBool.TRUE if a.lo != b.lo else AbstractBool.FALSE
        if a.hi < b.lo or a.lo > b.hi:
            return AbstractBool.TRUE
        return AbstractBool.UNKNOWN
    if op == "<":
        if a.hi < b.lo:
            return AbstractBool.TRUE
        if a.lo >= b.hi:
            return AbstractBool.FALSE
        return AbstractBool.UNKNOWN
    if op == "<=":
        if a.hi <= b.lo:
            return AbstractBool.TRUE
        if a.lo > b.hi:
            return AbstractBool.FALSE
        return AbstractBool.UNKNOWN
    if op == ">":
        return compare_intervals("<", b, a)
    if op == ">=":
        return compare_intervals("<=", b, a)
    raise ValueError(f"not a comparison: {op}")


# ---------------------------------------------------------------------------
# Abstract states
# ---------------------------------------------------------------------------

class AbstractState:
    """Bottom, or a finite map var -> Interval (missing vars are top)."""

    __slots__ = ("env", "_bottom")

    BOTTOM: ClassVar["AbstractState"]

    def __init__(self, env: Optional[dict[str, Interval]] = None,
                 _bottom: bool = False):
        self._bottom = _bottom
        self.env: dict[str, Interval] = {}
        if not _bottom and env:
            for k, v in env.items():
                if v.is_bottom:
                    self._bottom = True
                    self.env = {}
                    break
                if not v.is_top:
                    self.env[k] = v

    @property
    def is_bottom(self) -> bool:
        return self._bottom

    def get(self, name: str) -> Interval:
        if self._bottom:
            return BOTTOM
        return self.env.get(name, TOP)

    def set(self, name: str, itv: Interval) -> "AbstractState":
        if self._bottom:
            return self
        if itv.is_bottom:
            return AbstractState.BOTTOM
        env = dict(self.env)
        if itv.is_top:
            env.pop(name, None)
        else:
            env[name] = itv
        return AbstractState(env)

    def drop(self, names) -> "AbstractState":
        if self._bottom:
            return self
        env = {k: v for k, v in self.env.items() if k not in names}
        return AbstractState(env)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AbstractState):
            return NotImplemented
        if self._bottom or other._bottom:
            return self._bottom == other._bottom
        return self.env == other.env

    def __hash__(self) -> int:
        if self._bottom:
            return hash("bottom")
        return hash(frozenset(self.env.items()))

    def __repr__(self) -> str:
        if self._bottom:
            return "AbstractState(bottom)"
        inner = ", ".join(f"{k}: {v}" for k, v in sorted(self.env.items()))
        return f"AbstractState({{{inner}}})"


AbstractState.BOTTOM = AbstractState(_bottom=True)


def combine(s1: AbstractState, s2: AbstractState) -> AbstractState:
    """Control-flow join: pairwise interval join; Bottom is the identity."""
    if s1.is_bottom:
        return s2
    if s2.is_bottom:
        return s1
    env: dict[str, Interval] = {}
    for name in s1.env.keys() & s2.env.keys():
        env[name] = join_intervals(s1.env[name], s2.env[name])
    return AbstractState(env)


def widen_state(old: AbstractState, new: AbstractState) -> AbstractState:
    if old.is_bottom:
        return new
    if new.is_bottom:
        return old
    env: dict[str, Interval] = {}
    for name in old.env.keys() & new.env.keys():
        env[name] = widen_interval(old.env[name], new.env[name])
    return AbstractState(env)


# ---------------------------------------------------------------------------
# Expression evaluation
# ---------------------------------------------------------------------------

def _as_interval(v: Union[Interval, AbstractBool]) -> Interval:
    if isinstance(v, Interval):
        return v
    if v is AbstractBool.TRUE:
        return singleton(1)
    if v is AbstractBool.FALSE:
        return singleton(0)
    return Interval(0, 1)  # comparisons evaluate to 0 or 1 in C


def _as_bool(v: Union[Interval, AbstractBool]) -> AbstractBool:
    if isinstance(v, AbstractBool):
        return v
    if v.is_singleton() and v.lo == 0:
        return AbstractBool.FALSE
    if not v.contains(0):
        return AbstractBool.TRUE
    return AbstractBool.UNKNOWN


_NOT = {AbstractBool.TRUE: AbstractBool.FALSE,
        AbstractBool.FALSE: AbstractBool.TRUE,
        AbstractBool.UNKNOWN: AbstractBool.UNKNOWN}


def eval_expr(e: Expr, state: AbstractState) -> Union[Interval, AbstractBool]:
    """Abstract evaluation: arithmetic yields an Interval, comparisons and
    logical operators an AbstractBool. The state must not be Bottom."""
    assert not state.is_bottom, "eval_expr on bottom state"
    if isinstance(e, Lit):
        return singleton(e.value)
    if isinstance(e, Var):
        return state.get(e.name)
    if isinstance(e, Index):
        return TOP  # arrays are opaque
    if isinstance(e, Unary):
        if e.op == "-":
            return interval_neg(_as_interval(eval_expr(e.operand, state)))
        if e.op == "!":
            return _NOT[_as_bool(eval_expr(e.operand, state))]
        return TOP  # '&': addresses are not tracked
    if isinstance(e, BinOp):
        if e.op == "&&":
            a = _as_bool(eval_expr(e.left, state))
            b = _as_bool(eval_expr(e.right, state))
            if AbstractBool.FALSE in (a, b):
                return AbstractBool.FALSE
            if a is AbstractBool.TRUE and b is AbstractBool.TRUE:
                return AbstractBool.TRUE
            return AbstractBool.UNKNOWN
        if e.op == "||":
            a = _as_bool(eval_expr(e.left, state))
            b = _as_bool(eval_expr(e.right, state))
            if AbstractBool.TRUE in (a, b):
                return AbstractBool.TRUE
            if a is AbstractBool.FALSE and b is AbstractBool.FALSE:
                return AbstractBool.FALSE
            return AbstractBool.UNKNOWN
        if e.op in COMPARISONS:
            a = _as_interval(eval_expr(e.left, state))
            b = _as_interval(eval_expr(e.right, state))
            return compare_intervals(e.op, a, b)
        a = _as_interval(eval_expr(e.left, state))
        b = _as_interval(eval_expr(e.right, state))
        if e.op == "+":
            return interval_add(a, b)
        if e.op == "-":
            return interval_sub(a, b)
        if e.op == "*":
            return interval_mul(a, b)
        if e.op == "/":
            return interval_div(a, b)
        if e.op == "%":
            return interval_mod(a, b)
    raise TypeError(f"cannot evaluate {e!r}")


def eval_interval(e: Expr, state: AbstractState) -> Interval:
    if state.is_bottom:
        return BOTTOM
    return _as_interval(eval_expr(e, state))


def eval_cond(e: Expr, state: AbstractState) -> AbstractBool:
    if state.is_bottom:
        return AbstractBool.UNKNOWN
    return _as_bool(eval_expr(e, state))


# ---------------------------------------------------------------------------
# Branch refinement
# ---------------------------------------------------------------------------

_NEGATED = {"<": ">=", ">": "<=", "<=": ">", ">=": "<", "==": "!=", "!=": "=="}
_FLIPPED = {"<": ">", ">": "<", "<=": ">=", ">=": "<=", "==": "==", "!=": "!="}


def _clamp(state: AbstractState, name: str, rel: str, b: Interval) -> AbstractState:
    """Narrow x's interval given that ``x rel e`` holds, where b = itv(e)."""
    if b.is_bottom:
        return state
    x = state.get(name)
    if x.is_bottom:
        return AbstractState.BOTTOM
    lo, hi = x.lo, x.hi
    if rel == "<":
        if is_finite(b.hi):
            hi = min(hi, b.hi - 1)
    elif rel == "<=":
        hi = min(hi, b.hi)
    elif rel == ">":
        if is_finite(b.lo):
            lo = max(lo, b.lo + 1)
    elif rel == ">=":
        lo = max(lo, b.lo)
    elif rel == "==":
        lo, hi = max(lo, b.lo), min(hi, b.hi)
    else:  # '!=' gives no single-interval refinement
        return state
    return state.set(name, Interval(lo, hi))


def refine(cond: Expr, state: AbstractState, branch: bool) -> AbstractState:
    """State on the given edge of a branch on ``cond``.

    Statically excluded edges become Bottom. Comparisons between a variable
    and an evaluable expression clamp the variable's interval; compound
    conditions (&&, ||) are opaque apart from the static check.
    """
    if state.is_bottom:
        return state
    truth = eval_cond(cond, state)
    if branch and truth is AbstractBool.FALSE:
        return AbstractState.BOTTOM
    if not branch and truth is AbstractBool.TRUE:
        return AbstractState.BOTTOM
    if isinstance(cond, Unary) and cond.op == "!":
        return refine(cond.operand, state, not branch)
    if isinstance(cond, BinOp) and cond.op in COMPARISONS:
        rel = cond.op if branch else _NEGATED[cond.op]
        left, right = cond.left, cond.right
        if isinstance(left, Var):
            return _clamp(state, left.name, rel, eval_interval(right, state))
        if isinstance(right, Var):
            return _clamp(state, right.name, _FLIPPED[rel],
                          eval_interval(left, state))
    return state


# ---------------------------------------------------------------------------
# Transfer functions
# ---------------------------------------------------------------------------

def transfer(stmt: Stmt, state: AbstractState, edge: str = "fall") -> AbstractState:
    """Single-statement transfer. ``edge`` is "fall" for straight-line
    statements and "true"/"false" for the branch edges of if/loop
    conditions. Bottom in, bottom out."""
    if state.is_bottom:
        return state
    if isinstance(stmt, (Assign, Decl)) and edge == "fall":
        if isinstance(stmt, Decl):
            if stmt.array_size is not None:
                return state
            value = TOP if stmt.init is None else eval_interval(stmt.init, state)
            return state.set(stmt.name, value)
        return state.set(stmt.name, eval_interval(stmt.value, state))
    if isinstance(stmt, (If, Loop)) and edge in ("true", "false"):
        return refine(stmt.cond, state, edge == "true")
    if isinstance(stmt, (ArrayAssign, Empty, Block, Return, CallStmt, If, Loop)):
        return state
    raise TypeError(f"no transfer for {stmt!r} on edge {edge!r}")


# ---------------------------------------------------------------------------
# Whole-program analysis
# ---------------------------------------------------------------------------

class IntervalResult:
    """States before/after every labeled statement, plus the widened head
    state of every loop. Points recorded from multiple contexts (e.g. a
    function analyzed on its own and inlined at a call site) are joined."""

    def __init__(self) -> None:
        self.states: dict[tuple[int, str], AbstractState] = {}

    def _get(self, label: int, point: str) -> AbstractState:
        return self.states.get((label, point), AbstractState.BOTTOM)

    def before(self, label: int) -> AbstractState:
        return self._get(label, "before")

    def after(self, label: int) -> AbstractState:
        return self._get(label, "after")

    def head(self, label: int) -> AbstractState:
        return self._get(label, "head")

    def record(self, label: int, point: str, state: AbstractState) -> None:
        key = (label, point)
        prev = self.states.get(key)
        self.states[key] = state if prev is None else combine(prev, state)

    def to_json(self) -> list[dict]:
        def bound_json(b: Bound):
            if b == NEG_INF:
                return "-inf"
            if b == POS_INF:
                return "+inf"
            return b

        records = []
        for (label, point), state in sorted(self.states.items()):
            env = None
            if not state.is_bottom:
                env = {name: [bound_json(itv.lo), bound_json(itv.hi)]
                       for name, itv in sorted(state.env.items())}
            records.append({"label": label, "point": point, "env": env})
        return records


class _Analyzer:
    def __init__(self, program: Program, inline_depth: int = 1):
        self.program = program
        self.inline_depth = inline_depth
        self.result = IntervalResult()
        self.global_names = {d.name for d in program.globals
                             if d.array_size is None}

    # exec_* return (fall_through_state, joined_return_state)

    def run(self) -> IntervalResult:
        entry = self.program.entry()
        for fn in self.program.functions:
            if fn is entry:
                state = self._entry_globals()
            else:
                state = AbstractState()  # everything top
            self.exec_stmt(fn.body, state, 0)
        return self.result

    def _entry_globals(self) -> AbstractState:
        state = AbstractState()
        for d in self.program.globals:
            if d.array_size is not None:
                continue
            value = singleton(0) if d.init is None else eval_interval(d.init, state)
            state = state.set(d.name, value)
        return state

    def exec_stmt(self, s: Stmt, state: AbstractState,
                  depth: int) -> tuple[AbstractState, AbstractState]:
        self.result.record(s.label, "before", state)
        bottom = AbstractState.BOTTOM
        if isinstance(s, (Empty, ArrayAssign)):
            out, ret = state, bottom
        elif isinstance(s, (Assign, Decl)):
            out, ret = transfer(s, state), bottom
        elif isinstance(s, Return):
            out, ret = bottom, state
        elif isinstance(s, Block):
            ret = bottom
            out = state
            for child in s.stmts:
                out, r = self.exec_stmt(child, out, depth)
                ret = combine(ret, r)
        elif isinstance(s, If):
            t_fall, t_ret = self.exec_stmt(s.then, refine(s.cond, state, True), depth)
            f_in = refine(s.cond, state, False)
            if s.orelse is not None:
                f_fall, f_ret = self.exec_stmt(s.orelse, f_in, depth)
            else:
                f_fall, f_ret = f_in, bottom
            out, ret = combine(t_fall, f_fall), combine(t_ret, f_ret)
        elif isinstance(s, CallStmt):
            out, ret = self._call_effect(s, state, depth), bottom
        elif isinstance(s, Loop):
            out, ret = self._exec_loop(s, state, depth)
        else:
            raise TypeError(f"cannot analyze {s!r}")
        self.result.record(s.label, "after", out)
        return out, ret

    def _exec_loop(self, s: Loop, state: AbstractState,
                   depth: int) -> tuple[AbstractState, AbstractState]:
        if s.init is not None:
            state, _ = self.exec_stmt(s.init, state, depth)
        entry = state
        head = entry
        rets = AbstractState.BOTTOM
        # Widening from the second visit of the head keeps this finite:
        # each bound of each entry variable can change at most once.
        for _ in range(2 * (len(entry.env) + 2) + 4):
            body_out, body_ret = self.exec_stmt(
                s.body, refine(s.cond, head, True), depth)
            if s.step is not None:
                body_out, _ = self.exec_stmt(s.step, body_out, depth)
            rets = combine(rets, body_ret)
            widened = widen_state(head, combine(entry, body_out))
            if widened == head:
                break
            head = widened
        else:  # pragma: no cover - the bound above is an invariant, not a limit
            raise AssertionError("loop head failed to stabilize under widening")
        self.result.record(s.label, "head", head)
        exit_state = refine(s.cond, head, False)
        return exit_state, rets

    def _havoc_call(self, s: CallStmt, state: AbstractState) -> AbstractState:
        dropped = set(self.global_names)
        for a in s.args:
            for e in walk_exprs(a):
                if isinstance(e, Unary) and e.op == "&" and isinstance(e.operand, Var):
                    dropped.add(e.operand.name)
        return state.drop(dropped)

    def _call_effect(self, s: CallStmt, state: AbstractState,
                     depth: int) -> AbstractState:
        callee = self.program.function(s.name)
        if callee is None or depth >= self.inline_depth or state.is_bottom:
            return self._havoc_call(s, state)
        if len(s.args) != len(callee.params):
            return self._havoc_call(s, state)
        # One-level inlining: globals flow in, parameters get the argument
        # intervals, callee locals stay private, globals flow back out.
        callee_env = {name: state.get(name) for name in self.global_names
                      if not state.get(name).is_top}
        callee_state = AbstractState(callee_env)
        for p, a in zip(callee.params, s.args):
            callee_state = callee_state.set(p, eval_interval(a, state))
        fall, ret = self.exec_stmt(callee.body, callee_state, depth + 1)
        exit_state = combine(fall, ret)
        out = self._havoc_call(s, state)  # address-taken args stay havoced
        if exit_state.is_bottom:
            return AbstractState.BOTTOM
        for name in self.global_names:
            out = out.set(name, exit_state.get(name))
        return out


def analyze(program: Program, inline_depth: int = 1) -> IntervalResult:
    """Run the interval analysis over every function of the program.

    The entry function starts from the global initializers; other functions
    are analyzed with all-top inputs so their recorded states cover every
    calling context. Terminates on all inputs thanks to widening.
    """
    return _Analyzer(program, inline_depth).run()
