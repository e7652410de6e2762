"""Traditional per-loop bound analysis.

Derives Low/High/Step expressions from the exit relation, simplifies
High - Low symbolically, evaluates it with interval arithmetic, and divides
by the minimum step magnitude with a ceiling.

Parameter derivation (exit condition ``i rel b``, init ``a``):

    rel   Low   High
    <     a     b
    <=    a     b + 1
    >     b     a
    >=    b     a + 1

The >= row intentionally deviates from the symmetric-looking ``a - 1``:
an exhaustive audit against the interpreter (see tests and
docs/bound-derivation.md) shows ``a - 1`` undercounts down loops by up to
two iterations, while ``a + 1`` mirrors the <= row and is exact on
constant parameters.

Evaluation uses the loop-head fixpoint state: for loop-invariant operands
it coincides with the state at loop entry, and for operands written inside
the loop it covers every iteration, which keeps the bound sound.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Optional

from .ast_nodes import BinOp, Expr, Lit, Unary
from .interp import c_div, c_mod
from .interval import (
    AbstractState, Interval, IntervalResult, eval_interval, is_finite,
)
from .looprec import Condition, LoopDescriptor

InvarianceClassifier = Callable[[Expr], bool]


@dataclass(frozen=True)
class LoopParams:
    low_expr: Expr
    high_expr: Expr
    step_expr: Expr


@dataclass(frozen=True)
class BoundResult:
    kind: str  # "bound" | "unbounded" | "not-applicable"
    n: Optional[int] = None
    reason: str = ""

    @staticmethod
    def bound(n: int) -> "BoundResult":
        assert n >= 0
        return BoundResult("bound", n)

    @staticmethod
    def unbounded(reason: str = "") -> "BoundResult":
        return BoundResult("unbounded", None, reason)

    @staticmethod
    def not_applicable(reason: str) -> "BoundResult":
        return BoundResult("not-applicable", None, reason)

    @property
    def is_bound(self) -> bool:
        return self.kind == "bound"

    def __str__(self) -> str:
        if self.is_bound:
            return f"bound({self.n})"
        return self.kind if not self.reason else f"{self.kind}({self.reason})"


# ---------------------------------------------------------------------------
# Parameter derivation
# ---------------------------------------------------------------------------

def _plus_one(e: Expr) -> Expr:
    return Lit(e.value + 1) if isinstance(e, Lit) else BinOp("+", e, Lit(1))


def derive_params(d: LoopDescriptor,
                  condition: Optional[Condition] = None) -> LoopParams:
    """Low/High/Step for one exit condition (the primary one by default)."""
    cond = condition or d.condition()
    a, b, c = d.init_expr, cond.bound, d.step_expr
    if cond.rel == "<":
        return LoopParams(a, b, c)
    if cond.rel == "<=":
        return LoopParams(a, _plus_one(b), c)
    if cond.rel == ">":
        return LoopParams(b, a, c)
    if cond.rel == ">=":
        return LoopParams(b, _plus_one(a), c)
    raise ValueError(f"relation {cond.rel!r} has no parameter derivation")


# ---------------------------------------------------------------------------
# Symbolic simplification
# ---------------------------------------------------------------------------

def _nothing_invariant(e: Expr) -> bool:
    return not e.variables()


def _fold_binop(op: str, a: int, b: int) -> Optional[int]:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return None if b == 0 else c_div(a, b)
    if op == "%":
        return None if b == 0 else c_mod(a, b)
    return None


def _is_lit(e: Expr, value: Optional[int] = None) -> bool:
    return isinstance(e, Lit) and (value is None or e.value == value)


def _flatten_sum(e: Expr, sign: int, consts: list[int],
                 terms: list[tuple[int, Expr]]) -> None:
    if isinstance(e, Lit):
        consts.append(sign * e.value)
    elif isinstance(e, BinOp) and e.op == "+":
        _flatten_sum(e.left, sign, consts, terms)
        _flatten_sum(e.right, sign, consts, terms)
    elif isinstance(e, BinOp) and e.op == "-":
        _flatten_sum(e.left, sign, consts, terms)
        _flatten_sum(e.right, -sign, consts, terms)
    elif isinstance(e, Unary) and e.op == "-":
        _flatten_sum(e.operand, -sign, consts, terms)
    else:
        terms.append((sign, e))


def _rebuild_sum(consts: list[int], terms: list[tuple[int, Expr]]) -> Expr:
    constant = sum(consts)
    out: Optional[Expr] = None
    for sign, term in terms:
        if out is None:
            out = term if sign > 0 else Unary("-", term)
        else:
            out = BinOp("+" if sign > 0 else "-", out, term)
    if out is None:
        return Lit(constant)
    if constant > 0:
        out = BinOp("+", out, Lit(constant))
    elif constant < 0:
        out = BinOp("-", out, Lit(-constant))
    return out


def _cancel_sum(e: Expr, invariant: InvarianceClassifier) -> Expr:
    """Flatten a +/- tree, merge constants, cancel opposite invariant terms."""
    if not (isinstance(e, BinOp) and e.op in ("+", "-")
            or isinstance(e, Unary) and e.op == "-"):
        return e
    consts: list[int] = []
    terms: list[tuple[int, Expr]] = []
    _flatten_sum(e, 1, consts, terms)
    kept: list[tuple[int, Expr]] = []
    for sign, term in terms:
        cancelled = False
        if invariant(term):
            for i, (s2, t2) in enumerate(kept):
                if s2 == -sign and t2 == term:
                    kept.pop(i)
                    cancelled = True
                    break
        if not cancelled:
            kept.append((sign, term))
    return _rebuild_sum(consts, kept)


def _rewrite(e: Expr, invariant: InvarianceClassifier) -> Expr:
    if isinstance(e, Unary):
        inner = _rewrite(e.operand, invariant)
        if e.op == "-":
            if isinstance(inner, Lit):
                return Lit(-inner.value)
            if isinstance(inner, Unary) and inner.op == "-":
                return inner.operand
        return Unary(e.op, inner) if inner is not e.operand else e
    if not isinstance(e, BinOp):
        return e
    left = _rewrite(e.left, invariant)
    right = _rewrite(e.right, invariant)
    op = e.op
    if isinstance(left, Lit) and isinstance(right, Lit):
        folded = _fold_binop(op, left.value, right.value)
        if folded is not None:
            return Lit(folded)
    if op == "+":
        if _is_lit(left, 0):
            return right
        if _is_lit(right, 0):
            return left
    elif op == "-":
        if _is_lit(right, 0):
            return left
    elif op == "*":
        if _is_lit(left, 1):
            return right
        if _is_lit(right, 1):
            return left
        if _is_lit(left, 0) or _is_lit(right, 0):
            return Lit(0)
    elif op == "/":
        if _is_lit(right, 1):
            return left
        # (e * k) / k == e for a nonzero literal k (the product is exact)
        if (isinstance(left, BinOp) and left.op == "*"
                and isinstance(right, Lit) and right.value != 0):
            if left.right == right:
                return left.left
            if left.left == right:
                return left.right
    if op in ("+", "-"):
        out = _cancel_sum(BinOp(op, left, right), invariant)
        if out != BinOp(op, left, right):
            return out
    if left is e.left and right is e.right:
        return e
    return BinOp(op, left, right)


def _size(e: Expr) -> int:
    return 1 + sum(_size(c) for c in e.children())


def simplify(e: Expr,
             invariance: Optional[InvarianceClassifier] = None) -> Expr:
    """Rewrite to a fixpoint: constant folding (C semantics), neutral and
    absorbing elements, sum flattening with cancellation of loop-invariant
    terms, and (e*k)/k elimination. Semantics-preserving on all inputs."""
    invariant = invariance or _nothing_invariant
    for _ in range(_size(e) + 8):
        out = _rewrite(e, invariant)
        if out == e:
            return out
        e = out
    return e  # pragma: no cover - every rule shrinks or folds


# ---------------------------------------------------------------------------
# Interval evaluation of the bound
# ---------------------------------------------------------------------------

def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def _step_magnitude(step: Interval) -> Optional[int]:
    """Minimum |step| when the sign is unambiguous; None otherwise."""
    if step.is_bottom or step.contains(0):
        return None
    if step.lo > 0:
        return int(step.lo) if is_finite(step.lo) else None
    return int(-step.hi) if is_finite(step.hi) else None


def evaluate_bound(params: LoopParams, state: AbstractState,
                   invariance: Optional[InvarianceClassifier] = None) -> BoundResult:
    """Upper bound of (High - Low) by intervals, ceiling-divided by the
    minimum step magnitude."""
    if state.is_bottom:
        return BoundResult.bound(0)
    step_itv = eval_interval(simplify(params.step_expr, invariance), state)
    magnitude = _step_magnitude(step_itv)
    if magnitude is None:
        return BoundResult.not_applicable(
            f"step interval {step_itv} has no usable magnitude")
    diff = simplify(BinOp("-", params.high_expr, params.low_expr), invariance)
    d_itv = eval_interval(diff, state)
    if d_itv.is_bottom:
        return BoundResult.bound(0)
    if not is_finite(d_itv.hi):
        high_itv = eval_interval(params.high_expr, state)
        low_itv = eval_interval(params.low_expr, state)
        if high_itv.is_top or low_itv.is_top:
            return BoundResult.not_applicable(
                "loop parameter interval is unknown on the needed side")
        return BoundResult.unbounded("no finite upper bound on High - Low")
    return BoundResult.bound(max(0, _ceil_div(int(d_itv.hi), magnitude)))


# ---------------------------------------------------------------------------
# Composition
# ---------------------------------------------------------------------------

def loop_bound(d: LoopDescriptor, itv: IntervalResult,
               invariance: Optional[InvarianceClassifier] = None) -> BoundResult:
    """derive -> simplify -> evaluate, over the primary exit condition and
    any extra ones; the smallest successful bound wins (every analyzable
    exit can only stop the loop earlier)."""
    state = itv.head(d.loop_label)
    if invariance is None:
        invariance = invariance_classifier_for(d)
    best: Optional[BoundResult] = None
    fallback: Optional[BoundResult] = None
    for cond in (d.condition(), *d.extra_conditions):
        result = evaluate_bound(derive_params(d, cond), state, invariance)
        if result.is_bound:
            if best is None or result.n < best.n:  # type: ignore[operator]
                best = result
        elif fallback is None:
            fallback = result
    if best is not None:
        return best
    return fallback or BoundResult.not_applicable("no analyzable exit condition")


def invariance_classifier_for(d: LoopDescriptor) -> InvarianceClassifier:
    """Invariance test for simplify: an expression is invariant when none
    of its variables is written inside the loop (and it reads no arrays)."""
    return d.is_invariant_expr


def timed_loop_bound(d: LoopDescriptor, itv: IntervalResult
                     ) -> tuple[BoundResult, float]:
    """loop_bound plus elapsed wall-clock milliseconds, for reports."""
    t0 = time.perf_counter()
    result = loop_bound(d, itv)
    return result, (time.perf_counter() - t0) * 1000.0
