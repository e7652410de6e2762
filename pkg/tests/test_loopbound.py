"""Loop bound derivation, simplification, and the oracle audit of the
per-relation parameter rows."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loopcount.ast_nodes import BinOp, Lit, Unary, Var
from loopcount.interp import c_div, c_mod, interpret
from loopcount.interval import AbstractState, Interval, NEG_INF, POS_INF
from loopcount.loopbound import (
    BoundResult, LoopParams, derive_params, evaluate_bound, loop_bound,
    simplify,
)
from loopcount.looprec import Condition, LoopDescriptor, Rejection

from conftest import analyze_src, directly_count_loop, loop_iterations


def descriptor_of(src: str) -> tuple:
    analyzed = analyze_src(src)
    assert analyzed.descriptors, analyzed.results
    return analyzed, analyzed.descriptors[0]


# ---------------------------------------------------------------------------
# Parameter derivation rows
# ---------------------------------------------------------------------------

def test_row_lt():
    _, d = descriptor_of("int main() { int i; for (i = 0; i < 10; ++i) ; }")
    # the recognizer already normalized < to <= with bound 9
    params = derive_params(d)
    assert params.low_expr == Lit(0)
    assert params.high_expr == Lit(10)
    assert params.step_expr == Lit(1)
    # the raw < row on the unnormalized condition gives the same parameters
    raw = derive_params(d, Condition("<", Lit(10)))
    assert (raw.low_expr, raw.high_expr) == (Lit(0), Lit(10))


def test_row_le():
    _, d = descriptor_of("int main() { int i; for (i = 0; i <= 10; ++i) ; }")
    params = derive_params(d)
    assert params.high_expr == Lit(11)


def test_row_ge_uses_corrected_high():
    analyzed, d = descriptor_of(
        "int main() { int i; for (i = 10; i >= 1; --i) ; }")
    params = derive_params(d)
    assert params.low_expr == Lit(1)
    assert params.high_expr == Lit(11)  # a + 1, see docs/bound-derivation.md
    assert loop_bound(d, analyzed.itv) == BoundResult.bound(10)
    profile = interpret(analyzed.program)
    assert loop_iterations(profile, analyzed, d.loop_label) == 10


def test_high_minus_one_variant_would_undercount():
    """The audit that motivates the corrected >= row: with High = a - 1
    the formula yields 8 for a loop that runs 10 times."""
    state = AbstractState()
    params = LoopParams(Lit(1), Lit(10 - 1), Unary("-", Lit(1)))
    result = evaluate_bound(params, state)
    assert result == BoundResult.bound(8)
    assert directly_count_loop(10, ">=", 1, -1) == 10  # 8 would be unsound


# ---------------------------------------------------------------------------
# simplify
# ---------------------------------------------------------------------------

def test_simplify_cancels_invariant_terms():
    e = BinOp("-", BinOp("+", Var("x"), Lit(5)), Var("x"))
    assert simplify(e, lambda _: True) == Lit(5)
    # without invariance knowledge the subtraction stays
    assert simplify(e, lambda ex: not ex.variables()) != Lit(5)


def test_simplify_identities_and_folding():
    assert simplify(BinOp("*", Var("e"), Lit(1))) == Var("e")
    assert simplify(BinOp("+", Var("e"), Lit(0))) == Var("e")
    assert simplify(BinOp("/", BinOp("+", Lit(3), Lit(4)), Lit(1))) == Lit(7)
    assert simplify(BinOp("*", Lit(0), Var("e"))) == Lit(0)
    assert simplify(BinOp("/", BinOp("*", Var("e"), Lit(4)), Lit(4))) == Var("e")


@st.composite
def small_exprs(draw, depth=3):
    if depth == 0 or draw(st.integers(0, 2)) == 0:
        if draw(st.booleans()):
            return Lit(draw(st.integers(-9, 9)))
        return Var(draw(st.sampled_from("xy")))
    op = draw(st.sampled_from(["+", "-", "*", "/", "%"]))
    left = draw(small_exprs(depth=depth - 1))
    right = draw(small_exprs(depth=depth - 1))
    return BinOp(op, left, right)


def _concretely(e, env):
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Var):
        return env[e.name]
    if isinstance(e, Unary) and e.op == "-":
        return -_concretely(e.operand, env)
    a = _concretely(e.left, env)
    b = _concretely(e.right, env)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if b == 0:
        raise ZeroDivisionError
    return c_div(a, b) if e.op == "/" else c_mod(a, b)


@given(small_exprs(), st.integers(-50, 50), st.integers(-50, 50))
@settings(max_examples=300)
def test_simplify_preserves_semantics(e, x, y):
    env = {"x": x, "y": y}
    simplified = simplify(e, lambda ex: True)  # everything invariant here
    try:
        expected = _concretely(e, env)
    except ZeroDivisionError:
        return
    try:
        got = _concretely(simplified, env)
    except ZeroDivisionError:
        pytest.fail(f"simplify introduced a division by zero: {simplified}")
    assert got == expected, f"{e} -> {simplified}"


def test_simplify_terminates_on_deep_expression():
    e = Var("x")
    for k in range(60):
        e = BinOp("+", e, Lit(0)) if k % 2 else BinOp("*", Lit(1), e)
    assert simplify(e) == Var("x")


# ---------------------------------------------------------------------------
# evaluate_bound
# ---------------------------------------------------------------------------

def test_evaluate_bound_examples():
    state = AbstractState()
    ten = evaluate_bound(LoopParams(Lit(0), Lit(10), Lit(1)), state)
    assert ten == BoundResult.bound(10)
    stride = evaluate_bound(LoopParams(Lit(0), Lit(10), Lit(3)), state)
    assert stride == BoundResult.bound(4)  # ceiling: floor would give 3
    top_high = evaluate_bound(
        LoopParams(Lit(0), Var("unknown"), Lit(1)), state)
    assert top_high.kind == "not-applicable"


def test_evaluate_bound_unbounded_vs_not_applicable():
    state = AbstractState({"n": Interval(0, POS_INF)})
    one_sided = evaluate_bound(LoopParams(Lit(0), Var("n"), Lit(1)), state)
    assert one_sided.kind == "unbounded"
    state2 = AbstractState({"m": Interval(NEG_INF, POS_INF)})
    unknown = evaluate_bound(LoopParams(Lit(0), Var("m"), Lit(1)), state2)
    assert unknown.kind == "not-applicable"


def test_negative_range_clamps_to_zero():
    state = AbstractState()
    empty = evaluate_bound(LoopParams(Lit(9), Lit(3), Lit(1)), state)
    assert empty == BoundResult.bound(0)


def test_minimum_step_magnitude_for_variable_steps():
    # step interval (-3, -2): minimum magnitude 2 gives the safe bound
    state = AbstractState({"c": Interval(2, 3)})
    params = LoopParams(Lit(0), Lit(12), Unary("-", Var("c")))
    assert evaluate_bound(params, state) == BoundResult.bound(6)


# ---------------------------------------------------------------------------
# loop_bound composition
# ---------------------------------------------------------------------------

def test_triangular_inner_loop_bound_is_five():
    analyzed = analyze_src("""
        int main() {
            int i; int j; int s; s = 0;
            for (i = 0; i < 10; ++i)
                for (j = i; j > 0; j -= 2)
                    s += 1;
            return s;
        }
    """)
    outer, inner = analyzed.descriptors
    assert loop_bound(outer, analyzed.itv) == BoundResult.bound(10)
    # brute-force max over i in 0..9 is 5 iterations (at i = 9)
    assert loop_bound(inner, analyzed.itv) == BoundResult.bound(5)


def test_multiple_exit_conditions_take_minimum():
    analyzed = analyze_src(
        "int main() { int i; for (i = 0; i < 20 && i < 10; ++i) ; }")
    assert loop_bound(analyzed.descriptors[0], analyzed.itv) == \
        BoundResult.bound(10)


def test_symbolic_invariant_bounds_cancel():
    analyzed = analyze_src("""
        int main(int n) {
            int i; int s; s = 0;
            for (i = n; i < n + 5; ++i)
                s += 1;
            return s;
        }
    """)
    d = analyzed.descriptors[0]
    # (n+5) - n cancels although n itself is unbounded
    assert loop_bound(d, analyzed.itv) == BoundResult.bound(5)


def test_monotone_in_interval_width():
    """Widening the input intervals never decreases the bound."""
    tight = AbstractState({"n": Interval(5, 8)})
    wide = AbstractState({"n": Interval(0, 30)})
    params = LoopParams(Lit(0), Var("n"), Lit(1))
    n_tight = evaluate_bound(params, tight)
    n_wide = evaluate_bound(params, wide)
    assert n_tight.n <= n_wide.n


# ---------------------------------------------------------------------------
# Exhaustive per-row audit on small constant grids
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("rel", ["<", "<=", ">", ">="])
def test_row_audit_exact_on_constants(rel):
    """For constant a, b, c: the derived bound must dominate the true
    count, and equal it (the rows are exact on constants)."""
    state = AbstractState()
    checked = 0
    for a in range(-12, 13, 3):
        for b in range(-12, 13, 3):
            for mag in (1, 2, 5):
                c = mag if rel in ("<", "<=") else -mag
                true_count = directly_count_loop(a, rel, b, c)
                params = derive_params(
                    _fake_descriptor(a, c), Condition(rel, Lit(b)))
                got = evaluate_bound(params, state)
                assert got.is_bound
                assert got.n >= true_count, (a, rel, b, c)
                assert got.n == true_count, (a, rel, b, c)
                checked += 1
    assert checked > 100


def _fake_descriptor(a: int, c: int) -> LoopDescriptor:
    from loopcount.looprec import ValueClass
    cls = (ValueClass.CONSTANT,) * 3
    return LoopDescriptor(
        loop_label=1, iter_var="i", init_label=1, init_expr=Lit(a),
        cond_label=1, rel="<=", bound_expr=Lit(0), step_label=1,
        step_expr=Lit(c), direction="up" if c > 0 else "down", classes=cls,
        nesting_depth=0, parent=None, scope_label=0, function="f")


def test_bound_soundness_on_random_loops_sample():
    rng = random.Random(31415)
    from conftest import random_loop_case
    exact_hits = 0
    for _ in range(120):
        case = random_loop_case(rng)
        analyzed = analyze_src(case["src"])
        result = analyzed.results[0]
        if isinstance(result, Rejection):
            continue
        bound = loop_bound(result, analyzed.itv)
        profile = interpret(analyzed.program, case["inputs"], fuel=100_000)
        if not profile.terminated:
            continue
        iters = loop_iterations(profile, analyzed, result.loop_label)
        assert bound.is_bound and iters <= bound.n, case["src"]
        if case["rectangular"]:
            assert iters == bound.n, case["src"]
            exact_hits += 1
    assert exact_hits > 5


def test_growing_bound_variable_never_gets_finite_claim():
    """while (i < b) with b incremented inside runs forever; the analysis
    must answer unbounded, not a number."""
    analyzed = analyze_src("""
        int main() {
            int i; int b; b = 10; i = 0;
            while (i < b) {
                b = b + 1;
                i = i + 1;
            }
        }
    """)
    assert analyzed.descriptors, analyzed.results
    result = loop_bound(analyzed.descriptors[0], analyzed.itv)
    assert result.kind == "unbounded"
    from loopcount.flowcon import FlowRejection, analyze_nest
    flow = analyze_nest([analyzed.descriptors[0]], analyzed.itv)[0]
    assert isinstance(flow, FlowRejection)
