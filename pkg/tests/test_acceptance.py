"""Acceptance suite: the seven exit criteria, one test per criterion.

Each test prints a single PASS line once its criterion holds (run with
``pytest tests/test_acceptance.py -v -s`` to see them); a failing criterion
fails its test. Tolerances are pinned here, not calibrated elsewhere:
counts are exact integers, runtimes are wall-clock seconds.
"""

import json
import os
import random
import time


from loopcount import interval as itv_mod
from loopcount.ast_nodes import Loop
from loopcount.benchmark import corpus_files, run_benchmark
from loopcount.fdsolver import Constraint, Csp, LinExpr
from loopcount.flowcon import FlowConstraint, analyze_nest, translate_nest
from loopcount.frontend import parse, parse_file
from loopcount.interp import interpret
from loopcount.loopbound import loop_bound
from loopcount.looprec import RejectReason, Rejection

from conftest import (
    analyze_src, brute_force_count, build_solver_csp, check_interval_soundness,
    directly_count_loop, loop_iterations, random_finite_csp, random_loop_case,
    random_nest_case, random_program_case, simple_loop_src,
)

CORPUS = os.path.join(os.path.dirname(__file__), "..", "corpus")
GOLDEN = os.path.join(os.path.dirname(__file__), "golden")

TRIANGULAR_NEST = """
int main() {
    int i; int j; int s; s = 0;
    for (i = 0; i < 10; ++i)
        for (j = i; j > 0; j -= 2)
            s += 1;
    return s;
}
"""

# the full iteration space of the triangular worked example
TRIANGULAR_PAIRS = [
    (1, 1),
    (2, 2),
    (3, 1), (3, 3),
    (4, 2), (4, 4),
    (5, 1), (5, 3), (5, 5),
    (6, 2), (6, 4), (6, 6),
    (7, 1), (7, 3), (7, 5), (7, 7),
    (8, 2), (8, 4), (8, 6), (8, 8),
    (9, 1), (9, 3), (9, 5), (9, 7), (9, 9),
]


def _ok(name: str, detail: str = "") -> None:
    suffix = f" ({detail})" if detail else ""
    print(f"ACCEPTANCE PASS: {name}{suffix}")


def test_worked_example_triangular_count():
    """Criterion: the triangular nest yields n = 25 exactly and enumerates
    precisely the 25 known pairs, within one second."""
    t0 = time.perf_counter()
    analyzed = analyze_src(TRIANGULAR_NEST)
    results = analyze_nest(analyzed.descriptors, analyzed.itv)
    assert isinstance(results[1], FlowConstraint)
    assert results[1].n == 25
    translation = translate_nest(analyzed.descriptors, analyzed.itv)
    order = [translation.var_by_name["i"], translation.var_by_name["j"]]
    pairs = translation.csp.enumerate(order)
    assert pairs == TRIANGULAR_PAIRS
    assert pairs[0] == (1, 1) and pairs[-1] == (9, 9)
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0
    # cross-check with the concrete interpreter
    profile = interpret(analyzed.program)
    inner = analyzed.descriptors[1]
    assert loop_iterations(profile, analyzed, inner.loop_label) == 25
    _ok("worked example, count", f"n=25, {elapsed * 1000:.0f} ms")


def test_worked_example_counting_mode():
    """Criterion: 0..10000 x 0..500 counts to 5,010,501 without
    enumeration (search nodes far below the space, < 100)."""
    csp = Csp()
    i = csp.new_var()
    j = csp.new_var()
    for c in (Constraint.ge(LinExpr.var(i), LinExpr.const(0)),
              Constraint.le(LinExpr.var(i), LinExpr.const(10000)),
              Constraint.ge(LinExpr.var(j), LinExpr.const(0)),
              Constraint.le(LinExpr.var(j), LinExpr.const(500))):
        assert csp.post(c)
    count = csp.count_solutions([i, j])
    assert count == 5_010_501
    assert csp.stats.nodes < 100
    _ok("worked example, counting mode",
        f"count={count}, nodes={csp.stats.nodes}")


def test_solver_oracle_equivalence():
    """Criterion: on >= 200 random finite CSPs, count_solutions equals the
    brute-force cross product (and the enumeration length). Zero
    mismatches."""
    rng = random.Random(0xC0FFEE)
    mismatches = 0
    for _ in range(200):
        domains, constraints = random_finite_csp(rng)
        expected = brute_force_count(domains, constraints)
        csp, ids = build_solver_csp(domains, constraints)
        got = csp.count_solutions(ids)
        fresh, fresh_ids = build_solver_csp(domains, constraints)
        enumerated = len(fresh.enumerate(fresh_ids))
        if got != expected or enumerated != expected:
            mismatches += 1
            print(f"MISMATCH count={got} enum={enumerated} "
                  f"expected={expected}: {domains} {constraints}")
    assert mismatches == 0
    _ok("solver oracle equivalence",
        "200 CSPs, count == enumeration == brute force")


def test_bound_soundness_on_random_loops_and_nests():
    """Criterion: interpreter counts never exceed emitted bounds or flow
    constraints; exact equality on the rectangular and constant-triangular
    subclasses."""
    rng = random.Random(0xBEEF)
    loops_checked = rect_exact = 0
    attempts = 0
    while loops_checked < 500 and attempts < 2000:
        attempts += 1
        case = random_loop_case(rng)
        analyzed = analyze_src(case["src"])
        result = analyzed.results[0]
        if isinstance(result, Rejection):
            continue
        bound = loop_bound(result, analyzed.itv)
        flow = analyze_nest([result], analyzed.itv)[0]
        profile = interpret(analyzed.program, case["inputs"], fuel=200_000)
        assert profile.terminated, case["src"]
        iters = loop_iterations(profile, analyzed, result.loop_label)
        assert bound.is_bound and iters <= bound.n, case["src"]
        if isinstance(flow, FlowConstraint):
            assert iters <= flow.n, case["src"]
        if case["rectangular"]:
            assert iters == bound.n, case["src"]
            rect_exact += 1
        loops_checked += 1
    assert loops_checked >= 500

    nests_checked = tri_exact = 0
    attempts = 0
    while nests_checked < 300 and attempts < 900:
        attempts += 1
        case = random_nest_case(rng)
        analyzed = analyze_src(case["src"])
        if len(analyzed.descriptors) != case["depth"]:
            continue
        flows = analyze_nest(analyzed.descriptors, analyzed.itv)
        profile = interpret(analyzed.program, fuel=500_000)
        if not profile.terminated:  # pragma: no cover - generator avoids it
            continue
        for depth_result, d in zip(flows, analyzed.descriptors):
            if not isinstance(depth_result, FlowConstraint):
                continue
            iters = loop_iterations(profile, analyzed, d.loop_label)
            assert iters <= depth_result.n, case["src"]
            if depth_result.exact:
                assert iters == depth_result.n, case["src"]
                tri_exact += 1
        nests_checked += 1
    assert nests_checked >= 300
    _ok("bound soundness",
        f"{loops_checked} loops ({rect_exact} rectangular-exact), "
        f"{nests_checked} nests ({tri_exact} exact depth results)")


def test_interval_soundness_and_termination():
    """Criterion: >= 1000 random program/input pairs stay inside the
    analyzed intervals at every point; the analysis terminates on every
    corpus file."""
    rng = random.Random(0xDA7A)
    pairs = 0
    while pairs < 1000:
        case = random_program_case(rng)
        for _ in range(2):
            case["inputs"] = {"p": rng.randint(-100, 100),
                              "q": rng.randint(-100, 100)}
            check_interval_soundness(case)
            pairs += 1
    for path in corpus_files(CORPUS):
        result = itv_mod.analyze(parse_file(path))
        assert result.states  # reached a fixpoint with recorded points
    _ok("interval soundness", f"{pairs} pairs, corpus termination")


def test_subset_relation_and_runtime_on_corpus():
    """Criterion: constrained loops form a subset of bounded loops on the
    corpus, each file analyzes in under a second, and the stored golden
    coverage percentages do not decrease."""
    table = run_benchmark(CORPUS)
    assert table.subset_holds, table.subset_violations
    assert not table.parse_errors
    slow = {name: ms for name, ms in table.file_millis.items() if ms >= 1000}
    assert not slow, f"files over one second: {slow}"
    with open(os.path.join(GOLDEN, "corpus_coverage.json")) as fh:
        golden = json.load(fh)
    for row in table.rows:
        want = golden[row.name]
        if want["pct_bounded"] is not None:
            assert row.pct_bounded() >= want["pct_bounded"], row.name
        if want["pct_constrained"] is not None:
            assert row.pct_constrained() >= want["pct_constrained"], row.name
    totals = table.totals()
    assert totals.pct_bounded() >= golden["__total__"]["pct_bounded"]
    assert totals.pct_constrained() >= golden["__total__"]["pct_constrained"]
    _ok("subset relation",
        f"bounded {totals.pct_bounded():.1f}% >= constrained "
        f"{totals.pct_constrained():.1f}%, max file "
        f"{max(table.file_millis.values()):.0f} ms")


def test_normalization_equivalence_exhaustive():
    """Criterion: over the exhaustive grid |a|,|b| <= 20, 1 <= |c| <= 5 and
    every relation (!= only with its termination proof), the normalized
    loop runs exactly as often as the original, and the emitted bound and
    flow constraint dominate that count."""
    checked = rejected = 0
    grid = range(-20, 21)
    magnitudes = range(1, 6)
    for rel in ("<", "<=", ">", ">=", "!="):
        for a in grid:
            for b in grid:
                for mag in magnitudes:
                    for c in (mag, -mag):
                        analyzed = analyze_src(simple_loop_src(a, rel, b, c))
                        result = analyzed.results[0]
                        if isinstance(result, Rejection):
                            if rel == "!=" and result.reason is RejectReason.C4:
                                # only the unproven-termination cases land here
                                assert (b - a) % c != 0, (a, b, c)
                            rejected += 1
                            continue
                        profile = interpret(analyzed.program, fuel=2000)
                        assert profile.terminated, (a, rel, b, c)
                        true_count = loop_iterations(
                            profile, analyzed, result.loop_label)
                        assert true_count == directly_count_loop(a, rel, b, c)
                        norm_b = result.bound_expr.value
                        norm_prog = parse(
                            simple_loop_src(a, result.rel, norm_b, c))
                        norm_loop = next(
                            s for s in norm_prog.statements()
                            if isinstance(s, Loop))
                        norm_profile = interpret(norm_prog, fuel=2000)
                        norm_count = norm_profile.count(norm_loop.body.label)
                        assert norm_count == true_count, (a, rel, b, c)
                        bound = loop_bound(result, analyzed.itv)
                        assert bound.is_bound and bound.n >= true_count, \
                            (a, rel, b, c)
                        flow = analyze_nest([result], analyzed.itv)[0]
                        assert isinstance(flow, FlowConstraint)
                        assert flow.n >= true_count, (a, rel, b, c)
                        checked += 1
    assert checked > 10_000
    _ok("normalization equivalence",
        f"{checked} accepted cases verified via the interpreter, "
        f"{rejected} rejected")
