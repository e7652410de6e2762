"""Shared helpers: pipeline shortcuts, program builders, and the random
generators used by the soundness suites."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Callable, Optional, Union

import pytest

from loopcount import interval as itv_mod
from loopcount import looprec
from loopcount.ast_nodes import Loop, Program
from loopcount.frontend import parse
from loopcount.interp import ExecutionProfile, interpret
from loopcount.interval import IntervalResult
from loopcount.looprec import LoopDescriptor, Rejection


@dataclass
class Analyzed:
    program: Program
    itv: IntervalResult
    results: list[Union[LoopDescriptor, Rejection]]

    @property
    def descriptors(self) -> list[LoopDescriptor]:
        return [r for r in self.results if isinstance(r, LoopDescriptor)]

    @property
    def rejections(self) -> list[Rejection]:
        return [r for r in self.results if isinstance(r, Rejection)]

    def body_label(self, loop_label: int) -> int:
        stmt = self.program.statement_by_label(loop_label)
        assert isinstance(stmt, Loop)
        return stmt.body.label


def analyze_src(src: str) -> Analyzed:
    program = parse(src)
    itv = itv_mod.analyze(program)
    return Analyzed(program, itv, looprec.find_loops(program, itv))


@pytest.fixture
def pipeline() -> Callable[[str], Analyzed]:
    return analyze_src


# ---------------------------------------------------------------------------
# Single-loop program builder (used heavily by the grid and random suites)
# ---------------------------------------------------------------------------

def loop_source(init: str, cond: str, step: str, params: str = "") -> str:
    return (
        f"int main({params}) {{\n"
        f"    int i;\n"
        f"    int s;\n"
        f"    s = 0;\n"
        f"    for ({init}; {cond}; {step})\n"
        f"        s += 1;\n"
        f"    return s;\n"
        f"}}\n")


def simple_loop_src(a: int, rel: str, b: int, c: int) -> str:
    sign = "+=" if c >= 0 else "-="
    return loop_source(f"i = {a}", f"i {rel} {b}", f"i {sign} {abs(c)}")


def loop_iterations(profile: ExecutionProfile, analyzed: Analyzed,
                    loop_label: int) -> int:
    return profile.count(analyzed.body_label(loop_label))


# ---------------------------------------------------------------------------
# Direct iteration oracle (plain Python, no analysis code involved)
# ---------------------------------------------------------------------------

def directly_count_loop(a: int, rel: str, b: int, c: int,
                        max_iters: int = 10_000) -> Optional[int]:
    """Concretely run ``for (i=a; i rel b; i+=c)``; None when it does not
    terminate within max_iters."""
    ops = {"<": lambda x, y: x < y, ">": lambda x, y: x > y,
           "<=": lambda x, y: x <= y, ">=": lambda x, y: x >= y,
           "==": lambda x, y: x == y, "!=": lambda x, y: x != y}
    test = ops[rel]
    i, n = a, 0
    while test(i, b):
        n += 1
        if n > max_iters:
            return None
        i += c
    return n


# ---------------------------------------------------------------------------
# Random generators
# ---------------------------------------------------------------------------

def random_finite_csp(rng: random.Random):
    """Random CSP spec: list of (lo, hi) domains plus surface constraints,
    with the cross product capped so brute force stays cheap.

    Returns (domains, constraints) where constraints are tuples:
      ("le"|"ge"|"eq", [(coef, var), ...], const)  meaning  sum+const REL 0
      ("cong", [(coef, var), ...], const, modulus)
    """
    nvars = rng.randint(1, 4)
    max_product = 40_000
    domains = []
    product = 1
    for _ in range(nvars):
        limit = max(1, min(30, max_product // max(product, 1)))
        size = rng.randint(1, limit)
        lo = rng.randint(-30, 30 - size + 1)
        domains.append((lo, lo + size - 1))
        product *= size
    constraints = []
    for _ in range(rng.randint(0, 5)):
        terms = []
        for v in range(nvars):
            if rng.random() < 0.6:
                coef = rng.choice([-3, -2, -1, 1, 2, 3])
                terms.append((coef, v))
        if not terms:
            terms = [(1, rng.randrange(nvars))]
        const = rng.randint(-20, 20)
        kind = rng.choice(["le", "ge", "eq", "cong"])
        if kind == "cong":
            constraints.append(("cong", terms, const, rng.randint(2, 7)))
        else:
            constraints.append((kind, terms, const))
    return domains, constraints


def brute_force_count(domains, constraints) -> int:
    """Cross-product enumeration with direct arithmetic evaluation."""
    def holds(c, values) -> bool:
        total = sum(coef * values[v] for coef, v in c[1]) + c[2]
        if c[0] == "le":
            return total <= 0
        if c[0] == "ge":
            return total >= 0
        if c[0] == "eq":
            return total == 0
        return total % c[3] == 0

    ranges = [range(lo, hi + 1) for lo, hi in domains]
    return sum(
        1 for values in itertools.product(*ranges)
        if all(holds(c, values) for c in constraints))


def build_solver_csp(domains, constraints, **kwargs):
    from loopcount.fdsolver import Constraint, Csp, LinExpr

    csp = Csp(**kwargs)
    ids = [csp.new_var(lo, hi) for lo, hi in domains]
    posted = True
    for c in constraints:
        expr = LinExpr.const(c[2])
        for coef, v in c[1]:
            expr = expr + LinExpr.var(ids[v], coef)
        if c[0] == "cong":
            con = Constraint.congruence_zero(expr, c[3])
        elif c[0] == "le":
            con = Constraint.le(expr, LinExpr.const(0))
        elif c[0] == "ge":
            con = Constraint.ge(expr, LinExpr.const(0))
        else:
            con = Constraint.eq(expr, LinExpr.const(0))
        posted = csp.post(con) and posted
    return csp, ids


def random_loop_case(rng: random.Random) -> dict:
    """One random iteration-variable loop, possibly with a clamped
    parameter as init or bound. Biased so that most cases are direction
    consistent (and therefore accepted)."""
    rel = rng.choice(["<", ">", "<=", ">=", "!="])
    c = rng.choice([1, 1, 2, 3, 4, 5]) * rng.choice([1, -1])
    a = rng.randint(-50, 50)
    if rng.random() < 0.8:
        up = rel in ("<", "<=") or (rel == "!=" and c > 0)
        span = rng.randint(1, 60)
        if rel == "!=":
            span = abs(c) * rng.randint(1, 12)
        b = a + span if up else a - span
        c = abs(c) if up else -abs(c)
    else:
        b = rng.randint(-50, 50)
    use_param = rng.random() < 0.3
    params = ""
    inputs: dict[str, int] = {}
    a_text, b_text = str(a), str(b)
    clamp = ""
    if use_param:
        lo = rng.randint(-30, 20)
        hi = lo + rng.randint(0, 20)
        clamp = (f"    if (k < {lo}) k = {lo};\n"
                 f"    if (k > {hi}) k = {hi};\n")
        params = "int k"
        inputs = {"k": rng.randint(lo - 10, hi + 10)}
        if rng.random() < 0.5:
            a_text = "k"
        else:
            b_text = "k"
    sign = "+=" if c >= 0 else "-="
    src = (
        f"int main({params}) {{\n"
        f"    int i;\n"
        f"    int s;\n"
        f"    s = 0;\n"
        f"{clamp}"
        f"    for (i = {a_text}; i {rel} {b_text}; i {sign} {abs(c)})\n"
        f"        s += 1;\n"
        f"    return s;\n"
        f"}}\n")
    rectangular = (not use_param and abs(c) == 1 and rel in ("<", "<=")
                   and c > 0)
    return {"src": src, "inputs": inputs, "rectangular": rectangular}


def random_nest_case(rng: random.Random) -> dict:
    """Random nest of depth <= 3. Inits and bounds are constants or an
    outer iteration variable plus a small constant; strides 1..3 (strides
    above 1 keep a constant init so the congruence stays exact)."""
    depth = rng.randint(1, 3)
    names = ["i", "j", "k"][:depth]
    lines = []
    indent = "    "
    for level, var in enumerate(names):
        up = rng.random() < 0.7
        stride = rng.randint(1, 3)
        outer_candidates = names[:level]
        def operand(base_lo: int, base_hi: int) -> str:
            if outer_candidates and rng.random() < 0.5:
                outer = rng.choice(outer_candidates)
                offset = rng.randint(-3, 3)
                if offset == 0:
                    return outer
                return f"{outer} {'+' if offset > 0 else '-'} {abs(offset)}"
            return str(rng.randint(base_lo, base_hi))

        if up:
            init = operand(-5, 5) if stride == 1 else str(rng.randint(-5, 5))
            bound = operand(5, 14)
            rel = rng.choice(["<", "<="])
            step = f"{var} += {stride}"
        else:
            init = operand(5, 14) if stride == 1 else str(rng.randint(5, 14))
            bound = operand(-5, 5)
            rel = rng.choice([">", ">="])
            step = f"{var} -= {stride}"
        lines.append(f"{indent * (level + 1)}for ({var} = {init}; "
                     f"{var} {rel} {bound}; {step})")
    lines.append(f"{indent * (depth + 1)}s += 1;")
    decls = "".join(f"    int {v};\n" for v in names)
    body = "\n".join(lines)
    src = (f"int main() {{\n{decls}    int s;\n    s = 0;\n"
           f"{body}\n    return s;\n}}\n")
    return {"src": src, "depth": depth}


# ---------------------------------------------------------------------------
# Random straight-line/if/loop programs for interval soundness
# ---------------------------------------------------------------------------

_BIN_ARITH = ["+", "-", "*"]


def _random_expr(rng: random.Random, names: list[str], depth: int) -> str:
    if depth <= 0 or rng.random() < 0.4:
        if names and rng.random() < 0.6:
            return rng.choice(names)
        return str(rng.randint(-20, 20))
    op = rng.choice(_BIN_ARITH + ["/", "%"])
    left = _random_expr(rng, names, depth - 1)
    if op in ("/", "%"):
        divisor = rng.choice([2, 3, 5, 7, -3])
        return f"({left} {op} {divisor})"
    right = _random_expr(rng, names, depth - 1)
    return f"({left} {op} {right})"


def _random_cmp(rng: random.Random, names: list[str]) -> str:
    op = rng.choice(["<", ">", "<=", ">=", "==", "!="])
    return (f"{_random_expr(rng, names, 1)} {op} "
            f"{_random_expr(rng, names, 1)}")


def random_program_case(rng: random.Random) -> dict:
    """Random program over x, y, z (+ params p, q) with assignments,
    branches and bounded literal loops; inputs for the parameters."""
    names = ["x", "y", "z", "p", "q"]
    lines = [f"    int {v};" for v in ("x", "y", "z")]
    lines += [f"    {v} = {rng.randint(-10, 10)};" for v in ("x", "y", "z")]
    loop_id = [0]

    def stmts(depth: int, indent: str, budget: list[int]) -> list[str]:
        out = []
        for _ in range(rng.randint(1, 4)):
            if budget[0] <= 0:
                break
            budget[0] -= 1
            choice = rng.random()
            if choice < 0.5:
                target = rng.choice(["x", "y", "z"])
                out.append(f"{indent}{target} = "
                           f"{_random_expr(rng, names, 2)};")
            elif choice < 0.75 and depth > 0:
                out.append(f"{indent}if ({_random_cmp(rng, names)}) {{")
                out.extend(stmts(depth - 1, indent + "    ", budget))
                if rng.random() < 0.5:
                    out.append(f"{indent}}} else {{")
                    out.extend(stmts(depth - 1, indent + "    ", budget))
                out.append(f"{indent}}}")
            elif depth > 0:
                loop_id[0] += 1
                v = f"t{loop_id[0]}"
                lo = rng.randint(-5, 5)
                hi = lo + rng.randint(0, 6)
                out.append(f"{indent}int {v};")
                out.append(f"{indent}for ({v} = {lo}; {v} <= {hi}; "
                           f"{v} += 1) {{")
                out.extend(stmts(depth - 1, indent + "    ", budget))
                out.append(f"{indent}}}")
            else:
                target = rng.choice(["x", "y", "z"])
                out.append(f"{indent}{target} = "
                           f"{_random_expr(rng, names, 1)};")
        return out

    budget = [rng.randint(4, 12)]
    lines.extend(stmts(2, "    ", budget))
    lines.append("    return x;")
    src = "int main(int p, int q) {\n" + "\n".join(lines) + "\n}\n"
    inputs = {"p": rng.randint(-100, 100), "q": rng.randint(-100, 100)}
    return {"src": src, "inputs": inputs}


def check_interval_soundness(case: dict) -> None:
    """Interpret with a probe asserting every concrete value sits inside
    the analyzed interval at that point (and the point is reachable)."""
    analyzed = analyze_src(case["src"])
    errors: list[str] = []

    def probe(label: int, point: str, env: dict[str, int]) -> None:
        state = (analyzed.itv.before(label) if point == "before"
                 else analyzed.itv.after(label))
        if point == "after" and (label, "after") not in analyzed.itv.states:
            return
        if state.is_bottom:
            errors.append(f"reached label {label} ({point}) analyzed as "
                          "unreachable")
            return
        for name, value in env.items():
            interval = state.get(name)
            if not interval.contains(value):
                errors.append(
                    f"label {label} ({point}): {name}={value} outside "
                    f"{interval}")

    interpret(analyzed.program, case.get("inputs"), fuel=200_000, probe=probe)
    assert not errors, "; ".join(errors[:5])
