"""Finite-domain constraint solver over unbounded integers.

Domains are single strided intervals

    { x | lo <= x <= hi  and  x ≡ residue (mod stride) }

with lo = -inf / hi = +inf allowed, normalized so finite endpoints are
attained members. This is exactly the shape produced by loop translation
(two bounds plus one congruence), it makes counting a domain O(1), and any
constraint that cannot be absorbed into a domain simply stays pending and
is re-checked during search.

Propagation is bounds-and-congruence consistency and always terminates:
a refinement that leaves every touched domain infinite counts against the
constraint's firing budget (default 64, env LOOPCOUNT_SOLVER_BUDGET);
refinements of finite domains are free because they are well-founded.
Once over budget a propagator is parked for the rest of the solve. The
reachable fixpoint does not depend on the order constraints were posted.

Counting (``count_solutions``) multiplies domain sizes for variables all
of whose constraints are entailed, so rectangular spaces are counted
without enumeration; only genuinely coupled variables are branched on,
smallest finite domain first, ascending values.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from math import gcd
from typing import Iterator, Optional, Sequence

from .interval import NEG_INF, POS_INF, Bound, is_finite

DEFAULT_PROPAGATION_BUDGET = 64
DEFAULT_NODE_CAP = 10_000_000

BUDGET_ENV_VAR = "LOOPCOUNT_SOLVER_BUDGET"


class UnboundedDomainError(Exception):
    """A counted variable still has an infinite domain."""


class BudgetExceededError(Exception):
    """Search visited more nodes than the configured cap."""


def _floor_div(a: int, b: int) -> int:
    return a // b


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


# ---------------------------------------------------------------------------
# Domains
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FdDomain:
    """Strided interval; construct through :func:`make_domain`."""
    lo: Bound
    hi: Bound
    stride: int = 1
    residue: int = 0

    @property
    def is_empty(self) -> bool:
        return self.lo > self.hi

    @property
    def is_finite(self) -> bool:
        return is_finite(self.lo) and is_finite(self.hi)

    def is_singleton(self) -> bool:
        return is_finite(self.lo) and self.lo == self.hi

    def contains(self, v: int) -> bool:
        if self.is_empty:
            return False
        return self.lo <= v <= self.hi and (v - self.residue) % self.stride == 0

    def representative(self) -> int:
        """Some value congruent to every member modulo the stride."""
        return int(self.lo) if is_finite(self.lo) else self.residue

    def members(self) -> Iterator[int]:
        if self.is_empty:
            return
        if not self.is_finite:
            raise UnboundedDomainError(f"cannot enumerate {self}")
        yield from range(int(self.lo), int(self.hi) + 1, self.stride)

    def size(self) -> int:
        """Member count; raises UnboundedDomainError on infinite domains."""
        if self.is_empty:
            return 0
        if not self.is_finite:
            raise UnboundedDomainError(f"cannot count {self}")
        return (int(self.hi) - int(self.lo)) // self.stride + 1

    def __str__(self) -> str:
        if self.is_empty:
            return "{}"
        text = f"{self.lo}..{self.hi}"
        if self.stride != 1:
            text += f" (mod {self.stride} = {self.residue})"
        return text


EMPTY_DOMAIN = FdDomain(POS_INF, NEG_INF, 1, 0)


def make_domain(lo: Bound, hi: Bound, stride: int = 1, residue: int = 0) -> FdDomain:
    """Normalize: snap finite endpoints onto the congruence class, collapse
    singletons to stride 1, canonicalize empties."""
    if stride < 1:
        raise ValueError("stride must be positive")
    residue %= stride
    if is_finite(lo):
        lo = lo + (residue - lo) % stride
    if is_finite(hi):
        hi = hi - (hi - residue) % stride
    if lo > hi:
        return EMPTY_DOMAIN
    if lo == hi:
        return FdDomain(lo, hi, 1, 0)
    return FdDomain(lo, hi, stride, residue)


TOP_DOMAIN = make_domain(NEG_INF, POS_INF)


def domain_count(d: FdDomain) -> int:
    """Exact member count of a finite domain (0 for the empty one)."""
    return d.size()


def _crt(m1: int, r1: int, m2: int, r2: int) -> Optional[tuple[int, int]]:
    """Merge x ≡ r1 (mod m1) with x ≡ r2 (mod m2); None when incompatible."""
    g = gcd(m1, m2)
    if (r2 - r1) % g != 0:
        return None
    lcm = m1 // g * m2
    t = ((r2 - r1) // g * pow(m1 // g, -1, m2 // g)) % (m2 // g)
    return lcm, (r1 + m1 * t) % lcm


def intersect_bounds(d: FdDomain, lo: Bound, hi: Bound) -> FdDomain:
    if d.is_empty:
        return d
    return make_domain(max(d.lo, lo), min(d.hi, hi), d.stride, d.residue)


def intersect_congruence(d: FdDomain, modulus: int, residue: int) -> FdDomain:
    if d.is_empty:
        return d
    if modulus == 1:
        return d
    if d.is_singleton():
        v = int(d.lo)
        return d if (v - residue) % modulus == 0 else EMPTY_DOMAIN
    merged = _crt(d.stride, d.residue, modulus, residue)
    if merged is None:
        return EMPTY_DOMAIN
    m, r = merged
    return make_domain(d.lo, d.hi, m, r)


# ---------------------------------------------------------------------------
# Linear expressions and constraints
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinExpr:
    """constant + sum(coefficient * variable); terms sorted, no zeros."""
    constant: int = 0
    terms: tuple[tuple[int, int], ...] = ()  # (coefficient, var id)

    @staticmethod
    def var(v: int, coefficient: int = 1) -> "LinExpr":
        if coefficient == 0:
            return LinExpr(0, ())
        return LinExpr(0, ((coefficient, v),))

    @staticmethod
    def const(n: int) -> "LinExpr":
        return LinExpr(n, ())

    def _merge(self, other: "LinExpr", sign: int) -> "LinExpr":
        coef: dict[int, int] = dict((v, c) for c, v in self.terms)
        for c, v in other.terms:
            coef[v] = coef.get(v, 0) + sign * c
        terms = tuple(sorted(((c, v) for v, c in coef.items() if c != 0),
                             key=lambda t: t[1]))
        return LinExpr(self.constant + sign * other.constant, terms)

    def __add__(self, other: "LinExpr") -> "LinExpr":
        return self._merge(other, 1)

    def __sub__(self, other: "LinExpr") -> "LinExpr":
        return self._merge(other, -1)

    def scaled(self, k: int) -> "LinExpr":
        if k == 0:
            return LinExpr(0, ())
        return LinExpr(self.constant * k,
                       tuple((c * k, v) for c, v in self.terms))

    def shifted(self, n: int) -> "LinExpr":
        return LinExpr(self.constant + n, self.terms)

    def variables(self) -> tuple[int, ...]:
        return tuple(v for _, v in self.terms)

    def evaluate(self, assignment: dict[int, int]) -> int:
        return self.constant + sum(c * assignment[v] for c, v in self.terms)


@dataclass(frozen=True)
class Constraint:
    """Surface constraint forms accepted by :meth:`Csp.post`."""
    kind: str                 # 'le', 'ge', 'eq', 'cong0'
    left: LinExpr
    right: LinExpr = LinExpr()
    modulus: int = 1

    @staticmethod
    def le(left: LinExpr, right: LinExpr) -> "Constraint":
        return Constraint("le", left, right)

    @staticmethod
    def ge(left: LinExpr, right: LinExpr) -> "Constraint":
        return Constraint("ge", left, right)

    @staticmethod
    def eq(left: LinExpr, right: LinExpr) -> "Constraint":
        return Constraint("eq", left, right)

    @staticmethod
    def congruence_zero(expr: LinExpr, modulus: int) -> "Constraint":
        if modulus < 1:
            raise ValueError("modulus must be positive")
        return Constraint("cong0", expr, modulus=modulus)

    def satisfied_by(self, assignment: dict[int, int]) -> bool:
        if self.kind == "le":
            return self.left.evaluate(assignment) <= self.right.evaluate(assignment)
        if self.kind == "ge":
            return self.left.evaluate(assignment) >= self.right.evaluate(assignment)
        if self.kind == "eq":
            return self.left.evaluate(assignment) == self.right.evaluate(assignment)
        return self.left.evaluate(assignment) % self.modulus == 0


@dataclass
class _Prop:
    """Canonical propagator: expr <= 0, or expr ≡ 0 (mod modulus)."""
    kind: str  # 'le' | 'cong'
    expr: LinExpr
    modulus: int = 1
    fires: int = 0
    parked: bool = False


# ---------------------------------------------------------------------------
# The CSP
# ---------------------------------------------------------------------------

@dataclass
class SolveStats:
    nodes: int = 0
    propagations: int = 0


class Csp:
    """Mutable constraint store; single-owner (no concurrent mutation)."""

    def __init__(self, propagation_budget: Optional[int] = None,
                 node_cap: int = DEFAULT_NODE_CAP):
        if propagation_budget is None:
            propagation_budget = int(
                os.environ.get(BUDGET_ENV_VAR, DEFAULT_PROPAGATION_BUDGET))
        self.propagation_budget = propagation_budget
        self.node_cap = node_cap
        self.domains: list[FdDomain] = []
        self.props: list[_Prop] = []
        self.posted: list[Constraint] = []
        self._watch: dict[int, list[int]] = {}
        self.stats = SolveStats()
        # Some contradictions (a congruence violated by constants alone)
        # never show up as an empty domain; this flag records them.
        self.failed = False

    # -- construction ---------------------------------------------------------

    def new_var(self, lo: Bound = NEG_INF, hi: Bound = POS_INF) -> int:
        """Fresh variable; defaults to the full integer domain."""
        self.domains.append(make_domain(lo, hi))
        return len(self.domains) - 1

    def domain(self, v: int) -> FdDomain:
        return self.domains[v]

    def _add_prop(self, prop: _Prop) -> None:
        index = len(self.props)
        self.props.append(prop)
        for v in prop.expr.variables():
            self._watch.setdefault(v, []).append(index)

    def post(self, c: Constraint) -> bool:
        """Record a constraint and propagate; False means inconsistent."""
        self.posted.append(c)
        if c.kind == "le":
            self._add_prop(_Prop("le", c.left - c.right))
        elif c.kind == "ge":
            self._add_prop(_Prop("le", c.right - c.left))
        elif c.kind == "eq":
            self._add_prop(_Prop("le", c.left - c.right))
            self._add_prop(_Prop("le", c.right - c.left))
        elif c.kind == "cong0":
            if c.modulus > 1:
                self._add_prop(_Prop("cong", c.left, c.modulus))
        else:
            raise ValueError(f"unknown constraint kind {c.kind!r}")
        return self.propagate()

    # -- propagation -----------------------------------------------------------

    def _term_min(self, coef: int, d: FdDomain) -> Bound:
        lo = d.lo if coef > 0 else d.hi
        return coef * lo if is_finite(lo) else NEG_INF

    def _term_max(self, coef: int, d: FdDomain) -> Bound:
        hi = d.hi if coef > 0 else d.lo
        return coef * hi if is_finite(hi) else POS_INF

    def _update(self, v: int, new: FdDomain,
                touched_infinite: list[bool]) -> bool:
        """Install a shrunk domain; returns True when it changed."""
        old = self.domains[v]
        if new == old:
            return False
        self.domains[v] = new
        touched_infinite.append(not new.is_finite)
        return True

    def _fire_le(self, prop: _Prop, touched: list[bool]) -> bool:
        """Bounds propagation for expr <= 0; False on a wiped-out domain."""
        e = prop.expr
        for coef, v in e.terms:
            rest = e.constant
            infinite = False
            for c2, v2 in e.terms:
                if v2 == v:
                    continue
                t = self._term_min(c2, self.domains[v2])
                if not is_finite(t):
                    infinite = True
                    break
                rest += t
            if infinite:
                continue
            # coef * x <= -rest
            d = self.domains[v]
            if coef > 0:
                new = intersect_bounds(d, NEG_INF, _floor_div(-rest, coef))
            else:
                new = intersect_bounds(d, _ceil_div(-rest, coef), POS_INF)
            if self._update(v, new, touched) and new.is_empty:
                return False
        if not e.terms and e.constant > 0:
            return False
        return True

    def _cong_parts(self, prop: _Prop) -> tuple[int, list[tuple[int, int]]]:
        """Split ``expr ≡ 0 (mod m)`` into a fixed part and the variables
        whose contribution still varies over their domain."""
        m = prop.modulus
        fixed = prop.expr.constant % m
        varying: list[tuple[int, int]] = []
        for coef, v in prop.expr.terms:
            d = self.domains[v]
            if d.is_singleton():
                fixed = (fixed + coef * int(d.lo)) % m
            elif (coef * d.stride) % m == 0:
                fixed = (fixed + coef * d.representative()) % m
            else:
                varying.append((coef, v))
        return fixed, varying

    def _fire_cong(self, prop: _Prop, touched: list[bool]) -> bool:
        m = prop.modulus
        fixed, varying = self._cong_parts(prop)
        if not varying:
            return fixed % m == 0
        if len(varying) > 1:
            return True  # stays pending
        coef, v = varying[0]
        g = gcd(coef % m or m, m)
        if (-fixed) % g != 0:
            self.domains[v] = EMPTY_DOMAIN
            touched.append(False)
            return False
        m_red = m // g
        r0 = ((-fixed // g) * pow((coef % m) // g, -1, m_red)) % m_red
        new = intersect_congruence(self.domains[v], m_red, r0)
        if self._update(v, new, touched) and new.is_empty:
            return False
        return True

    def propagate(self) -> bool:
        """Run all propagators to fixpoint (or budget); False on conflict."""
        if self.failed:
            return False
        queue = list(range(len(self.props)))
        queued = set(queue)
        while queue:
            index = queue.pop(0)
            queued.discard(index)
            prop = self.props[index]
            if prop.parked:
                continue
            before = list(self.domains)
            touched: list[bool] = []
            self.stats.propagations += 1
            ok = (self._fire_le(prop, touched) if prop.kind == "le"
                  else self._fire_cong(prop, touched))
            if not ok:
                self.failed = True
                return False
            if not touched:
                continue
            if all(touched):
                # Refinements that keep every touched domain infinite are
                # the only source of divergence; meter them.
                prop.fires += 1
                if prop.fires >= self.propagation_budget:
                    prop.parked = True
            for v, (old, new) in enumerate(zip(before, self.domains)):
                if old == new:
                    continue
                for w in self._watch.get(v, ()):
                    if w not in queued:
                        queue.append(w)
                        queued.add(w)
        return True

    @property
    def inconsistent(self) -> bool:
        return self.failed or any(d.is_empty for d in self.domains)

    # -- entailment -------------------------------------------------------------

    def _entailed(self, prop: _Prop) -> bool:
        """Does the constraint hold for every member combination of the
        current domains?"""
        if prop.kind == "le":
            total: Bound = prop.expr.constant
            for coef, v in prop.expr.terms:
                t = self._term_max(coef, self.domains[v])
                if not is_finite(t):
                    return False
                total += t
            return total <= 0
        fixed, varying = self._cong_parts(prop)
        return not varying and fixed % prop.modulus == 0

    # -- counting and enumeration ------------------------------------------------

    def _charge_node(self) -> None:
        self.stats.nodes += 1
        if self.stats.nodes > self.node_cap:
            raise BudgetExceededError(
                f"search exceeded {self.node_cap} nodes")

    def _begin_solve(self) -> None:
        self.stats = SolveStats()
        for prop in self.props:  # firing budgets are per solve
            prop.fires = 0
            prop.parked = False

    def count_solutions(self, variables: Optional[Sequence[int]] = None) -> int:
        """Exact number of assignments to ``variables`` satisfying every
        constraint. Variables whose constraints are all entailed contribute
        their domain size as a factor without being enumerated."""
        if variables is None:
            variables = range(len(self.domains))
        self._begin_solve()
        if not self.propagate():
            return 0
        return self._count(set(variables))

    def _count(self, unfixed: set[int]) -> int:
        if any(self.domains[v].is_empty for v in unfixed):
            return 0
        factor = 1
        pending = {v: [p for p in self._watch.get(v, ())
                       if not self._entailed(self.props[p])]
                   for v in unfixed}
        for v in sorted(unfixed):
            if not pending[v]:
                factor *= self.domains[v].size()  # may raise Unbounded
                unfixed = unfixed - {v}
        if factor == 0 or not unfixed:
            return factor
        branch = min(
            (v for v in unfixed if self.domains[v].is_finite),
            key=lambda v: (self.domains[v].size(), v),
            default=None)
        if branch is None:
            raise UnboundedDomainError(
                "constrained variable with an infinite domain")
        rest = unfixed - {branch}
        total = 0
        for value in self.domains[branch].members():
            self._charge_node()
            saved = list(self.domains)
            saved_failed = self.failed
            self.domains[branch] = make_domain(value, value)
            if self.propagate():
                total += self._count(rest)
            self.domains = saved
            self.failed = saved_failed
        return factor * total

    def enumerate(self, variables: Optional[Sequence[int]] = None
                  ) -> list[tuple[int, ...]]:
        """All solutions in lexicographic variable-value order."""
        if variables is None:
            variables = list(range(len(self.domains)))
        variables = list(variables)
        self._begin_solve()
        out: list[tuple[int, ...]] = []
        if not self.propagate():
            return out

        def dfs(index: int, partial: list[int]) -> None:
            if index == len(variables):
                assignment = dict(zip(variables, partial))
                if all(self._prop_holds(p, assignment) for p in self.props):
                    out.append(tuple(partial))
                return
            v = variables[index]
            for value in self.domains[v].members():
                self._charge_node()
                saved = list(self.domains)
                saved_failed = self.failed
                self.domains[v] = make_domain(value, value)
                if self.propagate():
                    partial.append(value)
                    dfs(index + 1, partial)
                    partial.pop()
                self.domains = saved
                self.failed = saved_failed

        dfs(0, [])
        return out

    def _prop_holds(self, prop: _Prop, assignment: dict[int, int]) -> bool:
        if any(v not in assignment for v in prop.expr.variables()):
            return True  # uncounted variables: checked by propagation only
        value = prop.expr.evaluate(assignment)
        return value <= 0 if prop.kind == "le" else value % prop.modulus == 0


# ---------------------------------------------------------------------------
# Debug text format: one constraint per line
# ---------------------------------------------------------------------------

def parse_csp(text: str, propagation_budget: Optional[int] = None,
              node_cap: int = DEFAULT_NODE_CAP) -> tuple[Csp, dict[str, int]]:
    """Build a CSP from the line-oriented debug format, e.g.::

        I in 0..9
        J <= I
        J >= 1
        (J - I) mod 2 = 0
        2*X + 3 <= Y

    Variables are declared on first use with the full integer domain.
    Returns the CSP and the name -> variable-id mapping.
    """
    csp = Csp(propagation_budget, node_cap)
    names: dict[str, int] = {}

    def var_of(name: str) -> int:
        if name not in names:
            names[name] = csp.new_var()
        return names[name]

    def parse_lin(src: str) -> LinExpr:
        expr = LinExpr()
        sign = 1
        for tok in _lin_tokens(src):
            if tok == "+":
                sign = 1
            elif tok == "-":
                sign = -1
            else:
                if "*" in tok:
                    num, name = tok.split("*", 1)
                    expr = expr + LinExpr.var(var_of(name.strip()),
                                              sign * int(num))
                elif tok.lstrip("-").isdigit():
                    expr = expr.shifted(sign * int(tok))
                else:
                    expr = expr + LinExpr.var(var_of(tok), sign)
                sign = 1
        return expr

    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if " in " in line and ".." in line:
            name, _, rng = line.partition(" in ")
            lo_s, _, hi_s = rng.partition("..")
            lo = NEG_INF if lo_s.strip() in ("-inf",) else int(lo_s)
            hi = POS_INF if hi_s.strip() in ("+inf", "inf") else int(hi_s)
            v = var_of(name.strip())
            csp.domains[v] = intersect_bounds(csp.domains[v], lo, hi)
            continue
        if " mod " in line:
            inner, _, rest = line.partition(" mod ")
            modulus_s, _, rhs = rest.partition("=")
            if rhs.strip() != "0":
                raise ValueError(f"congruence must equal 0: {raw!r}")
            expr = parse_lin(inner.strip().strip("()"))
            csp.post(Constraint.congruence_zero(expr, int(modulus_s)))
            continue
        for op, kind in ((">=", "ge"), ("<=", "le"), ("=", "eq")):
            if op in line:
                lhs, _, rhs = line.partition(op)
                csp.post(Constraint(kind, parse_lin(lhs), parse_lin(rhs)))
                break
        else:
            raise ValueError(f"cannot parse constraint line {raw!r}")
    return csp, names


def _lin_tokens(src: str) -> list[str]:
    out = src.replace("+", " + ").replace("-", " - ").split()
    # re-merge "2 * X" style products written with spaces
    merged: list[str] = []
    i = 0
    while i < len(out):
        if i + 2 < len(out) and out[i + 1] == "*":
            merged.append(out[i] + "*" + out[i + 2])
            i += 3
        else:
            merged.append(out[i])
            i += 1
    return merged


def format_csp(csp: Csp, names: Optional[dict[str, int]] = None) -> str:
    """Inverse-ish of parse_csp, for debugging dumps."""
    id_name = {v: n for n, v in (names or {}).items()}

    def nm(v: int) -> str:
        return id_name.get(v, f"V{v}")

    def lin(e: LinExpr) -> str:
        parts: list[str] = []
        for c, v in e.terms:
            if c == 1:
                term = nm(v)
            elif c == -1:
                term = f"-{nm(v)}"
            else:
                term = f"{c}*{nm(v)}"
            parts.append(term if not parts else
                         f"+ {term}" if not term.startswith("-") else
                         f"- {term[1:]}")
        if e.constant or not parts:
            k = e.constant
            parts.append(str(k) if not parts else
                         f"+ {k}" if k >= 0 else f"- {-k}")
        return " ".join(parts)

    lines = [f"{nm(v)} in {d}" for v, d in enumerate(csp.domains)]
    for c in csp.posted:
        if c.kind == "cong0":
            lines.append(f"({lin(c.left)}) mod {c.modulus} = 0")
        else:
            op = {"le": "<=", "ge": ">=", "eq": "="}[c.kind]
            lines.append(f"{lin(c.left)} {op} {lin(c.right)}")
    return "\n".join(lines) + "\n"
