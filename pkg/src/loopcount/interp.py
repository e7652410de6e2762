"""Concrete big-integer interpreter for the C subset.

This is the ground-truth oracle: it executes a program and records how many
times every labeled statement ran. All soundness tests compare analysis
results against these counts.

Semantics notes:
  * integers are unbounded (Python ints); division and modulo truncate
    toward zero like C
  * comparisons and logical operators yield 0/1 with short-circuiting
  * scalars default to 0 until assigned; arrays are sparse and default to 0
  * a loop statement's own counter increments once per entry from outside;
    its body statement's counter increments once per iteration
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .ast_nodes import (
    ArrayAssign, Assign, BinOp, Block, CallStmt, Decl, Empty, Expr,
    If, Index, Lit, Loop, Program, Return, Stmt, Unary, Var,
)

Probe = Callable[[int, str, dict[str, int]], None]


def c_div(a: int, b: int) -> int:
    """C99 integer division: truncation toward zero."""
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


def c_mod(a: int, b: int) -> int:
    """C99 remainder: sign follows the dividend."""
    return a - c_div(a, b) * b


class _Fuel(Exception):
    pass


class _Trap(Exception):
    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class _ReturnSignal(Exception):
    def __init__(self, value: int):
        self.value = value


@dataclass
class ExecutionProfile:
    """Per-label execution counts plus run metadata."""
    counts: dict[int, int] = field(default_factory=dict)
    fuel_consumed: int = 0
    terminated: bool = True
    trap: Optional[str] = None

    def count(self, label: int) -> int:
        return self.counts.get(label, 0)


class _Frame:
    __slots__ = ("scalars", "arrays")

    def __init__(self) -> None:
        self.scalars: dict[str, int] = {}
        self.arrays: dict[str, dict[int, int]] = {}


class Interpreter:
    def __init__(self, program: Program, fuel: int = 1_000_000,
                 probe: Optional[Probe] = None):
        self.program = program
        self.fuel = fuel
        self.probe = probe
        self.counts: dict[int, int] = {}
        self.globals = _Frame()

    # -- expression evaluation ----------------------------------------------

    def eval(self, e: Expr, frame: _Frame) -> int:
        if isinstance(e, Lit):
            return e.value
        if isinstance(e, Var):
            if e.name in frame.scalars:
                return frame.scalars[e.name]
            return self.globals.scalars.get(e.name, 0)
        if isinstance(e, Index):
            arr = frame.arrays.get(e.name)
            if arr is None:
                arr = self.globals.arrays.setdefault(e.name, {})
            return arr.get(self.eval(e.index, frame), 0)
        if isinstance(e, Unary):
            if e.op == "-":
                return -self.eval(e.operand, frame)
            if e.op == "!":
                return 0 if self.eval(e.operand, frame) != 0 else 1
            # '&': addresses are not first-class values; only the aliasing
            # effect matters, and calls handle that. Yield 1 ("some address").
            return 1
        if isinstance(e, BinOp):
            if e.op == "&&":
                return 1 if (self.eval(e.left, frame) != 0
                             and self.eval(e.right, frame) != 0) else 0
            if e.op == "||":
                return 1 if (self.eval(e.left, frame) != 0
                             or self.eval(e.right, frame) != 0) else 0
            a = self.eval(e.left, frame)
            b = self.eval(e.right, frame)
            if e.op == "+":
                return a + b
            if e.op == "-":
                return a - b
            if e.op == "*":
                return a * b
            if e.op == "/":
                if b == 0:
                    raise _Trap("division by zero")
                return c_div(a, b)
            if e.op == "%":
                if b == 0:
                    raise _Trap("modulo by zero")
                return c_mod(a, b)
            if e.op == "<":
                return 1 if a < b else 0
            if e.op == ">":
                return 1 if a > b else 0
            if e.op == "<=":
                return 1 if a <= b else 0
            if e.op == ">=":
                return 1 if a >= b else 0
            if e.op == "==":
                return 1 if a == b else 0
            if e.op == "!=":
                return 1 if a != b else 0
        raise TypeError(f"cannot evaluate {e!r}")

    # -- statement execution -------------------------------------------------

    def _tick(self, stmt: Stmt, frame: _Frame) -> None:
        self.counts[stmt.label] = self.counts.get(stmt.label, 0) + 1
        self.fuel -= 1
        if self.fuel < 0:
            raise _Fuel()
        if self.probe is not None:
            self.probe(stmt.label, "before", self._snapshot(frame))

    def _snapshot(self, frame: _Frame) -> dict[str, int]:
        env = dict(self.globals.scalars)
        env.update(frame.scalars)
        return env

    def _store(self, frame: _Frame, name: str, value: int) -> None:
        if name in frame.scalars:
            frame.scalars[name] = value
        elif name in self.globals.scalars:
            self.globals.scalars[name] = value
        else:
            frame.scalars[name] = value

    def exec(self, stmt: Stmt, frame: _Frame) -> None:
        self._tick(stmt, frame)
        if isinstance(stmt, (Empty,)):
            pass
        elif isinstance(stmt, Decl):
            if stmt.array_size is not None:
                frame.arrays.setdefault(stmt.name, {})
            else:
                frame.scalars[stmt.name] = (
                    0 if stmt.init is None else self.eval(stmt.init, frame))
        elif isinstance(stmt, Assign):
            self._store(frame, stmt.name, self.eval(stmt.value, frame))
        elif isinstance(stmt, ArrayAssign):
            arr = frame.arrays.get(stmt.name)
            if arr is None:
                arr = self.globals.arrays.setdefault(stmt.name, {})
            arr[self.eval(stmt.index, frame)] = self.eval(stmt.value, frame)
        elif isinstance(stmt, Block):
            for child in stmt.stmts:
                self.exec(child, frame)
        elif isinstance(stmt, If):
            if self.eval(stmt.cond, frame) != 0:
                self.exec(stmt.then, frame)
            elif stmt.orelse is not None:
                self.exec(stmt.orelse, frame)
        elif isinstance(stmt, Loop):
            if stmt.init is not None:
                self.exec(stmt.init, frame)
            while self.eval(stmt.cond, frame) != 0:
                self.exec(stmt.body, frame)
                if stmt.step is not None:
                    self.exec(stmt.step, frame)
        elif isinstance(stmt, CallStmt):
            self.call(stmt.name, [self.eval(a, frame) for a in stmt.args])
        elif isinstance(stmt, Return):
            value = 0 if stmt.value is None else self.eval(stmt.value, frame)
            raise _ReturnSignal(value)
        else:
            raise TypeError(f"cannot execute {stmt!r}")
        if self.probe is not None:
            self.probe(stmt.label, "after", self._snapshot(frame))

    def call(self, name: str, args: list[int]) -> int:
        fn = self.program.function(name)
        if fn is None:
            raise _Trap(f"call to undefined function {name!r}")
        if len(args) != len(fn.params):
            raise _Trap(f"wrong number of arguments to {name!r}")
        frame = _Frame()
        for p, v in zip(fn.params, args):
            frame.scalars[p] = v
        try:
            self.exec(fn.body, frame)
        except _ReturnSignal as r:
            return r.value
        return 0


def interpret(program: Program, inputs: Optional[dict[str, int]] = None,
              fuel: int = 1_000_000, entry: Optional[str] = None,
              probe: Optional[Probe] = None) -> ExecutionProfile:
    """Run the entry function and profile per-label execution counts.

    ``inputs`` supplies values for the entry function's parameters (missing
    parameters default to 0). Execution stops when ``fuel`` statement
    executions have happened; the profile is then flagged non-terminated.
    """
    profile = ExecutionProfile()
    fn = program.entry(entry)
    if fn is None:
        return profile
    interp = Interpreter(program, fuel, probe)
    for g in program.globals:
        if g.array_size is not None:
            interp.globals.arrays.setdefault(g.name, {})
        else:
            interp.globals.scalars[g.name] = (
                0 if g.init is None else interp.eval(g.init, interp.globals))
    inputs = inputs or {}
    args = [inputs.get(p, 0) for p in fn.params]
    try:
        interp.call(fn.name, args)
    except _Fuel:
        profile.terminated = False
    except _Trap as t:
        profile.terminated = False
        profile.trap = t.message
    profile.counts = interp.counts
    profile.fuel_consumed = fuel - max(interp.fuel, 0)
    return profile
