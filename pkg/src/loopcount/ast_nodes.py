"""AST for the analyzed C subset.

Every statement carries a globally unique integer label and a source span.
Spans never participate in equality so that round-tripped programs compare
equal; labels do, because all analysis results are keyed by them.

Surface sugar is gone by the time a tree exists: compound assignments and
increment/decrement statements are plain assignments, and a for-loop is a
``Loop`` node holding its init and step statements explicitly (semantics:
``init; while (cond) { body; step }``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int  # 1-indexed
    column: int  # 1-indexed
    length: int = 0

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


UNKNOWN_SPAN = SourceSpan("<unknown>", 1, 1, 0)


def _span_field() -> SourceSpan:
    return UNKNOWN_SPAN


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Expr:
    """Base class for expressions. Abstract."""

    def children(self) -> tuple[Expr, ...]:
        return ()

    def variables(self) -> set[str]:
        """Names of all variables referenced anywhere in this expression."""
        out: set[str] = set()
        stack: list[Expr] = [self]
        while stack:
            e = stack.pop()
            if isinstance(e, Var):
                out.add(e.name)
            elif isinstance(e, Index):
                out.add(e.name)
            stack.extend(e.children())
        return out


@dataclass(frozen=True)
class Lit(Expr):
    value: int
    span: SourceSpan = field(default_factory=_span_field, compare=False)


@dataclass(frozen=True)
class Var(Expr):
    name: str
    span: SourceSpan = field(default_factory=_span_field, compare=False)


@dataclass(frozen=True)
class Unary(Expr):
    op: str  # '-', '!', '&'
    operand: Expr
    span: SourceSpan = field(default_factory=_span_field, compare=False)

    def children(self) -> tuple[Expr, ...]:
        return (self.operand,)


@dataclass(frozen=True)
class BinOp(Expr):
    op: str  # + - * / % < > <= >= == != && ||
    left: Expr
    right: Expr
    span: SourceSpan = field(default_factory=_span_field, compare=False)

    def children(self) -> tuple[Expr, ...]:
        return (self.left, self.right)


@dataclass(frozen=True)
class Index(Expr):
    """Array read ``name[index]``. Opaque to the analyses (always unknown)."""
    name: str
    index: Expr
    span: SourceSpan = field(default_factory=_span_field, compare=False)

    def children(self) -> tuple[Expr, ...]:
        return (self.index,)


COMPARISONS = ("<", ">", "<=", ">=", "==", "!=")
ARITH_OPS = ("+", "-", "*", "/", "%")
LOGICAL_OPS = ("&&", "||")


# ---------------------------------------------------------------------------
# Statements
# ---------------------------------------------------------------------------

@dataclass
class Stmt:
    """Base class for statements. Abstract.

    ``label`` is assigned by the frontend after parsing (preorder,
    program-wide, starting at 1); 0 means "not yet labeled".
    """
    label: int = field(default=0, init=False)
    span: SourceSpan = field(default=UNKNOWN_SPAN, init=False, compare=False)

    def children(self) -> tuple[Stmt, ...]:
        return ()


@dataclass
class Decl(Stmt):
    name: str
    init: Optional[Expr] = None
    array_size: Optional[int] = None  # None for scalars


@dataclass
class Assign(Stmt):
    name: str
    value: Expr


@dataclass
class ArrayAssign(Stmt):
    name: str
    index: Expr
    value: Expr


@dataclass
class If(Stmt):
    cond: Expr
    then: Stmt
    orelse: Optional[Stmt] = None

    def children(self) -> tuple[Stmt, ...]:
        return (self.then,) if self.orelse is None else (self.then, self.orelse)


@dataclass
class Loop(Stmt):
    """Unified loop node.

    A for-loop keeps its init and step statements here (l1 and l3); the
    node's own label is the condition label l2. A while-loop has
    ``init is None and step is None``.
    """
    cond: Expr
    body: Stmt
    init: Optional[Stmt] = None
    step: Optional[Stmt] = None

    def children(self) -> tuple[Stmt, ...]:
        out: list[Stmt] = []
        if self.init is not None:
            out.append(self.init)
        out.append(self.body)
        if self.step is not None:
            out.append(self.step)
        return tuple(out)


@dataclass
class Block(Stmt):
    stmts: list[Stmt] = field(default_factory=list)

    def children(self) -> tuple[Stmt, ...]:
        return tuple(self.stmts)


@dataclass
class CallStmt(Stmt):
    name: str
    args: list[Expr] = field(default_factory=list)


@dataclass
class Return(Stmt):
    value: Optional[Expr] = None


@dataclass
class Empty(Stmt):
    pass


# ---------------------------------------------------------------------------
# Program
# ---------------------------------------------------------------------------

@dataclass
class Function:
    name: str
    params: list[str]
    body: Block
    return_type: str = "int"  # "int" | "void"


@dataclass
class Program:
    functions: list[Function] = field(default_factory=list)
    globals: list[Decl] = field(default_factory=list)

    def function(self, name: str) -> Optional[Function]:
        for f in self.functions:
            if f.name == name:
                return f
        return None

    def entry(self, name: Optional[str] = None) -> Optional[Function]:
        """Entry function: the requested name, else ``main``, else the first."""
        if name is not None:
            return self.function(name)
        return self.function("main") or (self.functions[0] if self.functions else None)

    def statements(self) -> Iterator[Stmt]:
        """All statements in the program, preorder (globals excluded)."""
        for f in self.functions:
            yield from walk_stmts(f.body)

    def statement_by_label(self, label: int) -> Optional[Stmt]:
        for s in self.statements():
            if s.label == label:
                return s
        return None


def walk_stmts(root: Stmt) -> Iterator[Stmt]:
    """Preorder traversal, init before the loop node, step after the body."""
    if isinstance(root, Loop):
        if root.init is not None:
            yield from walk_stmts(root.init)
        yield root
        yield from walk_stmts(root.body)
        if root.step is not None:
            yield from walk_stmts(root.step)
    else:
        yield root
        for child in root.children():
            yield from walk_stmts(child)


def walk_exprs(e: Expr) -> Iterator[Expr]:
    yield e
    for c in e.children():
        yield from walk_exprs(c)


def stmt_exprs(s: Stmt) -> Iterator[Expr]:
    """Expressions directly owned by a statement (not those of child stmts)."""
    if isinstance(s, Decl) and s.init is not None:
        yield s.init
    elif isinstance(s, Assign):
        yield s.value
    elif isinstance(s, ArrayAssign):
        yield s.index
        yield s.value
    elif isinstance(s, If):
        yield s.cond
    elif isinstance(s, Loop):
        yield s.cond
    elif isinstance(s, CallStmt):
        yield from s.args
    elif isinstance(s, Return) and s.value is not None:
        yield s.value


ExprLike = Union[Expr, int]


def as_expr(e: ExprLike) -> Expr:
    return Lit(e) if isinstance(e, int) else e


def add(l: ExprLike, r: ExprLike) -> Expr:
    return BinOp("+", as_expr(l), as_expr(r))


def sub(l: ExprLike, r: ExprLike) -> Expr:
    return BinOp("-", as_expr(l), as_expr(r))
