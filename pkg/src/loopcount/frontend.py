"""Lexer, parser and unparser for the C subset.

The grammar (see docs/grammar.md) covers exactly what the analyses can
consume: integer scalars and opaque arrays, functions, if/while/for, and
side-effect-free expressions. Everything else is rejected with a span.

Parsing desugars surface forms into the canonical AST:

  * ``i += e`` / ``i -= e``      ->  ``i = i + e`` / ``i = i - e``
  * ``++i`` / ``i--`` etc.       ->  ``i = i + 1`` / ``i = i - 1``
  * ``for (init; cond; step) b`` ->  Loop node holding init (l1) and
                                     step (l3) explicitly; missing cond
                                     becomes the literal 1.

Labels are assigned program-wide in preorder after parsing, so the same
source always yields the same labels and ``parse(unparse(p)) == p`` up to
spans.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .ast_nodes import (
    ArrayAssign, Assign, BinOp, Block, CallStmt, Decl, Empty, Expr, Function,
    If, Index, Lit, Loop, Program, Return, SourceSpan, Stmt, Unary, Var,
    stmt_exprs, walk_stmts,
)


class ParseError(Exception):
    """Syntax error or use of an unsupported construct, with its span."""

    def __init__(self, message: str, span: SourceSpan):
        super().__init__(f"{span}: {message}")
        self.message = message
        self.span = span


class UnknownLabelError(Exception):
    """An annotation referenced a label that does not exist in the program."""


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

KEYWORDS = {"int", "void", "if", "else", "while", "for", "return"}

_TWO_CHAR = {"<=", ">=", "==", "!=", "&&", "||", "+=", "-=", "++", "--"}
_ONE_CHAR = set("+-*/%<>=!&(){}[];,")


@dataclass(frozen=True)
class Token:
    kind: str  # 'num', 'ident', 'kw', 'op', 'eof'
    text: str
    span: SourceSpan


def tokenize(text: str, filename: str = "<string>") -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)

    def span(length: int) -> SourceSpan:
        return SourceSpan(filename, line, col, length)

    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            j = text.find("\n", i)
            i = n if j < 0 else j
            continue
        if text.startswith("/*", i):
            j = text.find("*/", i + 2)
            if j < 0:
                raise ParseError("unterminated block comment", span(2))
            for ch in text[i:j + 2]:
                if ch == "\n":
                    line += 1
                    col = 1
                else:
                    col += 1
            i = j + 2
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("num", text[i:j], span(j - i)))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "kw" if word in KEYWORDS else "ident"
            tokens.append(Token(kind, word, span(j - i)))
            col += j - i
            i = j
            continue
        two = text[i:i + 2]
        if two in _TWO_CHAR:
            tokens.append(Token("op", two, span(2)))
            i += 2
            col += 2
            continue
        if c in _ONE_CHAR:
            tokens.append(Token("op", c, span(1)))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {c!r}", span(1))
    tokens.append(Token("eof", "", SourceSpan(filename, line, col, 0)))
    return tokens


# ---------------------------------------------------------------------------
# Parser (recursive descent, precedence climbing for binary operators)
# ---------------------------------------------------------------------------

_PRECEDENCE = {
    "||": 1,
    "&&": 2,
    "==": 3, "!=": 3,
    "<": 4, ">": 4, "<=": 4, ">=": 4,
    "+": 5, "-": 5,
    "*": 6, "/": 6, "%": 6,
}


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        t = self.cur
        if t.kind != "eof":
            self.pos += 1
        return t

    def check(self, text: str) -> bool:
        return self.cur.text == text and self.cur.kind in ("op", "kw")

    def accept(self, text: str) -> bool:
        if self.check(text):
            self.advance()
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.check(text):
            raise ParseError(f"expected {text!r}, found {self.cur.text!r}", self.cur.span)
        return self.advance()

    def expect_ident(self) -> Token:
        if self.cur.kind != "ident":
            raise ParseError(f"expected identifier, found {self.cur.text!r}", self.cur.span)
        return self.advance()

    # -- program structure --------------------------------------------------

    def parse_program(self) -> Program:
        prog = Program()
        while self.cur.kind != "eof":
            start = self.cur.span
            if not (self.check("int") or self.check("void")):
                raise ParseError("expected declaration or function definition", start)
            rtype = self.advance().text
            name = self.expect_ident()
            if self.check("("):
                prog.functions.append(self._function_rest(rtype, name))
            else:
                if rtype == "void":
                    raise ParseError("void variables are not supported", start)
                prog.globals.append(self._decl_rest(name, start))
        return prog

    def _function_rest(self, rtype: str, name: Token) -> Function:
        self.expect("(")
        params: list[str] = []
        if not self.check(")"):
            while True:
                self.expect("int")
                params.append(self.expect_ident().text)
                if not self.accept(","):
                    break
        self.expect(")")
        body = self.parse_block()
        return Function(name.text, params, body, rtype)

    def _decl_rest(self, name: Token, start: SourceSpan) -> Decl:
        """Declaration after ``int <name>`` has been consumed."""
        if self.accept("["):
            size_tok = self.cur
            if size_tok.kind != "num":
                raise ParseError("array size must be an integer literal", size_tok.span)
            self.advance()
            self.expect("]")
            self.expect(";")
            d = Decl(name.text, None, int(size_tok.text))
        elif self.accept("="):
            d = Decl(name.text, self.parse_expr())
            self.expect(";")
        else:
            self.expect(";")
            d = Decl(name.text)
        d.span = start
        return d

    # -- statements ----------------------------------------------------------

    def parse_block(self) -> Block:
        start = self.expect("{").span
        stmts: list[Stmt] = []
        while not self.check("}"):
            if self.cur.kind == "eof":
                raise ParseError("unexpected end of input in block", self.cur.span)
            stmts.append(self.parse_stmt())
        self.expect("}")
        b = Block(stmts)
        b.span = start
        return b

    def parse_stmt(self) -> Stmt:
        start = self.cur.span
        if self.check("{"):
            return self.parse_block()
        if self.accept(";"):
            s: Stmt = Empty()
            s.span = start
            return s
        if self.check("int"):
            self.advance()
            return self._decl_rest(self.expect_ident(), start)
        if self.accept("if"):
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            then = self.parse_stmt()
            orelse = self.parse_stmt() if self.accept("else") else None
            s = If(cond, then, orelse)
            s.span = start
            return s
        if self.accept("while"):
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            body = self.parse_stmt()
            s = Loop(cond, body)
            s.span = start
            return s
        if self.accept("for"):
            return self._for_rest(start)
        if self.accept("return"):
            value = None if self.check(";") else self.parse_expr()
            self.expect(";")
            s = Return(value)
            s.span = start
            return s
        s = self._simple_stmt(start)
        self.expect(";")
        return s

    def _for_rest(self, start: SourceSpan) -> Loop:
        self.expect("(")
        init: Optional[Stmt] = None
        if not self.check(";"):
            if self.check("int"):
                init_start = self.advance().span
                name = self.expect_ident()
                self.expect("=")
                init = Decl(name.text, self.parse_expr())
                init.span = init_start
            else:
                init = self._simple_stmt(self.cur.span)
        self.expect(";")
        cond: Expr = Lit(1) if self.check(";") else self.parse_expr()
        self.expect(";")
        step: Optional[Stmt] = None
        if not self.check(")"):
            step = self._simple_stmt(self.cur.span)
        self.expect(")")
        body = self.parse_stmt()
        s = Loop(cond, body, init, step)
        s.span = start
        return s

    def _simple_stmt(self, start: SourceSpan) -> Stmt:
        """Assignment, compound assignment, ++/--, or a call statement."""
        if self.cur.text in ("++", "--"):
            op = self.advance().text
            name = self.expect_ident().text
            return self._incdec(name, op, start)
        name_tok = self.expect_ident()
        name = name_tok.text
        if self.cur.text in ("++", "--"):
            op = self.advance().text
            return self._incdec(name, op, start)
        if self.accept("("):
            args: list[Expr] = []
            if not self.check(")"):
                while True:
                    args.append(self.parse_expr())
                    if not self.accept(","):
                        break
            self.expect(")")
            s: Stmt = CallStmt(name, args)
            s.span = start
            return s
        index: Optional[Expr] = None
        if self.accept("["):
            index = self.parse_expr()
            self.expect("]")
        if self.cur.text in ("=", "+=", "-="):
            op = self.advance().text
            rhs = self.parse_expr()
            if op != "=":
                base: Expr = Var(name) if index is None else Index(name, index)
                rhs = BinOp(op[0], base, rhs)
            s = Assign(name, rhs) if index is None else ArrayAssign(name, index, rhs)
            s.span = start
            return s
        raise ParseError(
            f"expected assignment or call, found {self.cur.text!r} "
            "(expression statements have no effect in this subset)",
            self.cur.span)

    def _incdec(self, name: str, op: str, start: SourceSpan) -> Assign:
        s = Assign(name, BinOp(op[0], Var(name), Lit(1)))
        s.span = start
        return s

    # -- expressions ---------------------------------------------------------

    def parse_expr(self) -> Expr:
        return self._binary(0)

    def _binary(self, min_prec: int) -> Expr:
        left = self._unary()
        while True:
            op = self.cur.text
            prec = _PRECEDENCE.get(op) if self.cur.kind == "op" else None
            if prec is None or prec < min_prec:
                return left
            span = self.advance().span
            right = self._binary(prec + 1)
            left = BinOp(op, left, right, span)

    def _unary(self) -> Expr:
        t = self.cur
        if t.text in ("-", "!", "&") and t.kind == "op":
            self.advance()
            operand = self._unary()
            if t.text == "-" and isinstance(operand, Lit):
                return Lit(-operand.value, t.span)
            return Unary(t.text, operand, t.span)
        if t.text in ("++", "--"):
            raise ParseError("++/-- are only allowed as statements", t.span)
        return self._primary()

    def _primary(self) -> Expr:
        t = self.cur
        if t.kind == "num":
            self.advance()
            return Lit(int(t.text), t.span)
        if t.kind == "ident":
            self.advance()
            if self.accept("["):
                idx = self.parse_expr()
                self.expect("]")
                return Index(t.text, idx, t.span)
            if self.check("("):
                raise ParseError(
                    "function calls are statements, not expressions, in this subset",
                    t.span)
            return Var(t.text, t.span)
        if self.accept("("):
            e = self.parse_expr()
            self.expect(")")
            return e
        raise ParseError(f"expected expression, found {t.text!r}", t.span)


# ---------------------------------------------------------------------------
# Post-parse checks and labeling
# ---------------------------------------------------------------------------

def _assign_labels(prog: Program) -> None:
    next_label = 1
    for stmt in prog.statements():
        stmt.label = next_label
        next_label += 1


def _check_declarations(prog: Program) -> None:
    global_names = {d.name for d in prog.globals}
    if len(global_names) != len(prog.globals):
        dup = prog.globals[-1]
        raise ParseError("duplicate global declaration", dup.span)
    for fn in prog.functions:
        declared = set(global_names) | set(fn.params)
        if len(set(fn.params)) != len(fn.params):
            raise ParseError(f"duplicate parameter in {fn.name!r}", fn.body.span)
        if set(fn.params) & global_names:
            raise ParseError(
                f"parameter of {fn.name!r} shadows a global "
                "(shadowing is not supported)", fn.body.span)
        for stmt in walk_stmts(fn.body):
            if isinstance(stmt, Decl):
                if stmt.name in declared:
                    raise ParseError(
                        f"redeclaration of {stmt.name!r} (shadowing is not supported)",
                        stmt.span)
                declared.add(stmt.name)
        for stmt in walk_stmts(fn.body):
            names: set[str] = set()
            for e in stmt_exprs(stmt):
                names |= e.variables()
            if isinstance(stmt, (Assign, ArrayAssign)):
                names.add(stmt.name)
            undeclared = names - declared
            if undeclared:
                raise ParseError(
                    f"use of undeclared variable {sorted(undeclared)[0]!r}", stmt.span)


def check_label_uniqueness(prog: Program) -> None:
    seen: set[int] = set()
    for stmt in prog.statements():
        if stmt.label in seen:
            raise AssertionError(f"duplicate label {stmt.label}")
        seen.add(stmt.label)


def parse(text: str, filename: str = "<string>") -> Program:
    """Parse source text into a labeled Program."""
    prog = _Parser(tokenize(text, filename)).parse_program()
    _assign_labels(prog)
    _check_declarations(prog)
    return prog


def parse_file(path: str) -> Program:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read(), filename=path)


# ---------------------------------------------------------------------------
# Unparser
# ---------------------------------------------------------------------------

_IND = "    "


def format_expr(e: Expr, parent_prec: int = 0) -> str:
    if isinstance(e, Lit):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Index):
        return f"{e.name}[{format_expr(e.index)}]"
    if isinstance(e, Unary):
        # Parenthesize compound operands; "--x" would re-lex as a decrement.
        if isinstance(e.operand, (Lit, Var, Index)):
            return f"{e.op}{format_expr(e.operand)}"
        return f"{e.op}({format_expr(e.operand)})"
    if isinstance(e, BinOp):
        prec = _PRECEDENCE[e.op]
        left = format_expr(e.left, prec)
        right = format_expr(e.right, prec + 1)
        text = f"{left} {e.op} {right}"
        return f"({text})" if prec < parent_prec else text
    raise TypeError(f"unknown expression node {e!r}")


def _format_simple(s: Stmt) -> str:
    """Statement text without trailing semicolon (for for-headers)."""
    if isinstance(s, Assign):
        return f"{s.name} = {format_expr(s.value)}"
    if isinstance(s, ArrayAssign):
        return f"{s.name}[{format_expr(s.index)}] = {format_expr(s.value)}"
    if isinstance(s, Decl):
        if s.array_size is not None:
            return f"int {s.name}[{s.array_size}]"
        if s.init is not None:
            return f"int {s.name} = {format_expr(s.init)}"
        return f"int {s.name}"
    if isinstance(s, CallStmt):
        args = ", ".join(format_expr(a) for a in s.args)
        return f"{s.name}({args})"
    raise TypeError(f"not a simple statement: {s!r}")


class _Unparser:
    def __init__(self, annotations: dict[int, list[str]]):
        self.annotations = annotations
        self.lines: list[str] = []

    def emit(self, depth: int, text: str) -> None:
        self.lines.append(_IND * depth + text)

    def pragmas(self, stmt: Stmt, depth: int) -> None:
        for text in self.annotations.get(stmt.label, ()):
            self.emit(depth, f"// #pragma loopcount {text}")

    def stmt(self, s: Stmt, depth: int) -> None:
        self.pragmas(s, depth)
        if isinstance(s, Block):
            self.emit(depth, "{")
            for child in s.stmts:
                self.stmt(child, depth + 1)
            self.emit(depth, "}")
        elif isinstance(s, Empty):
            self.emit(depth, ";")
        elif isinstance(s, If):
            self.emit(depth, f"if ({format_expr(s.cond)})")
            self.stmt(s.then, depth + 1)
            if s.orelse is not None:
                self.emit(depth, "else")
                self.stmt(s.orelse, depth + 1)
        elif isinstance(s, Loop):
            if s.init is None and s.step is None:
                self.emit(depth, f"while ({format_expr(s.cond)})")
            else:
                init = "" if s.init is None else _format_simple(s.init)
                if s.init is not None:
                    self.pragmas(s.init, depth)
                step = "" if s.step is None else _format_simple(s.step)
                if s.step is not None:
                    self.pragmas(s.step, depth)
                self.emit(depth, f"for ({init}; {format_expr(s.cond)}; {step})")
            self.stmt(s.body, depth + 1)
        elif isinstance(s, Return):
            if s.value is None:
                self.emit(depth, "return;")
            else:
                self.emit(depth, f"return {format_expr(s.value)};")
        else:
            self.emit(depth, _format_simple(s) + ";")


def unparse(prog: Program, annotations: Optional[list[tuple[int, str]]] = None) -> str:
    """Emit source text; annotations become pragma comments ahead of their
    labeled statements."""
    ann_map: dict[int, list[str]] = {}
    if annotations:
        known = {s.label for s in prog.statements()}
        for label, text in annotations:
            if label not in known:
                raise UnknownLabelError(f"no statement with label {label}")
            ann_map.setdefault(label, []).append(text)
    up = _Unparser(ann_map)
    for g in prog.globals:
        up.emit(0, _format_simple(g) + ";")
    for fn in prog.functions:
        params = ", ".join(f"int {p}" for p in fn.params)
        up.emit(0, f"{fn.return_type} {fn.name}({params})")
        up.stmt(fn.body, 0)
        up.emit(0, "")
    return "\n".join(up.lines).rstrip("\n") + "\n"
