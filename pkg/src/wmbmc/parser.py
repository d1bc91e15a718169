"""Recursive-descent parser and pretty-printer for the input language.

    program     := shared_decl* thread+ top_assert*
    shared_decl := "var" IDENT ("=" INT)? ";"
    thread      := "thread" IDENT "{" stmt* "}"
    stmt        := "local" IDENT ";" | IDENT "=" expr ";"
                 | "if" "(" expr ")" block ("else" block)?
                 | "while" "(" expr ")" block | "fence" ";"
                 | "assert" "(" expr ")" ";" | "assume" "(" expr ")" ";"
    top_assert  := "assert" "(" expr ")" ";"

Final assertions are moved into a dedicated checker thread that runs after
every other thread has finished and drained its buffers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from . import ast as A
from .errors import (
    AmbiguousIdentifier,
    DslSyntaxError,
    DuplicateDeclaration,
    UndeclaredIdentifier,
)

KEYWORDS = {"var", "thread", "local", "if", "else", "while", "fence", "assert", "assume"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>==|!=|<=|>=|&&|\|\||[-+*<>!=;(){}])
    """,
    re.VERBOSE,
)

# Binary precedence levels, loosest first.
_LEVELS = (("||",), ("&&",), ("==", "!="), ("<", "<=", ">", ">="), ("+", "-"), ("*",))


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "ident", "kw", "op", "eof"
    text: str
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise DslSyntaxError(f"unexpected character {source[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        col = pos - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "ident":
            text = m.group()
            tokens.append(Token("kw" if text in KEYWORDS else "ident", text, line, col))
        elif kind in ("int", "op"):
            tokens.append(Token(kind, m.group(), line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.toks = tokenize(source)
        self.i = 0
        self.shared: dict[str, Optional[int]] = {}
        # locals declared so far in the thread being parsed
        self.scope: Optional[set[str]] = None

    # -- token helpers ---------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("op", "kw") and t.text == text

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}")
        return self.advance()

    def expect_ident(self) -> Token:
        if self.tok.kind != "ident":
            self.fail("expected identifier")
        return self.advance()

    def fail(self, message: str) -> None:
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise DslSyntaxError(f"{message}, found {found}", t.line, t.col)

    # -- top level -------------------------------------------------------
    def program(self) -> A.Program:
        decls: list[A.SharedDecl] = []
        while self.at("var"):
            decls.append(self.shared_decl())
        threads: list[A.Thread] = []
        names: set[str] = set()
        while self.at("thread"):
            t = self.thread(names)
            threads.append(t)
        if not threads:
            self.fail("expected at least one thread")
        final: list[A.Stmt] = []
        while self.at("assert"):
            final.append(self.top_assert(threads))
        if self.tok.kind != "eof":
            self.fail("expected 'assert' or end of input")
        if final:
            threads.append(A.Thread(A.CHECKER_NAME, tuple(final), (), checker=True))
        return A.Program(tuple(decls), tuple(threads))

    def shared_decl(self) -> A.SharedDecl:
        self.expect("var")
        name_tok = self.expect_ident()
        if name_tok.text in self.shared:
            raise DuplicateDeclaration(f"shared variable {name_tok.text!r} declared twice",
                                       name_tok.line, name_tok.col)
        init = None
        if self.at("="):
            self.advance()
            sign = 1
            if self.at("-"):
                self.advance()
                sign = -1
            if self.tok.kind != "int":
                self.fail("expected integer initialiser")
            init = sign * int(self.advance().text)
        self.expect(";")
        self.shared[name_tok.text] = init
        return A.SharedDecl(name_tok.text, init)

    def thread(self, names: set[str]) -> A.Thread:
        self.expect("thread")
        name_tok = self.expect_ident()
        if name_tok.text in names:
            raise DuplicateDeclaration(f"thread {name_tok.text!r} declared twice",
                                       name_tok.line, name_tok.col)
        names.add(name_tok.text)
        self.scope = set()
        order: list[str] = []
        body = self.block(order)
        self.scope = None
        return A.Thread(name_tok.text, body, tuple(order))

    def top_assert(self, threads: list[A.Thread]) -> A.Assert:
        self.expect("assert")
        self.expect("(")
        e = self.expr()
        self.expect(")")
        self.expect(";")
        return A.Assert(self._resolve_final(e, threads))

    def _resolve_final(self, e: A.Expr, threads: list[A.Thread]) -> A.Expr:
        # Parsed with scope=None, so names are still unresolved Var nodes.
        if isinstance(e, A.Var):
            if e.name in self.shared:
                return e
            owners = [t.name for t in threads if e.name in t.locals]
            if not owners:
                raise UndeclaredIdentifier(f"undeclared identifier {e.name!r} in final assertion")
            if len(owners) > 1:
                raise AmbiguousIdentifier(
                    f"{e.name!r} is a local of several threads ({', '.join(owners)})")
            return A.Var(e.name, owners[0])
        if isinstance(e, A.Unary):
            return A.Unary(e.op, self._resolve_final(e.operand, threads))
        if isinstance(e, A.Binary):
            return A.Binary(e.op, self._resolve_final(e.left, threads),
                            self._resolve_final(e.right, threads))
        return e

    # -- statements ------------------------------------------------------
    def block(self, order: list[str]) -> tuple[A.Stmt, ...]:
        self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.fail("expected '}'")
            s = self.stmt(order)
            if s is not None:
                stmts.append(s)
        self.advance()
        return tuple(stmts)

    def stmt(self, order: list[str]) -> A.Stmt:
        t = self.tok
        if self.at("local"):
            self.advance()
            name_tok = self.expect_ident()
            name = name_tok.text
            if name in self.shared:
                raise DuplicateDeclaration(f"local {name!r} shadows a shared variable",
                                           name_tok.line, name_tok.col)
            if name in self.scope:
                raise DuplicateDeclaration(f"local {name!r} declared twice",
                                           name_tok.line, name_tok.col)
            self.expect(";")
            self.scope.add(name)
            order.append(name)
            return A.LocalDecl(name)
        if self.at("if"):
            self.advance()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then = self.block(order)
            orelse: tuple[A.Stmt, ...] = ()
            if self.at("else"):
                self.advance()
                orelse = self.block(order)
            return A.If(cond, then, orelse)
        if self.at("while"):
            self.advance()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            return A.While(cond, self.block(order))
        if self.at("fence"):
            self.advance()
            self.expect(";")
            return A.Fence()
        if self.at("assert") or self.at("assume"):
            kw = self.advance().text
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            self.expect(";")
            return A.Assert(cond) if kw == "assert" else A.Assume(cond)
        if t.kind == "ident":
            self.advance()
            self._check_name(t)
            self.expect("=")
            value = self.expr()
            self.expect(";")
            return A.Assign(t.text, value)
        self.fail("expected statement")

    def _check_name(self, t: Token) -> None:
        if self.scope is None:
            return
        if t.text not in self.shared and t.text not in self.scope:
            raise UndeclaredIdentifier(f"undeclared identifier {t.text!r}", t.line, t.col)

    # -- expressions -----------------------------------------------------
    def expr(self, level: int = 0) -> A.Expr:
        if level == len(_LEVELS):
            return self.unary()
        left = self.expr(level + 1)
        while self.tok.kind == "op" and self.tok.text in _LEVELS[level]:
            op = self.advance().text
            right = self.expr(level + 1)
            left = A.Binary(op, left, right)
        return left

    def unary(self) -> A.Expr:
        if self.at("!") or self.at("-"):
            op = self.advance().text
            return A.Unary(op, self.unary())
        return self.primary()

    def primary(self) -> A.Expr:
        t = self.tok
        if t.kind == "int":
            self.advance()
            return A.IntLit(int(t.text))
        if t.kind == "ident":
            self.advance()
            self._check_name(t)
            return A.Var(t.text)
        if self.at("("):
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        self.fail("expected expression")


def parse(source_text: str, source_name: str = "<input>") -> A.Program:
    """Parse program text into a syntax tree, resolving every identifier."""
    prog = _Parser(source_text).program()
    if source_name != "<input>":
        prog = A.Program(prog.shared, prog.threads, source_name)
    return prog


# -- pretty printing -------------------------------------------------------

def format_expr(e: A.Expr) -> str:
    if isinstance(e, A.IntLit):
        return str(e.value)
    if isinstance(e, A.Var):
        return e.name
    if isinstance(e, A.Unary):
        return f"{e.op}{format_expr(e.operand)}" if isinstance(e.operand, (A.IntLit, A.Var)) \
            else f"{e.op}({format_expr(e.operand)})"
    return f"({format_expr(e.left)} {e.op} {format_expr(e.right)})"


def _format_block(block: tuple[A.Stmt, ...], indent: int, out: list[str]) -> None:
    pad = "  " * indent
    for s in block:
        if isinstance(s, A.LocalDecl):
            out.append(f"{pad}local {s.name};")
        elif isinstance(s, A.Assign):
            out.append(f"{pad}{s.target} = {format_expr(s.value)};")
        elif isinstance(s, A.Fence):
            out.append(f"{pad}fence;")
        elif isinstance(s, A.Assert):
            out.append(f"{pad}assert({format_expr(s.cond)});")
        elif isinstance(s, A.Assume):
            out.append(f"{pad}assume({format_expr(s.cond)});")
        elif isinstance(s, A.While):
            out.append(f"{pad}while ({format_expr(s.cond)}) {{")
            _format_block(s.body, indent + 1, out)
            out.append(f"{pad}}}")
        elif isinstance(s, A.If):
            out.append(f"{pad}if ({format_expr(s.cond)}) {{")
            _format_block(s.then, indent + 1, out)
            if s.orelse:
                out.append(f"{pad}}} else {{")
                _format_block(s.orelse, indent + 1, out)
            out.append(f"{pad}}}")


def format_program(program: A.Program) -> str:
    out: list[str] = []
    for d in program.shared:
        out.append(f"var {d.name};" if d.init is None else f"var {d.name} = {d.init};")
    for t in program.user_threads:
        out.append(f"thread {t.name} {{")
        _format_block(t.body, 1, out)
        out.append("}")
    checker = program.checker
    if checker is not None:
        for s in checker.body:
            out.append(f"assert({format_expr(s.cond)});")
    return "\n".join(out) + "\n"
