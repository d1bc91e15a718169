"""Immutable syntax tree for the litmus-style input language.

Blocks are tuples so that trees compare structurally and hash.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

CHECKER_NAME = "<final>"

BINARY_OPS = ("+", "-", "*", "==", "!=", "<", "<=", ">", ">=", "&&", "||")
UNARY_OPS = ("!", "-")


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class Var:
    name: str
    # Set only inside the final-assertion thread, where a name may refer to
    # the final value of another thread's local.
    owner: Optional[str] = None


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[IntLit, Var, Unary, Binary]


@dataclass(frozen=True)
class Assign:
    target: str
    value: Expr


@dataclass(frozen=True)
class LocalDecl:
    name: str


@dataclass(frozen=True)
class If:
    cond: Expr
    then: tuple["Stmt", ...]
    orelse: tuple["Stmt", ...] = ()


@dataclass(frozen=True)
class While:
    cond: Expr
    body: tuple["Stmt", ...]


@dataclass(frozen=True)
class Fence:
    pass


@dataclass(frozen=True)
class Assert:
    cond: Expr


@dataclass(frozen=True)
class Assume:
    cond: Expr


Stmt = Union[Assign, LocalDecl, If, While, Fence, Assert, Assume]


@dataclass(frozen=True)
class SharedDecl:
    name: str
    init: Optional[int] = None


@dataclass(frozen=True)
class Thread:
    name: str
    body: tuple[Stmt, ...]
    locals: tuple[str, ...] = ()
    checker: bool = False


@dataclass(frozen=True)
class Program:
    shared: tuple[SharedDecl, ...]
    threads: tuple[Thread, ...]
    # Source-level metadata, ignored by equality.
    source_name: str = field(default="<input>", compare=False)

    @property
    def shared_names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.shared)

    @property
    def checker(self) -> Optional[Thread]:
        for t in self.threads:
            if t.checker:
                return t
        return None

    @property
    def user_threads(self) -> tuple[Thread, ...]:
        return tuple(t for t in self.threads if not t.checker)


def walk_stmts(block: tuple[Stmt, ...]) -> Iterator[Stmt]:
    """Pre-order traversal over every statement in a block, nested ones included."""
    for s in block:
        yield s
        if isinstance(s, If):
            yield from walk_stmts(s.then)
            yield from walk_stmts(s.orelse)
        elif isinstance(s, While):
            yield from walk_stmts(s.body)


def has_loops(program: Program) -> bool:
    return any(isinstance(s, While) for t in program.threads for s in walk_stmts(t.body))


def expr_vars(e: Expr) -> Iterator[Var]:
    if isinstance(e, Var):
        yield e
    elif isinstance(e, Unary):
        yield from expr_vars(e.operand)
    elif isinstance(e, Binary):
        yield from expr_vars(e.left)
        yield from expr_vars(e.right)
