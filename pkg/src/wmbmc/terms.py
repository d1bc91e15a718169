"""Symbolic bit-vector and Boolean terms used by the SSA layer.

Terms are width-agnostic; a width is supplied when they are evaluated or
bit-blasted.  Arithmetic is two's complement with wraparound and the
relational operators compare signed values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union


def wrap(value: int, width: int) -> int:
    """Normalise ``value`` into the signed range of a ``width``-bit word."""
    mask = (1 << width) - 1
    v = value & mask
    return v - (1 << width) if v >> (width - 1) else v


def fits(value: int, width: int) -> bool:
    return -(1 << (width - 1)) <= value < (1 << (width - 1))


# -- bit-vector terms -------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class Sym:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Arith:
    op: str  # "+", "-", "*"
    left: "BV"
    right: "BV"

    def __str__(self) -> str:
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True)
class Neg:
    operand: "BV"

    def __str__(self) -> str:
        return f"-{self.operand}"


@dataclass(frozen=True)
class Ite:
    cond: "Bool"
    then: "BV"
    orelse: "BV"

    def __str__(self) -> str:
        return f"({self.cond} ? {self.then} : {self.orelse})"


BV = Union[Const, Sym, Arith, Neg, Ite]


# -- Boolean terms ----------------------------------------------------------

@dataclass(frozen=True)
class BoolConst:
    value: bool

    def __str__(self) -> str:
        return "true" if self.value else "false"


TRUE = BoolConst(True)
FALSE = BoolConst(False)


@dataclass(frozen=True)
class Atom:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Not:
    operand: "Bool"

    def __str__(self) -> str:
        return f"!{self.operand}"


@dataclass(frozen=True)
class And:
    args: tuple["Bool", ...]

    def __str__(self) -> str:
        return "(" + " & ".join(map(str, self.args)) + ")"


@dataclass(frozen=True)
class Or:
    args: tuple["Bool", ...]

    def __str__(self) -> str:
        return "(" + " | ".join(map(str, self.args)) + ")"


@dataclass(frozen=True)
class Cmp:
    op: str  # "==", "!=", "<", "<=", ">", ">="
    left: BV
    right: BV

    def __str__(self) -> str:
        op = "=" if self.op == "==" else self.op
        return f"({self.left} {op} {self.right})"


@dataclass(frozen=True)
class Implies:
    ante: "Bool"
    cons: "Bool"

    def __str__(self) -> str:
        return f"{self.ante} => {self.cons}"


@dataclass(frozen=True)
class Iff:
    left: "Bool"
    right: "Bool"

    def __str__(self) -> str:
        return f"{self.left} := {self.right}"


Bool = Union[BoolConst, Atom, Not, And, Or, Cmp, Implies, Iff]


# -- smart constructors -----------------------------------------------------

def mk_not(a: Bool) -> Bool:
    if isinstance(a, BoolConst):
        return BoolConst(not a.value)
    if isinstance(a, Not):
        return a.operand
    return Not(a)


def mk_and(*args: Bool) -> Bool:
    out: list[Bool] = []
    for a in args:
        if a == FALSE:
            return FALSE
        if a == TRUE or a in out:
            continue
        out.append(a)
    if not out:
        return TRUE
    return out[0] if len(out) == 1 else And(tuple(out))


def mk_or(*args: Bool) -> Bool:
    out: list[Bool] = []
    for a in args:
        if a == TRUE:
            return TRUE
        if a == FALSE or a in out:
            continue
        out.append(a)
    if not out:
        return FALSE
    return out[0] if len(out) == 1 else Or(tuple(out))


def to_bool(e: BV) -> Bool:
    """Truth value of an integer: nonzero is true."""
    if isinstance(e, Const):
        return BoolConst(e.value != 0)
    if isinstance(e, Ite) and e.then == Const(1) and e.orelse == Const(0):
        return e.cond
    return Cmp("!=", e, Const(0))


def from_bool(b: Bool) -> BV:
    if isinstance(b, BoolConst):
        return Const(1 if b.value else 0)
    return Ite(b, Const(1), Const(0))


# -- evaluation -------------------------------------------------------------

Env = Mapping[str, Union[int, bool]]


def eval_bv(t: BV, env: Env, width: int) -> int:
    if isinstance(t, Const):
        return wrap(t.value, width)
    if isinstance(t, Sym):
        return wrap(int(env[t.name]), width)
    if isinstance(t, Neg):
        return wrap(-eval_bv(t.operand, env, width), width)
    if isinstance(t, Ite):
        branch = t.then if eval_bool(t.cond, env, width) else t.orelse
        return eval_bv(branch, env, width)
    a, b = eval_bv(t.left, env, width), eval_bv(t.right, env, width)
    if t.op == "+":
        return wrap(a + b, width)
    if t.op == "-":
        return wrap(a - b, width)
    if t.op == "*":
        return wrap(a * b, width)
    raise ValueError(f"unknown operator {t.op!r}")


_CMP = {
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def eval_bool(t: Bool, env: Env, width: int) -> bool:
    if isinstance(t, BoolConst):
        return t.value
    if isinstance(t, Atom):
        return bool(env[t.name])
    if isinstance(t, Not):
        return not eval_bool(t.operand, env, width)
    if isinstance(t, And):
        return all(eval_bool(a, env, width) for a in t.args)
    if isinstance(t, Or):
        return any(eval_bool(a, env, width) for a in t.args)
    if isinstance(t, Implies):
        return (not eval_bool(t.ante, env, width)) or eval_bool(t.cons, env, width)
    if isinstance(t, Iff):
        return eval_bool(t.left, env, width) == eval_bool(t.right, env, width)
    return _CMP[t.op](eval_bv(t.left, env, width), eval_bv(t.right, env, width))


def free_names(t) -> tuple[set[str], set[str]]:
    """Return (symbols, atoms) occurring in a term."""
    syms: set[str] = set()
    atoms: set[str] = set()
    stack = [t]
    while stack:
        x = stack.pop()
        if isinstance(x, Sym):
            syms.add(x.name)
        elif isinstance(x, Atom):
            atoms.add(x.name)
        elif isinstance(x, (Arith, Cmp)):
            stack += [x.left, x.right]
        elif isinstance(x, (Neg, Not)):
            stack.append(x.operand)
        elif isinstance(x, Ite):
            stack += [x.cond, x.then, x.orelse]
        elif isinstance(x, (And, Or)):
            stack.extend(x.args)
        elif isinstance(x, Implies):
            stack += [x.ante, x.cons]
        elif isinstance(x, Iff):
            stack += [x.left, x.right]
    return syms, atoms
