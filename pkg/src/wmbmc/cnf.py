"""Clause database with hash-consed Tseitin gates and bit-vector circuits.

Literals are nonzero ints.  Variable 1 is pinned true by a unit clause, so
``TRUE_LIT``/``FALSE_LIT`` can flow through the gate constructors and fold
away.  Bit-vectors are lists of literals, least significant bit first.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .errors import WidthMismatch

TRUE_LIT = 1
FALSE_LIT = -1


@dataclass
class Cnf:
    num_vars: int
    clauses: list[list[int]]
    # family name -> [start, end) clause index range
    families: dict[str, tuple[int, int]] = field(default_factory=dict)
    legend: dict[int, str] = field(default_factory=dict)

    def family_counts(self) -> dict[str, int]:
        return {k: b - a for k, (a, b) in self.families.items()}


class CnfBuilder:
    def __init__(self) -> None:
        self.num_vars = 1
        self.clauses: list[list[int]] = [[TRUE_LIT]]
        self.tags: list[str] = ["const"]
        self.family = "const"
        self.legend: dict[int, str] = {1: "TRUE"}
        self._gates: dict[tuple, int] = {}

    # -- variables and clauses ---------------------------------------------
    def new_var(self, name: Optional[str] = None) -> int:
        self.num_vars += 1
        if name is not None:
            self.legend[self.num_vars] = name
        return self.num_vars

    def new_bv(self, width: int, name: Optional[str] = None) -> list[int]:
        return [self.new_var(None if name is None else f"{name}.{i}") for i in range(width)]

    def add_clause(self, lits: Iterable[int]) -> None:
        out: list[int] = []
        for lit in lits:
            if lit == TRUE_LIT or -lit in out:
                return
            if lit == FALSE_LIT or lit in out:
                continue
            out.append(lit)
        if not out:
            # Keep the database free of empty clauses; this pair is unsatisfiable.
            out = [FALSE_LIT]
        self.clauses.append(out)
        self.tags.append(self.family)

    def build(self, simplify: bool = True) -> Cnf:
        clauses, tags = self.clauses, self.tags
        if simplify:
            clauses, tags = simplify_units(clauses, tags)
        families: dict[str, tuple[int, int]] = {}
        for i, tag in enumerate(tags):
            start, _ = families.get(tag, (i, i))
            families[tag] = (start, i + 1)
        return Cnf(self.num_vars, [list(c) for c in clauses], families, dict(self.legend))

    # -- gates -----------------------------------------------------------
    def AND(self, *lits: int) -> int:
        ins: set[int] = set()
        for lit in lits:
            if lit == FALSE_LIT or -lit in ins:
                return FALSE_LIT
            if lit != TRUE_LIT:
                ins.add(lit)
        if not ins:
            return TRUE_LIT
        if len(ins) == 1:
            return next(iter(ins))
        key = ("and", tuple(sorted(ins)))
        out = self._gates.get(key)
        if out is None:
            out = self._gates[key] = self.new_var()
            for lit in ins:
                self.add_clause([-out, lit])
            self.add_clause([out] + [-lit for lit in ins])
        return out

    def OR(self, *lits: int) -> int:
        return -self.AND(*(-lit for lit in lits))

    def IMPLIES(self, a: int, b: int) -> int:
        return self.OR(-a, b)

    def XOR(self, a: int, b: int) -> int:
        if abs(a) == 1:
            return -b if a == TRUE_LIT else b
        if abs(b) == 1:
            return -a if b == TRUE_LIT else a
        if a == b:
            return FALSE_LIT
        if a == -b:
            return TRUE_LIT
        flip = (a < 0) != (b < 0)
        x, y = sorted((abs(a), abs(b)))
        key = ("xor", x, y)
        out = self._gates.get(key)
        if out is None:
            out = self._gates[key] = self.new_var()
            self.add_clause([-out, x, y])
            self.add_clause([-out, -x, -y])
            self.add_clause([out, -x, y])
            self.add_clause([out, x, -y])
        return -out if flip else out

    def IFF(self, a: int, b: int) -> int:
        return -self.XOR(a, b)

    def ITE(self, c: int, t: int, e: int) -> int:
        if c == TRUE_LIT:
            return t
        if c == FALSE_LIT:
            return e
        if t == e:
            return t
        if t == -e:
            return self.IFF(c, t)
        if t == TRUE_LIT or t == c:
            return self.OR(c, e)
        if t == FALSE_LIT or t == -c:
            return self.AND(-c, e)
        if e == FALSE_LIT or e == -c:
            return self.AND(c, t)
        if e == TRUE_LIT or e == c:
            return self.OR(-c, t)
        if c < 0:
            c, t, e = -c, e, t
        key = ("ite", c, t, e)
        out = self._gates.get(key)
        if out is None:
            out = self._gates[key] = self.new_var()
            self.add_clause([-out, -c, t])
            self.add_clause([-out, c, e])
            self.add_clause([out, -c, -t])
            self.add_clause([out, c, -e])
        return out

    # -- bit-vectors -----------------------------------------------------
    @staticmethod
    def bv_const(value: int, width: int) -> list[int]:
        return [TRUE_LIT if (value >> i) & 1 else FALSE_LIT for i in range(width)]

    def bv_ite(self, c: int, a: Sequence[int], b: Sequence[int]) -> list[int]:
        _same_width(a, b)
        return [self.ITE(c, x, y) for x, y in zip(a, b)]

    def bv_add(self, a: Sequence[int], b: Sequence[int], carry: int = FALSE_LIT) -> list[int]:
        _same_width(a, b)
        out = []
        for x, y in zip(a, b):
            xy = self.XOR(x, y)
            out.append(self.XOR(xy, carry))
            carry = self.OR(self.AND(x, y), self.AND(carry, xy))
        return out

    def bv_not(self, a: Sequence[int]) -> list[int]:
        return [-x for x in a]

    def bv_neg(self, a: Sequence[int]) -> list[int]:
        return self.bv_add(self.bv_not(a), self.bv_const(0, len(a)), TRUE_LIT)

    def bv_sub(self, a: Sequence[int], b: Sequence[int]) -> list[int]:
        return self.bv_add(a, self.bv_not(b), TRUE_LIT)

    def bv_mul(self, a: Sequence[int], b: Sequence[int]) -> list[int]:
        _same_width(a, b)
        width = len(a)
        acc = self.bv_const(0, width)
        for i, bi in enumerate(b):
            partial = [FALSE_LIT] * i + [self.AND(x, bi) for x in a[: width - i]]
            acc = self.bv_add(acc, partial)
        return acc

    def bv_eq(self, a: Sequence[int], b: Sequence[int]) -> int:
        _same_width(a, b)
        return self.AND(*(self.IFF(x, y) for x, y in zip(a, b)))

    def bv_ult(self, a: Sequence[int], b: Sequence[int]) -> int:
        _same_width(a, b)
        lt = FALSE_LIT
        for x, y in zip(a, b):
            # A differing bit decides; higher bits are visited later and win.
            lt = self.ITE(self.XOR(x, y), y, lt)
        return lt

    def bv_slt(self, a: Sequence[int], b: Sequence[int]) -> int:
        _same_width(a, b)
        return self.bv_ult(list(a[:-1]) + [-a[-1]], list(b[:-1]) + [-b[-1]])


def _same_width(a: Sequence[int], b: Sequence[int]) -> None:
    if len(a) != len(b):
        raise WidthMismatch(f"bit-vector widths differ: {len(a)} vs {len(b)}")


def isbefore(builder: CnfBuilder, a: Sequence[int], b: Sequence[int]) -> int:
    """Unsigned strict less-than between two clock vectors."""
    return builder.bv_ult(a, b)


def isequal(builder: CnfBuilder, a: Sequence[int], b: Sequence[int]) -> int:
    return builder.bv_eq(a, b)


def simplify_units(clauses: list[list[int]], tags: list[str]) -> tuple[list[list[int]], list[str]]:
    """Propagate unit clauses to a fixpoint and shrink the rest.

    Units are kept (so models still assign their variables); satisfied clauses
    vanish and false literals are dropped.  A conflict leaves ``[v], [-v]``
    rather than an empty clause.
    """
    occurs: dict[int, list[int]] = defaultdict(list)
    for i, c in enumerate(clauses):
        for lit in c:
            occurs[lit].append(i)
    fixed: dict[int, bool] = {}
    queue: list[int] = []
    conflict_var = None

    def status(c: list[int]) -> tuple[bool, list[int]]:
        live = []
        for lit in c:
            val = fixed.get(abs(lit))
            if val is None:
                live.append(lit)
            elif val == (lit > 0):
                return True, []
        return False, live

    def fix(lit: int) -> bool:
        val = fixed.get(abs(lit))
        if val is None:
            fixed[abs(lit)] = lit > 0
            queue.append(lit)
            return True
        return val == (lit > 0)

    for c in clauses:
        if len(c) == 1 and not fix(c[0]):
            conflict_var = abs(c[0])
    while queue and conflict_var is None:
        lit = queue.pop()
        for i in occurs[-lit]:
            sat, live = status(clauses[i])
            if sat:
                continue
            if not live:
                conflict_var = abs(lit)
                break
            if len(live) == 1:
                fix(live[0])

    out: list[list[int]] = []
    out_tags: list[str] = []
    emitted: set[int] = set()
    for c, tag in zip(clauses, tags):
        sat, live = status(c)
        if sat:
            # Keep given units in place so their variables stay assigned.
            if len(c) == 1 and abs(c[0]) not in emitted:
                emitted.add(abs(c[0]))
                out.append(list(c))
                out_tags.append(tag)
            continue
        if live:
            out.append(live)
            out_tags.append(tag)
    for v in sorted(fixed):
        if v not in emitted:
            out.append([v if fixed[v] else -v])
            out_tags.append("units")
    if conflict_var is not None:
        out += [[conflict_var], [-conflict_var]]
        out_tags += ["units", "units"]
    return out, out_tags
