"""Propositional encoding of a bounded concurrent program.

The formula is the conjunction of six clause families, emitted in this
order: ``ssa`` (thread-local dataflow), ``ext`` (which write each read
observes), ``nstep`` (clock order implied by the preserved program order),
``m2clk`` (a match fixes clocks and values), ``unique`` (distinct clocks for
same-address writes) and ``assert`` (some reached assertion fails).

A match is *local* when read and write belong to the same thread.  Local
writes are always visible to the read (the store buffer forwards them), so
for them only the value equality is imposed and the clock precedence is not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from . import terms as T
from .cnf import FALSE_LIT, TRUE_LIT, Cnf, CnfBuilder, isbefore, isequal
from .errors import EmptyAssertSet, EncodingBoundViolation
from .matches import MatchSet
from .memmodel import PpoGraph, transitive_closure
from .ssa import Assignment, Assumption, Event, GuardDef, SsaSystem

FAMILIES = ("ssa", "ext", "nstep", "m2clk", "unique", "assert")


def clock_width_for(k: int) -> int:
    return max(1, k.bit_length())


@dataclass
class VarSpace:
    value_width: int
    clock_width: int
    match_vars: dict[int, int] = field(default_factory=dict)
    clock_vars: dict[int, list[int]] = field(default_factory=dict)
    value_syms: dict[str, list[int]] = field(default_factory=dict)
    guard_atoms: dict[str, int] = field(default_factory=dict)

    @property
    def registered(self) -> int:
        return (len(self.match_vars) + sum(map(len, self.clock_vars.values()))
                + sum(map(len, self.value_syms.values())) + len(self.guard_atoms))

    def decision_vars(self) -> list[int]:
        """Input variables; every gate output follows from these by propagation."""
        out = set(self.match_vars.values()) | set(self.guard_atoms.values())
        for group in (self.clock_vars.values(), self.value_syms.values()):
            for lits in group:
                out.update(abs(l) for l in lits)
        return sorted(out)


def decode_unsigned(model: Sequence[bool], lits: Sequence[int]) -> int:
    out = 0
    for i, lit in enumerate(lits):
        bit = model[abs(lit)] if lit > 0 else not model[abs(lit)]
        out |= int(bit) << i
    return out


def decode_signed(model: Sequence[bool], lits: Sequence[int]) -> int:
    return T.wrap(decode_unsigned(model, lits), len(lits))


def lit_value(model: Sequence[bool], lit: int) -> bool:
    return model[lit] if lit > 0 else not model[-lit]


class _Blaster:
    """Lowers terms onto a CnfBuilder, caching every subterm."""

    def __init__(self, b: CnfBuilder, vs: VarSpace):
        self.b = b
        self.vs = vs
        self._bv: dict[T.BV, list[int]] = {}
        self._bool: dict[T.Bool, int] = {}

    def bv(self, t: T.BV) -> list[int]:
        hit = self._bv.get(t)
        if hit is not None:
            return hit
        b, w = self.b, self.vs.value_width
        if isinstance(t, T.Const):
            out = b.bv_const(t.value, w)
        elif isinstance(t, T.Sym):
            out = self.vs.value_syms[t.name]
        elif isinstance(t, T.Neg):
            out = b.bv_neg(self.bv(t.operand))
        elif isinstance(t, T.Ite):
            out = b.bv_ite(self.bool(t.cond), self.bv(t.then), self.bv(t.orelse))
        else:
            l, r = self.bv(t.left), self.bv(t.right)
            out = {"+": b.bv_add, "-": b.bv_sub, "*": b.bv_mul}[t.op](l, r)
        self._bv[t] = out
        return out

    def bool(self, t: T.Bool) -> int:
        hit = self._bool.get(t)
        if hit is not None:
            return hit
        b = self.b
        if isinstance(t, T.BoolConst):
            out = TRUE_LIT if t.value else FALSE_LIT
        elif isinstance(t, T.Atom):
            out = self.vs.guard_atoms[t.name]
        elif isinstance(t, T.Not):
            out = -self.bool(t.operand)
        elif isinstance(t, T.And):
            out = b.AND(*(self.bool(a) for a in t.args))
        elif isinstance(t, T.Or):
            out = b.OR(*(self.bool(a) for a in t.args))
        elif isinstance(t, T.Implies):
            out = b.IMPLIES(self.bool(t.ante), self.bool(t.cons))
        elif isinstance(t, T.Iff):
            out = b.IFF(self.bool(t.left), self.bool(t.right))
        else:
            out = self._cmp(t)
        self._bool[t] = out
        return out

    def _cmp(self, t: T.Cmp) -> int:
        b = self.b
        l, r = self.bv(t.left), self.bv(t.right)
        if t.op == "==":
            return b.bv_eq(l, r)
        if t.op == "!=":
            return -b.bv_eq(l, r)
        if t.op == "<":
            return b.bv_slt(l, r)
        if t.op == ">":
            return b.bv_slt(r, l)
        if t.op == "<=":
            return -b.bv_slt(r, l)
        if t.op == ">=":
            return -b.bv_slt(l, r)
        raise ValueError(f"unknown comparison {t.op!r}")

    def guarded_eq(self, guard: int, target: T.Sym, value: T.BV) -> None:
        # guard => target == value, one pair of clauses per bit
        for x, y in zip(self.bv(target), self.bv(value)):
            self.b.add_clause([-guard, -x, y])
            self.b.add_clause([-guard, x, -y])


@dataclass
class EncodingStats:
    k_events: int
    match_vars: int
    clock_width: int
    clock_bits: int
    num_vars: int
    num_clauses: int
    families: dict[str, int]

    def as_dict(self) -> dict:
        return {
            "k_events": self.k_events,
            "match_vars": self.match_vars,
            "clock_width": self.clock_width,
            "clock_bits": self.clock_bits,
            "vars": self.num_vars,
            "clauses": self.num_clauses,
            **{f"clauses_{k}": v for k, v in self.families.items()},
        }


@dataclass
class Encoding:
    cnf: Cnf
    varspace: VarSpace
    ssa: SsaSystem
    ppo: PpoGraph
    matches: MatchSet
    stats: EncodingStats


class Encoder:
    def __init__(self, ssa: SsaSystem, ppo: PpoGraph, ms: MatchSet):
        self.ssa, self.ppo, self.ms = ssa, ppo, ms
        self.events = {e.id: e for e in ssa.events}
        k = len(ssa.memory_events)
        self.b = CnfBuilder()
        self.vs = VarSpace(ssa.value_width, clock_width_for(k))
        self._register()
        self.blast = _Blaster(self.b, self.vs)
        self.known = transitive_closure(self._static_order())

    def _static_order(self) -> list[tuple[int, int]]:
        # Clock precedences that hold in every model: unguarded ppo edges and
        # initial writes before same-address events.
        edges = [(e.before, e.after) for e in self.ppo.clock_edges if e.guard == T.TRUE]
        for w0 in self.ssa.events:
            if w0.is_init:
                edges += [(w0.id, e.id) for e in self.ssa.memory_events
                          if e.label == w0.label and not e.is_init]
        return edges

    def _register(self) -> None:
        b, vs = self.b, self.vs
        for name in self.ssa.atoms:
            vs.guard_atoms[name] = b.new_var(name)
        for name in self.ssa.symbols:
            vs.value_syms[name] = b.new_bv(vs.value_width, name)
        for e in self.ssa.memory_events:
            vs.clock_vars[e.id] = b.new_bv(vs.clock_width, f"C:{self._ename(e)}")
        for m in self.ms.pairs:
            r, w = self.events[m.read], self.events[m.write]
            vs.match_vars[m.id] = b.new_var(f"X:{self._ename(r)}<-{self._ename(w)}")

    def _ename(self, e: Event) -> str:
        return f"{self.ssa.thread_label(e.thread)}:{e.name}"

    def _guard(self, e: Event) -> int:
        return self.blast.bool(e.guard)

    def _clock(self, eid: int) -> list[int]:
        return self.vs.clock_vars[eid]

    def _before(self, a: int, b: int) -> int:
        """Literal for ``C_a < C_b``, constant when the static order decides it.

        Only sound outside ``nstep``, whose clauses are what enforce the
        static order in the first place.
        """
        if (a, b) in self.known:
            return TRUE_LIT
        if (b, a) in self.known or a == b:
            return FALSE_LIT
        return isbefore(self.b, self._clock(a), self._clock(b))

    # -- families --------------------------------------------------------
    def emit_ssa(self) -> None:
        self.b.family = "ssa"
        bl = self.blast
        for c in self.ssa.constraints:
            if isinstance(c, GuardDef):
                a, d = bl.bool(c.atom), bl.bool(c.definition)
                self.b.add_clause([-a, d])
                self.b.add_clause([a, -d])
            elif isinstance(c, Assignment):
                bl.guarded_eq(bl.bool(c.guard), c.target, c.value)
            elif isinstance(c, Assumption):
                self.b.add_clause([-bl.bool(c.guard), bl.bool(c.cond)])
            else:
                raise TypeError(f"unexpected constraint {c!r}")

    def _visible(self, r: Event, w: Event) -> int:
        if w.thread == r.thread:
            return TRUE_LIT
        return -self._before(r.id, w.id)

    def emit_ext(self) -> None:
        self.b.family = "ext"
        b = self.b
        for r_id, cands in sorted(self.ms.by_read.items()):
            r = self.events[r_id]
            g_r = self._guard(r)
            for m in cands:
                w = self.events[m.write]
                latest = []
                funct = []
                for o in cands:
                    if o.id == m.id:
                        continue
                    w2 = self.events[o.write]
                    seen = b.AND(self._visible(r, w2), self._guard(w2))
                    later = self._before(w.id, w2.id)
                    latest.append(b.IMPLIES(seen, -later))
                    funct.append(-self.vs.match_vars[o.id])
                rhs = b.AND(*latest, *funct, g_r, self._guard(w))
                x = self.vs.match_vars[m.id]
                b.add_clause([-x, rhs])
                b.add_clause([x, -rhs])

    def emit_nstep(self) -> None:
        self.b.family = "nstep"
        b = self.b
        for edge in self.ppo.clock_edges:
            g = self.blast.bool(edge.guard)
            b.add_clause([-g, isbefore(b, self._clock(edge.before), self._clock(edge.after))])
        inits = [e for e in self.ssa.events if e.is_init]
        for w0 in inits:
            for e in self.ssa.memory_events:
                if e.label == w0.label and not e.is_init:
                    b.add_clause([isbefore(b, self._clock(w0.id), self._clock(e.id))])

    def emit_m2clk(self) -> None:
        self.b.family = "m2clk"
        b = self.b
        for m in self.ms.pairs:
            r, w = self.events[m.read], self.events[m.write]
            x = self.vs.match_vars[m.id]
            if not m.local:
                b.add_clause([-x, self._before(w.id, r.id)])
            for p, q in zip(self.vs.value_syms[r.value_sym], self.vs.value_syms[w.value_sym]):
                b.add_clause([-x, -p, q])
                b.add_clause([-x, p, -q])

    def emit_unique(self) -> None:
        self.b.family = "unique"
        writes = self.ssa.writes
        for i, w in enumerate(writes):
            for w2 in writes[i + 1:]:
                if w.label == w2.label:
                    self.b.add_clause([-isequal(self.b, self._clock(w.id), self._clock(w2.id))])

    def emit_assert_neg(self) -> None:
        if not self.ssa.asserts:
            raise EmptyAssertSet("program has no assertions")
        self.b.family = "assert"
        self.b.add_clause([self.blast.bool(a.violation()) for a in self.ssa.asserts])

    def run(self, simplify: bool = True) -> Encoding:
        self.emit_ssa()
        self.emit_ext()
        self.emit_nstep()
        self.emit_m2clk()
        self.emit_unique()
        self.emit_assert_neg()
        cnf = self.b.build(simplify=simplify)
        enc = Encoding(cnf, self.vs, self.ssa, self.ppo, self.ms, None)  # type: ignore[arg-type]
        enc.stats = encoding_stats(enc)
        return enc


def encode(ssa: SsaSystem, ppo: PpoGraph, ms: MatchSet, simplify: bool = True) -> Encoding:
    """Build the CNF; raises EmptyAssertSet when there is nothing to refute."""
    return Encoder(ssa, ppo, ms).run(simplify)


def encoding_stats(enc: Encoding) -> EncodingStats:
    k = len(enc.ssa.memory_events)
    match_vars = len(enc.varspace.match_vars)
    width = enc.varspace.clock_width
    clock_bits = sum(len(v) for v in enc.varspace.clock_vars.values())
    if match_vars > math.ceil(k * k / 4):
        raise EncodingBoundViolation(f"{match_vars} match variables exceed ceil({k}^2/4)")
    if width != max(1, math.ceil(math.log2(k + 1))) or clock_bits != k * width:
        raise EncodingBoundViolation(f"clock bits {clock_bits} != {k} * {width}")
    counts = enc.cnf.family_counts()
    return EncodingStats(
        k_events=k,
        match_vars=match_vars,
        clock_width=width,
        clock_bits=clock_bits,
        num_vars=enc.cnf.num_vars,
        num_clauses=len(enc.cnf.clauses),
        families={f: counts.get(f, 0) for f in FAMILIES},
    )

