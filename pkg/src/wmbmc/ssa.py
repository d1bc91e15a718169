"""Guarded SSA construction and shared-memory event extraction.

Every occurrence of a shared variable becomes its own event with a fresh
value symbol.  Writes are tied to their right-hand side by a guarded
equality; reads are left unconstrained here and only get bound later by the
match constraints.  Locals never produce events: their dataflow lives in
guarded equalities and phi selections.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Union

from . import ast as A
from . import terms as T
from .ast import has_loops
from .errors import WidthOverflow

INIT_THREAD = -1


class EventKind(enum.Enum):
    READ = "R"
    WRITE = "W"
    FENCE = "F"


@dataclass(frozen=True)
class Event:
    id: int
    thread: int
    kind: EventKind
    label: Optional[str]
    ssa_index: int
    guard: T.Bool
    value_sym: Optional[str]
    # Position among the thread's events (fences included), program order.
    po_index: int

    @property
    def is_read(self) -> bool:
        return self.kind is EventKind.READ

    @property
    def is_write(self) -> bool:
        return self.kind is EventKind.WRITE

    @property
    def is_fence(self) -> bool:
        return self.kind is EventKind.FENCE

    @property
    def is_init(self) -> bool:
        return self.thread == INIT_THREAD

    @property
    def name(self) -> str:
        if self.is_fence:
            return f"F#{self.id}"
        return f"{self.kind.value}{self.label}#{self.ssa_index}"


@dataclass(frozen=True)
class GuardDef:
    thread: int
    atom: T.Atom
    definition: T.Bool

    def formula(self) -> T.Bool:
        return T.Iff(self.atom, self.definition)

    def __str__(self) -> str:
        return f"{self.atom} := {self.definition}"


@dataclass(frozen=True)
class Assignment:
    """``guard => (target = value)``."""

    thread: int
    guard: T.Bool
    target: T.Sym
    value: T.BV
    kind: str  # "init", "write", "local", "phi"

    def formula(self) -> T.Bool:
        return T.Implies(self.guard, T.Cmp("==", self.target, self.value))

    def __str__(self) -> str:
        return f"{self.guard} => ({self.target} = {self.value})"


@dataclass(frozen=True)
class Assumption:
    thread: int
    guard: T.Bool
    cond: T.Bool

    def formula(self) -> T.Bool:
        return T.Implies(self.guard, self.cond)

    def __str__(self) -> str:
        return f"{self.guard} => assume {self.cond}"


Constraint = Union[GuardDef, Assignment, Assumption]


@dataclass(frozen=True)
class AssertObligation:
    thread: int
    guard: T.Bool
    cond: T.Bool
    source: str

    def violation(self) -> T.Bool:
        return T.mk_and(self.guard, T.mk_not(self.cond))


@dataclass(frozen=True)
class SsaSystem:
    events: tuple[Event, ...]
    constraints: tuple[Constraint, ...]
    asserts: tuple[AssertObligation, ...]
    value_width: int
    thread_names: tuple[str, ...]
    checker_thread: Optional[int]
    symbols: tuple[str, ...]
    atoms: tuple[str, ...]

    def thread_events(self, thread: int) -> list[Event]:
        return sorted((e for e in self.events if e.thread == thread), key=lambda e: e.po_index)

    @property
    def memory_events(self) -> list[Event]:
        return [e for e in self.events if not e.is_fence]

    @property
    def reads(self) -> list[Event]:
        return [e for e in self.events if e.is_read]

    @property
    def writes(self) -> list[Event]:
        return [e for e in self.events if e.is_write]

    def thread_label(self, thread: int) -> str:
        return "init" if thread == INIT_THREAD else self.thread_names[thread]

    def dump(self) -> str:
        """Textual listing, one constraint per line, grouped by thread."""
        lines = ["// initial writes"]
        for c in self.constraints:
            if isinstance(c, Assignment) and c.kind == "init":
                lines.append(str(c))
        for e in self.events:
            if e.is_init and not any(isinstance(c, Assignment) and c.kind == "init"
                                     and c.target.name == e.value_sym for c in self.constraints):
                lines.append(f"{e.value_sym} nondet")
        for t, name in enumerate(self.thread_names):
            lines.append(f"// thread {name}")
            for e in self.thread_events(t):
                lines.append(f"//   event {e.name} guard {e.guard}")
            for c in self.constraints:
                if c.thread == t and not (isinstance(c, Assignment) and c.kind == "init"):
                    lines.append(str(c))
            for a in self.asserts:
                if a.thread == t:
                    lines.append(f"{a.guard} => assert {a.cond}")
        return "\n".join(lines) + "\n"


def extract_asserts(ssa: SsaSystem) -> list[AssertObligation]:
    """All assertion obligations; a violation is any ``guard & !cond``."""
    return list(ssa.asserts)


class _Builder:
    def __init__(self, program: A.Program, width: int):
        self.program = program
        self.width = width
        self.shared = set(program.shared_names)
        self.events: list[Event] = []
        self.constraints: list[Constraint] = []
        self.asserts: list[AssertObligation] = []
        self.symbols: list[str] = []
        self.atoms: list[str] = []
        self.ssa_counter: dict[str, int] = {name: 0 for name in program.shared_names}
        self.local_counter: dict[tuple[int, str], int] = {}
        self.phi_counter = 0
        self.final_locals: dict[str, dict[str, T.BV]] = {}
        # per-thread state
        self.thread = INIT_THREAD
        self.po = 0
        self.locals: dict[str, T.BV] = {}
        self.shared_view: dict[str, T.BV] = {}
        self.thread_name = "init"

    # -- helpers ---------------------------------------------------------
    def _symbol(self, name: str) -> T.Sym:
        self.symbols.append(name)
        return T.Sym(name)

    def _atom(self) -> T.Atom:
        name = f"guard{len(self.atoms) + 1}"
        self.atoms.append(name)
        return T.Atom(name)

    def _literal(self, value: int) -> T.Const:
        if not T.fits(value, self.width):
            raise WidthOverflow(f"literal {value} does not fit in {self.width} bits")
        return T.Const(value)

    def _event(self, kind: EventKind, label: Optional[str], guard: T.Bool) -> Event:
        if kind is EventKind.FENCE:
            idx, sym = 0, None
        else:
            self.ssa_counter[label] += 1
            idx = self.ssa_counter[label]
            sym = self._symbol(f"{label}#{idx}").name
        ev = Event(len(self.events), self.thread, kind, label, idx, guard, sym, self.po)
        self.po += 1
        self.events.append(ev)
        return ev

    # -- initial writes --------------------------------------------------
    def init_writes(self) -> None:
        for d in self.program.shared:
            sym = self._symbol(f"{d.name}#0")
            self.events.append(Event(len(self.events), INIT_THREAD, EventKind.WRITE, d.name, 0,
                                     T.TRUE, sym.name, 0))
            if d.init is not None:
                self.constraints.append(
                    Assignment(INIT_THREAD, T.TRUE, sym, self._literal(d.init), "init"))

    # -- expressions -----------------------------------------------------
    def expr(self, e: A.Expr, guard: T.Bool) -> T.BV:
        if isinstance(e, A.IntLit):
            return self._literal(e.value)
        if isinstance(e, A.Var):
            if e.owner is not None:
                return self.final_locals[e.owner][e.name]
            if e.name in self.shared:
                ev = self._event(EventKind.READ, e.name, guard)
                return T.Sym(ev.value_sym)
            return self.locals[e.name]
        if isinstance(e, A.Unary):
            if e.op == "-" and isinstance(e.operand, A.IntLit):
                return self._literal(-e.operand.value)
            x = self.expr(e.operand, guard)
            if e.op == "-":
                return T.Neg(x)
            return T.from_bool(T.mk_not(T.to_bool(x)))
        left = self.expr(e.left, guard)
        right = self.expr(e.right, guard)
        if e.op in ("+", "-", "*"):
            return T.Arith(e.op, left, right)
        if e.op == "&&":
            return T.from_bool(T.mk_and(T.to_bool(left), T.to_bool(right)))
        if e.op == "||":
            return T.from_bool(T.mk_or(T.to_bool(left), T.to_bool(right)))
        return T.from_bool(T.Cmp(e.op, left, right))

    # -- statements ------------------------------------------------------
    def block(self, block: tuple[A.Stmt, ...], guard: T.Bool) -> None:
        for s in block:
            self.stmt(s, guard)

    def stmt(self, s: A.Stmt, guard: T.Bool) -> None:
        t = self.thread
        if isinstance(s, A.LocalDecl):
            return
        if isinstance(s, A.Assign):
            value = self.expr(s.value, guard)
            if s.target in self.shared:
                ev = self._event(EventKind.WRITE, s.target, guard)
                sym = T.Sym(ev.value_sym)
                self.constraints.append(Assignment(t, guard, sym, value, "write"))
                self.shared_view[s.target] = sym
            else:
                key = (t, s.target)
                self.local_counter[key] = self.local_counter.get(key, 0) + 1
                sym = self._symbol(f"{s.target}@{self.thread_name}#{self.local_counter[key]}")
                self.constraints.append(Assignment(t, guard, sym, value, "local"))
                self.locals[s.target] = sym
        elif isinstance(s, A.Fence):
            self._event(EventKind.FENCE, None, guard)
        elif isinstance(s, A.Assert):
            cond = T.to_bool(self.expr(s.cond, guard))
            self.asserts.append(AssertObligation(t, guard, cond, self.thread_name))
        elif isinstance(s, A.Assume):
            cond = T.to_bool(self.expr(s.cond, guard))
            self.constraints.append(Assumption(t, guard, cond))
        elif isinstance(s, A.If):
            self.branch(s, guard)
        else:
            raise TypeError(f"unexpected statement {s!r}; unroll loops first")

    def branch(self, s: A.If, guard: T.Bool) -> None:
        t = self.thread
        cond = T.to_bool(self.expr(s.cond, guard))
        c_atom = self._atom()
        self.constraints.append(GuardDef(t, c_atom, cond))
        then_guard = self._atom()
        self.constraints.append(GuardDef(t, then_guard, T.mk_and(guard, c_atom)))

        before_locals, before_view = dict(self.locals), dict(self.shared_view)
        self.block(s.then, then_guard)
        then_locals, then_view = self.locals, self.shared_view

        self.locals, self.shared_view = dict(before_locals), dict(before_view)
        if s.orelse:
            else_guard = self._atom()
            self.constraints.append(GuardDef(t, else_guard, T.mk_and(guard, T.mk_not(c_atom))))
            self.block(s.orelse, else_guard)
        else_locals, else_view = self.locals, self.shared_view

        self.locals = self._merge(then_locals, else_locals, c_atom, guard)
        view = {k: v for k, v in then_view.items() if k in else_view}
        self.shared_view = self._merge(view, {k: else_view[k] for k in view}, c_atom, guard)

    def _merge(self, a: dict[str, T.BV], b: dict[str, T.BV], sel: T.Bool,
               guard: T.Bool) -> dict[str, T.BV]:
        out = {}
        for name in a:
            if a[name] == b[name]:
                out[name] = a[name]
                continue
            self.phi_counter += 1
            owner = "" if name in self.shared else f"@{self.thread_name}"
            sym = self._symbol(f"{name}{owner}#phi{self.phi_counter}")
            self.constraints.append(
                Assignment(self.thread, guard, sym, T.Ite(sel, a[name], b[name]), "phi"))
            out[name] = sym
        return out

    # -- threads ---------------------------------------------------------
    def run(self) -> SsaSystem:
        self.init_writes()
        checker = None
        for idx, th in enumerate(self.program.threads):
            self.thread = idx
            self.thread_name = th.name
            self.po = 0
            self.locals = {name: T.Const(0) for name in th.locals}
            self.shared_view = {}
            if th.checker:
                checker = idx
            self.block(th.body, T.TRUE)
            self.final_locals[th.name] = self.locals
        return SsaSystem(
            events=tuple(self.events),
            constraints=tuple(self.constraints),
            asserts=tuple(self.asserts),
            value_width=self.width,
            thread_names=tuple(t.name for t in self.program.threads),
            checker_thread=checker,
            symbols=tuple(self.symbols),
            atoms=tuple(self.atoms),
        )


def build_ssa(program: A.Program, value_width: int = 8) -> SsaSystem:
    """Translate a loop-free program into guarded SSA with shared-memory events."""
    if value_width < 1:
        raise ValueError("value width must be positive")
    if has_loops(program):
        raise ValueError("build_ssa needs a loop-free program; call unroll first")
    return _Builder(program, value_width).run()
