"""Explicit-state operational semantics for SC, TSO and PSO.

Threads are compiled to a small instruction set whose memory accesses occur
in the same order as the events of the symbolic encoding: the shared reads
of an expression left to right, then the store.  Purely thread-local
instructions are executed eagerly right after a memory step; they commute
with everything other threads do, so reachability is unaffected.

TSO gives each thread one FIFO store buffer; PSO gives each thread one FIFO
per address.  A load is served by the youngest matching entry of the
thread's own buffer, falling back to memory.  A fence can only execute once
the thread's buffers are empty.  The final-assertion thread runs after every
other thread has finished and all buffers have drained.

A violation counts only in a terminal state (all threads finished, buffers
empty), so executions later cut off by a failing ``assume`` do not count.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple, Optional, Sequence

from . import ast as A
from .errors import NoSuchTransition, StateSpaceBudgetExceeded
from .memmodel import MemoryModel
from .terms import wrap

BLOCKED = -1
DEFAULT_BUDGET = 10_000_000

Eval = Callable[[tuple, tuple, tuple], int]  # (own locals, temps, all locals) -> value


@dataclass(frozen=True)
class Instr:
    op: str  # load, store, set, br, jmp, fence, assert, assume, join
    label: int = -1
    expr: Optional[Eval] = None
    target: int = -1  # local slot for "set", jump target for "br"/"jmp"
    access: int = -1  # position among the thread's memory events
    text: str = ""


class State(NamedTuple):
    pcs: tuple[int, ...]
    locs: tuple[tuple[int, ...], ...]
    temps: tuple[tuple[int, ...], ...]
    mem: tuple[int, ...]
    # TSO: per thread a tuple of (label, value, access) entries, oldest first.
    # PSO: per thread a tuple (one per label) of (value, access) entries.
    # SC: per thread the empty tuple.
    bufs: tuple
    violated: bool


class Choice(NamedTuple):
    kind: str  # "exec" or "flush"
    thread: int
    label: int = -1  # PSO flush only


class Verdict(str, enum.Enum):
    REACHABLE = "REACHABLE"
    UNREACHABLE = "UNREACHABLE"

    def __str__(self) -> str:
        return self.value


@dataclass
class OracleResult:
    verdict: Verdict
    states: int
    # Schedule leading to a violating terminal state, if one was found.
    path: Optional[list[Choice]] = field(default=None, repr=False)

    @property
    def violation(self) -> bool:
        return self.verdict is Verdict.REACHABLE


class _Compiler:
    def __init__(self, program: A.Program, width: int):
        self.width = width
        self.labels = {name: i for i, name in enumerate(program.shared_names)}
        self.thread_index = {t.name: i for i, t in enumerate(program.threads)}
        self.local_slots = [{n: i for i, n in enumerate(t.locals)} for t in program.threads]

    def thread(self, idx: int, th: A.Thread) -> list[Instr]:
        self.idx = idx
        self.code: list[Instr] = []
        self.access = 0
        if th.checker:
            # Blocks until every other thread has finished and drained.
            self._emit(Instr("join"))
        self.block(th.body)
        return self.code

    def _emit(self, instr: Instr) -> int:
        self.code.append(instr)
        return len(self.code) - 1

    def _mem(self, op: str, **kw) -> None:
        self._emit(Instr(op, access=self.access, **kw))
        self.access += 1

    def expr(self, e: A.Expr) -> Eval:
        """Emit loads for the shared reads of ``e`` and return its evaluator."""
        self.ntemps = 0
        return self._expr(e)

    def _expr(self, e: A.Expr) -> Eval:
        w = self.width
        if isinstance(e, A.IntLit):
            v = wrap(e.value, w)
            return lambda loc, tmp, allloc: v
        if isinstance(e, A.Var):
            if e.owner is not None:
                t = self.thread_index[e.owner]
                slot = self.local_slots[t][e.name]
                return lambda loc, tmp, allloc: allloc[t][slot]
            if e.name in self.labels:
                k = self.ntemps
                self.ntemps += 1
                self._mem("load", label=self.labels[e.name], text=e.name)
                return lambda loc, tmp, allloc: tmp[k]
            slot = self.local_slots[self.idx][e.name]
            return lambda loc, tmp, allloc: loc[slot]
        if isinstance(e, A.Unary):
            f = self._expr(e.operand)
            if e.op == "-":
                return lambda loc, tmp, allloc: wrap(-f(loc, tmp, allloc), w)
            return lambda loc, tmp, allloc: int(f(loc, tmp, allloc) == 0)
        lf, rf = self._expr(e.left), self._expr(e.right)
        op = _BINOPS[e.op]
        return lambda loc, tmp, allloc: wrap(op(lf(loc, tmp, allloc), rf(loc, tmp, allloc)), w)

    def block(self, block: Sequence[A.Stmt]) -> None:
        for s in block:
            self.stmt(s)

    def stmt(self, s: A.Stmt) -> None:
        if isinstance(s, A.LocalDecl):
            return
        if isinstance(s, A.Assign):
            f = self.expr(s.value)
            if s.target in self.labels:
                self._mem("store", label=self.labels[s.target], expr=f, text=s.target)
            else:
                self._emit(Instr("set", expr=f, target=self.local_slots[self.idx][s.target]))
        elif isinstance(s, A.Fence):
            self._mem("fence")
        elif isinstance(s, A.Assert):
            self._emit(Instr("assert", expr=self.expr(s.cond)))
        elif isinstance(s, A.Assume):
            self._emit(Instr("assume", expr=self.expr(s.cond)))
        elif isinstance(s, A.If):
            br = self._emit(Instr("br", expr=self.expr(s.cond)))
            self.block(s.then)
            if s.orelse:
                jmp = self._emit(Instr("jmp"))
                self.code[br] = Instr("br", expr=self.code[br].expr, target=len(self.code))
                self.block(s.orelse)
                self.code[jmp] = Instr("jmp", target=len(self.code))
            else:
                self.code[br] = Instr("br", expr=self.code[br].expr, target=len(self.code))
        else:
            raise TypeError(f"unexpected statement {s!r}; unroll loops first")


_BINOPS: dict[str, Callable[[int, int], int]] = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "==": lambda a, b: int(a == b),
    "!=": lambda a, b: int(a != b),
    "<": lambda a, b: int(a < b),
    "<=": lambda a, b: int(a <= b),
    ">": lambda a, b: int(a > b),
    ">=": lambda a, b: int(a >= b),
    "&&": lambda a, b: int(a != 0 and b != 0),
    "||": lambda a, b: int(a != 0 or b != 0),
}


class Machine:
    def __init__(self, program: A.Program, mm: MemoryModel, value_width: int = 8):
        if A.has_loops(program):
            raise ValueError("the oracle needs a loop-free program; call unroll first")
        self.program = program
        self.mm = MemoryModel(mm)
        self.width = value_width
        comp = _Compiler(program, value_width)
        self.labels = list(program.shared_names)
        self.code = [comp.thread(i, t) for i, t in enumerate(program.threads)]
        self.nthreads = len(self.code)
        self.checker = next((i for i, t in enumerate(program.threads) if t.checker), None)
        self.nlocals = [len(t.locals) for t in program.threads]

    # -- states ----------------------------------------------------------
    def initial_states(self, domain: Iterable[int] = (0, 1)) -> list[State]:
        domain = sorted({wrap(v, self.width) for v in domain})
        choices = [[wrap(d.init, self.width)] if d.init is not None else domain
                   for d in self.program.shared]
        out = []
        for mem in itertools.product(*choices):
            out.append(self.initial_state(tuple(mem)))
        return out

    def initial_state(self, mem: tuple[int, ...]) -> State:
        empty = () if self.mm is not MemoryModel.PSO else tuple(() for _ in self.labels)
        s = State(
            pcs=(0,) * self.nthreads,
            locs=tuple((0,) * n for n in self.nlocals),
            temps=((),) * self.nthreads,
            mem=tuple(mem),
            bufs=(empty,) * self.nthreads,
            violated=False,
        )
        for t in range(self.nthreads):
            s = self._run_local(s, t)
        return s

    def done(self, s: State, t: int) -> bool:
        return s.pcs[t] == len(self.code[t])

    def buffers_empty(self, s: State, t: int) -> bool:
        b = s.bufs[t]
        return not b if self.mm is not MemoryModel.PSO else not any(b)

    def terminal(self, s: State) -> bool:
        return all(self.done(s, t) and self.buffers_empty(s, t) for t in range(self.nthreads))

    def current(self, s: State, t: int) -> Optional[Instr]:
        pc = s.pcs[t]
        if pc == BLOCKED or pc == len(self.code[t]):
            return None
        return self.code[t][pc]

    # -- transitions -----------------------------------------------------
    def enabled(self, s: State) -> list[Choice]:
        if BLOCKED in s.pcs:
            return []
        out: list[Choice] = []
        others_quiet = None
        for t in range(self.nthreads):
            ins = self.current(s, t)
            if ins is not None:
                if t == self.checker:
                    if others_quiet is None:
                        others_quiet = all(self.done(s, u) and self.buffers_empty(s, u)
                                           for u in range(self.nthreads) if u != t)
                    ok = others_quiet
                else:
                    ok = ins.op != "fence" or self.buffers_empty(s, t)
                if ok:
                    out.append(Choice("exec", t))
            if self.mm is MemoryModel.TSO and s.bufs[t]:
                out.append(Choice("flush", t))
            elif self.mm is MemoryModel.PSO:
                out += [Choice("flush", t, l) for l, q in enumerate(s.bufs[t]) if q]
        return out

    def read_value(self, s: State, t: int, label: int) -> tuple[int, Optional[int]]:
        """Value a load of ``label`` by thread ``t`` would see, and the buffered
        access it was forwarded from (None when served by memory)."""
        if self.mm is MemoryModel.TSO:
            for lab, val, acc in reversed(s.bufs[t]):
                if lab == label:
                    return val, acc
        elif self.mm is MemoryModel.PSO:
            q = s.bufs[t][label]
            if q:
                return q[-1]
        return s.mem[label], None

    def step(self, s: State, choice: Choice) -> State:
        if choice not in self.enabled(s):
            raise NoSuchTransition(f"{choice} is not enabled")
        return self._apply(s, choice)

    def _apply(self, s: State, choice: Choice) -> State:
        t = choice.thread
        if choice.kind == "flush":
            return self._flush(s, t, choice.label)
        ins = self.code[t][s.pcs[t]]
        bufs, mem, temps = s.bufs, s.mem, s.temps
        if ins.op == "load":
            val, _ = self.read_value(s, t, ins.label)
            temps = _put(temps, t, temps[t] + (val,))
        elif ins.op == "store":
            val = ins.expr(s.locs[t], temps[t], s.locs)
            temps = _put(temps, t, ())
            if self.mm is MemoryModel.SC:
                mem = _put(mem, ins.label, val)
            elif self.mm is MemoryModel.TSO:
                bufs = _put(bufs, t, bufs[t] + ((ins.label, val, ins.access),))
            else:
                q = bufs[t][ins.label] + ((val, ins.access),)
                bufs = _put(bufs, t, _put(bufs[t], ins.label, q))
        # fences only need the enabledness check above
        s = State(_put(s.pcs, t, s.pcs[t] + 1), s.locs, temps, mem, bufs, s.violated)
        return self._run_local(s, t)

    def _flush(self, s: State, t: int, label: int) -> State:
        if self.mm is MemoryModel.TSO:
            (lab, val, _), rest = s.bufs[t][0], s.bufs[t][1:]
            bufs = _put(s.bufs, t, rest)
        else:
            q = s.bufs[t][label]
            (val, _), lab = q[0], label
            bufs = _put(s.bufs, t, _put(s.bufs[t], label, q[1:]))
        return s._replace(mem=_put(s.mem, lab, val), bufs=bufs)

    def flush_access(self, s: State, choice: Choice) -> int:
        """Access id of the store a flush choice would commit."""
        if self.mm is MemoryModel.TSO:
            return s.bufs[choice.thread][0][2]
        return s.bufs[choice.thread][choice.label][0][1]

    def _run_local(self, s: State, t: int) -> State:
        code = self.code[t]
        pc = s.pcs[t]
        loc, tmp, violated = s.locs[t], s.temps[t], s.violated
        locs = s.locs
        while pc < len(code):
            ins = code[pc]
            op = ins.op
            if op == "set":
                v = ins.expr(loc, tmp, locs)
                loc = _put(loc, ins.target, v)
                locs = _put(locs, t, loc)
                tmp = ()
                pc += 1
            elif op == "br":
                taken = ins.expr(loc, tmp, locs) != 0
                tmp = ()
                pc = pc + 1 if taken else ins.target
            elif op == "jmp":
                pc = ins.target
            elif op == "assert":
                if ins.expr(loc, tmp, locs) == 0:
                    violated = True
                tmp = ()
                pc += 1
            elif op == "assume":
                ok = ins.expr(loc, tmp, locs) != 0
                tmp = ()
                if not ok:
                    pc = BLOCKED
                    break
                pc += 1
            else:
                break
        return State(_put(s.pcs, t, pc), locs, _put(s.temps, t, tmp), s.mem, s.bufs, violated)

    # -- search ----------------------------------------------------------
    def explore(self, domain: Iterable[int] = (0, 1), budget: int = DEFAULT_BUDGET,
                want_path: bool = False) -> OracleResult:
        visited: set[State] = set()
        for init in self.initial_states(domain):
            if init in visited:
                continue
            visited.add(init)
            stack = [(init, self.enabled(init), 0)]
            path: list[Choice] = []
            if self.terminal(init) and init.violated:
                return OracleResult(Verdict.REACHABLE, len(visited), [] if want_path else None)
            while stack:
                s, choices, i = stack[-1]
                if i == len(choices):
                    stack.pop()
                    if path:
                        path.pop()
                    continue
                stack[-1] = (s, choices, i + 1)
                nxt = self._apply(s, choices[i])
                if nxt in visited:
                    continue
                visited.add(nxt)
                if len(visited) > budget:
                    raise StateSpaceBudgetExceeded(f"more than {budget} states")
                path.append(choices[i])
                if nxt.violated and self.terminal(nxt):
                    return OracleResult(Verdict.REACHABLE, len(visited), list(path) if want_path else None)
                stack.append((nxt, self.enabled(nxt), 0))
        return OracleResult(Verdict.UNREACHABLE, len(visited))


def _put(tup: tuple, i: int, v) -> tuple:
    return tup[:i] + (v,) + tup[i + 1:]


def explore(program: A.Program, mm: MemoryModel, initial_values: Iterable[int] = (0, 1),
            value_width: int = 8, budget: int = DEFAULT_BUDGET) -> OracleResult:
    """Exhaustively decide whether a violating terminal state is reachable."""
    return Machine(program, mm, value_width).explore(initial_values, budget)
