"""Counterexample traces decoded from satisfying assignments.

Steps are ordered by clock value.  A write's clock is the moment it becomes
visible in memory; under TSO and PSO the store itself may have executed
earlier into the store buffer.  A local match (the read is served by the
reading thread's own buffer) may therefore show the write after the read.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from . import ast as A
from . import terms as T
from .encode import Encoding, decode_signed, decode_unsigned, lit_value
from .errors import InconsistentModel
from .memmodel import MemoryModel
from .oracle import Choice, Machine
from .ssa import INIT_THREAD, Event


@dataclass(frozen=True)
class TraceStep:
    event: int
    thread: int
    thread_name: str
    kind: str  # "R" or "W"
    label: str
    ssa_index: int
    po_index: int
    clock: int
    value: int

    def __str__(self) -> str:
        return f"[{self.clock}] {self.thread_name}:{self.kind} {self.label}#{self.ssa_index} = {self.value}"


@dataclass(frozen=True)
class TraceMatch:
    read: int
    write: int
    local: bool


@dataclass(frozen=True)
class Trace:
    steps: tuple[TraceStep, ...]
    matches: tuple[TraceMatch, ...]
    violated_assert: int
    assert_text: str
    operands: tuple[tuple[str, int], ...]

    def step(self, event_id: int) -> TraceStep:
        for s in self.steps:
            if s.event == event_id:
                return s
        raise KeyError(event_id)

    def format(self) -> str:
        lines = [str(s) for s in self.steps]
        lines.append("matches:")
        for m in self.matches:
            r, w = self.step(m.read), self.step(m.write)
            tag = " (local)" if m.local else ""
            lines.append(f"  {r.thread_name}:R {r.label}#{r.ssa_index} <- "
                         f"{w.thread_name}:W {w.label}#{w.ssa_index}{tag}")
        ops = ", ".join(f"{k} = {v}" for k, v in self.operands)
        lines.append(f"violated: assert #{self.violated_assert} {self.assert_text}"
                     + (f" with {ops}" if ops else ""))
        return "\n".join(lines) + "\n"


def model_env(model: Sequence[bool], enc: Encoding) -> dict[str, int | bool]:
    vs = enc.varspace
    env: dict[str, int | bool] = {a: lit_value(model, lit) for a, lit in vs.guard_atoms.items()}
    env.update({s: decode_signed(model, lits) for s, lits in vs.value_syms.items()})
    return env


def reconstruct(model: Sequence[bool], enc: Encoding) -> Trace:
    """Decode a violating execution; raises InconsistentModel on any defect."""
    ssa, vs, width = enc.ssa, enc.varspace, enc.ssa.value_width
    env = model_env(model, enc)
    events = {e.id: e for e in ssa.events}
    live: dict[int, Event] = {e.id: e for e in ssa.memory_events
                              if T.eval_bool(e.guard, env, width)}
    clock = {eid: decode_unsigned(model, vs.clock_vars[eid]) for eid in live}

    matches: list[TraceMatch] = []
    for m in enc.matches.pairs:
        if lit_value(model, vs.match_vars[m.id]):
            matches.append(TraceMatch(m.read, m.write, m.local))
    _validate(live, clock, env, matches, enc, events)

    def order(e: Event) -> tuple:
        return (clock[e.id], e.thread, e.ssa_index, e.id)

    steps = tuple(
        TraceStep(e.id, e.thread, ssa.thread_label(e.thread), e.kind.value, e.label,
                  e.ssa_index, e.po_index, clock[e.id], int(env[e.value_sym]))
        for e in sorted(live.values(), key=order))
    matches.sort(key=lambda m: (order(live[m.read]), m.write))

    for idx, a in enumerate(ssa.asserts):
        if T.eval_bool(a.violation(), env, width):
            syms, _ = T.free_names(a.cond)
            ops = tuple((s, int(env[s])) for s in sorted(syms))
            return Trace(steps, tuple(matches), idx, f"in {a.source}: {a.cond}", ops)
    raise InconsistentModel("model violates no assertion")


def _validate(live, clock, env, matches, enc: Encoding, events) -> None:
    by_read: dict[int, list[TraceMatch]] = {}
    for m in matches:
        by_read.setdefault(m.read, []).append(m)
        if m.read not in live or m.write not in live:
            raise InconsistentModel(f"match {m} involves an inactive event")
        r, w = events[m.read], events[m.write]
        if env[r.value_sym] != env[w.value_sym]:
            raise InconsistentModel(f"{r.name} reads {env[r.value_sym]} but {w.name} wrote {env[w.value_sym]}")
        if m.local:
            if not w.po_index < r.po_index:
                raise InconsistentModel(f"local write {w.name} is not before {r.name}")
        elif not clock[w.id] < clock[r.id]:
            raise InconsistentModel(f"{w.name} is not clocked before {r.name}")
    for eid, e in live.items():
        if e.is_read and len(by_read.get(eid, [])) != 1:
            raise InconsistentModel(f"read {e.name} has {len(by_read.get(eid, []))} matches")
    # latest write: no visible same-address write falls between source and read
    for m in matches:
        r, w = events[m.read], events[m.write]
        for c in enc.matches.candidates(r.id):
            w2 = events[c.write]
            if w2.id == w.id or w2.id not in live:
                continue
            visible = c.local or clock[w2.id] <= clock[r.id]
            if visible and clock[w.id] < clock[w2.id]:
                raise InconsistentModel(f"{r.name} skips the later write {w2.name}")
    labels: dict[str, list[int]] = {}
    for e in live.values():
        if e.is_write:
            labels.setdefault(e.label, []).append(clock[e.id])
    for lab, cs in labels.items():
        if len(set(cs)) != len(cs):
            raise InconsistentModel(f"writes to {lab} share a clock value")


def replay_validate(trace: Trace, program: A.Program, mm: MemoryModel,
                    value_width: int = 8, budget: int = 200_000) -> bool:
    """Search for an operational schedule that realises ``trace``.

    Read executions, and write flushes (plain store executions under SC),
    must follow the trace's clock order, with ties in either order.  Store
    enqueues, fences and the final-assertion join are free moves.  Every read
    must see the value and the writer the trace assigns to it, and the run
    must end violated.
    """
    mm = MemoryModel(mm)
    try:
        machine = Machine(program, mm, value_width)
    except Exception:
        return False
    init_vals = {s.label: s.value for s in trace.steps if s.thread == INIT_THREAD}
    if set(init_vals) != set(machine.labels):
        return False
    start = machine.initial_state(tuple(init_vals[l] for l in machine.labels))
    source = {m.read: m.write for m in trace.matches}
    steps = [s for s in trace.steps if s.thread != INIT_THREAD]
    for s in steps:
        if s.kind == "R" and s.event not in source:
            return False
    writer_key = {s.event: (s.thread, s.po_index) for s in trace.steps}
    init_writers = tuple((INIT_THREAD, 0) for _ in machine.labels)
    label_idx = {l: i for i, l in enumerate(machine.labels)}

    # steps grouped by clock; any order inside a group
    groups: list[list[TraceStep]] = []
    for s in steps:
        if groups and groups[-1][0].clock == s.clock:
            groups[-1].append(s)
        else:
            groups.append([s])

    buffered = mm is not MemoryModel.SC
    seen: set = set()
    # stack of (state, group index, done-in-group mask, last writers per label)
    stack = [(start, 0, 0, init_writers)]
    explored = 0
    while stack:
        node = stack.pop()
        if node in seen:
            continue
        seen.add(node)
        explored += 1
        if explored > budget:
            return False
        state, g, mask, lastw = node
        if g == len(groups):
            if machine.terminal(state):
                if state.violated:
                    return True
                continue
        enabled = machine.enabled(state)
        for ch in enabled:
            if ch.kind == "exec":
                ins = machine.current(state, ch.thread)
                if ins.op in ("fence", "join") or (buffered and ins.op == "store"):
                    stack.append((machine.step(state, ch), g, mask, lastw))
        if g == len(groups):
            continue
        group = groups[g]
        for i, want in enumerate(group):
            if mask >> i & 1:
                continue
            nmask = mask | (1 << i)
            ng, nm = (g + 1, 0) if nmask == (1 << len(group)) - 1 else (g, nmask)
            for ch in enabled:
                if ch.thread != want.thread:
                    continue
                nxt = _consume(machine, state, ch, want, lastw, label_idx, source, writer_key,
                               buffered)
                if nxt is not None:
                    stack.append((nxt[0], ng, nm, nxt[1]))
    return False


def _consume(machine: Machine, state, ch: Choice, want: TraceStep, lastw, label_idx, source,
             writer_key, buffered):
    lab = label_idx[want.label]
    if want.kind == "R":
        if ch.kind != "exec":
            return None
        ins = machine.current(state, ch.thread)
        if ins.op != "load" or ins.access != want.po_index or ins.label != lab:
            return None
        val, fwd = machine.read_value(state, ch.thread, lab)
        writer = (ch.thread, fwd) if fwd is not None else lastw[lab]
        src = source[want.event]
        if val != want.value or writer != writer_key[src]:
            return None
        return machine.step(state, ch), lastw
    if buffered:
        if ch.kind != "flush" or (ch.label != -1 and ch.label != lab):
            return None
        if machine.flush_access(state, ch) != want.po_index:
            return None
    else:
        ins = machine.current(state, ch.thread)
        if ch.kind != "exec" or ins.op != "store" or ins.access != want.po_index:
            return None
    nxt = machine.step(state, ch)
    if nxt.mem[lab] != want.value:
        return None
    return nxt, lastw[:lab] + ((want.thread, want.po_index),) + lastw[lab + 1:]
