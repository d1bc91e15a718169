"""Preserved program order for SC, TSO and PSO.

``compute_tppo`` gives the transitively closed order a model keeps between
the events of one thread; the stored ppo is its transitive reduction.  The
encoder consumes ``PpoGraph.clock_edges``: the same order projected onto
memory events, where fences have been compiled away into (possibly guarded)
edges between the accesses around them.
"""

from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import terms as T
from .errors import CycleDetected
from .ssa import Event, SsaSystem


class MemoryModel(str, enum.Enum):
    SC = "sc"
    TSO = "tso"
    PSO = "pso"

    def __str__(self) -> str:
        return self.value


def preserved(first: Event, second: Event, mm: MemoryModel) -> bool:
    """Whether ``first`` (program-ordered before ``second``) must stay before it."""
    if first.is_fence or second.is_fence or mm is MemoryModel.SC:
        return True
    if first.is_read:
        return True
    if second.is_read:
        # Store-buffer forwarding serves same-address reads, so W->R is
        # relaxed regardless of address; forwarding is handled by local matches.
        return False
    return mm is MemoryModel.TSO or first.label == second.label


def transitive_closure(edges: Iterable[tuple[int, int]]) -> set[tuple[int, int]]:
    succ: dict[int, set[int]] = defaultdict(set)
    for a, b in edges:
        succ[a].add(b)
    reach: dict[int, set[int]] = {}

    def visit(n: int, stack: set[int]) -> set[int]:
        if n in reach:
            return reach[n]
        if n in stack:
            raise CycleDetected(f"cycle through node {n}")
        stack.add(n)
        out: set[int] = set()
        for m in succ.get(n, ()):
            out.add(m)
            out |= visit(m, stack)
        stack.discard(n)
        reach[n] = out
        return out

    for n in list(succ):
        visit(n, set())
    return {(a, b) for a, bs in reach.items() for b in bs}


def transitive_reduction(edges: Iterable[tuple[int, int]]) -> set[tuple[int, int]]:
    """Unique minimal edge set with the same transitive closure as the input DAG."""
    edges = set(edges)
    closure = transitive_closure(edges)
    succ: dict[int, set[int]] = defaultdict(set)
    for a, b in edges:
        if a == b:
            raise CycleDetected(f"self-loop on node {a}")
        succ[a].add(b)
    reach: dict[int, set[int]] = defaultdict(set)
    for a, b in closure:
        reach[a].add(b)
    kept = set()
    for a, b in edges:
        # (a, b) is redundant iff b is reachable through another successor of a.
        if not any(b in reach[m] for m in succ[a] if m != b):
            kept.add((a, b))
    return kept


def compute_tppo(events: Sequence[Event], mm: MemoryModel) -> set[tuple[int, int]]:
    """Closed preserved order over one thread's events, given in program order."""
    direct = {
        (a.id, b.id)
        for i, a in enumerate(events)
        for b in events[i + 1:]
        if preserved(a, b, mm)
    }
    return transitive_closure(direct)


@dataclass(frozen=True)
class ClockEdge:
    """``guard => clock(before) < clock(after)``."""

    before: int
    after: int
    guard: T.Bool = T.TRUE


@dataclass(frozen=True)
class PpoGraph:
    memory_model: MemoryModel
    # thread index -> transitive reduction of tppo, fences included
    edges: dict[int, frozenset[tuple[int, int]]]
    tppo: dict[int, frozenset[tuple[int, int]]]
    clock_edges: tuple[ClockEdge, ...]

    def ordered(self, thread: int, a: int, b: int) -> bool:
        return (a, b) in self.tppo.get(thread, frozenset())

    def all_edges(self) -> list[tuple[int, int]]:
        return sorted(e for es in self.edges.values() for e in es)


def _memory_order(events: Sequence[Event], mm: MemoryModel) -> set[tuple[int, int]]:
    # Pairs of memory accesses ordered directly or through an unguarded fence.
    mem = [(i, e) for i, e in enumerate(events) if not e.is_fence]
    fence_pos = [i for i, e in enumerate(events) if e.is_fence and e.guard == T.TRUE]
    out = set()
    for x, (i, a) in enumerate(mem):
        for j, b in mem[x + 1:]:
            if preserved(a, b, mm) or any(i < f < j for f in fence_pos):
                out.add((a.id, b.id))
    return out


def _clock_edges_for_thread(events: Sequence[Event], mm: MemoryModel) -> tuple[list[ClockEdge], set]:
    order = _memory_order(events, mm)
    edges = [ClockEdge(a, b) for a, b in sorted(transitive_reduction(order))]
    for pos, f in enumerate(events):
        if not f.is_fence or f.guard == T.TRUE:
            continue
        prefix = [e.id for e in events[:pos] if not e.is_fence]
        suffix = [e.id for e in events[pos + 1:] if not e.is_fence]
        maxs = [a for a in prefix if not any((a, b) in order for b in prefix)]
        mins = [b for b in suffix if not any((a, b) in order for a in suffix)]
        edges += [ClockEdge(a, b, f.guard) for a in maxs for b in mins if (a, b) not in order]
    return edges, order


def compute_ppo(ssa: SsaSystem, mm: MemoryModel) -> PpoGraph:
    mm = MemoryModel(mm)
    edges: dict[int, frozenset] = {}
    tppo: dict[int, frozenset] = {}
    clock_edges: list[ClockEdge] = []
    sinks: list[int] = []
    for t in range(len(ssa.thread_names)):
        evs = ssa.thread_events(t)
        closed = compute_tppo(evs, mm)
        tppo[t] = frozenset(closed)
        edges[t] = frozenset(transitive_reduction(closed))
        ce, order = _clock_edges_for_thread(evs, mm)
        clock_edges += ce
        if t != ssa.checker_thread:
            mem = [e.id for e in evs if not e.is_fence]
            sinks += [a for a in mem if not any((a, b) in order for b in mem)]
    if ssa.checker_thread is not None:
        # The final assertion observes the state after every thread is done.
        evs = [e.id for e in ssa.thread_events(ssa.checker_thread) if not e.is_fence]
        _, order = _clock_edges_for_thread(ssa.thread_events(ssa.checker_thread), mm)
        sources = [b for b in evs if not any((a, b) in order for a in evs)]
        clock_edges += [ClockEdge(a, b) for a in sinks for b in sources]
    return PpoGraph(mm, edges, tppo, tuple(clock_edges))
