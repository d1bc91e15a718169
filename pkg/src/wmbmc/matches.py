"""Potential read-from candidates (the potential-matches relation)."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

from .errors import ReadWithoutWriter
from .memmodel import PpoGraph
from .ssa import Event, SsaSystem


@dataclass(frozen=True)
class Match:
    id: int
    read: int
    write: int
    # Same-thread pair: the read may be served by the thread's own store buffer.
    local: bool


@dataclass(frozen=True)
class MatchSet:
    pairs: tuple[Match, ...]
    free_writes: frozenset[int]
    by_read: dict[int, tuple[Match, ...]] = field(compare=False)

    def candidates(self, read_id: int) -> tuple[Match, ...]:
        return self.by_read.get(read_id, ())


def build_potmat(ssa: SsaSystem, ppo: PpoGraph) -> MatchSet:
    """Pair every read with each same-label write it could observe.

    The only pruning drops writes of the reading thread that are ordered after
    the read; guards are ignored, which over-approximates soundly.
    """
    writes_by_label: dict[str, list[Event]] = defaultdict(list)
    for w in ssa.writes:
        writes_by_label[w.label].append(w)
    pairs: list[Match] = []
    by_read: dict[int, list[Match]] = defaultdict(list)
    for r in ssa.reads:
        for w in writes_by_label[r.label]:
            same_thread = w.thread == r.thread
            if same_thread and ppo.ordered(r.thread, r.id, w.id):
                continue
            m = Match(len(pairs), r.id, w.id, same_thread)
            pairs.append(m)
            by_read[r.id].append(m)
        if not by_read[r.id]:
            raise ReadWithoutWriter(f"read {r.name} has no candidate write")
    return MatchSet(
        tuple(pairs),
        frozenset(w.id for w in ssa.writes),
        {k: tuple(v) for k, v in by_read.items()},
    )
