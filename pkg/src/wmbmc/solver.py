"""Embedded CDCL SAT solver.

Two watched literals (binary clauses kept in implication lists), first-UIP
learning with local minimisation, VSIDS ordering through a lazy binary heap,
phase saving and Luby restarts.  Assignments live in a list indexed by signed literal, so
``value[-v]`` reads the negative literal via Python's negative indexing.
"""

from __future__ import annotations

import enum
import heapq
import random
import time
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

from .cnf import Cnf
from .errors import MalformedCnf, SolverBackendError


class Status(str, enum.Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    TIMEOUT = "TIMEOUT"

    def __str__(self) -> str:
        return self.value


@dataclass
class SolverStats:
    decisions: int = 0
    propagations: int = 0
    conflicts: int = 0
    learned: int = 0
    restarts: int = 0
    time_s: float = 0.0

    def as_text(self) -> str:
        rho = exploration_efficacy(self)
        return "\n".join([
            f"decisions={self.decisions}",
            f"propagations={self.propagations}",
            f"conflicts={self.conflicts}",
            f"learned={self.learned}",
            f"restarts={self.restarts}",
            f"rho={'undefined' if rho is None else f'{rho:.6g}'}",
        ])


@dataclass
class SolveResult:
    status: Status
    # model[v] for v in 1..num_vars; index 0 unused.  None unless SAT.
    model: Optional[list[bool]] = None
    stats: SolverStats = field(default_factory=SolverStats)


def exploration_efficacy(stats: SolverStats) -> Optional[float]:
    """Propagations per conflict; None when no conflict happened."""
    if stats.conflicts == 0:
        return None
    return stats.propagations / stats.conflicts


def luby(i: int) -> int:
    """The i-th element (1-based) of 1,1,2,1,1,2,4,1,1,2,..."""
    size, seq, x = 1, 0, i - 1
    while size < x + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != x:
        size = (size - 1) >> 1
        seq -= 1
        x %= size
    return 1 << seq


def check_model(clauses: Sequence[Sequence[int]], model: Sequence[bool]) -> Optional[int]:
    """Index of the first clause the model falsifies, or None."""
    for i, c in enumerate(clauses):
        if not any(model[lit] if lit > 0 else not model[-lit] for lit in c):
            return i
    return None


def validate_clauses(num_vars: int, clauses: Sequence[Sequence[int]]) -> None:
    for c in clauses:
        for lit in c:
            if not isinstance(lit, int) or lit == 0 or abs(lit) > num_vars:
                raise MalformedCnf(f"literal {lit!r} outside 1..{num_vars}")


class Solver:
    RESTART_UNIT = 100
    DECAY = 0.95

    def __init__(self, num_vars: int, clauses: Sequence[Sequence[int]], seed: int = 0,
                 decision_vars: Optional[Iterable[int]] = None):
        validate_clauses(num_vars, clauses)
        self.n = n = num_vars
        self.original = [list(c) for c in clauses]
        self.value = [0] * (2 * n + 1)
        self.level = [0] * (n + 1)
        self.reason: list[Optional[list[int]]] = [None] * (n + 1)
        self.phase = [False] * (n + 1)
        rng = random.Random(seed)
        # Tiny seeded perturbation fixes the initial branching order.
        self.activity = [0.0] + [rng.random() * 1e-6 if seed else 0.0 for _ in range(n)]
        self.var_inc = 1.0
        # Only decision variables enter the heap; the rest are left to
        # propagation and picked by a final scan if still open.
        dec = range(1, n + 1) if decision_vars is None else sorted(set(decision_vars))
        self.decision = [False] * (n + 1)
        for v in dec:
            self.decision[v] = True
        self.in_heap = list(self.decision)
        self.heap = [(-self.activity[v], v) for v in dec]
        heapq.heapify(self.heap)
        self.scan = 1
        # bins[l]: literals implied once l becomes false (binary clauses)
        self.bins: list[list[int]] = [[] for _ in range(2 * n + 1)]
        self.watches: list[list[list[int]]] = [[] for _ in range(2 * n + 1)]
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.clauses: list[list[int]] = []
        self.learnts: list[list[int]] = []
        self.max_learnts = max(2000, len(clauses) // 3)
        self.stats = SolverStats()
        self.ok = True
        self.seen = [False] * (n + 1)
        for c in self.original:
            self._add_input(c)

    # -- setup ---------------------------------------------------------
    def _add_input(self, c: list[int]) -> None:
        if not self.ok:
            return
        lits: list[int] = []
        for lit in c:
            if -lit in lits:
                return
            if lit not in lits:
                lits.append(lit)
        if not lits:
            self.ok = False
        elif len(lits) == 1:
            v = self.value[lits[0]]
            if v == -1:
                self.ok = False
            elif v == 0:
                self._enqueue(lits[0], None)
        else:
            self._attach(lits)

    def _attach(self, c: list[int]) -> None:
        if len(c) == 2:
            self.bins[c[0]].append(c[1])
            self.bins[c[1]].append(c[0])
        else:
            self.clauses.append(c)
            self.watches[c[0]].append(c)
            self.watches[c[1]].append(c)

    # -- core ----------------------------------------------------------
    def _enqueue(self, lit: int, reason: Optional[list[int]]) -> None:
        v = abs(lit)
        self.value[lit] = 1
        self.value[-lit] = -1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def _propagate(self) -> Optional[list[int]]:
        value, watches, bins, trail = self.value, self.watches, self.bins, self.trail
        level, reason = self.level, self.reason
        dl = len(self.trail_lim)
        qhead = self.qhead
        conflict = None
        while qhead < len(trail):
            p = trail[qhead]
            qhead += 1
            false_lit = -p
            for o in bins[false_lit]:
                vo = value[o]
                if vo == 1:
                    continue
                if vo == -1:
                    conflict = [o, false_lit]
                    break
                value[o] = 1
                value[-o] = -1
                v = o if o > 0 else -o
                level[v] = dl
                reason[v] = [o, false_lit]
                trail.append(o)
            if conflict is not None:
                break
            ws = watches[false_lit]
            i = j = 0
            n = len(ws)
            while i < n:
                c = ws[i]
                i += 1
                if c[0] == false_lit:
                    c[0] = c[1]
                    c[1] = false_lit
                first = c[0]
                if value[first] == 1:
                    ws[j] = c
                    j += 1
                    continue
                for k in range(2, len(c)):
                    if value[c[k]] != -1:
                        c[1] = c[k]
                        c[k] = false_lit
                        watches[c[1]].append(c)
                        break
                else:
                    ws[j] = c
                    j += 1
                    if value[first] == -1:
                        conflict = c
                        ws[j:] = ws[i:n]
                        j += n - i
                        break
                    value[first] = 1
                    value[-first] = -1
                    v = first if first > 0 else -first
                    level[v] = dl
                    reason[v] = c
                    trail.append(first)
            del ws[j:]
            if conflict is not None:
                break
        self.stats.propagations += qhead - self.qhead
        self.qhead = len(trail) if conflict is not None else qhead
        return conflict

    def _bump(self, v: int) -> None:
        act = self.activity
        act[v] += self.var_inc
        if act[v] > 1e100:
            for u in range(1, self.n + 1):
                act[u] *= 1e-100
            self.var_inc *= 1e-100
            self._rebuild_heap()
        elif self.in_heap[v]:
            heapq.heappush(self.heap, (-act[v], v))

    def _rebuild_heap(self) -> None:
        act, value, decision = self.activity, self.value, self.decision
        self.in_heap = [decision[v] and value[v] == 0 for v in range(self.n + 1)]
        self.heap = [(-act[v], v) for v in range(1, self.n + 1) if self.in_heap[v]]
        heapq.heapify(self.heap)

    def _analyze(self, confl: list[int]) -> tuple[list[int], int]:
        seen, level, reason, trail = self.seen, self.level, self.reason, self.trail
        cur = len(self.trail_lim)
        learnt = [0]
        counter = 0
        p = 0
        idx = len(trail) - 1
        c = confl
        while True:
            for q in (c if p == 0 else c[1:]):
                v = abs(q)
                if not seen[v] and level[v] > 0:
                    seen[v] = True
                    self._bump(v)
                    if level[v] == cur:
                        counter += 1
                    else:
                        learnt.append(q)
            while not seen[abs(trail[idx])]:
                idx -= 1
            p = trail[idx]
            idx -= 1
            seen[abs(p)] = False
            counter -= 1
            if counter == 0:
                break
            c = reason[abs(p)]
        learnt[0] = -p
        # Drop literals implied by the rest of the clause (local minimisation).
        kept = [learnt[0]]
        for q in learnt[1:]:
            r = reason[abs(q)]
            if r is None or not all(seen[abs(x)] or level[abs(x)] == 0 for x in r[1:]):
                kept.append(q)
        for q in learnt[1:]:
            seen[abs(q)] = False
        self.var_inc /= self.DECAY
        if len(kept) == 1:
            return kept, 0
        best = max(range(1, len(kept)), key=lambda i: level[abs(kept[i])])
        kept[1], kept[best] = kept[best], kept[1]
        return kept, level[abs(kept[1])]

    def _cancel_until(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        start = self.trail_lim[lvl]
        value, phase, act, heap = self.value, self.phase, self.activity, self.heap
        reason, in_heap, decision = self.reason, self.in_heap, self.decision
        trail = self.trail
        for i in range(len(trail) - 1, start - 1, -1):
            lit = trail[i]
            v = lit if lit > 0 else -lit
            value[lit] = 0
            value[-lit] = 0
            phase[v] = lit > 0
            reason[v] = None
            if not in_heap[v] and decision[v]:
                in_heap[v] = True
                heapq.heappush(heap, (-act[v], v))
        del trail[start:]
        del self.trail_lim[lvl:]
        self.qhead = len(trail)
        if v < self.scan:
            self.scan = 1
        if len(heap) > 8 * self.n + 64:
            self._rebuild_heap()

    def _pick(self) -> int:
        heap, value, act, in_heap = self.heap, self.value, self.activity, self.in_heap
        while heap:
            neg, v = heapq.heappop(heap)
            if -neg != act[v] or not in_heap[v]:
                continue  # stale entry
            in_heap[v] = False
            if value[v] == 0:
                return v
        # Everything decidable is assigned; close any variable left open.
        n = self.n
        while self.scan <= n and value[self.scan] != 0:
            self.scan += 1
        return self.scan if self.scan <= n else 0

    def _reduce_db(self) -> None:
        """At level 0: keep the shorter half of the long learnt clauses."""
        keep = sorted(self.learnts, key=len)[: len(self.learnts) // 2]
        self.learnts = keep
        self.max_learnts = int(self.max_learnts * 1.1)
        self.watches = [[] for _ in range(2 * self.n + 1)]
        for c in self.clauses:
            self.watches[c[0]].append(c)
            self.watches[c[1]].append(c)
        for c in keep:
            self.watches[c[0]].append(c)
            self.watches[c[1]].append(c)

    def solve(self, timeout: Optional[float] = None) -> SolveResult:
        t0 = time.monotonic()
        deadline = None if timeout is None else t0 + timeout
        status = self._search(deadline)
        self.stats.time_s = time.monotonic() - t0
        if status is not Status.SAT:
            return SolveResult(status, None, self.stats)
        model = [False] * (self.n + 1)
        for v in range(1, self.n + 1):
            model[v] = self.value[v] == 1
        bad = check_model(self.original, model)
        if bad is not None:
            raise SolverBackendError(f"internal model violates clause {bad}")
        return SolveResult(Status.SAT, model, self.stats)

    def _search(self, deadline: Optional[float]) -> Status:
        if not self.ok or self._propagate() is not None:
            return Status.UNSAT
        restart = 1
        budget = luby(restart) * self.RESTART_UNIT
        since_restart = 0
        stats = self.stats
        while True:
            confl = self._propagate()
            if confl is not None:
                stats.conflicts += 1
                since_restart += 1
                if not self.trail_lim:
                    return Status.UNSAT
                if deadline is not None and time.monotonic() > deadline:
                    return Status.TIMEOUT
                learnt, back = self._analyze(confl)
                self._cancel_until(back)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                else:
                    if len(learnt) == 2:
                        self._attach(learnt)
                    else:
                        self.learnts.append(learnt)
                        self.watches[learnt[0]].append(learnt)
                        self.watches[learnt[1]].append(learnt)
                    self._enqueue(learnt[0], learnt)
                stats.learned += 1
                continue
            if since_restart >= budget:
                stats.restarts += 1
                restart += 1
                budget = luby(restart) * self.RESTART_UNIT
                since_restart = 0
                self._cancel_until(0)
                if len(self.learnts) > self.max_learnts:
                    self._reduce_db()
                continue
            v = self._pick()
            if v == 0:
                return Status.SAT
            stats.decisions += 1
            self.trail_lim.append(len(self.trail))
            self._enqueue(v if self.phase[v] else -v, None)


def solve(cnf: Union[Cnf, tuple[int, Sequence[Sequence[int]]]], timeout_seconds: Optional[float] = None,
          seed: int = 0, decision_vars: Optional[Iterable[int]] = None) -> SolveResult:
    """Decide a CNF given as ``Cnf`` or ``(num_vars, clauses)``."""
    if isinstance(cnf, Cnf):
        num_vars, clauses = cnf.num_vars, cnf.clauses
    else:
        num_vars, clauses = cnf
    return Solver(num_vars, clauses, seed, decision_vars).solve(timeout_seconds)
