"""End-to-end bounded check of one program under one memory model."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

from . import ast as A
from .encode import Encoding, EncodingStats, encode
from .errors import EmptyAssertSet
from .matches import build_potmat
from .memmodel import MemoryModel, PpoGraph, compute_ppo
from .parser import parse
from .solver import SolveResult, SolverStats, Status, solve
from .ssa import SsaSystem, build_ssa
from .unroll import unroll
from .witness import Trace, reconstruct

DEFAULT_UNWIND = 6
DEFAULT_VALUE_BITS = 8
DEFAULT_TIMEOUT = 900.0


class Verdict(str, enum.Enum):
    SAFE = "SAFE"
    VIOLATION = "VIOLATION"
    TIMEOUT = "TIMEOUT"

    def __str__(self) -> str:
        return self.value


@dataclass
class CheckResult:
    verdict: Verdict
    memory_model: MemoryModel
    unwind: int
    program: A.Program
    ssa: SsaSystem
    ppo: PpoGraph
    encoding: Optional[Encoding] = None
    solve: Optional[SolveResult] = None
    trace: Optional[Trace] = None

    @property
    def stats(self) -> Optional[EncodingStats]:
        return None if self.encoding is None else self.encoding.stats

    @property
    def solver_stats(self) -> SolverStats:
        return self.solve.stats if self.solve is not None else SolverStats()

    def verdict_line(self) -> str:
        if self.verdict is Verdict.SAFE:
            return f"VERDICT: SAFE(bound={self.unwind})"
        return f"VERDICT: {self.verdict}"


@dataclass
class CheckOptions:
    unwind: int = DEFAULT_UNWIND
    value_bits: int = DEFAULT_VALUE_BITS
    timeout: Optional[float] = DEFAULT_TIMEOUT
    seed: int = 0
    # None runs the embedded solver; otherwise a shell command taking a DIMACS path.
    solver_cmd: Optional[str] = None
    dimacs_path: Optional[str] = None
    extra: dict = field(default_factory=dict)


def prepare(program: A.Program, mm: MemoryModel, opts: CheckOptions):
    mm = MemoryModel(mm)
    flat = unroll(program, opts.unwind) if A.has_loops(program) else program
    ssa = build_ssa(flat, opts.value_bits)
    ppo = compute_ppo(ssa, mm)
    ms = build_potmat(ssa, ppo)
    return flat, ssa, ppo, ms


def check(program: A.Program | str, mm: MemoryModel | str,
          opts: Optional[CheckOptions] = None) -> CheckResult:
    """Parse (if given text), unroll, encode, solve and decode a witness."""
    opts = opts or CheckOptions()
    if isinstance(program, str):
        program = parse(program)
    if opts.unwind < 1:
        raise ValueError("unwind must be at least 1")
    mm = MemoryModel(mm)
    flat, ssa, ppo, ms = prepare(program, mm, opts)
    try:
        enc = encode(ssa, ppo, ms)
    except EmptyAssertSet:
        return CheckResult(Verdict.SAFE, mm, opts.unwind, flat, ssa, ppo)
    if opts.dimacs_path:
        from .dimacs import export_dimacs
        export_dimacs(enc.cnf, opts.dimacs_path)
    if opts.solver_cmd:
        from .dimacs import run_external
        res = run_external(enc.cnf, opts.solver_cmd, opts.timeout)
    else:
        res = solve(enc.cnf, opts.timeout, opts.seed, enc.varspace.decision_vars())
    if res.status is Status.TIMEOUT:
        return CheckResult(Verdict.TIMEOUT, mm, opts.unwind, flat, ssa, ppo, enc, res)
    if res.status is Status.UNSAT:
        return CheckResult(Verdict.SAFE, mm, opts.unwind, flat, ssa, ppo, enc, res)
    trace = reconstruct(res.model, enc)
    return CheckResult(Verdict.VIOLATION, mm, opts.unwind, flat, ssa, ppo, enc, res, trace)
