"""DIMACS CNF files and external solver invocation."""

from __future__ import annotations

import io
import os
import shlex
import subprocess
import tempfile
import time
from pathlib import Path
from typing import Optional, TextIO, Union

from .cnf import Cnf
from .errors import MalformedCnf, ModelRejected, SolverBackendError
from .solver import SolveResult, SolverStats, Status, check_model, validate_clauses


def dumps_dimacs(cnf: Cnf, legend: bool = True) -> str:
    out = io.StringIO()
    if legend:
        for v in sorted(cnf.legend):
            out.write(f"c var {v} {cnf.legend[v]}\n")
        for fam, (a, b) in cnf.families.items():
            out.write(f"c family {fam} {a} {b}\n")
    out.write(f"p cnf {cnf.num_vars} {len(cnf.clauses)}\n")
    for c in cnf.clauses:
        out.write(" ".join(map(str, c)) + " 0\n")
    return out.getvalue()


def export_dimacs(cnf: Cnf, path: Union[str, Path], legend: bool = True) -> None:
    Path(path).write_text(dumps_dimacs(cnf, legend))


def parse_dimacs(text: str) -> Cnf:
    """Parse DIMACS text; ``c var``/``c family`` comments restore the annotations."""
    header: Optional[tuple[int, int]] = None
    clauses: list[list[int]] = []
    legend: dict[int, str] = {}
    families: dict[str, tuple[int, int]] = {}
    current: list[int] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line == "%":
            continue
        if line.startswith("c"):
            parts = line.split(None, 3)
            if len(parts) == 4 and parts[1] == "var":
                legend[int(parts[2])] = parts[3]
            elif len(parts) == 4 and parts[1] == "family":
                a, b = parts[3].split()
                families[parts[2]] = (int(a), int(b))
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf" or header is not None:
                raise MalformedCnf(f"line {lineno}: bad header {line!r}")
            header = (int(parts[2]), int(parts[3]))
            continue
        if header is None:
            raise MalformedCnf(f"line {lineno}: clause before header")
        try:
            nums = [int(x) for x in line.split()]
        except ValueError as exc:
            raise MalformedCnf(f"line {lineno}: {exc}") from None
        for x in nums:
            if x == 0:
                clauses.append(current)
                current = []
            else:
                current.append(x)
    if header is None:
        raise MalformedCnf("missing 'p cnf' header")
    if current:
        clauses.append(current)
    num_vars, num_clauses = header
    if len(clauses) != num_clauses:
        raise MalformedCnf(f"header announces {num_clauses} clauses, found {len(clauses)}")
    validate_clauses(num_vars, clauses)
    return Cnf(num_vars, clauses, families, legend)


def read_dimacs(path: Union[str, Path]) -> Cnf:
    return parse_dimacs(Path(path).read_text())


def import_external_model(source: Union[str, Path, TextIO], cnf: Cnf) -> SolveResult:
    """Read a competition-format answer (``s``/``v`` lines) and verify it."""
    if isinstance(source, (str, Path)):
        text = Path(source).read_text()
    else:
        text = source.read()
    return parse_solver_output(text, cnf)


def parse_solver_output(text: str, cnf: Cnf) -> SolveResult:
    status = None
    values: dict[int, bool] = {}
    for line in text.splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "s":
            word = " ".join(parts[1:])
            if word == "SATISFIABLE":
                status = Status.SAT
            elif word == "UNSATISFIABLE":
                status = Status.UNSAT
            else:
                status = Status.TIMEOUT
        elif parts[0] == "v":
            for x in parts[1:]:
                lit = int(x)
                if lit != 0:
                    values[abs(lit)] = lit > 0
    if status is None:
        raise SolverBackendError("solver output has no status line")
    if status is not Status.SAT:
        return SolveResult(status)
    missing = [v for v in range(1, cnf.num_vars + 1) if v not in values]
    if missing:
        raise ModelRejected(f"model does not assign variable {missing[0]}")
    model = [False] + [values[v] for v in range(1, cnf.num_vars + 1)]
    bad = check_model(cnf.clauses, model)
    if bad is not None:
        raise ModelRejected(f"model falsifies clause {bad}: {cnf.clauses[bad]}")
    return SolveResult(Status.SAT, model)


def run_external(cnf: Cnf, command: str, timeout: Optional[float] = None) -> SolveResult:
    """Run ``command <file.cnf>`` and parse its answer."""
    fd, path = tempfile.mkstemp(suffix=".cnf")
    os.close(fd)
    try:
        export_dimacs(cnf, path)
        t0 = time.monotonic()
        try:
            proc = subprocess.run(shlex.split(command) + [path], capture_output=True,
                                  text=True, timeout=timeout)
        except subprocess.TimeoutExpired:
            return SolveResult(Status.TIMEOUT, None, SolverStats(time_s=time.monotonic() - t0))
        except OSError as exc:
            raise SolverBackendError(f"cannot run {command!r}: {exc}") from None
        # Competition solvers exit 10/20 for SAT/UNSAT.
        if proc.returncode not in (0, 10, 20):
            raise SolverBackendError(f"{command!r} exited with {proc.returncode}: {proc.stderr.strip()}")
        result = parse_solver_output(proc.stdout, cnf)
        result.stats.time_s = time.monotonic() - t0
        return result
    finally:
        os.unlink(path)
