"""Acceptance suite: one PASS/FAIL line per criterion.

Run under pytest (lines appear in the terminal summary) or directly with
``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import csv
import functools
import math
import random
import sys
import time
from pathlib import Path

import numpy as np
from pysat.solvers import Solver as PySatSolver

sys.path.insert(0, str(Path(__file__).parent))

from wmbmc import ast as A  # noqa: E402
from wmbmc.bench import run_bench  # noqa: E402
from wmbmc.corpus import PROGRAM_DIR, generate_random_program, load_manifest  # noqa: E402
from wmbmc.dimacs import dumps_dimacs, parse_dimacs, parse_solver_output  # noqa: E402
from wmbmc.memmodel import MemoryModel  # noqa: E402
from wmbmc.oracle import explore  # noqa: E402
from wmbmc.parser import parse  # noqa: E402
from wmbmc.pipeline import CheckOptions, Verdict, check  # noqa: E402
from wmbmc.solver import Status, check_model, solve  # noqa: E402
from wmbmc.witness import replay_validate  # noqa: E402

MODELS = ("sc", "tso", "pso")
RANDOM_SEEDS = 500
TIME_LIMIT = 5.0
# Fence repair runs at the default loop bound; corpus-wide sweeps use a
# smaller one to keep the suite quick.
MUTEX_UNWIND = 6
SWEEP_UNWIND = 2

RESULTS: dict[int, tuple[bool, str]] = {}


def record(n: int, ok: bool, detail: str) -> None:
    RESULTS[n] = (ok, detail)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


def _source(name: str) -> str:
    return (PROGRAM_DIR / f"{name}.wm").read_text()


def _replays(res) -> bool:
    return replay_validate(res.trace, res.program, res.memory_model)


def _timed_check(src: str, mm: str, unwind: int = 6):
    t0 = time.monotonic()
    res = check(src, mm, CheckOptions(unwind=unwind))
    return res, time.monotonic() - t0


# -- 1 -----------------------------------------------------------------------

VERDICT_MATRIX = {
    "sb": {"sc": "SAFE", "tso": "VIOLATION", "pso": "VIOLATION"},
    "mp": {"sc": "SAFE", "tso": "SAFE", "pso": "VIOLATION"},
}


@functools.lru_cache(maxsize=None)
def litmus_runs():
    return {(name, mm): _timed_check(_source(name), mm)
            for name, row in VERDICT_MATRIX.items() for mm in row}


def test_criterion_1_verdict_matrix():
    bad, slowest = [], 0.0
    for (name, mm), (res, dt) in litmus_runs().items():
        slowest = max(slowest, dt)
        if str(res.verdict) != VERDICT_MATRIX[name][mm] or dt > TIME_LIMIT:
            bad.append(f"{name}/{mm}={res.verdict} in {dt:.2f}s")
    record(1, not bad, f"6 runs, slowest {slowest:.2f}s" + (f"; wrong: {bad}" if bad else ""))


# -- 2 -----------------------------------------------------------------------

FENCE_CASES = [
    ("mp+fence", "pso", "SAFE", 6),
    ("dekker", "sc", "SAFE", MUTEX_UNWIND),
    ("dekker", "tso", "VIOLATION", MUTEX_UNWIND),
    ("dekker+fences", "tso", "SAFE", MUTEX_UNWIND),
    ("peterson", "sc", "SAFE", MUTEX_UNWIND),
    ("peterson", "tso", "VIOLATION", MUTEX_UNWIND),
    ("peterson+fences", "tso", "SAFE", MUTEX_UNWIND),
]


@functools.lru_cache(maxsize=None)
def fence_runs():
    return {(name, mm): _timed_check(_source(name), mm, k)[0] for name, mm, _, k in FENCE_CASES}


def test_criterion_2_fence_repair():
    runs = fence_runs()
    bad = [f"{n}/{mm}={runs[n, mm].verdict}" for n, mm, want, _ in FENCE_CASES
           if str(runs[n, mm].verdict) != want]
    record(2, not bad, f"{len(FENCE_CASES)} cases at unwind {MUTEX_UNWIND}"
           + (f"; wrong: {bad}" if bad else ""))


# -- 3 -----------------------------------------------------------------------

@functools.lru_cache(maxsize=None)
def differential_runs():
    out = []
    for seed in range(RANDOM_SEEDS):
        src = generate_random_program(seed)
        prog = parse(src)
        for mm in MODELS:
            res = check(prog, mm)
            oracle = explore(prog, MemoryModel(mm))
            out.append((seed, mm, res, oracle))
    return out


def test_criterion_3_differential():
    runs = differential_runs()
    bad = [(seed, mm) for seed, mm, res, o in runs
           if (res.verdict is Verdict.VIOLATION) != o.violation]
    viol = sum(res.verdict is Verdict.VIOLATION for _, _, res, _ in runs)
    record(3, not bad and len(runs) >= 1500,
           f"{len(runs)} instances, {viol} violations, {len(bad)} disagreements"
           + (f" e.g. {bad[:5]}" if bad else ""))


# -- 4 -----------------------------------------------------------------------

def test_criterion_4_monotonicity():
    verdicts: dict[str, dict[str, bool]] = {}
    for seed, mm, res, _ in differential_runs():
        verdicts.setdefault(f"random{seed}", {})[mm] = res.verdict is Verdict.VIOLATION
    for e in load_manifest():
        k = SWEEP_UNWIND if A.has_loops(parse(e.source())) else 6
        verdicts[e.name] = {mm: check(e.source(), mm, CheckOptions(unwind=k)).verdict
                            is Verdict.VIOLATION for mm in MODELS}
    bad = [n for n, v in verdicts.items()
           if (v["sc"] and not v["tso"]) or (v["tso"] and not v["pso"])]
    record(4, not bad, f"{len(verdicts)} programs, {len(bad)} counterexamples"
           + (f" e.g. {bad[:5]}" if bad else ""))


# -- 5 -----------------------------------------------------------------------

def _bound_ok(res) -> bool:
    st = res.stats
    if st is None:
        return True
    k = len(res.ssa.memory_events)
    return (st.k_events == k and st.match_vars <= math.ceil(k * k / 4)
            and st.clock_bits == k * max(1, math.ceil(math.log2(k + 1))))


def test_criterion_5_encoding_size():
    results = [r for r, _ in litmus_runs().values()] + list(fence_runs().values())
    results += [r for _, _, r, _ in differential_runs()]
    bad = sum(not _bound_ok(r) for r in results)
    record(5, bad == 0, f"{len(results)} encodings checked, {bad} over the bound")


# -- 6 -----------------------------------------------------------------------

def test_criterion_6_witness_replay():
    results = [r for r, _ in litmus_runs().values()] + list(fence_runs().values())
    results += [r for _, _, r, _ in differential_runs()]
    viol = [r for r in results if r.verdict is Verdict.VIOLATION]
    bad = sum(not _replays(r) for r in viol)
    record(6, bad == 0 and viol, f"{len(viol)} traces replayed, {bad} rejected")


# -- 7 -----------------------------------------------------------------------

def _truth_table_sat(n: int, clauses) -> bool:
    rows = np.arange(1 << n, dtype=np.uint32)
    bits = ((rows[:, None] >> np.arange(n, dtype=np.uint32)) & 1).astype(bool)
    alive = np.ones(1 << n, dtype=bool)
    for c in clauses:
        sat = np.zeros(1 << n, dtype=bool)
        for lit in c:
            col = bits[:, abs(lit) - 1]
            sat |= col if lit > 0 else ~col
        alive &= sat
        if not alive.any():
            return False
    return True


def _pysat_verdict(cnf):
    with PySatSolver(name="cadical153", bootstrap_with=cnf.clauses) as s:
        if not s.solve():
            return Status.UNSAT
        model = {abs(l): l > 0 for l in s.get_model()}
    lits = " ".join(str(v if model.get(v, False) else -v) for v in range(1, cnf.num_vars + 1))
    return parse_solver_output(f"s SATISFIABLE\nv {lits} 0\n", cnf).status


def test_criterion_7_solver():
    rng = random.Random(2024)
    wrong = unverified = 0
    for _ in range(200):
        n = rng.randint(5, 20)
        clauses = [[v if rng.random() < 0.5 else -v for v in rng.sample(range(1, n + 1), 3)]
                   for _ in range(round(4.26 * n))]
        res = solve((n, clauses))
        wrong += (res.status is Status.SAT) != _truth_table_sat(n, clauses)
        if res.status is Status.SAT and check_model(clauses, res.model) is not None:
            unverified += 1
    programs = [generate_random_program(s) for s in range(40)]
    programs += [_source(n) for n in ("sb", "mp", "mp+fence", "fig2", "sb+fences")]
    instances = mismatch = 0
    for i, src in enumerate(programs):
        for mm in MODELS if i >= 40 else (MODELS[i % 3],):
            res = check(src, mm)
            if res.encoding is None:
                continue
            cnf = parse_dimacs(dumps_dimacs(res.encoding.cnf))
            ext = _pysat_verdict(cnf)
            mine = Status.SAT if res.verdict is Verdict.VIOLATION else Status.UNSAT
            instances += 1
            mismatch += ext is not mine
    ok = wrong == 0 and unverified == 0 and instances >= 50 and mismatch == 0
    record(7, ok, f"3-CNF: 200 instances, {wrong} wrong, {unverified} bad models; "
           f"DIMACS vs cadical153: {instances} instances, {mismatch} mismatches")


# -- 8 -----------------------------------------------------------------------

def test_criterion_8_bench_rho(tmp_path):
    out = tmp_path / "bench.csv"
    run_bench(PROGRAM_DIR, list(MODELS), CheckOptions(unwind=SWEEP_UNWIND), out, jobs=4)
    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    bad = 0
    for r in rows:
        p, c = int(r["propagations"]), int(r["conflicts"])
        if c >= 1:
            rho = float(r["rho"])
            bad += not (math.isfinite(rho) and math.isclose(rho, p / c, rel_tol=1e-12))
        else:
            bad += r["rho"] != "undefined"
    with_conflicts = sum(int(r["conflicts"]) >= 1 for r in rows)
    record(8, bad == 0 and rows, f"{len(rows)} rows, {with_conflicts} with conflicts, "
           f"{bad} inconsistent")


if __name__ == "__main__":
    import tempfile

    tests = [(n, f) for n, f in sorted(globals().items()) if n.startswith("test_criterion_")]
    failed = 0
    for name, fn in tests:
        try:
            if "tmp_path" in fn.__code__.co_varnames[:fn.__code__.co_argcount]:
                with tempfile.TemporaryDirectory() as d:
                    fn(Path(d))
            else:
                fn()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
