"""Benchmark harness: every program of a directory under several models, one CSV row each."""

from __future__ import annotations

import csv
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Iterable, Optional, TextIO

from .errors import WmbmcError
from .parser import parse
from .pipeline import CheckOptions, Verdict, check

CSV_HEADER = ("file", "mm", "verdict", "time_s", "k_events", "match_vars", "clauses",
              "decisions", "propagations", "conflicts", "rho")


def format_rho(propagations: int, conflicts: int) -> str:
    return "undefined" if conflicts == 0 else repr(propagations / conflicts)


def bench_one(path: str, mm: str, opts: CheckOptions) -> tuple[Optional[dict], Optional[str]]:
    """Run one instance; returns (row, error message)."""
    try:
        program = parse(Path(path).read_text())
    except OSError as exc:
        return None, f"{path}: {exc.strerror}"
    except WmbmcError as exc:
        return None, f"{path}: {exc}"
    t0 = time.monotonic()
    try:
        res = check(program, mm, opts)
    except WmbmcError as exc:
        return None, f"{path} [{mm}]: {type(exc).__name__}: {exc}"
    elapsed = time.monotonic() - t0
    verdict = res.verdict
    if verdict is not Verdict.TIMEOUT and opts.timeout is not None and elapsed > opts.timeout:
        verdict = Verdict.TIMEOUT
    st = res.stats
    ss = res.solver_stats
    row = {
        "file": Path(path).name,
        "mm": mm,
        "verdict": str(verdict),
        "time_s": f"{elapsed:.3f}",
        "k_events": st.k_events if st else 0,
        "match_vars": st.match_vars if st else 0,
        "clauses": st.num_clauses if st else 0,
        "decisions": ss.decisions,
        "propagations": ss.propagations,
        "conflicts": ss.conflicts,
        "rho": format_rho(ss.propagations, ss.conflicts),
    }
    return row, None


def _job(args):
    return bench_one(*args)


def run_bench(directory: Path, models: Iterable[str], opts: CheckOptions, csv_path,
              jobs: int = 1, err: TextIO = sys.stderr) -> int:
    """Write the CSV and return the number of rows; unreadable files are skipped."""
    files = sorted(str(p) for p in Path(directory).glob("*.wm"))
    opts = replace(opts, dimacs_path=None)
    work = [(f, mm, opts) for f in files for mm in models]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_job, work))
    else:
        results = [_job(w) for w in work]
    n = 0
    # single writer, rows in (file, model) order regardless of completion order
    with open(csv_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_HEADER, lineterminator="\n")
        writer.writeheader()
        for row, message in results:
            if message is not None:
                err.write(f"skipped {message}\n")
                continue
            writer.writerow(row)
            n += 1
    return n
