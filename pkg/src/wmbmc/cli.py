"""Command-line driver: ``check``, ``oracle`` and ``bench``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence, TextIO

from . import ast as A
from .errors import (ModelRejected, ParseError, SolverBackendError, StateSpaceBudgetExceeded,
                     WmbmcError)
from .memmodel import MemoryModel
from .oracle import explore
from .parser import parse
from .pipeline import (DEFAULT_TIMEOUT, DEFAULT_UNWIND, DEFAULT_VALUE_BITS, CheckOptions,
                       CheckResult, Verdict, check)
from .solver import exploration_efficacy
from .unroll import unroll

EXIT_SAFE = 0
EXIT_VIOLATION = 10
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_TIMEOUT = 4
EXIT_DISAGREE = 5

MODELS = tuple(m.value for m in MemoryModel)


class ConfigError(Exception):
    pass


def _value_bits(text: str) -> int:
    n = int(text)
    if not 2 <= n <= 64:
        raise argparse.ArgumentTypeError("value bits must be in 2..64")
    return n


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


def _seconds(text: str) -> float:
    s = float(text)
    if s <= 0:
        raise argparse.ArgumentTypeError("timeout must be positive")
    return s


def _add_common(p: argparse.ArgumentParser, multi_mm: bool = False) -> None:
    if multi_mm:
        p.add_argument("--mm", action="append", default=None,
                       help="memory model(s); repeat or comma-separate (default: all)")
    else:
        p.add_argument("--mm", required=True, choices=MODELS)
    p.add_argument("--unwind", type=_positive, default=DEFAULT_UNWIND)
    p.add_argument("--value-bits", type=_value_bits, default=DEFAULT_VALUE_BITS)
    p.add_argument("--timeout", type=_seconds, default=DEFAULT_TIMEOUT)
    p.add_argument("--solver", default="internal",
                   help='"internal" or a command that takes a DIMACS file argument')
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wmbmc", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="bounded check with the SAT encoding")
    c.add_argument("file")
    _add_common(c)
    c.add_argument("--dimacs", metavar="PATH")
    c.add_argument("--trace", action="store_true", help="print the violating execution")
    c.add_argument("--dump-ssa", action="store_true")
    c.add_argument("--dump-dot", metavar="PATH")
    c.add_argument("--oracle", action="store_true", help="cross-check with explicit-state search")

    o = sub.add_parser("oracle", help="explicit-state exploration only")
    o.add_argument("file")
    _add_common(o)
    o.add_argument("--dimacs", metavar="PATH", help=argparse.SUPPRESS)
    o.add_argument("--trace", action="store_true", help=argparse.SUPPRESS)
    o.add_argument("--dump-ssa", action="store_true", help=argparse.SUPPRESS)
    o.add_argument("--dump-dot", metavar="PATH", help=argparse.SUPPRESS)
    o.add_argument("--oracle", action="store_true", help=argparse.SUPPRESS)

    b = sub.add_parser("bench", help="check every *.wm file of a directory, write CSV")
    b.add_argument("dir")
    _add_common(b, multi_mm=True)
    b.add_argument("--csv", required=True, metavar="OUT")
    b.add_argument("--jobs", type=_positive, default=1)
    return ap


def _options(args) -> CheckOptions:
    cmd = None if args.solver == "internal" else args.solver
    return CheckOptions(unwind=args.unwind, value_bits=args.value_bits, timeout=args.timeout,
                        seed=args.seed, solver_cmd=cmd, dimacs_path=getattr(args, "dimacs", None))


def _load(path: str) -> A.Program:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse(text)


def stats_block(res: CheckResult) -> str:
    """Flat ``key=value`` lines; deterministic (no wall-clock values)."""
    lines = [f"mm={res.memory_model}", f"unwind={res.unwind}"]
    if res.stats is not None:
        for k, v in res.stats.as_dict().items():
            lines.append(f"{k}={v}")
    s = res.solver_stats
    lines += [f"decisions={s.decisions}", f"propagations={s.propagations}",
              f"conflicts={s.conflicts}"]
    rho = exploration_efficacy(s)
    lines.append(f"rho={'undefined' if rho is None else f'{rho:.4f}'}")
    return "\n".join(lines) + "\n"


def dot_graph(res: CheckResult) -> str:
    """Per-thread ppo edges (solid) and potential matches (dashed)."""
    ssa = res.ssa
    out = ["digraph ppo {", "  rankdir=TB;"]
    threads = sorted({e.thread for e in ssa.events})
    for t in threads:
        out.append(f'  subgraph "cluster_{ssa.thread_label(t)}" {{')
        out.append(f'    label="{ssa.thread_label(t)}";')
        for e in ssa.thread_events(t):
            out.append(f'    e{e.id} [label="{e.name}"];')
        out.append("  }")
    for a, b in res.ppo.all_edges():
        out.append(f"  e{a} -> e{b};")
    if res.encoding is not None:
        for m in res.encoding.matches.pairs:
            tag = ', label="local"' if m.local else ""
            out.append(f"  e{m.write} -> e{m.read} [style=dashed{tag}];")
    out.append("}")
    return "\n".join(out) + "\n"


def run_check(args, out: TextIO, err: TextIO) -> int:
    program = _load(args.file)
    opts = _options(args)
    res = check(program, args.mm, opts)
    if args.dump_ssa:
        out.write(res.ssa.dump())
    if args.dump_dot:
        Path(args.dump_dot).write_text(dot_graph(res))
    out.write(res.verdict_line() + "\n")
    if args.trace and res.trace is not None:
        out.write(res.trace.format())
    out.write(stats_block(res))
    if res.verdict is Verdict.TIMEOUT:
        return EXIT_TIMEOUT
    if args.oracle:
        o = explore(res.program, MemoryModel(args.mm), value_width=args.value_bits)
        out.write(f"oracle: {o.verdict.value} states={o.states}\n")
        if o.violation != (res.verdict is Verdict.VIOLATION):
            err.write(f"error: oracle disagrees: checker says {res.verdict}, "
                      f"oracle says {o.verdict.value}\n")
            return EXIT_DISAGREE
    return EXIT_VIOLATION if res.verdict is Verdict.VIOLATION else EXIT_SAFE


def run_oracle(args, out: TextIO, err: TextIO) -> int:
    program = _load(args.file)
    flat = unroll(program, args.unwind) if A.has_loops(program) else program
    o = explore(flat, MemoryModel(args.mm), value_width=args.value_bits)
    line = "VERDICT: VIOLATION" if o.violation else f"VERDICT: SAFE(bound={args.unwind})"
    out.write(f"{line}\nstates={o.states}\n")
    return EXIT_VIOLATION if o.violation else EXIT_SAFE


def _models(values: Optional[list[str]]) -> list[str]:
    if not values:
        return list(MODELS)
    out: list[str] = []
    for v in values:
        for m in v.split(","):
            m = m.strip().lower()
            if m not in MODELS:
                raise ConfigError(f"unknown memory model {m!r}")
            if m not in out:
                out.append(m)
    return out


def run_bench(args, out: TextIO, err: TextIO) -> int:
    from .bench import run_bench as bench
    models = _models(args.mm)
    directory = Path(args.dir)
    if not directory.is_dir():
        raise ConfigError(f"{args.dir} is not a directory")
    rows = bench(directory, models, _options(args), args.csv, jobs=args.jobs, err=err)
    out.write(f"wrote {rows} rows to {args.csv}\n")
    return EXIT_SAFE


def main(argv: Optional[Sequence[str]] = None, out: TextIO = None, err: TextIO = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage and 0 for --help
        return int(exc.code or 0)
    handler = {"check": run_check, "oracle": run_oracle, "bench": run_bench}[args.command]
    try:
        return handler(args, out, err)
    except (ConfigError, ParseError, ValueError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_CONFIG
    except (SolverBackendError, ModelRejected) as exc:
        err.write(f"solver error: {exc}\n")
        return EXIT_SOLVER
    except StateSpaceBudgetExceeded as exc:
        err.write(f"oracle budget exhausted: {exc}\n")
        return EXIT_TIMEOUT
    except WmbmcError as exc:
        err.write(f"internal error: {type(exc).__name__}: {exc}\n")
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
