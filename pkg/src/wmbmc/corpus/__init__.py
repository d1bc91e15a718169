"""Curated litmus programs with expected verdicts, and a random generator."""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass
from pathlib import Path

PROGRAM_DIR = Path(__file__).with_name("programs")
MANIFEST = Path(__file__).with_name("manifest.csv")

MODELS = ("sc", "tso", "pso")


@dataclass(frozen=True)
class CorpusEntry:
    path: Path
    expected: dict[str, str]  # model -> "SAFE" | "VIOLATION"

    @property
    def name(self) -> str:
        return self.path.stem

    def source(self) -> str:
        return self.path.read_text()


def load_manifest(path: Path = MANIFEST) -> list[CorpusEntry]:
    """Read ``path,sc,tso,pso`` lines; paths are relative to the manifest."""
    out = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#"):
                continue
            if len(row) != 4:
                raise ValueError(f"manifest line needs 4 fields: {row}")
            verdicts = [v.strip().upper() for v in row[1:]]
            for v in verdicts:
                if v not in ("SAFE", "VIOLATION"):
                    raise ValueError(f"bad verdict {v!r} in {row}")
            out.append(CorpusEntry(path.parent / row[0].strip(), dict(zip(MODELS, verdicts))))
    return out


def entry(name: str) -> CorpusEntry:
    for e in load_manifest():
        if e.name == name:
            return e
    raise KeyError(name)


# -- random programs -------------------------------------------------------

SHARED_NAMES = ("x", "y", "z")
LOCAL_PREFIX = "abc"


class _Gen:
    def __init__(self, seed: int, max_threads: int, max_shared: int, max_stmts: int):
        self.rng = random.Random(seed)
        self.max_stmts = max_stmts
        rng = self.rng
        self.shared = list(SHARED_NAMES[: rng.randint(1, max_shared)])
        self.nthreads = rng.randint(1, max_threads) if max_threads < 2 else rng.randint(2, max_threads)
        self.locals: list[list[str]] = []

    def atom(self, t: int, allow_shared: bool = True) -> str:
        rng = self.rng
        opts = ["lit"]
        if self.locals[t]:
            opts.append("local")
        if allow_shared:
            opts += ["shared", "shared"]
        kind = rng.choice(opts)
        if kind == "lit":
            return str(rng.randint(0, 2))
        if kind == "local":
            return rng.choice(self.locals[t])
        return rng.choice(self.shared)

    def expr(self, t: int) -> str:
        rng = self.rng
        a = self.atom(t)
        roll = rng.random()
        if roll < 0.6:
            return a
        if roll < 0.8:
            return f"{a} {rng.choice(['+', '-'])} {self.atom(t)}"
        return f"{a} {rng.choice(['==', '!=', '<'])} {self.atom(t)}"

    def cond(self, t: int) -> str:
        rng = self.rng
        return f"{self.atom(t)} {rng.choice(['==', '!='])} {rng.randint(0, 1)}"

    def stmt(self, t: int, budget: int, depth: int) -> tuple[list[str], int]:
        """Return (lines, statements used)."""
        rng = self.rng
        pad = "  " * (depth + 2)
        roll = rng.random()
        if roll < 0.35:
            return [f"{pad}{rng.choice(self.shared)} = {self.expr(t)};"], 1
        if roll < 0.7:
            return [f"{pad}{self.new_or_old_local(t)} = {self.expr(t)};"], 1
        if roll < 0.8:
            return [f"{pad}fence;"], 1
        if roll < 0.83:
            return [f"{pad}assume({self.cond(t)});"], 1
        if budget >= 2 and depth < 2:
            lines = [f"{pad}if ({self.cond(t)}) {{"]
            used = 1
            inner, n = self.stmt(t, budget - used, depth + 1)
            lines += inner
            used += n
            if budget - used >= 1 and rng.random() < 0.5:
                inner, n = self.stmt(t, budget - used, depth + 1)
                lines += [f"{pad}}} else {{"] + inner
                used += n
            lines.append(f"{pad}}}")
            return lines, used
        return [f"{pad}{rng.choice(self.shared)} = {rng.randint(0, 2)};"], 1

    def new_or_old_local(self, t: int) -> str:
        names = self.locals[t]
        if names and (len(names) >= 2 or self.rng.random() < 0.4):
            return self.rng.choice(names)
        return self.declare(t)

    def declare(self, t: int) -> str:
        name = f"{LOCAL_PREFIX[t]}{len(self.locals[t])}"
        self.locals[t].append(name)
        return name

    def final_assert(self) -> str:
        rng = self.rng
        pool = [n for names in self.locals for n in names] + self.shared
        terms = []
        for _ in range(rng.randint(1, 2)):
            terms.append(f"{rng.choice(pool)} {rng.choice(['==', '!='])} {rng.randint(0, 2)}")
        if len(terms) == 1:
            return f"assert({terms[0]});"
        op = rng.choice(["&&", "||"])
        neg = rng.random() < 0.5
        body = f"{terms[0]} {op} {terms[1]}"
        return f"assert(!({body}));" if neg else f"assert({body});"

    def program(self) -> str:
        rng = self.rng
        lines = [f"var {v} = {rng.randint(0, 1)};" for v in self.shared]
        for t in range(self.nthreads):
            self.locals.append([])
            body: list[str] = []
            budget = rng.randint(1, self.max_stmts)
            while budget > 0:
                out, used = self.stmt(t, budget, 0)
                body += out
                budget -= used
            decls = [f"    local {n};" for n in self.locals[t]]
            lines.append(f"thread t{t} {{")
            lines += decls + body
            lines.append("}")
        lines.append(self.final_assert())
        return "\n".join(lines) + "\n"


def generate_random_program(seed: int, max_threads: int = 3, max_shared: int = 3,
                            max_stmts: int = 5) -> str:
    """Deterministic random loop-free program text with one final assertion."""
    if not (1 <= max_threads <= len(LOCAL_PREFIX) and 1 <= max_shared <= len(SHARED_NAMES)):
        raise ValueError("limits out of range")
    return _Gen(seed, max_threads, max_shared, max_stmts).program()


__all__ = ["CorpusEntry", "MANIFEST", "PROGRAM_DIR", "entry", "generate_random_program",
           "load_manifest"]
