from __future__ import annotations

from . import ast as A


def _unroll_loop(cond: A.Expr, body: tuple[A.Stmt, ...], k: int) -> tuple[A.Stmt, ...]:
    # Depth k bottoms out in an assumption, never in an assertion failure.
    if k == 0:
        return (A.Assume(A.Unary("!", cond)),)
    return (A.If(cond, body + _unroll_loop(cond, body, k - 1), ()),)


def _unroll_block(block: tuple[A.Stmt, ...], k: int) -> tuple[A.Stmt, ...]:
    out: list[A.Stmt] = []
    for s in block:
        if isinstance(s, A.While):
            out.extend(_unroll_loop(s.cond, _unroll_block(s.body, k), k))
        elif isinstance(s, A.If):
            out.append(A.If(s.cond, _unroll_block(s.then, k), _unroll_block(s.orelse, k)))
        else:
            out.append(s)
    return tuple(out)


def unroll(program: A.Program, k: int) -> A.Program:
    """Replace every ``while`` by ``k`` nested ``if``s closed by an unwinding assumption."""
    if k < 1:
        raise ValueError(f"unwind bound must be positive, got {k}")
    threads = tuple(
        A.Thread(t.name, _unroll_block(t.body, k), t.locals, t.checker) for t in program.threads
    )
    return A.Program(program.shared, threads, program.source_name)
