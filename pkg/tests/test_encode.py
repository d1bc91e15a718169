import itertools
import math

import pytest

from wmbmc import terms as T
from wmbmc.cnf import CnfBuilder
from wmbmc.encode import (FAMILIES, VarSpace, _Blaster, clock_width_for, decode_unsigned,
                          encode, encoding_stats)
from wmbmc.errors import EmptyAssertSet, EncodingBoundViolation
from wmbmc.memmodel import MemoryModel
from wmbmc.parser import parse
from wmbmc.pipeline import CheckOptions, prepare
from wmbmc.solver import Status, solve

from conftest import SB

# Always violated, so the formula's models are exactly the executions.
SB_OPEN = SB.replace("assert(r1 == 1 || r2 == 1);", "assert(r1 == 9 && r2 == 9);")


def _encode(src, mm):
    _, ssa, ppo, ms = prepare(parse(src), MemoryModel(mm), CheckOptions())
    return encode(ssa, ppo, ms)


def _pin(enc, extra):
    cnf = enc.cnf
    return solve((cnf.num_vars, cnf.clauses + extra))


def _clock_units(enc, eid, value):
    return [[l if (value >> i) & 1 else -l] for i, l in enumerate(enc.varspace.clock_vars[eid])]


def _ev(enc, thread, kind, label):
    (e,) = [e for e in enc.ssa.events
            if e.thread == thread and e.kind.value == kind and e.label == label]
    return e


def test_guarded_equality_is_bitwise():
    b = CnfBuilder()
    vs = VarSpace(8, 1)
    g = b.new_var("g")
    vs.value_syms["x#3"] = b.new_bv(8, "x#3")
    n = len(b.clauses)
    _Blaster(b, vs).guarded_eq(g, T.Sym("x#3"), T.Const(1))
    # one clause per bit once the constant side folds away
    assert len(b.clauses) - n == 8
    for guard in (False, True):
        res = solve((b.num_vars, b.clauses + [[g if guard else -g]]))
        if guard:
            assert decode_unsigned(res.model, vs.value_syms["x#3"]) == 1


def test_reflexive_equality_is_trivial():
    b = CnfBuilder()
    vs = VarSpace(8, 1)
    vs.value_syms["x"] = b.new_bv(8)
    n = len(b.clauses)
    _Blaster(b, vs).guarded_eq(1, T.Sym("x"), T.Sym("x"))
    assert solve(b.build()).status is Status.SAT
    assert all(l in c and -l in c for c in b.clauses[n:] for l in c[1:2])


def test_latest_write_enumeration():
    """Pin the clocks of y's writes and t1's read; check the chosen match."""
    enc = _encode(SB_OPEN, "tso")
    ry = _ev(enc, 0, "R", "y")
    w0, w2 = _ev(enc, -1, "W", "y"), _ev(enc, 1, "W", "y")
    cands = {m.write: enc.varspace.match_vars[m.id] for m in enc.matches.candidates(ry.id)}
    assert set(cands) == {w0.id, w2.id}
    width = enc.varspace.clock_width
    for c0, c2, cr in itertools.product(range(1 << width), repeat=3):
        extra = _clock_units(enc, w0.id, c0) + _clock_units(enc, w2.id, c2) + _clock_units(enc, ry.id, cr)
        res = _pin(enc, extra)
        # a remote write sharing the read's clock is neither before nor hidden
        feasible = c0 < c2 and c0 < cr and c2 != cr
        assert (res.status is Status.SAT) == feasible, (c0, c2, cr)
        if not feasible:
            continue
        chosen = [w for w, x in cands.items() if res.model[x]]
        assert len(chosen) == 1
        expected = w2.id if c2 < cr else w0.id
        assert chosen == [expected]


def test_false_guard_disables_match():
    src = ("var x; thread a { local r; r = x; } thread b { local s; s = x; if (s == 5) { x = 1; } }"
           " assert(r == 9);")
    enc = _encode(src, "sc")
    guarded = [w for w in enc.ssa.writes if not isinstance(w.guard, T.BoolConst)]
    (w,) = guarded
    guard_var = enc.varspace.guard_atoms[w.guard.name]
    res = _pin(enc, [[-guard_var]])
    assert res.status is Status.SAT
    for m in enc.matches.pairs:
        if m.write == w.id:
            assert not res.model[enc.varspace.match_vars[m.id]]


@pytest.mark.parametrize("mm,forced", [("sc", True), ("tso", False), ("pso", False)])
def test_program_order_clocks(mm, forced):
    enc = _encode(SB_OPEN, mm)
    wx, ry = _ev(enc, 0, "W", "x"), _ev(enc, 0, "R", "y")
    width = enc.varspace.clock_width
    inverted = False
    for a, c in itertools.product(range(1 << width), repeat=2):
        if a > c:
            res = _pin(enc, _clock_units(enc, wx.id, a) + _clock_units(enc, ry.id, c))
            inverted |= res.status is Status.SAT
    assert inverted == (not forced)


def test_remote_match_forces_clock_order_and_value():
    enc = _encode(SB_OPEN, "tso")
    ry, wy = _ev(enc, 0, "R", "y"), _ev(enc, 1, "W", "y")
    (m,) = [m for m in enc.matches.candidates(ry.id) if m.write == wy.id]
    res = _pin(enc, [[enc.varspace.match_vars[m.id]]])
    clk = lambda e: decode_unsigned(res.model, enc.varspace.clock_vars[e.id])
    assert clk(wy) < clk(ry)
    vs = enc.varspace.value_syms
    assert decode_unsigned(res.model, vs[ry.value_sym]) == 1


def test_two_reads_may_share_a_write():
    src = "var x; thread a { local r; local s; r = x; s = x; } thread b { x = 1; } assert(r == 9);"
    enc = _encode(src, "sc")
    wx = _ev(enc, 1, "W", "x")
    xs = [enc.varspace.match_vars[m.id] for m in enc.matches.pairs if m.write == wx.id]
    assert len(xs) == 2
    assert _pin(enc, [[x] for x in xs]).status is Status.SAT


def test_unique_clock_for_same_label_writes():
    src = "var x; thread a { x = 1; } thread b { x = 2; } thread c { x = 3; } assert(x == 9);"
    enc = _encode(src, "sc")
    writes = enc.ssa.writes
    res = _pin(enc, [])
    clocks = [decode_unsigned(res.model, enc.varspace.clock_vars[w.id]) for w in writes]
    assert len(set(clocks)) == len(clocks)
    a, b = writes[1], writes[2]
    for v in range(1 << enc.varspace.clock_width):
        assert _pin(enc, _clock_units(enc, a.id, v) + _clock_units(enc, b.id, v)).status is Status.UNSAT


def test_assert_negation():
    enc = _encode(SB, "tso")
    res = solve(enc.cnf)
    assert res.status is Status.SAT
    syms = enc.varspace.value_syms
    finals = [s for s in syms if s.startswith("r1@") or s.startswith("r2@")]
    assert all(decode_unsigned(res.model, syms[s]) != 1 for s in finals if s.endswith("#1"))


def test_assert_true_is_unsat():
    enc = _encode("var x; thread t { x = 1; } assert(1 == 1);", "pso")
    assert solve(enc.cnf).status is Status.UNSAT


def test_two_asserts_are_a_disjunction():
    # r is always 0: only the second assertion can fail
    src = "var x = 0; thread t { local r; r = x; } assert(r == 0); assert(r == 1);"
    enc = _encode(src, "sc")
    assert len(enc.ssa.asserts) == 2
    assert solve(enc.cnf).status is Status.SAT
    enc = _encode(src.replace("r == 1", "r != 5"), "sc")
    assert solve(enc.cnf).status is Status.UNSAT


def test_no_assert():
    with pytest.raises(EmptyAssertSet):
        _encode("var x; thread t { x = 1; }", "sc")


def test_families_present():
    enc = _encode(SB, "tso")
    assert set(enc.stats.families) == set(FAMILIES)
    assert enc.stats.families["ext"] > 0 and enc.stats.families["assert"] >= 1


def test_size_bounds():
    enc = _encode(SB, "tso")
    k = enc.stats.k_events
    assert k == 6 and enc.stats.match_vars <= 9
    assert enc.stats.clock_bits == k * max(1, math.ceil(math.log2(k + 1)))
    one = _encode("var x; thread t { local r; x = 1; assert(r == 0); }", "sc")
    assert one.stats.k_events == 2 and one.stats.match_vars <= 1


@pytest.mark.parametrize("k", range(1, 70))
def test_clock_width(k):
    assert clock_width_for(k) == max(1, math.ceil(math.log2(k + 1)))


def test_stats_guard_detects_violation():
    enc = _encode(SB, "tso")
    enc.varspace.match_vars.update({1000 + i: 1 for i in range(20)})
    with pytest.raises(EncodingBoundViolation):
        encoding_stats(enc)


def test_legend_names_inputs():
    enc = _encode(SB, "tso")
    names = set(enc.cnf.legend.values())
    assert any(n.startswith("C:t1:") for n in names)
    assert any(n.startswith("X:") for n in names)
