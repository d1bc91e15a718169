import pytest

from wmbmc import terms as T
from wmbmc.errors import WidthOverflow
from wmbmc.parser import parse
from wmbmc.ssa import INIT_THREAD, Assignment, EventKind, build_ssa, extract_asserts

from conftest import SB

BRANCHY = """
var x; var y;
thread t1 { x = 1; if (y == 0) { x = 3; } else { x = 7; } y = x; }
"""


def _assignments(ssa):
    return [c for c in ssa.constraints if isinstance(c, Assignment)]


def test_single_write():
    ssa = build_ssa(parse("var x; thread t { x = 1; }"))
    init, w = ssa.events
    assert init.thread == INIT_THREAD and init.kind is EventKind.WRITE and init.ssa_index == 0
    assert not any(c.target.name == init.value_sym for c in _assignments(ssa))
    assert w.kind is EventKind.WRITE and w.guard == T.TRUE
    (a,) = [c for c in _assignments(ssa) if c.target.name == w.value_sym]
    assert a.value == T.Const(1)


def test_initialised_shared_gets_init_constraint():
    ssa = build_ssa(parse("var x = 1; thread t { x = 0; }"))
    kinds = {c.kind for c in _assignments(ssa)}
    assert "init" in kinds


def test_reads_are_fresh_per_occurrence():
    ssa = build_ssa(parse("var x; thread t { local a; local b; a = x; b = x; }"))
    reads = ssa.reads
    assert len(reads) == 2
    assert reads[0].ssa_index != reads[1].ssa_index
    assert reads[0].value_sym != reads[1].value_sym
    constrained = {c.target.name for c in _assignments(ssa)}
    assert not constrained & {r.value_sym for r in reads}


def test_branch_writes_guarded_and_merged():
    ssa = build_ssa(parse(BRANCHY))
    writes = [e for e in ssa.writes if e.thread == 0 and e.label == "x"]
    assert [w.guard == T.TRUE for w in writes] == [True, False, False]
    assert writes[1].guard != writes[2].guard
    by_target = {c.target.name: c for c in _assignments(ssa)}
    assert by_target[writes[1].value_sym].value == T.Const(3)
    assert by_target[writes[2].value_sym].value == T.Const(7)
    assert by_target[writes[1].value_sym].guard == writes[1].guard
    phis = [c for c in _assignments(ssa) if c.kind == "phi"]
    assert any(isinstance(c.value, T.Ite) for c in phis)
    # y = x reads x afresh: its symbol is not defined by the merge
    rx = [e for e in ssa.reads if e.label == "x"][-1]
    wy = [e for e in ssa.writes if e.label == "y" and e.thread == 0][0]
    assert by_target[wy.value_sym].value == T.Sym(rx.value_sym)
    assert rx.value_sym not in by_target


def test_guards_are_sound_under_evaluation():
    ssa = build_ssa(parse(BRANCHY))
    defs = {str(c.atom): c.definition for c in ssa.constraints if hasattr(c, "atom")}
    ry = [e for e in ssa.reads if e.label == "y"][0]
    wx = [e for e in ssa.writes if e.label == "x" and e.thread == 0]
    for yval, taken in ((0, 1), (5, 2)):
        env = {ry.value_sym: yval}
        for name in ssa.atoms:
            env[name] = T.eval_bool(defs[name], env, 8)
        active = [T.eval_bool(w.guard, env, 8) for w in wx]
        assert active == [True, taken == 1, taken == 2]


def test_store_buffering_assert():
    ssa = build_ssa(parse(SB))
    (ob,) = extract_asserts(ssa)
    assert ob.guard == T.TRUE
    assert ssa.thread_label(ob.thread) == "<final>"
    assert "1" in str(ob.cond) and "|" in str(ob.cond)


def test_no_asserts():
    assert extract_asserts(build_ssa(parse("var x; thread t { x = 1; }"))) == []


def test_assert_inside_branch_is_guarded():
    ssa = build_ssa(parse("var x; thread t { local r; r = x; if (r == 1) { assert(r == 2); } }"))
    (ob,) = extract_asserts(ssa)
    assert isinstance(ob.guard, T.Atom)


def test_widths():
    with pytest.raises(WidthOverflow):
        build_ssa(parse("var x = 300; thread t { x = 1; }"), 8)
    ssa = build_ssa(parse("var x; thread t { x = 1; }"), 2)
    assert ssa.value_width == 2


def test_dump_is_stable():
    a = build_ssa(parse(BRANCHY)).dump()
    b = build_ssa(parse(BRANCHY)).dump()
    assert a == b
    assert "guard1 := (y#1 = 0)" in a
    assert "true => (x#1 = 1)" in a
