import pytest

from wmbmc.errors import NoSuchTransition, StateSpaceBudgetExceeded
from wmbmc.memmodel import MemoryModel
from wmbmc.oracle import Choice, Machine, Verdict, explore
from wmbmc.parser import parse

from conftest import MP, MP_FENCE, SB

EXEC = lambda t: Choice("exec", t)


def _run(machine, schedule):
    (s,) = machine.initial_states()
    for ch in schedule:
        s = machine.step(s, ch)
    return s


def test_store_buffering_schedule_tso():
    m = Machine(parse(SB), MemoryModel.TSO)
    s = _run(m, [EXEC(0), EXEC(1), EXEC(0), EXEC(1)])
    assert s.locs[0] == (0,) and s.locs[1] == (0,)
    s = _run(m, [EXEC(0), EXEC(1), EXEC(0), EXEC(1), Choice("flush", 0), Choice("flush", 1),
                 EXEC(2)])
    assert m.terminal(s) and s.violated
    assert s.mem == (1, 1)


def test_store_buffering_sc_schedule_cannot_reorder():
    m = Machine(parse(SB), MemoryModel.SC)
    s = _run(m, [EXEC(0), EXEC(1), EXEC(0), EXEC(1), EXEC(2)])
    assert m.terminal(s) and not s.violated


def test_message_passing_pso_schedule():
    m = Machine(parse(MP), MemoryModel.PSO)
    y = m.labels.index("y")
    x = m.labels.index("x")
    s = _run(m, [EXEC(0), EXEC(0), Choice("flush", 0, y), EXEC(1), EXEC(1),
                 Choice("flush", 0, x), EXEC(2)])
    assert s.locs[1] == (1, 0)
    assert m.terminal(s) and s.violated


@pytest.mark.parametrize("src,expected", [
    (SB, {"sc": False, "tso": True, "pso": True}),
    (MP, {"sc": False, "tso": False, "pso": True}),
    (MP_FENCE, {"sc": False, "tso": False, "pso": False}),
])
def test_litmus_verdicts(src, expected):
    for mm, want in expected.items():
        res = explore(parse(src), MemoryModel(mm))
        assert res.violation == want
        assert res.verdict is (Verdict.REACHABLE if want else Verdict.UNREACHABLE)
        assert res.states > 0


def test_fence_waits_for_buffer():
    m = Machine(parse("var x = 0; thread t { x = 1; fence; x = 2; }"), MemoryModel.TSO)
    s = _run(m, [EXEC(0)])
    with pytest.raises(NoSuchTransition):
        m.step(s, EXEC(0))
    s = m.step(m.step(s, Choice("flush", 0)), EXEC(0))
    assert m.current(s, 0).op == "store"


def test_tso_fifo_and_forwarding():
    src = "var x = 0; var y = 0; thread t { local r; x = 1; y = 2; x = 3; r = x; }"
    m = Machine(parse(src), MemoryModel.TSO)
    s = _run(m, [EXEC(0), EXEC(0), EXEC(0), EXEC(0)])
    assert s.locs[0] == (3,)  # youngest buffered entry
    assert [e[1] for e in s.bufs[0]] == [1, 2, 3]
    s = m.step(s, Choice("flush", 0))
    assert s.mem[m.labels.index("x")] == 1
    assert Choice("flush", 0, 0) not in m.enabled(s)


def test_pso_per_address_queues():
    src = "var x = 0; var y = 0; thread t { x = 1; y = 2; x = 3; }"
    m = Machine(parse(src), MemoryModel.PSO)
    s = _run(m, [EXEC(0), EXEC(0), EXEC(0)])
    x = m.labels.index("x")
    assert [v for v, _ in s.bufs[0][x]] == [1, 3]
    s = m.step(s, Choice("flush", 0, x))
    assert s.mem[x] == 1


def test_failed_assume_blocks():
    src = "var x = 0; thread t { local r; r = x; assume(r == 1); assert(r == 5); }"
    assert explore(parse(src), MemoryModel.SC).verdict is Verdict.UNREACHABLE


def test_assert_inside_thread():
    src = "var x = 0; thread t { local r; r = x; assert(r == 1); }"
    assert explore(parse(src), MemoryModel.SC).violation


def test_nondeterministic_initial_values():
    src = "var x; thread t { local r; r = x; } assert(r == 0);"
    assert explore(parse(src), MemoryModel.SC).violation
    assert not explore(parse(src), MemoryModel.SC, initial_values=(0,)).violation


def test_checker_waits_for_drain():
    m = Machine(parse(SB), MemoryModel.TSO)
    s = _run(m, [EXEC(0), EXEC(1), EXEC(0), EXEC(1)])
    assert EXEC(2) not in m.enabled(s)


def test_budget():
    with pytest.raises(StateSpaceBudgetExceeded):
        explore(parse(SB), MemoryModel.PSO, budget=3)


def test_loops_rejected():
    with pytest.raises(ValueError):
        Machine(parse("var x; thread t { while (x == 0) { x = 1; } }"), MemoryModel.SC)


def test_wraparound():
    src = "var x = 0; thread t { local r; r = 127; r = r + 1; assert(r < 0); }"
    assert not explore(parse(src), MemoryModel.SC).violation
