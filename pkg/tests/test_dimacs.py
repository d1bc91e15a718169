import io
import sys
from pathlib import Path

import pytest

from wmbmc.cnf import Cnf
from wmbmc.dimacs import (dumps_dimacs, export_dimacs, import_external_model, parse_dimacs,
                          read_dimacs, run_external)
from wmbmc.errors import MalformedCnf, ModelRejected, SolverBackendError
from wmbmc.solver import Status

EXTERNAL = f"{sys.executable} {Path(__file__).with_name('external_solver.py')}"


def _cnf():
    return Cnf(3, [[1, 2], [-1, 3], [-2, -3]], {"a": (0, 2), "b": (2, 3)}, {1: "p", 2: "q"})


def test_round_trip(tmp_path):
    path = tmp_path / "f.cnf"
    export_dimacs(_cnf(), path)
    back = read_dimacs(path)
    assert back.clauses == _cnf().clauses and back.num_vars == 3
    assert back.legend == {1: "p", 2: "q"} and back.families == _cnf().families
    assert "p cnf 3 3" in path.read_text()


def test_plain_text():
    text = dumps_dimacs(_cnf(), legend=False)
    assert not text.startswith("c")
    assert parse_dimacs(text).clauses == _cnf().clauses


@pytest.mark.parametrize("text", [
    "1 2 0\n",
    "p cnf 2 1\n1 3 0\n",
    "p cnf 2 2\n1 2 0\n",
    "p cnf 2 1\n1 x 0\n",
    "p dnf 2 1\n1 0\n",
])
def test_malformed(text):
    with pytest.raises(MalformedCnf):
        parse_dimacs(text)


def test_accepts_hand_written_model():
    res = import_external_model(io.StringIO("s SATISFIABLE\nv 1 -2 3 0\n"), _cnf())
    assert res.status is Status.SAT and res.model == [False, True, False, True]


def test_model_from_file(tmp_path):
    p = tmp_path / "m.txt"
    p.write_text("s SATISFIABLE\nv -1 2\nv -3 0\n")
    assert import_external_model(p, _cnf()).status is Status.SAT


def test_missing_variable():
    with pytest.raises(ModelRejected):
        import_external_model(io.StringIO("s SATISFIABLE\nv 1 -2 0\n"), _cnf())


def test_falsifying_model():
    with pytest.raises(ModelRejected):
        import_external_model(io.StringIO("s SATISFIABLE\nv 1 2 3 0\n"), _cnf())


def test_unsat_answer():
    assert import_external_model(io.StringIO("s UNSATISFIABLE\n"), _cnf()).status is Status.UNSAT


def test_no_status():
    with pytest.raises(SolverBackendError):
        import_external_model(io.StringIO("v 1 0\n"), _cnf())


def test_external_solver_process():
    res = run_external(_cnf(), EXTERNAL, timeout=60)
    assert res.status is Status.SAT
    unsat = Cnf(1, [[1], [-1]])
    assert run_external(unsat, EXTERNAL, timeout=60).status is Status.UNSAT


def test_broken_command():
    with pytest.raises(SolverBackendError):
        run_external(_cnf(), "/nonexistent/solver")
    with pytest.raises(SolverBackendError):
        run_external(_cnf(), f"{sys.executable} -c 'import sys; sys.exit(1)'")
