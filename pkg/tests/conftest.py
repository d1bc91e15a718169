import sys
from pathlib import Path

import pytest

from wmbmc.corpus import PROGRAM_DIR

HERE = Path(__file__).parent
sys.path.insert(0, str(HERE))

SB = """
var x = 0;
var y = 0;
thread t1 { local r1; x = 1; r1 = y; }
thread t2 { local r2; y = 1; r2 = x; }
assert(r1 == 1 || r2 == 1);
"""

MP = """
var x = 0;
var y = 0;
thread t1 { x = 1; y = 1; }
thread t2 { local r1; local r2; r1 = y; r2 = x; }
assert(r1 != 1 || r2 == 1);
"""

MP_FENCE = MP.replace("x = 1; y = 1;", "x = 1; fence; y = 1;")


def corpus_file(name: str) -> Path:
    return PROGRAM_DIR / f"{name}.wm"


@pytest.fixture
def sb_source():
    return SB


@pytest.fixture
def mp_source():
    return MP


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, detail = results[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
