from __future__ import annotations

import sys
from pathlib import Path

import pytest

from koszulcy.quadratic import load_presentation, make_datum

DATA = Path(__file__).resolve().parent.parent / "examples" / "data"


def polynomial(n: int, W: int = 4, field=None):
    g = ["x", "y", "z", "w"][:n]
    rels = [{f"{g[i]}*{g[j]}": 1, f"{g[j]}*{g[i]}": -1} for i in range(n) for j in range(i + 1, n)]
    kw = {} if field is None else {"field": field}
    return make_datum(g, rels, weight_cap=W, **kw)


def free(n: int, W: int = 4):
    return make_datum(["x", "y", "z"][:n], [], weight_cap=W)


def dual_numbers(W: int = 4):
    return make_datum(["x"], [{"x*x": 1}], weight_cap=W)


PRES_FILES = sorted(p.name for p in DATA.glob("*.pres"))
LIE_FILES = sorted(p.name for p in DATA.glob("*.lie"))


@pytest.fixture
def data_dir() -> Path:
    return DATA


def load(name: str, W: int | None = None):
    d = load_presentation(DATA / name)
    return d if W is None else d.with_cap(W)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
