from __future__ import annotations

import runpy
from pathlib import Path

import pytest

WALKTHROUGHS = sorted((Path(__file__).resolve().parent.parent / "examples" / "walkthroughs").glob("*.py"))


@pytest.mark.parametrize("path", WALKTHROUGHS, ids=lambda p: p.stem)
def test_walkthrough_runs(path, capsys):
    runpy.run_path(str(path), run_name="__main__")
    out = capsys.readouterr().out
    assert "Traceback" not in out and out.strip()
