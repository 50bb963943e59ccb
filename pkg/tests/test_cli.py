from __future__ import annotations

import json
from dataclasses import replace

import pytest
from click.testing import CliRunner

from conftest import DATA
from koszulcy import calabi_yau
from koszulcy.cli import main


def invoke(*args):
    return CliRunner().invoke(main, [str(a) for a in args], catch_exceptions=False)


def report(*args):
    r = invoke("--format", "json", *args)
    return r.exit_code, json.loads(r.output)


def test_build_dimensions_of_the_plane():
    code, rep = report("build", DATA / "commutative_plane.pres", "--weight-cap", 4)
    assert code == 0 and rep["ok"]
    assert rep["results"]["A"] == [1, 2, 3, 4, 5]
    assert rep["results"]["A^!"] == rep["results"]["A^¡"] == [1, 2, 1, 0, 0]


def test_options_before_and_after_the_subcommand_agree():
    a = invoke("--weight-cap", 3, "build", DATA / "free_2.pres").output
    b = invoke("build", DATA / "free_2.pres", "--weight-cap", 3).output
    assert a == b and "A: [1, 2, 4, 8]" in a
    # the subcommand wins when both are given
    c = invoke("--weight-cap", 5, "build", DATA / "free_2.pres", "--weight-cap", 3).output
    assert c == a


def test_weight_cap_zero_is_the_ground_field():
    code, rep = report("build", DATA / "free_3.pres", "--weight-cap", 0)
    assert code == 0 and rep["results"]["A"] == [1]


def test_koszul():
    code, rep = report("--weight-cap", 4, "koszul", DATA / "commutative_plane.pres")
    assert code == 0
    assert rep["results"]["koszul_up_to_W"] and rep["results"]["hilbert_product"]


def test_hh_comparison_verdict():
    r = invoke("--weight-cap", 3, "hh", DATA / "commutative_plane.pres")
    assert r.exit_code == 0
    assert "hochschild-comparison: PASS at weights ≤ 3" in r.output


def test_verify_main_passes_on_the_plane():
    r = invoke("--weight-cap", 4, "verify-main", DATA / "commutative_plane.pres")
    assert r.exit_code == 0, r.output
    assert r.output.rstrip().endswith("main-theorem: PASS at all bidegrees ≤ (4,4)")


def test_cy_certificate_and_not_cyclic_are_both_clean():
    code, rep = report("--weight-cap", 3, "cy", DATA / "polynomial_3.pres")
    assert code == 0 and rep["results"]["is_cy"] and rep["results"]["n"] == 3
    code, rep = report("--weight-cap", 3, "cy", DATA / "free_2.pres")
    assert code == 0 and rep["verdicts"][-1].startswith("NotCyclic")


def test_lie_witness():
    r = invoke("lie", DATA / "nonabelian_2.lie")
    assert r.exit_code == 0
    assert "NotCyclic (unimodularity fails: Tr(ad_y) = −1)" in r.output
    code, rep = report("cy", DATA / "heisenberg.lie")
    assert code == 0 and "Calabi-Yau of dimension 3" in rep["verdicts"]


def test_lie_random_check_is_seeded():
    a = invoke("--seed", 7, "lie", DATA / "abelian_3.lie", "--random", 4).output
    b = invoke("--seed", 7, "lie", DATA / "abelian_3.lie", "--random", 4).output
    assert a == b


def test_emit_presentation_roundtrips(tmp_path):
    out = tmp_path / "ug.pres"
    r = invoke("--weight-cap", 3, "lie", DATA / "heisenberg.lie", "--emit-presentation", out)
    assert r.exit_code == 0 and out.exists()
    code, rep = report("--weight-cap", 3, "build", out)
    # U(h) has the Hilbert series of k[x,y,z]
    assert code == 0 and rep["results"]["A"] == [1, 3, 6, 10]
    assert rep["results"]["linear_quadratic"]


def test_cyclic_on_the_line():
    r = invoke("--weight-cap", 3, "--u-order", 2, "cyclic", DATA / "polynomial_1.pres")
    assert r.exit_code == 0, r.output
    assert "cyclic-lie: PASS" in r.output


@pytest.mark.parametrize("fmt", ["text", "json", "csv"])
def test_cache_hit_reproduces_the_report(tmp_path, fmt):
    args = ("--cache-dir", tmp_path, "--format", fmt, "--weight-cap", 3, "bv", DATA / "commutative_plane.pres")
    first = invoke(*args)
    assert first.exit_code == 0 and len(list(tmp_path.glob("*.json"))) == 1
    second = invoke(*args)
    fresh = invoke(*args[2:])
    assert first.output == second.output == fresh.output


def test_cache_key_separates_configs(tmp_path):
    for W in (2, 3):
        invoke("--cache-dir", tmp_path, "--weight-cap", W, "build", DATA / "commutative_plane.pres")
    invoke("--cache-dir", tmp_path, "--weight-cap", 2, "--field", "fp:3", "build", DATA / "commutative_plane.pres")
    assert len(list(tmp_path.glob("*.json"))) == 3


def test_csv_has_one_row_per_table_entry():
    r = invoke("--format", "csv", "--weight-cap", 2, "build", DATA / "polynomial_1.pres")
    lines = r.output.strip().splitlines()
    assert lines[0] == "table,i,j,dim"
    assert "A,0,2,1" in lines


# ---------------------------------------------------------------- exit codes


def test_parse_error_exits_2(tmp_path):
    bad = tmp_path / "bad.pres"
    bad.write_text("generators x y\nrelations\n  x*q\n", encoding="utf-8")
    r = invoke("build", bad)
    assert r.exit_code == 2 and "parse error" in r.output


def test_missing_file_and_bad_field_exit_2():
    assert invoke("build", DATA / "nope.pres").exit_code == 2
    assert invoke("--field", "fp:4", "build", DATA / "free_2.pres").exit_code == 2
    assert invoke("build", DATA / "free_2.pres", "--field", "r").exit_code == 2


def test_field_override_conflict(tmp_path):
    p = tmp_path / "f.pres"
    head, rest = (DATA / "commutative_plane.pres").read_text(encoding="utf-8").split("\n", 1)
    p.write_text(f"{head}\nfield fp:3\n{rest}", encoding="utf-8")
    ok = invoke("--field", "fp:3", "build", p)
    assert ok.exit_code == 0, ok.output
    r = invoke("--field", "fp:5", "build", p)
    assert r.exit_code == 2


def test_stage_preconditions_exit_2():
    assert invoke("--weight-cap", 3, "bv", DATA / "free_2.pres").exit_code == 2
    assert invoke("--weight-cap", 2, "--field", "fp:5", "cyclic", DATA / "polynomial_1.pres").exit_code == 2
    assert invoke("build", DATA / "heisenberg.lie").exit_code == 2


def test_verification_failure_exits_1(monkeypatch):
    real = calabi_yau.main_theorem_check

    def broken(*a, **k):
        rep = real(*a, **k)
        return replace(rep, ok=False, checks={**rep.checks, "injected": False}, failures=["injected"])

    monkeypatch.setattr(calabi_yau, "main_theorem_check", broken)
    r = invoke("--weight-cap", 2, "--format", "json", "verify-main", DATA / "polynomial_1.pres")
    assert r.exit_code == 1
    assert json.loads(r.output)["ok"] is False
