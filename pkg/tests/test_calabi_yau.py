from __future__ import annotations

from math import comb

import pytest
from conftest import dual_numbers, free, polynomial
from koszulcy.calabi_yau import (CYModels, NotCyclic, bv_delta, compare_brackets, cy_check, main_theorem_check,
                                 pd_A, pd_dual, second_order_check)
from koszulcy.exact_linear import GF
from koszulcy.hochschild import GerstenhaberTransport, gerstenhaber_axioms, hochschild_cochain_model
from koszulcy.quadratic import make_datum


@pytest.fixture(scope="module")
def plane():
    cert = cy_check(polynomial(2, 4), 4)
    return CYModels(cert, 4)


@pytest.fixture(scope="module")
def plane_bv(plane):
    return {side: bv_delta(plane, side) for side in ("A", "A!")}


@pytest.mark.parametrize("n", [1, 2, 3])
def test_polynomial_duals_have_cyclic_pairing(n):
    cert = cy_check(polynomial(n, 4), 4)
    assert cert.is_cy and cert.n == n
    assert cert.pairing.is_nondegenerate() and cert.pairing.is_cyclic()
    assert cert.summary() == f"Calabi-Yau of dimension {n}"
    assert cert.as_dict()["pairing"]["degree"] == n


def test_polynomial_over_prime_field():
    cert = cy_check(polynomial(2, 3, GF(3)), 3)
    assert cert.is_cy and cert.n == 2


@pytest.mark.parametrize("D, kind", [(free(2, 4), "dimension"), (free(3, 3), "dimension"),
                                     (dual_numbers(4), "unbounded")], ids=["free2", "free3", "dual numbers"])
def test_not_cyclic_verdicts(D, kind):
    cert = cy_check(D, D.weight_cap)
    assert not cert.is_cy
    assert isinstance(cert.verdict, NotCyclic) and cert.verdict.kind == kind
    assert cert.summary().startswith("NotCyclic")


def test_not_koszul_is_reported_before_pairing_search():
    from test_quadratic import NON_KOSZUL

    cert = cy_check(NON_KOSZUL, 5)
    assert not cert.is_cy and cert.verdict.kind == "not-koszul"


@pytest.mark.parametrize("q", [2, -1])
def test_quantum_planes_are_not_cyclic(q):
    """For xy = q·yx the dual has y*x* = −q·x*y*, and graded cyclicity forces ω(x*y*) = q·ω(x*y*)."""
    cert = cy_check(make_datum(["x", "y"], [{"x*y": 1, "y*x": -q}], weight_cap=4), 4)
    assert not cert.is_cy and cert.n == 2


def test_anticommutative_plane_is_cyclic_in_characteristic_2():
    cert = cy_check(make_datum(["x", "y"], [{"x*y": 1, "y*x": 1}], field=GF(2), weight_cap=3), 3)
    assert cert.is_cy and cert.n == 2


# ---------------------------------------------------------------- duality


def test_poincare_duality_dimensions_and_invertibility(plane):
    rep = pd_A(plane)
    assert rep.ok, rep.failures
    for (i, j), (d1, d2) in rep.dims.items():
        assert d1 == d2
    # HH^{p} of k[x,y] in weight shift s is Λ^p V ⊗ A_{s+p}
    for (i, j), (d1, _) in rep.dims.items():
        p, s = -i, j
        assert d1 == comb(2, p) * (s + p + 1 if s + p >= 0 else 0), (i, j)
    assert pd_dual(plane).ok


def test_chain_maps_of_models(plane):
    assert all(plane.chain_map_report().values())


# ---------------------------------------------------------------- BV


def test_delta_on_polynomial_line_is_minus_divergence():
    M = CYModels(cy_check(polynomial(1, 4), 4), 4)
    bv = bv_delta(M, "A")
    assert M.kc.homology((-1, 0)).reps == [{((0,), (0,)): 1}]
    for s in range(0, 3):
        # Δ(x^{s+1} ⊗ x*) = −(s+1) x^s
        assert bv.delta[(-1, s)].to_dense() == [[-(s + 1)]]


@pytest.mark.parametrize("side", ["A", "A!"])
def test_bv_axioms_plane(plane_bv, side):
    bv = plane_bv[side]
    assert bv.delta_squared_zero()
    rep = second_order_check(bv)
    assert rep.ok and rep.checked > 1000 and rep.max_residual == 0


def test_bv_axioms_three_space():
    M = CYModels(cy_check(polynomial(3, 3), 3), 3)
    for side in ("A", "A!"):
        bv = bv_delta(M, side)
        assert bv.delta_squared_zero()
        assert second_order_check(bv).ok


@pytest.mark.parametrize("b", [(-2, 0), (-1, 0), (-1, 2)])
def test_mutated_delta_fails_second_order(plane_bv, b):
    mut = plane_bv["A"].mutated(b, 0, 0, 1)
    assert not second_order_check(mut).ok


@pytest.mark.parametrize("side", ["A", "A!"])
def test_bracket_is_graded_antisymmetric(plane_bv, side):
    bv = plane_bv[side]
    checked = 0
    for x in bv.basis():
        for y in bv.basis():
            dx, dy = bv.degree(x[0]), bv.degree(y[0])
            a = bv.bracket({x: 1}, {y: 1}, dx)
            b = bv.bracket({y: 1}, {x: 1}, dy)
            if a is None or b is None:
                continue
            s = -1 if ((dx - 1) * (dy - 1)) % 2 else 1
            assert a == {k: -s * v for k, v in b.items()}
            checked += 1
    assert checked > 100


# ---------------------------------------------------------------- Gerstenhaber


def test_bv_bracket_matches_cochain_bracket(plane, plane_bv):
    Q = hochschild_cochain_model(plane.kc.A, plane.W)
    T = GerstenhaberTransport(Q, plane.kc, 0)
    compared, bad = compare_brackets(plane_bv["A"], T)
    assert compared > 50 and not bad
    rep = gerstenhaber_axioms(T)
    assert rep.ok and rep.checked > 0, rep.failures


# ---------------------------------------------------------------- comparison of the two BV algebras


def test_main_comparison_plane(plane):
    rep = main_theorem_check(plane.cert.datum, 4, models=plane)
    assert rep.ok, rep.failures
    assert rep.summary() == "main-theorem: PASS at all bidegrees ≤ (4,4)"
    assert all(rep.checks.values()) and "square cap" in rep.checks


def test_main_comparison_three_space():
    rep = main_theorem_check(polynomial(3, 3), 3)
    assert rep.ok, rep.failures


def test_main_comparison_rejects_non_cy():
    rep = main_theorem_check(free(2, 3), 3)
    assert not rep.ok and rep.checks == {"cy": False}
