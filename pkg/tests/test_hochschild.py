from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import PRES_FILES, load, polynomial
from koszulcy.complexes import check_square_zero
from koszulcy.exact_linear import GF, QQ, rank
from koszulcy.hochschild import (ComparisonMaps, coalgebra_hochschild_model, cobar, cobar_d_squared_zero,
                                 comparison_maps, hochschild_chain_model, hochschild_cochain_model)
from koszulcy.quadratic import AlgebraSlice, make_datum
from koszulcy.smallcx import build_cohomology_complex, small_setup


def maps(D, W=4):
    S = small_setup(D, W)
    return comparison_maps(S.A, S.C, W)


@pytest.fixture(scope="module")
def kxy():
    return maps(polynomial(2, 4))


def test_three_models_agree_for_commutative_plane(kxy):
    cm = kxy
    for b in set(cm.K.family.support()) | set(cm.HA.family.support()) | set(cm.HC.family.support()):
        if b[0] <= 4 and b[1] <= 4:
            assert cm.K.homology(b).dim == cm.HA.homology(b).dim == cm.HC.homology(b).dim, b
    assert all(cm.quasi_iso_report().values())


def test_connes_operators_agree_for_commutative_plane(kxy):
    cm = kxy
    seen = 0
    for b in cm.K.family.support():
        if cm.K.homology(b).dim and cm.K.homology((b[0] + 1, b[1])).dim:
            assert cm.connes_on_K(b) == cm.connes_on_K_from_coalgebra(b)
            seen += 1
    # (i, w) → (i+1, w) with both nonzero: i = 0, w = 1..4 and i = 1, w = 2..4
    assert seen == 7
    # under HKR, B on HH_0 is de Rham d on functions, injective in positive weight
    for w in range(1, 5):
        assert rank(cm.connes_on_K((0, w))) == w + 1


def test_p2_q2_and_mixed_maps(kxy):
    rep = kxy.chain_map_report()
    assert rep == {k: True for k in rep}
    assert {"p₂", "p₂B", "p₂q₂=id"} <= set(rep)


@pytest.mark.parametrize("name", PRES_FILES)
def test_mixed_complex_identities(name):
    D = load(name, 4)
    S = small_setup(D, 4)
    assert hochschild_chain_model(S.A, 4).check_mixed() == (True, True, True)
    assert coalgebra_hochschild_model(S.C, 4).check_mixed() == (True, True, True)
    cm = ComparisonMaps(S.A, S.C, 4)
    assert cm.HO.check_mixed() == (True, True, True)
    assert cobar_d_squared_zero(S.C, 4)
    assert check_square_zero(cobar(S.C, 4).d)


def test_connes_on_polynomial_line_is_derivative():
    """B(x^w) = w x^{w-1}dx up to the normalization of the chosen classes."""
    for F, zero_at in ((QQ, ()), (GF(3), (3,))):
        cm = maps(polynomial(1, 4, F))
        for w in range(1, 5):
            M = cm.connes_on_K((0, w))
            assert M.nrows == M.ncols == 1
            assert (M.nnz() == 0) == (w in zero_at), (F.name, w)


def test_connes_vanishes_in_weight_zero_sector(kxy):
    M = kxy.connes_on_K((0, 0))
    assert M.nnz() == 0


# ---------------------------------------------------------------- cochains


@pytest.mark.parametrize("D", [polynomial(1, 4), polynomial(2, 4), make_datum(["x"], [{"x*x": 1}], weight_cap=4)],
                         ids=["k[x]", "k[x,y]", "dual numbers"])
def test_cochain_model_matches_small_model(D):
    S = small_setup(D, 4)
    kc = build_cohomology_complex(S.A, S.Ad)
    Q = hochschild_cochain_model(S.A, 4)
    checked = 0
    for b in kc.exact_support():
        if Q.exact_bidegree(b):
            assert Q.homology(b).dim == kc.homology(b).dim, b
            checked += 1
    assert checked >= 6


A_LINE = AlgebraSlice(polynomial(1, 6), 6)
Q_LINE = hochschild_cochain_model(A_LINE, 6)


def derivation(s: int):
    """D_s = x^{s+1} d/dx as a 1-cochain, on every input weight in the cap."""
    return {(((0,) * m,), (0,) * (m + s)): QQ(m) for m in range(1, 7) if 0 <= m + s <= 6}


@settings(max_examples=30, deadline=None)
@given(st.integers(-1, 2), st.integers(-1, 2))
def test_bracket_of_derivations_is_witt_algebra(a, b):
    h = Q_LINE.bracket(derivation(a), derivation(b), 1, 1, a, b)
    window = 6 - max(0, a, b, a + b)
    got = {k: v for k, v in h.items() if len(k[0][0]) <= window}
    want = {k: (b - a) * v for k, v in derivation(a + b).items() if len(k[0][0]) <= window and b != a}
    assert got == want


@settings(max_examples=20, deadline=None)
@given(st.integers(-1, 2), st.integers(-1, 2))
def test_cup_of_derivations_is_cocycle_and_graded_commutative_on_homology(a, b):
    f, g = derivation(a), derivation(b)
    fg = Q_LINE.cup(f, g, a, b)
    gf = Q_LINE.cup(g, f, b, a)
    bd = (-2, a + b)
    d_fg = {k: v for k, v in Q_LINE.d.apply(fg).items() if sum(len(x) for x in k[0]) <= 6 - max(0, a + b)}
    assert not d_fg
    if Q_LINE.exact_bidegree(bd):
        h = Q_LINE.homology(bd)
        # classes of degree 1 anticommute
        s = {k: fg.get(k, 0) + gf.get(k, 0) for k in set(fg) | set(gf)}
        assert h.is_boundary({k: v for k, v in s.items() if v})
