from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import PRES_FILES, load, polynomial
from koszulcy.calabi_yau import CYModels, bv_delta, cy_check
from koszulcy.cyclic import (BracketTable, CharacteristicError, MixedTruncation, VARIANTS, connes_sequence_check,
                             cyclic_groups, hcminus_bracket, hh_product, lie_axioms, menichi_bracket,
                             cyclic_bracket_check, truncate, zero_B)
from koszulcy.exact_linear import GF, QQ
from koszulcy.hochschild import ComparisonMaps
from koszulcy.quadratic import QuadraticDatum, make_datum
from koszulcy.smallcx import small_setup


def comparison(D):
    S = small_setup(D, D.weight_cap)
    return ComparisonMaps(S.A, S.C, S.W)


def nonzero(g):
    return {b: r for b, r in g.ranks.items() if r}


def test_ground_field():
    cm = comparison(make_datum([], [], weight_cap=2))
    assert nonzero(cyclic_groups(cm.HA, 3, "minus")) == {(-2 * i, 0): 1 for i in range(4)}
    assert nonzero(cyclic_groups(cm.HA, 3, "cyclic")) == {(2 * i, 0): 1 for i in range(4)}
    assert nonzero(cyclic_groups(cm.HA, 3, "periodic")) == {(2 * i, 0): 1 for i in range(-3, 4)}


def test_polynomial_line():
    """In weight w ≥ 1, B: HH_0 → HH_1 is iso, so HC_0 = HC⁻_1 = k and HP vanishes."""
    cm = comparison(polynomial(1, 3))
    minus, cyc, per = (cyclic_groups(cm.HA, 3, v) for v in VARIANTS)
    for w in (1, 2, 3):
        assert {b: r for b, r in nonzero(minus).items() if b[1] == w} == {(1, w): 1}
        assert {b: r for b, r in nonzero(cyc).items() if b[1] == w} == {(0, w): 1}
        assert not any(b[1] == w for b in nonzero(per))


def test_models_give_same_cyclic_homology():
    cm = comparison(polynomial(2, 3))
    for v in VARIANTS:
        a = cyclic_groups(cm.HA, 2, v).ranks
        c = cyclic_groups(cm.HC, 2, v).ranks
        for b in set(a) & set(c):
            assert a[b] == c[b], (v, b)


def test_truncation_checks():
    cm = comparison(polynomial(1, 2))
    with pytest.raises(ValueError):
        MixedTruncation(cm.HA, 2, "bogus")
    with pytest.raises(ValueError):
        MixedTruncation(cm.HA, -1)
    cmp = comparison(polynomial(1, 2, GF(5)))
    with pytest.raises(CharacteristicError):
        truncate(cmp.HA, 2)
    with pytest.raises(CharacteristicError):
        cyclic_bracket_check(polynomial(1, 2, GF(5)), 2)


def test_uncertified_bidegrees_are_listed():
    cm = comparison(polynomial(1, 2))
    g = cyclic_groups(cm.HA, 1, "minus")
    assert (-4, 0) in g.uncertified and (-4, 0) not in g.ranks
    assert set(g.ranks) <= set(g.truncation.support_certified())


def _zero_b_prediction(mt, K, b):
    N, w = b
    lo, hi = mt.lo, mt.hi
    return sum(K.homology((N + 2 * i, w)).dim for i in range(lo, hi + 1))


@pytest.mark.parametrize("variant", VARIANTS)
@pytest.mark.parametrize("name", ["commutative_plane.pres", "dual_numbers.pres", "free_2.pres"])
def test_zero_B_gives_formal_power_series(name, variant):
    """With B = 0 the truncated complex splits: its homology is HH ⊗ span{u^lo..u^hi}."""
    cm = comparison(load(name, 3))
    g = cyclic_groups(zero_B(cm.K), 2, variant)
    for b, r in g.ranks.items():
        assert r == _zero_b_prediction(g.truncation, cm.K, b), b


@pytest.mark.parametrize("name", PRES_FILES)
def test_connes_sequences(name):
    cm = comparison(load(name, 3))
    rep = connes_sequence_check(cm.HA, 3)
    assert rep.ok, rep.failures
    assert set(rep.identities) == {"B=M∘E", "β∘π★=0", "π★∘β=B"}
    assert rep.nodes > 0


monomial = st.sets(st.integers(0, 3), max_size=4)


@settings(max_examples=12, deadline=None)
@given(monomial)
def test_connes_sequences_for_monomial_algebras(words):
    D = QuadraticDatum(("x", "y"), tuple({k: 1} for k in sorted(words)), None, QQ, 3)
    cm = comparison(D)
    assert connes_sequence_check(cm.HA, 2).ok
    g = cyclic_groups(zero_B(cm.K), 2, "minus")
    for b, r in g.ranks.items():
        assert r == _zero_b_prediction(g.truncation, cm.K, b)


# ---------------------------------------------------------------- brackets


def _brackets(n, W):
    models = CYModels(cy_check(polynomial(n, W), W), W)
    prod = hh_product(models, bv_delta(models, "A"), "A")
    return models.cm.HA, prod


@pytest.fixture(scope="module")
def line_brackets():
    return _brackets(1, 4)


@pytest.fixture(scope="module")
def plane_brackets():
    return _brackets(2, 3)


def test_cyclic_brackets_are_lie(line_brackets):
    H, prod = line_brackets
    rep = lie_axioms(hcminus_bracket(truncate(H, 3, "minus"), prod))
    assert rep.ok and rep.pairs > 20 and rep.triples > 100 and rep.nonzero == 6
    men = lie_axioms(menichi_bracket(truncate(H, 3, "cyclic"), prod))
    assert men.ok and men.pairs > 20


def test_brackets_need_matching_variant(line_brackets):
    H, prod = line_brackets
    with pytest.raises(ValueError):
        hcminus_bracket(truncate(H, 2, "cyclic"), prod)
    with pytest.raises(ValueError):
        menichi_bracket(truncate(H, 2, "minus"), prod)


def test_flipped_entry_breaks_antisymmetry(line_brackets):
    H, prod = line_brackets
    bt = hcminus_bracket(truncate(H, 3, "minus"), prod)
    key = next(k for k, v in sorted(bt.table.items()) if v)
    table = dict(bt.table)
    table[key] = {c: -v for c, v in table[key].items()}
    assert not lie_axioms(BracketTable(bt.name, table, bt.sdeg, bt.field)).ok


@pytest.mark.parametrize("variant", ["minus", "cyclic"])
def test_wrong_sign_degree_breaks_axioms(plane_brackets, variant):
    H, prod = plane_brackets
    f = hcminus_bracket if variant == "minus" else menichi_bracket
    bt = f(truncate(H, 3, variant), prod)
    assert lie_axioms(bt).ok
    wrong = {b: s + 1 for b, s in bt.sdeg.items()}
    assert not lie_axioms(BracketTable(bt.name, bt.table, wrong, bt.field)).ok


def test_product_unit(plane_brackets):
    H, prod = plane_brackets
    # the BV unit sits at (0, 0), so on HH it sits at (n, n)
    hb = prod.hh_bidegree((0, 0))
    assert hb == (2, 2) and prod.known(hb)
    assert prod.from_hh[(0, 0)].nrows == 1
    u = prod.mul(hb, {0: 1}, hb, {0: 1})
    assert u is not None and u[0] == hb and u[1]
    c = u[1][0]
    seen = 0
    for b in [(2, 3), (3, 3), (4, 4), (3, 4)]:
        if not prod.known(b):
            continue
        for i in range(H.homology(b).dim):
            tb, v = prod.mul(hb, {0: 1}, b, {i: 1})
            assert tb == b and v == {i: c}
            seen += 1
    assert seen > 0


@pytest.mark.parametrize("D, W", [(polynomial(1, 4), 4), (polynomial(2, 3), 3)], ids=["k[x]", "k[x,y]"])
def test_cyclic_brackets_agree(D, W):
    rep = cyclic_bracket_check(D, W, U=3)
    assert rep.ok, rep.failures
    assert rep.compared > 0 and rep.nonzero > 0
    assert all(r.ok for r in rep.lie.values())
    assert rep.summary().startswith("cyclic-lie: PASS")
