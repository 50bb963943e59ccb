from __future__ import annotations

from math import comb

import pytest
from sympy import totient

from conftest import PRES_FILES, dual_numbers, free, load, polynomial
from koszulcy.exact_linear import GF
from koszulcy.hochschild import bar, hochschild_chain_model
from koszulcy.smallcx import (build_bimodule_resolution, build_cohomology_complex, build_koszul_complex,
                              cup_table, small_setup)


def hh_dims(D, W):
    S = small_setup(D, W)
    K = build_koszul_complex(S.A, S.C)
    return {b: K.homology(b).dim for b in K.family.support()}


def necklaces(n: int, w: int) -> int:
    return sum(int(totient(d)) * n ** (w // d) for d in range(1, w + 1) if w % d == 0) // w


@pytest.mark.parametrize("n", [1, 2, 3])
def test_polynomial_rings_match_hkr(n):
    """HH_i(k[V]) ≅ k[V] ⊗ Λ^i V, so dim HH_{i,w} = C(n, i) · dim k[V]_{w-i}."""
    W = 5 if n < 3 else 4
    got = hh_dims(polynomial(n, W), W)
    for (i, w), h in got.items():
        want = comb(n, i) * comb(w - i + n - 1, n - 1) if 0 <= i <= w else 0
        assert h == want, (i, w)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_free_algebras_count_necklaces(n):
    W = 5 if n < 3 else 4
    got = hh_dims(free(n, W), W)
    for w in range(1, W + 1):
        assert got.get((0, w), 0) == got.get((1, w), 0) == necklaces(n, w)
    assert all(i in (0, 1) for (i, w), h in got.items() if h)


def test_hkr_over_prime_field():
    got = hh_dims(polynomial(2, 4, GF(2)), 4)
    assert got == hh_dims(polynomial(2, 4), 4)


@pytest.mark.parametrize("name", PRES_FILES)
def test_differentials_square_to_zero(name):
    D = load(name, 5)
    S = small_setup(D, 5)
    assert build_koszul_complex(S.A, S.C).check_square_zero()
    kc = build_cohomology_complex(S.A, S.Ad)
    assert kc.check_square_zero()
    assert kc.check_derivation()
    br = build_bimodule_resolution(S.A, S.C)
    assert br.check_square_zero()


@pytest.mark.parametrize("name", PRES_FILES)
def test_small_model_matches_bar_model(name):
    """H(K(A)) and H(A⊗B(A)) agree at every bidegree up to weight 4."""
    D = load(name, 4)
    S = small_setup(D, 4)
    K = build_koszul_complex(S.A, S.C)
    HA = hochschild_chain_model(S.A, 4)
    for b in set(K.family.support()) | set(HA.family.support()):
        assert K.homology(b).dim == HA.homology(b).dim, b


@pytest.mark.parametrize("name", PRES_FILES)
def test_bar_homology_is_koszul_dual_coalgebra(name):
    D = load(name, 4)
    S = small_setup(D, 4)
    B = bar(S.A, 4)
    for b in B.family.support():
        want = S.C.dim(b[1]) if b[0] == b[1] else 0
        assert B.homology(b).dim == want, b


def test_bimodule_resolution_exact_for_koszul_data():
    for D in (polynomial(2, 4), dual_numbers(4), free(2, 4)):
        S = small_setup(D, 4)
        ok, where = build_bimodule_resolution(S.A, S.C).exactness()
        assert ok, where


def test_cohomology_of_polynomial_ring_is_polyvector_fields():
    """HH^•(k[x]) = k[x] ⊕ k[x]∂_x: one class per weight in each of cohomological degrees 0 and 1."""
    S = small_setup(polynomial(1, 4), 4)
    kc = build_cohomology_complex(S.A, S.Ad)
    dims = {b: kc.homology(b).dim for b in kc.exact_support()}
    assert {b for b, h in dims.items() if h} == {(0, w) for w in range(4)} | {(-1, w) for w in range(-1, 3)}
    assert all(h == 1 for h in dims.values() if h)


def test_cup_product_on_polynomial_ring_is_graded_commutative():
    S = small_setup(polynomial(2, 4), 4)
    kc = build_cohomology_complex(S.A, S.Ad)
    bs = [b for b in kc.exact_support() if kc.homology(b).dim and b[1] <= 1]
    tab = cup_table(kc, bs)
    for (bu, i, bv, j), (bw, vec) in tab.items():
        other = tab.get((bv, j, bu, i))
        if other is None:
            continue
        sign = -1 if (bu[0] * bv[0]) % 2 else 1
        assert other[0] == bw
        assert list(other[1]) == [sign * c for c in vec]
