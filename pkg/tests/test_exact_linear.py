from __future__ import annotations

from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from koszulcy.exact_linear import (GF, QQ, DimensionMismatch, NoSolution, SparseMatrix, Subspace, annihilator,
                                   kernel_basis, parse_field, rank, solve, subspace_intersection, subspace_sum)

small = st.integers(-3, 3)


def dense(rows: int, cols: int):
    return st.lists(st.lists(small, min_size=cols, max_size=cols), min_size=rows, max_size=rows)


matrices = st.integers(1, 5).flatmap(lambda r: st.integers(1, 5).flatmap(lambda c: dense(r, c)))


def rank_mod_p(rows, p):
    """Plain dense elimination mod p, used as an oracle."""
    m = [[x % p for x in r] for r in rows]
    rk, col, ncols = 0, 0, len(m[0]) if m else 0
    while rk < len(m) and col < ncols:
        piv = next((i for i in range(rk, len(m)) if m[i][col]), None)
        if piv is None:
            col += 1
            continue
        m[rk], m[piv] = m[piv], m[rk]
        inv = pow(m[rk][col], -1, p)
        m[rk] = [x * inv % p for x in m[rk]]
        for i in range(len(m)):
            if i != rk and m[i][col]:
                f = m[i][col]
                m[i] = [(a - f * b) % p for a, b in zip(m[i], m[rk])]
        rk += 1
        col += 1
    return rk


@given(matrices)
def test_rank_matches_sympy(rows):
    assert rank(SparseMatrix.from_dense(rows)) == sympy.Matrix(rows).rank()


@given(matrices, st.sampled_from([2, 3, 5, 7]))
def test_rank_mod_p_matches_dense_oracle(rows, p):
    assert rank(SparseMatrix.from_dense(rows, GF(p))) == rank_mod_p(rows, p)


@given(matrices)
def test_kernel_is_kernel_and_rank_nullity(rows):
    m = SparseMatrix.from_dense(rows)
    ker = kernel_basis(m)
    assert ker.dim + rank(m) == m.ncols
    for v in ker.basis:
        assert not m.apply(v)


@given(matrices, st.lists(small, min_size=5, max_size=5))
def test_solve_consistent_systems(rows, xs):
    m = SparseMatrix.from_dense(rows)
    x = {i: QQ(c) for i, c in enumerate(xs[: m.ncols]) if c}
    t = m.apply(x)
    sol = solve(m, t)
    assert m.apply({i: c for i, c in enumerate(sol) if c}) == t


def test_solve_inconsistent_raises():
    m = SparseMatrix.from_dense([[1, 1], [2, 2]])
    with pytest.raises(NoSolution):
        solve(m, [1, 0])


pairs = st.tuples(st.integers(1, 4), st.integers(1, 4), st.integers(1, 4)).flatmap(
    lambda s: st.tuples(dense(s[0], s[1]), dense(s[1], s[2])))


@given(pairs)
def test_product_matches_sympy(ab):
    a, b = ab
    got = SparseMatrix.from_dense(a) @ SparseMatrix.from_dense(b)
    assert got.to_dense() == (sympy.Matrix(a) * sympy.Matrix(b)).tolist()


def test_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        SparseMatrix.from_dense([[1, 2]]) @ SparseMatrix.from_dense([[1, 2]])


def test_prime_field_arithmetic():
    F = GF(7)
    a, b = F(3), F(5)
    assert a * b == F(1)
    assert (a / b) * b == a
    assert F(Fraction(1, 2)) * 2 == F(1)
    assert F.characteristic == 7 and QQ.characteristic == 0
    with pytest.raises(ValueError):
        GF(9)


def test_parse_field():
    assert parse_field("q") == QQ
    assert parse_field("fp:11") == GF(11)
    for bad in ("fp:1", "fp:12", "r", "fp:x"):
        with pytest.raises(ValueError):
            parse_field(bad)


@settings(max_examples=40)
@given(matrices, matrices)
def test_subspace_sum_and_intersection_dimensions(a, b):
    n = max(len(a[0]), len(b[0]))
    U = Subspace(n, [{j: QQ(x) for j, x in enumerate(r) if x} for r in a])
    V = Subspace(n, [{j: QQ(x) for j, x in enumerate(r) if x} for r in b])
    assert subspace_sum(U, V).dim + subspace_intersection(U, V).dim == U.dim + V.dim
    I = subspace_intersection(U, V)
    assert U.contains_subspace(I) and V.contains_subspace(I)
    assert annihilator(U).dim == n - U.dim
