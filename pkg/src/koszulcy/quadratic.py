"""Quadratic data and their Koszul dual objects, truncated by weight.

Words in the generators are tuples of generator indices.  A word of length
n is identified with an index of V^{⊗n} written in base d with the first
letter most significant, so index order is lexicographic order.

Weight is the only grading that matters for truncation: every relation is
homogeneous of weight two (or weight two plus a weight-one linear part that
lowers weight by exactly one), so each weight slice computed here is exact.

Sign conventions
----------------
The pairing between A^! and A^¡ is the naive word pairing ``<x, c> =
c[x]`` with no Koszul sign.  With it, ``<xy, c> = sum <x, c'><y, c''>``
holds on the nose.  All signs needed elsewhere are introduced by the
complexes that use these objects, never here.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .exact_linear import (
    QQ,
    SparseMatrix,
    Solver,
    Subspace,
    annihilator,
    parse_field,
    quotient_from_span,
    rref_rows,
    subspace_intersection,
    vaxpy,
)

Word = Tuple[int, ...]


def word_index(w: Sequence[int], d: int) -> int:
    i = 0
    for a in w:
        i = i * d + a
    return i


def index_word(i: int, n: int, d: int) -> Word:
    out = [0] * n
    for k in range(n - 1, -1, -1):
        i, out[k] = divmod(i, d)
    return tuple(out)


def words(n: int, d: int) -> Iterable[Word]:
    return product(range(d), repeat=n)


class PresentationError(ValueError):
    """Malformed datum or presentation file."""


class LinearQuadraticError(ValueError):
    """A linear part that violates the linear-quadratic compatibility condition."""


# ---------------------------------------------------------------- the datum


@dataclass(frozen=True)
class QuadraticDatum:
    """Generators, quadratic relations and an optional linear part.

    ``relations`` are sparse vectors in V⊗V indexed by ``i*d + j``.  When
    ``linear`` is given it has one vector in V per relation row: the row X
    stands for the inhomogeneous relation X - phi(X).
    """

    generators: Tuple[str, ...]
    relations: Tuple[Dict[int, object], ...] = ()
    linear: Optional[Tuple[Dict[int, object], ...]] = None
    field: object = QQ
    weight_cap: int = 4

    def __post_init__(self):
        gens = tuple(self.generators)
        object.__setattr__(self, "generators", gens)
        if len(set(gens)) != len(gens):
            raise PresentationError("generator names must be distinct")
        for g in gens:
            if not _NAME.fullmatch(g):
                raise PresentationError(f"bad generator name {g!r}")
        d = len(gens)
        F = self.field
        rels = []
        for r in self.relations:
            row = {}
            for k, c in r.items():
                if not 0 <= k < d * d:
                    raise PresentationError(f"relation index {k} outside V⊗V")
                c = F(c)
                if c:
                    row[int(k)] = c
            rels.append(row)
        object.__setattr__(self, "relations", tuple(rels))
        if self.linear is not None:
            if len(self.linear) != len(rels):
                raise PresentationError("one linear part per relation row is required")
            lin = []
            for v in self.linear:
                row = {}
                for k, c in v.items():
                    if not 0 <= k < d:
                        raise PresentationError(f"linear part index {k} outside V")
                    c = F(c)
                    if c:
                        row[int(k)] = c
                lin.append(row)
            object.__setattr__(self, "linear", tuple(lin))
            self._check_phi_well_defined()
        if self.weight_cap < 0:
            raise PresentationError("weight cap must be nonnegative")

    def __hash__(self):
        return hash((self.generators, self.field.name, len(self.relations), self.weight_cap))

    @property
    def d(self) -> int:
        return len(self.generators)

    @property
    def is_linear_quadratic(self) -> bool:
        return self.linear is not None and any(self.linear)

    @cached_property
    def relation_space(self) -> Subspace:
        """qR as an RREF subspace of V⊗V."""
        return Subspace(self.d ** 2, self.relations, field=self.field)

    def _check_phi_well_defined(self) -> None:
        # a combination of rows that vanishes must have vanishing linear part
        d = self.d
        cols = [dict(r) for r in self.relations]
        m = SparseMatrix.from_columns(d * d, cols, self.field)
        from .exact_linear import kernel_basis

        for k in kernel_basis(m).basis:
            acc: dict = {}
            for i, c in k.items():
                vaxpy(acc, self.linear[i], c)
            if acc:
                raise PresentationError("linear part is not well defined on the span of the relations")

    @cached_property
    def phi_on_basis(self) -> List[Dict[int, object]]:
        """phi evaluated on the RREF basis of qR (empty dicts when absent)."""
        R = self.relation_space
        if not self.linear:
            return [{} for _ in R.basis]
        d = self.d
        m = SparseMatrix.from_columns(d * d, [dict(r) for r in self.relations], self.field)
        sol = Solver(m)
        out = []
        for b in R.basis:
            x = sol.solve(b)
            acc: dict = {}
            for i, c in x.items():
                vaxpy(acc, self.linear[i], c)
            out.append(acc)
        return out

    def phi_extended(self) -> Dict[int, Dict[int, object]]:
        """A linear map V⊗V -> V restricting to phi on qR.

        It is phi on each RREF basis row at its pivot word and zero on the
        non-pivot words; any extension gives the same d_phi.
        """
        R = self.relation_space
        return {p: v for p, v in zip(R.pivots, self.phi_on_basis) if v}

    def quadratic_part(self) -> "QuadraticDatum":
        return QuadraticDatum(self.generators, self.relations, None, self.field, self.weight_cap)

    def word_name(self, w: Word, sep: str = "*") -> str:
        return sep.join(self.generators[a] for a in w) if w else "1"

    def with_cap(self, W: int) -> "QuadraticDatum":
        return QuadraticDatum(self.generators, self.relations, self.linear, self.field, W)

    def dual_datum(self) -> "QuadraticDatum":
        """(V*, R^⊥) with the dual basis of V*; generator names get a ``_`` suffix."""
        perp = annihilator(self.relation_space)
        names = tuple(g[:-1] if g.endswith("_") else g + "_" for g in self.generators)
        return QuadraticDatum(names, tuple(perp.basis), None, self.field, self.weight_cap)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, QuadraticDatum)
            and self.generators == other.generators
            and self.relations == other.relations
            and self.linear == other.linear
            and self.field.name == other.field.name
            and self.weight_cap == other.weight_cap
        )


_NAME = re.compile(r"[A-Za-z][A-Za-z0-9_']*")


def make_datum(generators: Sequence[str], relations: Iterable[Mapping[str, object]] = (),
               linear: Optional[Iterable[Mapping[str, object]]] = None, field=QQ,
               weight_cap: int = 4) -> QuadraticDatum:
    """Build a datum from relations keyed by two-letter words such as ``"x*y"``."""
    gens = tuple(generators)
    pos = {g: i for i, g in enumerate(gens)}
    d = len(gens)

    def word(key: str) -> Word:
        try:
            return tuple(pos[p] for p in key.split("*"))
        except KeyError as e:
            raise PresentationError(f"unknown generator in {key!r}") from e

    rels = []
    for r in relations:
        row = {}
        for key, c in r.items():
            w = word(key)
            if len(w) != 2:
                raise PresentationError(f"relation term {key!r} is not quadratic")
            row[word_index(w, d)] = field(c) + row.get(word_index(w, d), field.zero)
        rels.append(row)
    lin = None
    if linear is not None:
        lin = []
        for v in linear:
            row = {}
            for key, c in v.items():
                w = word(key)
                if len(w) != 1:
                    raise PresentationError(f"linear term {key!r} is not a generator")
                row[w[0]] = field(c)
            lin.append(row)
        lin = tuple(lin)
    return QuadraticDatum(gens, tuple(rels), lin, field, weight_cap)


# ---------------------------------------------------------------- A = T(V)/(R)


class AlgebraSlice:
    """A_0, ..., A_W of T(V)/(qR) with normal-word bases.

    The ideal in weight n is ``I_{n-1}⊗V + V^{⊗(n-2)}⊗R``.  It is reduced
    with pivots at the largest word, so basis words are the lex-smallest
    ones not rewritten by the relations.
    """

    def __init__(self, datum: QuadraticDatum, W: int):
        if W < 0:
            raise ValueError("weight cap must be nonnegative")
        self.datum = datum
        self.W = W
        self.d = d = datum.d
        self.field = datum.field
        R = datum.relation_space.basis
        self.normal: List[List[Word]] = []
        self._nf: List[Dict[int, Dict[Word, object]]] = []
        self.ideal_dims: List[int] = []
        prev: List[dict] = []
        for n in range(W + 1):
            if n < 2:
                ideal = []
            else:
                ideal = [{k * d + j: c for k, c in r.items()} for r in prev for j in range(d)]
                shift = d ** (n - 2)
                for u in range(shift):
                    off = u * d * d
                    ideal.extend({off + k: c for k, c in r.items()} for r in R)
                ideal = [row for _, row in rref_rows(ideal)]
            prev = ideal
            self.ideal_dims.append(len(ideal))
            comp, proj = quotient_from_span(d ** n, ideal, self.field)
            nw = [index_word(i, n, d) for i in comp]
            self.normal.append(nw)
            cols = proj.columns()
            self._nf.append({j: {nw[i]: c for i, c in col.items()} for j, col in enumerate(cols)})
        self._mul: Dict[Tuple[Word, Word], Dict[Word, object]] = {}

    def dims(self) -> Tuple[int, ...]:
        return tuple(len(b) for b in self.normal)

    def dim(self, n: int) -> int:
        return len(self.normal[n]) if 0 <= n <= self.W else 0

    def basis(self, n: int) -> List[Word]:
        return self.normal[n] if 0 <= n <= self.W else []

    def normal_form(self, w: Word) -> Dict[Word, object]:
        n = len(w)
        if n > self.W:
            raise ValueError(f"word of weight {n} exceeds the cap {self.W}")
        return self._nf[n][word_index(w, self.d)]

    def reduce(self, vec: Mapping[Word, object]) -> Dict[Word, object]:
        """Normal form of a linear combination of arbitrary words."""
        out: dict = {}
        for w, c in vec.items():
            if c:
                vaxpy(out, self.normal_form(w), c)
        return out

    def mul_words(self, u: Word, v: Word) -> Dict[Word, object]:
        key = (u, v)
        hit = self._mul.get(key)
        if hit is None:
            hit = self.normal_form(u + v)
            self._mul[key] = hit
        return hit

    def mul(self, a: Mapping[Word, object], b: Mapping[Word, object]) -> Dict[Word, object]:
        out: dict = {}
        for u, x in a.items():
            for v, y in b.items():
                vaxpy(out, self.mul_words(u, v), x * y)
        return out

    def multiplication_matrix(self, i: int, j: int) -> SparseMatrix:
        """Columns indexed by pairs (u, v) of basis words in row-major order."""
        tgt = {w: k for k, w in enumerate(self.basis(i + j))}
        cols = []
        for u in self.basis(i):
            for v in self.basis(j):
                cols.append({tgt[w]: c for w, c in self.mul_words(u, v).items()})
        return SparseMatrix.from_columns(self.dim(i + j), cols, self.field)

    def check_associative(self) -> bool:
        for i in range(self.W + 1):
            for j in range(self.W + 1 - i):
                for k in range(self.W + 1 - i - j):
                    for u in self.basis(i):
                        for v in self.basis(j):
                            uv = self.mul_words(u, v)
                            for w in self.basis(k):
                                left = self.mul(uv, {w: 1})
                                right = self.mul({u: 1}, self.mul_words(v, w))
                                if left != right:
                                    return False
        return True

    def name(self, w: Word) -> str:
        return self.datum.word_name(w)


def build_algebra(datum: QuadraticDatum, W: Optional[int] = None) -> AlgebraSlice:
    """Weight slices of A = T(V)/(qR).

    For a linear-quadratic datum this builds the associated quadratic
    algebra; the compatibility condition is checked first.
    """
    W = datum.weight_cap if W is None else W
    if datum.is_linear_quadratic and not linquad_condition(datum):
        raise LinearQuadraticError("linear part violates the linear-quadratic condition")
    return AlgebraSlice(datum, W)


# ---------------------------------------------------------------- A^¡ inside T^c(V)


class CoalgebraSlice:
    """A^¡_n = ⋂ V^{⊗i}⊗R⊗V^{⊗j} for n ≤ W.

    Basis element k of weight n is the k-th RREF row of A^¡_n inside
    V^{⊗n}; its label is ``(n, k)``.  Coordinates of an element are read
    at the pivot words.
    """

    def __init__(self, datum: QuadraticDatum, W: int):
        self.datum = datum
        self.W = W
        self.d = d = datum.d
        self.field = F = datum.field
        self.spaces: List[Subspace] = []
        R = datum.relation_space
        for n in range(W + 1):
            if n == 0:
                sp = Subspace(1, [{0: F.one}], field=F)
            elif n == 1:
                sp = Subspace(d, [{i: F.one} for i in range(d)], field=F)
            elif n == 2:
                sp = Subspace(d * d, R.basis, field=F, _rref=list(zip(R.pivots, R.basis)))
            else:
                prev = self.spaces[n - 1]
                left = Subspace(d ** n, ({k * d + j: c for k, c in r.items()} for r in prev.basis for j in range(d)),
                                field=F)
                rt = []
                shift = d ** (n - 2)
                for u in range(shift):
                    off = u * d * d
                    rt.extend({off + k: c for k, c in r.items()} for r in R.basis)
                right = Subspace(d ** n, rt, field=F)
                sp = subspace_intersection(left, right)
            self.spaces.append(sp)
        self._pivpos = [{p: k for k, p in enumerate(sp.pivots)} for sp in self.spaces]
        self._phi = datum.phi_extended() if datum.is_linear_quadratic else {}

    def dims(self) -> Tuple[int, ...]:
        return tuple(sp.dim for sp in self.spaces)

    def dim(self, n: int) -> int:
        return self.spaces[n].dim if 0 <= n <= self.W else 0

    def basis(self, n: int) -> List[Tuple[int, int]]:
        return [(n, k) for k in range(self.dim(n))]

    def vector(self, label: Tuple[int, int]) -> dict:
        n, k = label
        return self.spaces[n].basis[k]

    def word_expansion(self, label: Tuple[int, int]) -> Dict[Word, object]:
        n = label[0]
        return {index_word(i, n, self.d): c for i, c in self.vector(label).items()}

    def coords(self, n: int, vec: Mapping[int, object]) -> Dict[Tuple[int, int], object]:
        """Coordinates of a vector of V^{⊗n} lying in A^¡_n."""
        out = {}
        for p, k in self._pivpos[n].items():
            c = vec.get(p)
            if c:
                out[(n, k)] = c
        return out

    def contains(self, n: int, vec: Mapping[int, object]) -> bool:
        return self.spaces[n].contains(vec)

    def coproduct(self, label: Tuple[int, int], i: int) -> Dict[Tuple[Tuple[int, int], Tuple[int, int]], object]:
        """Component of the deconcatenation coproduct in A^¡_i ⊗ A^¡_{n-i}."""
        n, _ = label
        j = n - i
        if not 0 <= i <= n:
            return {}
        c = self.vector(label)
        dj = self.d ** j
        out = {}
        for p1, k1 in self._pivpos[i].items():
            for p2, k2 in self._pivpos[j].items():
                x = c.get(p1 * dj + p2)
                if x:
                    out[((i, k1), (j, k2))] = x
        return out

    def reduced_coproduct(self, label):
        """All components with both factors of positive weight."""
        out: dict = {}
        for i in range(1, label[0]):
            out.update(self.coproduct(label, i))
        return out

    def remove_first(self, label: Tuple[int, int], letter: int) -> Dict[Tuple[int, int], object]:
        """Coefficient of e_letter ⊗ (-) in c, an element of A^¡_{n-1}."""
        n, _ = label
        if n == 0:
            return {}
        c = self.vector(label)
        off = letter * self.d ** (n - 1)
        out = {}
        for p, k in self._pivpos[n - 1].items():
            x = c.get(off + p)
            if x:
                out[(n - 1, k)] = x
        return out

    def remove_last(self, label: Tuple[int, int], letter: int) -> Dict[Tuple[int, int], object]:
        """Coefficient of (-) ⊗ e_letter in c."""
        n, _ = label
        if n == 0:
            return {}
        c = self.vector(label)
        out = {}
        for p, k in self._pivpos[n - 1].items():
            x = c.get(p * self.d + letter)
            if x:
                out[(n - 1, k)] = x
        return out

    def check_coassociative(self) -> bool:
        for n in range(self.W + 1):
            for lab in self.basis(n):
                for i in range(n + 1):
                    for j in range(n - i + 1):
                        left: dict = {}
                        for (a, b), x in self.coproduct(lab, i + j).items():
                            for (a1, a2), y in self.coproduct(a, i).items():
                                key = (a1, a2, b)
                                left[key] = left.get(key, 0) + x * y
                        right: dict = {}
                        for (a, b), x in self.coproduct(lab, i).items():
                            for (b1, b2), y in self.coproduct(b, j).items():
                                key = (a, b1, b2)
                                right[key] = right.get(key, 0) + x * y
                        if {k: v for k, v in left.items() if v} != {k: v for k, v in right.items() if v}:
                            return False
        return True

    # -- linear-quadratic coderivation

    def d_phi_vector(self, n: int, vec: Mapping[int, object]) -> dict:
        """sum_s (-1)^s (1^s ⊗ phi ⊗ 1) applied to a vector of V^{⊗n}."""
        d = self.d
        out: dict = {}
        if n < 2 or not self._phi:
            return out
        for idx, c in vec.items():
            w = index_word(idx, n, d)
            for s in range(n - 1):
                img = self._phi.get(w[s] * d + w[s + 1])
                if not img:
                    continue
                sign = -c if s % 2 else c
                head = w[:s]
                tail = w[s + 2:]
                for g, y in img.items():
                    t = word_index(head + (g,) + tail, d)
                    out[t] = out.get(t, 0) + sign * y
        return {k: v for k, v in out.items() if v}

    def d_phi(self, label: Tuple[int, int]) -> Dict[Tuple[int, int], object]:
        n = label[0]
        v = self.d_phi_vector(n, self.vector(label))
        if v and not self.contains(n - 1, v):
            raise LinearQuadraticError("d_phi leaves the dual coalgebra")
        return self.coords(n - 1, v) if v else {}

    def check_d_phi_square_zero(self) -> bool:
        for n in range(2, self.W + 1):
            for lab in self.basis(n):
                once = self.d_phi(lab)
                twice: dict = {}
                for l2, c in once.items():
                    vaxpy(twice, self.d_phi(l2), c)
                if twice:
                    return False
        return True

    def name(self, label: Tuple[int, int]) -> str:
        return f"c{label[0]}.{label[1]}"


def build_dual_coalgebra(datum: QuadraticDatum, W: Optional[int] = None) -> CoalgebraSlice:
    W = datum.weight_cap if W is None else W
    return CoalgebraSlice(datum, W)


# ---------------------------------------------------------------- A^! = T(V*)/(R^⊥)


class DualAlgebraSlice:
    """A^! with its pairing against A^¡.

    ``pairing(n)`` has rows indexed by the normal words of A^!_n and
    columns by the basis of A^¡_n.  ``dual_of(label)`` is the element of
    A^! pairing to 1 with ``label`` and 0 with the other basis elements.
    """

    def __init__(self, datum: QuadraticDatum, W: int, coalgebra: Optional[CoalgebraSlice] = None):
        self.datum = datum
        self.W = W
        self.dual = datum.dual_datum()
        self.algebra = AlgebraSlice(self.dual, W)
        self.coalgebra = coalgebra if coalgebra is not None else CoalgebraSlice(datum, W)
        self.field = datum.field
        d = datum.d
        self._pair: List[SparseMatrix] = []
        self._dual_elems: List[List[Dict[Word, object]]] = []
        self._to_dual: List[Solver] = []
        for n in range(W + 1):
            nw = self.algebra.basis(n)
            cols = []
            for lab in self.coalgebra.basis(n):
                c = self.coalgebra.vector(lab)
                cols.append({r: c[word_index(w, d)] for r, w in enumerate(nw) if c.get(word_index(w, d))})
            m = SparseMatrix.from_columns(len(nw), cols, self.field)
            self._pair.append(m)
            # m^T x = e_k gives the dual element
            mt = m.transpose()
            sol = Solver(mt)
            if sol.rank != len(nw) or len(nw) != len(cols):
                raise ArithmeticError(f"pairing between A^! and A^¡ is degenerate in weight {n}")
            elems = []
            for k in range(len(cols)):
                x = sol.solve({k: self.field.one})
                elems.append({nw[i]: c for i, c in x.items()})
            self._dual_elems.append(elems)
            self._to_dual.append(sol)

    def dims(self) -> Tuple[int, ...]:
        return self.algebra.dims()

    def dim(self, n: int) -> int:
        return self.algebra.dim(n)

    def basis(self, n: int) -> List[Word]:
        return self.algebra.basis(n)

    def mul(self, a, b):
        return self.algebra.mul(a, b)

    def mul_words(self, u, v):
        return self.algebra.mul_words(u, v)

    def pairing(self, n: int) -> SparseMatrix:
        return self._pair[n]

    def pair(self, x: Mapping[Word, object], label: Tuple[int, int]) -> object:
        c = self.coalgebra.vector(label)
        d = self.datum.d
        tot = self.field.zero
        for w, a in x.items():
            y = c.get(word_index(w, d))
            if y:
                tot += a * y
        return tot

    def dual_of(self, label: Tuple[int, int]) -> Dict[Word, object]:
        return self._dual_elems[label[0]][label[1]]

    def as_functional(self, x: Mapping[Word, object], n: int) -> Dict[Tuple[int, int], object]:
        """x expressed in the basis dual to A^¡_n."""
        out = {}
        for lab in self.coalgebra.basis(n):
            v = self.pair(x, lab)
            if v:
                out[lab] = v
        return out

    def check_pairing_multiplicative(self) -> bool:
        co = self.coalgebra
        for i in range(self.W + 1):
            for j in range(self.W + 1 - i):
                for u in self.basis(i):
                    for v in self.basis(j):
                        xy = self.mul_words(u, v)
                        for lab in co.basis(i + j):
                            lhs = self.pair(xy, lab)
                            rhs = 0
                            for (a, b), c in co.coproduct(lab, i).items():
                                rhs += c * self.pair({u: 1}, a) * self.pair({v: 1}, b)
                            if lhs != rhs:
                                return False
        return True

    # -- differential dual to d_phi

    def differential(self, x: Mapping[Word, object], n: int) -> Dict[Word, object]:
        """d x with <d x, c> = <x, d_phi c>; maps A^!_n to A^!_{n+1}."""
        if n + 1 > self.W:
            raise ValueError("differential leaves the weight cap")
        out: dict = {}
        for lab in self.coalgebra.basis(n + 1):
            val = self.field.zero
            for l2, c in self.coalgebra.d_phi(lab).items():
                val += c * self.pair(x, l2)
            if val:
                vaxpy(out, self.dual_of(lab), val)
        return out

    def name(self, w: Word) -> str:
        return self.dual.word_name(w)


def build_dual_algebra(datum: QuadraticDatum, W: Optional[int] = None,
                       coalgebra: Optional[CoalgebraSlice] = None) -> DualAlgebraSlice:
    W = datum.weight_cap if W is None else W
    return DualAlgebraSlice(datum, W, coalgebra)


# ---------------------------------------------------------------- Koszulness


@dataclass
class KoszulReport:
    koszul_up_to_W: bool
    first_failure: Optional[Tuple[int, int]]
    W: int
    homology: Dict[Tuple[int, int], int] = dc_field(default_factory=dict)
    hilbert_ok: bool = True

    def summary(self) -> str:
        if self.koszul_up_to_W:
            return f"Koszul up to weight {self.W}"
        return f"not Koszul: homology at bidegree {self.first_failure}"


def koszul_complex(datum: QuadraticDatum, W: Optional[int] = None, algebra=None, coalgebra=None):
    """The one-sided complex A ⊗_κ A^¡ with d(a⊗c) = sum_i a e_i ⊗ (c with first letter i removed)."""
    from .complexes import BigradedFamily, ChainComplex, ChainMapFamily

    W = datum.weight_cap if W is None else W
    A = algebra or AlgebraSlice(datum.quadratic_part(), W)
    C = coalgebra or CoalgebraSlice(datum, W)
    bases = {}
    for w in range(W + 1):
        for m in range(w + 1):
            labs = [(a, c) for a in A.basis(w - m) for c in C.basis(m)]
            if labs:
                bases[(m, w)] = labs
    fam = BigradedFamily("A⊗A^¡", bases, datum.field)
    d = datum.d

    def dif(lab):
        a, c = lab
        out: dict = {}
        for i in range(d):
            tail = C.remove_first(c, i)
            if not tail:
                continue
            ae = A.mul_words(a, (i,))
            for w, x in ae.items():
                for t, y in tail.items():
                    key = (w, t)
                    out[key] = out.get(key, 0) + x * y
        return out

    return ChainComplex(fam, ChainMapFamily(fam, fam, (-1, 0), dif, "d_κ"))


def koszulness_check(datum: QuadraticDatum, W: Optional[int] = None) -> KoszulReport:
    """Acyclicity of A ⊗_κ A^¡ in every weight 1..W; only certifies up to W."""
    W = datum.weight_cap if W is None else W
    if datum.is_linear_quadratic and not linquad_condition(datum):
        raise LinearQuadraticError("linear part violates the linear-quadratic condition")
    cx = koszul_complex(datum, W)
    dims = {}
    failure = None
    for w in range(W + 1):
        for m in range(w + 1):
            h = cx.homology((m, w)).dim
            dims[(m, w)] = h
            expected = 1 if (m, w) == (0, 0) else 0
            if h != expected and failure is None:
                failure = (m, w)
    return KoszulReport(failure is None, failure, W, dims, hilbert_product_check(datum, W))


def hilbert_series(datum: QuadraticDatum, W: Optional[int] = None) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    W = datum.weight_cap if W is None else W
    A = AlgebraSlice(datum.quadratic_part(), W)
    Ad = AlgebraSlice(datum.dual_datum(), W)
    return A.dims(), Ad.dims()


def hilbert_product_check(datum: QuadraticDatum, W: Optional[int] = None) -> bool:
    """H_A(t) H_{A^!}(-t) = 1 mod t^{W+1}; a necessary condition for Koszulness."""
    W = datum.weight_cap if W is None else W
    a, b = hilbert_series(datum, W)
    for n in range(W + 1):
        s = sum(a[i] * b[n - i] * (-1) ** (n - i) for i in range(n + 1))
        if s != (1 if n == 0 else 0):
            return False
    return True


# ---------------------------------------------------------------- linear-quadratic data


def linquad_condition(datum: QuadraticDatum) -> bool:
    """(R⊗V + V⊗R) ∩ V^{⊗2} ⊂ R for the inhomogeneous relation space R.

    R = {X - phi(X)} sits in V ⊕ V^{⊗2}; R⊗V + V⊗R sits in V^{⊗2} ⊕ V^{⊗3}.
    Elements with zero cubic part must lie in R, which for pure quadratic
    vectors means lying in qR with phi vanishing on them.
    """
    d = datum.d
    F = datum.field
    R = datum.relation_space
    phi = datum.phi_on_basis
    d2, d3 = d * d, d ** 3
    # coordinates: cubic part at [0, d3), quadratic part at [d3, d3 + d2)
    gens = []
    for r, ph in zip(R.basis, phi):
        for j in range(d):
            v = {k * d + j: c for k, c in r.items()}
            for g, c in ph.items():
                v[d3 + g * d + j] = v.get(d3 + g * d + j, 0) - c
            gens.append(v)
            v = {j * d2 + k: c for k, c in r.items()}
            for g, c in ph.items():
                v[d3 + j * d + g] = v.get(d3 + j * d + g, 0) - c
            gens.append(v)
    # combinations with vanishing cubic part
    cols = [{k: c for k, c in g.items() if k < d3} for g in gens]
    m = SparseMatrix.from_columns(d3, cols, F)
    from .exact_linear import kernel_basis

    for k in kernel_basis(m).basis:
        quad: dict = {}
        for i, c in k.items():
            vaxpy(quad, {kk - d3: x for kk, x in gens[i].items() if kk >= d3}, c)
        if not quad:
            continue
        if not R.contains(quad):
            return False
        # phi(quad) must vanish so that quad itself (with zero linear part) lies in R
        coeff = R.coordinates(quad)
        img: dict = {}
        for c, ph in zip(coeff, phi):
            if c:
                vaxpy(img, ph, c)
        if img:
            return False
    return True


@dataclass
class LinQuadReport:
    ok: bool
    condition: bool
    koszul: bool
    d_phi_square_zero: bool
    W: int
    coalgebra: Optional[CoalgebraSlice] = None


def linquad_check(datum: QuadraticDatum, W: Optional[int] = None) -> LinQuadReport:
    W = datum.weight_cap if W is None else W
    cond = linquad_condition(datum)
    kos = koszulness_check(datum.quadratic_part(), W).koszul_up_to_W
    C = CoalgebraSlice(datum, W)
    sq = False
    if cond:
        try:
            sq = C.check_d_phi_square_zero()
        except LinearQuadraticError:
            sq = False
    return LinQuadReport(cond and kos and sq, cond, kos, sq, W, C)


# ---------------------------------------------------------------- presentation files

HEADER = "koszulcy-presentation 1"


def format_scalar(c, F) -> str:
    return F.format(c)


def _parse_scalar(tok: str, F):
    try:
        return F(Fraction(tok))
    except (ValueError, ZeroDivisionError) as e:
        raise PresentationError(f"bad coefficient {tok!r}") from e


def print_presentation(datum: QuadraticDatum) -> str:
    """Canonical text form; ``parse_presentation`` inverts it exactly."""
    F = datum.field
    d = datum.d
    lines = [HEADER, f"field {F.name}", "generators " + " ".join(datum.generators),
             f"weight-cap {datum.weight_cap}"]
    for i, r in enumerate(datum.relations):
        terms = [f"{datum.word_name(index_word(k, 2, d))}:{F.format(r[k])}" for k in sorted(r)]
        line = "relation " + (" ".join(terms) if terms else "0")
        if datum.linear is not None:
            lin = datum.linear[i]
            lterms = [f"{datum.generators[k]}:{F.format(lin[k])}" for k in sorted(lin)]
            line += " | " + (" ".join(lterms) if lterms else "0")
        lines.append(line)
    return "\n".join(lines) + "\n"


def parse_presentation(text: str) -> QuadraticDatum:
    F = QQ
    gens: Optional[Tuple[str, ...]] = None
    cap = 4
    rels: List[dict] = []
    lins: List[Optional[dict]] = []
    seen_header = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not seen_header:
            if line != HEADER:
                raise PresentationError(f"line {lineno}: expected {HEADER!r}")
            seen_header = True
            continue
        key, _, rest = line.partition(" ")
        rest = rest.strip()
        if key == "field":
            if rels or gens is not None:
                raise PresentationError(f"line {lineno}: field must precede generators")
            F = parse_field(rest)
        elif key == "generators":
            gens = tuple(rest.split())
        elif key == "weight-cap":
            try:
                cap = int(rest)
            except ValueError:
                raise PresentationError(f"line {lineno}: bad weight cap") from None
        elif key == "relation":
            if gens is None:
                raise PresentationError(f"line {lineno}: relation before generators")
            pos = {g: i for i, g in enumerate(gens)}
            d = len(gens)
            quad, bar, lin = rest.partition("|")
            row: dict = {}
            for tok in quad.split():
                if tok == "0":
                    continue
                wd, colon, co = tok.rpartition(":")
                if not colon:
                    raise PresentationError(f"line {lineno}: term {tok!r} lacks a coefficient")
                try:
                    w = tuple(pos[g] for g in wd.split("*"))
                except KeyError:
                    raise PresentationError(f"line {lineno}: unknown generator in {wd!r}") from None
                if len(w) != 2:
                    raise PresentationError(f"line {lineno}: {wd!r} is not a two-letter word")
                k = word_index(w, d)
                if k in row:
                    raise PresentationError(f"line {lineno}: repeated word {wd!r}")
                row[k] = _parse_scalar(co, F)
            rels.append(row)
            if bar:
                lrow: dict = {}
                for tok in lin.split():
                    if tok == "0":
                        continue
                    g, colon, co = tok.rpartition(":")
                    if not colon or g not in pos:
                        raise PresentationError(f"line {lineno}: bad linear term {tok!r}")
                    if pos[g] in lrow:
                        raise PresentationError(f"line {lineno}: repeated generator {g!r}")
                    lrow[pos[g]] = _parse_scalar(co, F)
                lins.append(lrow)
            else:
                lins.append(None)
        else:
            raise PresentationError(f"line {lineno}: unknown directive {key!r}")
    if not seen_header:
        raise PresentationError("empty presentation")
    if gens is None:
        raise PresentationError("no generators line")
    has_lin = [x is not None for x in lins]
    if any(has_lin) and not all(has_lin):
        raise PresentationError("either every relation has a linear part or none does")
    linear = tuple(lins) if lins and all(has_lin) else None
    return QuadraticDatum(gens, tuple(rels), linear, F, cap)


def load_presentation(path) -> QuadraticDatum:
    with open(path, encoding="utf-8") as fh:
        return parse_presentation(fh.read())
