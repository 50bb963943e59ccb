"""Small models for Hochschild (co)homology of a Koszul algebra.

``K(A) = A ⊗ A^¡``: a basis element is ``(a, c)`` with ``a`` a normal word of
A and ``c = (m, k)`` a basis label of A^¡_m; it sits at bidegree
``(m, |a| + m)``.  The differential is

    b(a ⊗ c) = sum_i  a e_i ⊗ c_(i|)  +  (-1)^m e_i a ⊗ c_(|i)

where ``c_(i|)`` removes a leading letter i and ``c_(|i)`` a trailing one.

``A ⊗ A^!``: a basis element ``(a, x)`` with ``x`` a normal word of A^! of
length m sits at bidegree ``(-m, |a| - m)``, so ``HH^{ij}`` is the homology
at ``(-i, -j)``.  The product is ``(a⊗x)(b⊗y) = ab ⊗ xy`` and the
differential is the commutator with ``θ = sum_i e_i ⊗ e_i*``:

    δ(a ⊗ x) = sum_i  e_i a ⊗ e_i* x  -  (-1)^m a e_i ⊗ x e_i*

which is the Hochschild coboundary read through ``a⊗x ↦ (c ↦ <x,c> a)``.

Cohomological bidegrees near the weight cap are affected by truncation:
``(-m, s)`` is exact when ``m + s + 1 <= W``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Tuple

from .complexes import (
    BigradedFamily,
    ChainComplex,
    ChainMapFamily,
    check_square_zero,
)
from .exact_linear import vaxpy
from .quadratic import AlgebraSlice, CoalgebraSlice, DualAlgebraSlice, QuadraticDatum

Bideg = Tuple[int, int]


def _acc(out: dict, key, c) -> None:
    v = out.get(key)
    v = c if v is None else v + c
    if v:
        out[key] = v
    else:
        out.pop(key, None)


class SignConventionError(ArithmeticError):
    """A differential built here fails to square to zero."""


@dataclass
class SmallSetup:
    datum: QuadraticDatum
    W: int
    A: AlgebraSlice
    C: CoalgebraSlice
    Ad: DualAlgebraSlice


def small_setup(datum: QuadraticDatum, W: Optional[int] = None) -> SmallSetup:
    W = datum.weight_cap if W is None else W
    q = datum.quadratic_part()
    A = AlgebraSlice(q, W)
    C = CoalgebraSlice(q, W)
    return SmallSetup(q, W, A, C, DualAlgebraSlice(q, W, C))


# ---------------------------------------------------------------- K(A)


class KoszulHomologyComplex(ChainComplex):
    def __init__(self, A: AlgebraSlice, C: CoalgebraSlice):
        W = min(A.W, C.W)
        bases = {}
        for w in range(W + 1):
            for m in range(w + 1):
                labs = [(a, c) for a in A.basis(w - m) for c in C.basis(m)]
                if labs:
                    bases[(m, w)] = labs
        fam = BigradedFamily("K(A)", bases, A.field)
        self.A, self.C, self.W = A, C, W
        super().__init__(fam, ChainMapFamily(fam, fam, (-1, 0), self._b, "b_K"), "K(A)")

    def _b(self, lab):
        a, c = lab
        A, C = self.A, self.C
        m = c[0]
        out: dict = {}
        for i in range(A.d):
            head = C.remove_first(c, i)
            if head:
                for w, x in A.mul_words(a, (i,)).items():
                    for t, y in head.items():
                        _acc(out, (w, t), x * y)
            tail = C.remove_last(c, i)
            if tail:
                sgn = -1 if m % 2 else 1
                for w, x in A.mul_words((i,), a).items():
                    for t, y in tail.items():
                        _acc(out, (w, t), sgn * x * y)
        return out


def build_koszul_complex(A: AlgebraSlice, C: CoalgebraSlice) -> KoszulHomologyComplex:
    if A.datum.generators != C.datum.generators or A.datum.relations != C.datum.relations:
        raise ValueError("slices come from different data")
    cx = KoszulHomologyComplex(A, C)
    rep = check_square_zero(cx.d)
    if not rep:
        raise SignConventionError(f"b_K does not square to zero at {rep.bidegree}")
    return cx


# ---------------------------------------------------------------- A ⊗ A^!


class KoszulCohomologyComplex(ChainComplex):
    def __init__(self, A: AlgebraSlice, Ad: DualAlgebraSlice):
        W = min(A.W, Ad.W)
        bases = {}
        for k in range(W + 1):
            for m in range(W + 1):
                labs = [(a, x) for a in A.basis(k) for x in Ad.basis(m)]
                if labs:
                    bases[(-m, k - m)] = labs
        fam = BigradedFamily("A⊗A^!", bases, A.field)
        self.A, self.Ad, self.W = A, Ad, W
        super().__init__(fam, ChainMapFamily(fam, fam, (-1, 0), self._delta, "δ"), "A⊗A^!")

    def exact_bidegree(self, b: Bideg) -> bool:
        """Whether truncation leaves homology at ``b`` untouched."""
        m, s = -b[0], b[1]
        return m >= 0 and m + s >= 0 and m + s + 1 <= self.W and m + 1 <= self.W

    def exact_support(self) -> List[Bideg]:
        return [b for b in self.family.support() if self.exact_bidegree(b)]

    def _delta(self, lab):
        a, x = lab
        A, Ad = self.A, self.Ad
        m = len(x)
        if len(a) + 1 > self.W or m + 1 > self.W:
            # the target lies beyond the cap; these bidegrees are flagged as inexact
            return {}
        out: dict = {}
        sgn = 1 if m % 2 else -1
        for i in range(A.d):
            left_a = A.mul_words((i,), a)
            left_x = Ad.mul_words((i,), x)
            for w, p in left_a.items():
                for y, q in left_x.items():
                    _acc(out, (w, y), p * q)
            right_a = A.mul_words(a, (i,))
            right_x = Ad.mul_words(x, (i,))
            for w, p in right_a.items():
                for y, q in right_x.items():
                    _acc(out, (w, y), sgn * p * q)
        return out

    def product(self, u: Mapping, v: Mapping) -> Dict:
        """Convolution product of chains; terms beyond the cap are dropped."""
        A, Ad = self.A, self.Ad
        out: dict = {}
        for (a, x), p in u.items():
            for (b, y), q in v.items():
                if len(a) + len(b) > self.W or len(x) + len(y) > self.W:
                    continue
                ab = A.mul_words(a, b)
                xy = Ad.mul_words(x, y)
                for w, r in ab.items():
                    for z, s in xy.items():
                        _acc(out, (w, z), p * q * r * s)
        return out

    def unit(self) -> Dict:
        return {((), ()): self.family.field.one}

    def check_derivation(self) -> bool:
        """δ(uv) = δ(u)v + (-1)^{|u|} u δ(v) on basis pairs whose products stay in the cap."""
        fam = self.family
        labs = [(lab, b) for b in fam.support() for lab in fam.basis(b)]
        for la, ba in labs:
            for lb, bb in labs:
                a, x = la
                b, y = lb
                if len(a) + len(b) + 1 > self.W or len(x) + len(y) + 1 > self.W:
                    continue
                uv = self.product({la: 1}, {lb: 1})
                lhs = self.d.apply(uv)
                rhs = self.product(self.d.image(la), {lb: 1})
                sign = -1 if ba[0] % 2 else 1
                vaxpy(rhs, self.product({la: 1}, self.d.image(lb)), sign)
                vaxpy(rhs, lhs, -1)
                if rhs:
                    return False
        return True


def build_cohomology_complex(A: AlgebraSlice, Ad: DualAlgebraSlice) -> KoszulCohomologyComplex:
    cx = KoszulCohomologyComplex(A, Ad)
    rep = check_square_zero(cx.d)
    if not rep:
        raise SignConventionError(f"δ does not square to zero at {rep.bidegree}")
    return cx


def convolution_cup(u: List, v: List, cx: KoszulCohomologyComplex, bu: Bideg, bv: Bideg) -> Tuple[Bideg, List]:
    """Class of the product of the classes ``u`` at ``bu`` and ``v`` at ``bv``.

    Classes are coordinate lists in the pinned representative bases.
    """
    hu, hv = cx.homology(bu), cx.homology(bv)
    prod = cx.product(hu.element(u), hv.element(v))
    tb = (bu[0] + bv[0], bu[1] + bv[1])
    ht = cx.homology(tb)
    if not prod:
        return tb, [cx.family.field.zero] * ht.dim
    return tb, ht.class_of(prod)


def cup_table(cx: KoszulCohomologyComplex, bidegrees: List[Bideg]) -> Dict[Tuple[Bideg, int, Bideg, int], Tuple[Bideg, List]]:
    """Products of all pairs of basis classes whose product lands in an exact bidegree."""
    out = {}
    F = cx.family.field
    for b1 in bidegrees:
        h1 = cx.homology(b1)
        for b2 in bidegrees:
            tb = (b1[0] + b2[0], b1[1] + b2[1])
            if not cx.exact_bidegree(tb):
                continue
            h2 = cx.homology(b2)
            for i in range(h1.dim):
                ei = [F.one if k == i else F.zero for k in range(h1.dim)]
                for j in range(h2.dim):
                    ej = [F.one if k == j else F.zero for k in range(h2.dim)]
                    out[(b1, i, b2, j)] = convolution_cup(ei, ej, cx, b1, b2)
    return out


# ---------------------------------------------------------------- A ⊗ A^¡ ⊗ A


class BimoduleResolution(ChainComplex):
    """Augmented complex A⊗A^¡⊗A → A; the augmentation target sits in degree -1.

    d(a⊗c⊗a') = sum_i a e_i ⊗ c_(i|) ⊗ a' + (-1)^m a ⊗ c_(|i) ⊗ e_i a'.
    """

    def __init__(self, A: AlgebraSlice, C: CoalgebraSlice):
        W = min(A.W, C.W)
        bases: Dict[Bideg, list] = {}
        for w in range(W + 1):
            for m in range(w + 1):
                labs = []
                for k in range(w - m + 1):
                    for a in A.basis(k):
                        for c in C.basis(m):
                            for a2 in A.basis(w - m - k):
                                labs.append((a, c, a2))
                if labs:
                    bases[(m, w)] = labs
            if A.dim(w):
                bases[(-1, w)] = [("aug", a) for a in A.basis(w)]
        fam = BigradedFamily("A⊗A^¡⊗A", bases, A.field)
        self.A, self.C, self.W = A, C, W
        super().__init__(fam, ChainMapFamily(fam, fam, (-1, 0), self._d, "b'"), "A⊗A^¡⊗A")

    def _d(self, lab):
        if lab[0] == "aug":
            return {}
        a, c, a2 = lab
        A, C = self.A, self.C
        m = c[0]
        if m == 0:
            return {("aug", w): x for w, x in A.mul_words(a, a2).items()}
        out: dict = {}
        sgn = -1 if m % 2 else 1
        for i in range(A.d):
            head = C.remove_first(c, i)
            if head:
                for w, x in A.mul_words(a, (i,)).items():
                    for t, y in head.items():
                        _acc(out, (w, t, a2), x * y)
            tail = C.remove_last(c, i)
            if tail:
                for w, x in A.mul_words((i,), a2).items():
                    for t, y in tail.items():
                        _acc(out, (a, t, w), sgn * x * y)
        return out

    def exactness(self) -> Tuple[bool, Optional[Bideg]]:
        for b in self.family.support():
            if self.homology(b).dim:
                return False, b
        return True, None


def build_bimodule_resolution(A: AlgebraSlice, C: CoalgebraSlice) -> BimoduleResolution:
    cx = BimoduleResolution(A, C)
    rep = check_square_zero(cx.d)
    if not rep:
        raise SignConventionError(f"bimodule differential does not square to zero at {rep.bidegree}")
    return cx
