"""Bar and cobar constructions, Hochschild chains and the comparison maps.

Two differential graded algebras are used: A itself (concentrated in
degree 0) and the cobar construction Ω(A^¡).  Both are wrapped in a small
interface (basis per weight, degree, product, differential) so that one
implementation of the normalized Hochschild complex serves both.

Labels
------
* A: normal words (tuples of generator indices).
* Ω(A^¡): tuples of A^¡ labels ``(n, k)`` with ``n >= 1``; the letter
  ``<c>`` has degree ``n - 1`` and weight ``n``.
* Hochschild chains ``a0[a1|...|an]``: ``(a0, (a1, ..., an))`` with
  reduced letters; degree ``|a0| + sum(|ai| + 1)``.
* Coalgebra chains ``ω ⊗ c`` in Ω(A^¡)⊗A^¡: ``(ω, c)``.

Sign conventions
----------------
With ``ε_i = |a0| + sum_{k<=i} (|a_k| + 1)``:

    b(a0[a1..an]) = d(a0)[..] - sum_i (-1)^{ε_{i-1}} a0[..|d a_i|..]
                  + (-1)^{|a0|} a0 a1[a2..] + sum_{i<n} (-1)^{ε_i} a0[..|a_i a_{i+1}|..]
                  - (-1)^{(|a_n|+1) ε_{n-1}} a_n a0[a1..a_{n-1}]

Connes' B inserts ``a0`` as a letter and sums the cyclic rotations of the
suspended letters with their Koszul sign; for ungraded letters this is the
classical ``(-1)^{ni}``.  The cobar differential is

    d<c> = - sum (-1)^{|c'|(|c''|-1)} <c'><c''>

which makes ``θ = sum <c> ⊗ c*`` a Maurer-Cartan element for the product
on Ω(A^¡) ⊗ A^! used in :mod:`koszulcy.calabi_yau`.  The remaining signs
(coalgebra b and B, η and p₂) are stated next to their definitions.  All
of them are validated by ``b² = B² = bB + Bb = 0`` and by the chain map
checks in :func:`comparison_maps`.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import cached_property
from itertools import product as iproduct
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .complexes import (
    BigradedFamily,
    ChainComplex,
    ChainMapFamily,
    check_commutes,
    check_square_zero,
    induced_on_homology,
    is_invertible,
)
from .exact_linear import vaxpy
from .quadratic import AlgebraSlice, CoalgebraSlice

Bideg = Tuple[int, int]


def _acc(out: dict, key, c) -> None:
    v = out.get(key)
    v = c if v is None else v + c
    if v:
        out[key] = v
    else:
        out.pop(key, None)


def _sg(e: int) -> int:
    return -1 if e % 2 else 1


def _sigma(i: int, j: int) -> int:
    return -_sg(i * j) if i and j else 1


def compositions(w: int, parts: Sequence[int]) -> Iterable[Tuple[int, ...]]:
    """Ordered tuples of allowed part sizes summing to ``w``."""
    if w == 0:
        yield ()
        return
    for p in parts:
        if p <= w:
            for rest in compositions(w - p, parts):
                yield (p,) + rest


# ---------------------------------------------------------------- DG algebras


class AlgebraDGA:
    """A quadratic algebra slice viewed as a DG algebra in degree 0."""

    def __init__(self, A: AlgebraSlice):
        self.A = A
        self.W = A.W
        self.field = A.field
        self.unit = ()

    def basis(self, w: int) -> List:
        return self.A.basis(w)

    def reduced(self, w: int) -> List:
        return self.A.basis(w) if w >= 1 else []

    def degree(self, lab) -> int:
        return 0

    def weight(self, lab) -> int:
        return len(lab)

    def mul(self, x, y) -> Dict:
        return self.A.mul_words(x, y)

    def d(self, lab) -> Dict:
        return {}

    def name(self, lab) -> str:
        return self.A.name(lab)


class CobarDGA:
    """Ω(C) = T(s^{-1} C̄) truncated at weight W."""

    def __init__(self, C: CoalgebraSlice, W: Optional[int] = None):
        self.C = C
        self.W = C.W if W is None else W
        self.field = C.field
        self.unit = ()
        self._basis: Dict[int, List] = {}
        self._d: Dict = {}
        parts = [n for n in range(1, self.W + 1) if C.dim(n)]
        self._parts = parts
        for w in range(self.W + 1):
            labs = []
            for comp in compositions(w, parts):
                for ks in iproduct(*[range(C.dim(n)) for n in comp]):
                    labs.append(tuple((n, k) for n, k in zip(comp, ks)))
            self._basis[w] = labs

    def basis(self, w: int) -> List:
        return self._basis.get(w, [])

    def reduced(self, w: int) -> List:
        return self._basis.get(w, []) if w >= 1 else []

    def degree(self, lab) -> int:
        return sum(n - 1 for n, _ in lab)

    def weight(self, lab) -> int:
        return sum(n for n, _ in lab)

    def mul(self, x, y) -> Dict:
        return {x + y: self.field.one}

    def d_letter(self, c) -> Dict:
        """d<c> = - sum (-1)^{|c'|(|c''|-1)} <c'><c''>."""
        out: dict = {}
        n = c[0]
        for i in range(1, n):
            sgn = -_sg(i * (n - i - 1))
            for (c1, c2), x in self.C.coproduct(c, i).items():
                _acc(out, (c1, c2), sgn * x)
        return out

    def d(self, lab) -> Dict:
        hit = self._d.get(lab)
        if hit is not None:
            return hit
        out: dict = {}
        deg = 0
        for j, c in enumerate(lab):
            sj = _sg(deg)
            for mid, x in self.d_letter(c).items():
                _acc(out, lab[:j] + mid + lab[j + 1:], sj * x)
            deg += c[0] - 1
        self._d[lab] = out
        return out

    def d_phi_part(self, lab) -> Dict:
        """The linear-quadratic piece d1<c> = -<d_phi c>, extended as a derivation."""
        out: dict = {}
        deg = 0
        for j, c in enumerate(lab):
            sj = -_sg(deg)
            for c2, x in self.C.d_phi(c).items():
                if c2[0] == 0:
                    continue
                _acc(out, lab[:j] + (c2,) + lab[j + 1:], sj * x)
            deg += c[0] - 1
        return out

    def name(self, lab) -> str:
        return "<" + "|".join(f"c{n}.{k}" for n, k in lab) + ">" if lab else "1"


def _reduced_upto(alg, W: int) -> Dict[int, List]:
    return {w: alg.reduced(w) for w in range(1, W + 1)}


def bar_words(alg, w: int, cache: Optional[dict] = None) -> List[Tuple]:
    """Words of reduced basis letters with total weight ``w``."""
    if cache is not None and w in cache:
        return cache[w]
    if w == 0:
        res = [()]
    else:
        res = []
        for first in range(1, w + 1):
            for a in alg.reduced(first):
                for rest in bar_words(alg, w - first, cache):
                    res.append((a,) + rest)
    if cache is not None:
        cache[w] = res
    return res


# ---------------------------------------------------------------- bar and cobar


class BarComplex(ChainComplex):
    """B(A) with d = d1 + d2; word ``[a1|...|an]`` at (sum(|a|+1), sum weight)."""

    def __init__(self, alg, W: Optional[int] = None):
        W = alg.W if W is None else W
        self.alg = alg
        cache: dict = {}
        bases: Dict[Bideg, list] = {}
        for w in range(W + 1):
            for word in bar_words(alg, w, cache):
                deg = sum(alg.degree(a) + 1 for a in word)
                bases.setdefault((deg, w), []).append(word)
        fam = BigradedFamily("B", bases, alg.field)
        super().__init__(fam, ChainMapFamily(fam, fam, (-1, 0), self._d, "d_B"), "B")

    def _d(self, word):
        alg = self.alg
        out: dict = {}
        eps = 0
        for i, a in enumerate(word):
            for da, x in alg.d(a).items():
                _acc(out, word[:i] + (da,) + word[i + 1:], -_sg(eps) * x)
            eps += alg.degree(a) + 1
            if i + 1 < len(word):
                for ab, x in alg.mul(a, word[i + 1]).items():
                    _acc(out, word[:i] + (ab,) + word[i + 2:], _sg(eps) * x)
        return out


def bar(A: AlgebraSlice, W: Optional[int] = None) -> BarComplex:
    cx = BarComplex(AlgebraDGA(A), W)
    rep = check_square_zero(cx.d)
    if not rep:
        raise ArithmeticError(f"bar differential fails at {rep.bidegree}")
    return cx


class CobarComplex(ChainComplex):
    """Ω(C) as a chain complex; ``<c1|...|cn>`` at (sum(|c|-1), sum weight)."""

    def __init__(self, C: CoalgebraSlice, W: Optional[int] = None):
        self.dga = dga = CobarDGA(C, W)
        bases: Dict[Bideg, list] = {}
        for w in range(dga.W + 1):
            for lab in dga.basis(w):
                bases.setdefault((dga.degree(lab), w), []).append(lab)
        fam = BigradedFamily("Ω", bases, C.field)
        super().__init__(fam, ChainMapFamily(fam, fam, (-1, 0), dga.d, "d_Ω"), "Ω")


def cobar(C: CoalgebraSlice, W: Optional[int] = None) -> CobarComplex:
    cx = CobarComplex(C, W)
    rep = check_square_zero(cx.d)
    if not rep:
        raise ArithmeticError(f"cobar differential fails at {rep.bidegree}")
    return cx


def cobar_d_squared_zero(C: CoalgebraSlice, W: Optional[int] = None) -> bool:
    """(d1 + d2)^2 = 0 on Ω(C) including the linear-quadratic part.

    d1 lowers weight, so this is checked on explicit elements rather than
    through the weight-graded machinery.
    """
    dga = CobarDGA(C, W)

    def full(v: Mapping) -> dict:
        out: dict = {}
        for lab, c in v.items():
            vaxpy(out, dga.d(lab), c)
            vaxpy(out, dga.d_phi_part(lab), c)
        return out

    for w in range(dga.W + 1):
        for lab in dga.basis(w):
            if full(full({lab: dga.field.one})):
                return False
    return True


# ---------------------------------------------------------------- Hochschild chains of a DGA


class HochschildChains(ChainComplex):
    """Normalized Hochschild chains Λ ⊗ B(Λ) with b and Connes' B."""

    def __init__(self, alg, W: Optional[int] = None, name: str = "CH"):
        W = alg.W if W is None else W
        self.alg = alg
        self.W = W
        cache: dict = {}
        bases: Dict[Bideg, list] = {}
        for w in range(W + 1):
            for w0 in range(w + 1):
                for a0 in alg.basis(w0):
                    d0 = alg.degree(a0)
                    for word in bar_words(alg, w - w0, cache):
                        deg = d0 + sum(alg.degree(a) + 1 for a in word)
                        bases.setdefault((deg, w), []).append((a0, word))
        fam = BigradedFamily(name, bases, alg.field)
        super().__init__(fam, ChainMapFamily(fam, fam, (-1, 0), self._b, "b"), name)
        self.B = ChainMapFamily(fam, fam, (1, 0), self._B, "B")

    def _b(self, lab):
        alg = self.alg
        a0, word = lab
        n = len(word)
        out: dict = {}
        for x, c in alg.d(a0).items():
            _acc(out, (x, word), c)
        d0 = alg.degree(a0)
        eps = d0
        for i, a in enumerate(word):
            for x, c in alg.d(a).items():
                _acc(out, (a0, word[:i] + (x,) + word[i + 1:]), -_sg(eps) * c)
            eps += alg.degree(a) + 1
        if n == 0:
            return out
        for x, c in alg.mul(a0, word[0]).items():
            _acc(out, (x, word[1:]), _sg(d0) * c)
        eps = d0
        for i in range(n - 1):
            eps += alg.degree(word[i]) + 1
            for x, c in alg.mul(word[i], word[i + 1]).items():
                _acc(out, (a0, word[:i] + (x,) + word[i + 2:]), _sg(eps) * c)
        eps_last = eps if n >= 1 else d0
        # eps now equals ε_{n-1}
        an = word[-1]
        s = -_sg((alg.degree(an) + 1) * eps_last)
        for x, c in alg.mul(an, a0).items():
            _acc(out, (x, word[:-1]), s * c)
        return out

    def _B(self, lab):
        alg = self.alg
        a0, word = lab
        if alg.weight(a0) == 0:
            return {}
        letters = (a0,) + word
        degs = [alg.degree(a) + 1 for a in letters]
        tot = sum(degs)
        out: dict = {}
        head = 0
        one = alg.field.one
        for i in range(len(letters)):
            # move letters[i:] in front of letters[:i]
            s = _sg((tot - head) * head)
            _acc(out, (alg.unit, letters[i:] + letters[:i]), s * one)
            head += degs[i]
        return out

    def check_mixed(self) -> Tuple[bool, bool, bool]:
        return (bool(check_square_zero(self.d)), bool(check_square_zero(self.B)),
                bool(check_square_zero(self.d, self.B)))


def hochschild_chain_model(A: AlgebraSlice, W: Optional[int] = None) -> HochschildChains:
    hc = HochschildChains(AlgebraDGA(A), W, "A⊗B(A)")
    return hc


# ---------------------------------------------------------------- coalgebra Hochschild complex


class CoalgebraHochschild(ChainComplex):
    """Ω(C) ⊗ C with its b and B.

    With c' ⊗ c'' a coproduct component of weights (i, j) and
    σ(i, j) = -(-1)^{ij} for i, j >= 1, σ(i, 0) = 1:

        b(ω⊗c) = dω⊗c + sum_{i>=1} (-1)^{|ω|} σ(i, j) ω<c'> ⊗ c''
                      + sum_{j>=1} (-1)^{|ω| j} τ(i) <c''>ω ⊗ c'

    where τ(0) = -1 and τ(i) = 1 otherwise.  σ(i, j) is the sign of the
    two-letter part of η, and these are exactly
    the signs for which ``id ⊗ η`` is a chain map into the Hochschild chains
    of Ω(C).

    B vanishes unless the coalgebra factor is the counit, and

        B(<u_1|...|u_m> ⊗ 1) = sum_i (-1)^{T_i (H_i + |u_i| + 1) + H_i}
                               <u_{i+1}|...|u_m|u_1|...|u_{i-1}> ⊗ u_i

    with H_i and T_i the total degrees of the letters before and after u_i.
    This is p₂ ∘ B ∘ q₂ written out.
    """

    def __init__(self, C: CoalgebraSlice, W: Optional[int] = None):
        self.dga = dga = CobarDGA(C, W)
        self.C = C
        W = dga.W
        self.W = W
        bases: Dict[Bideg, list] = {}
        for w in range(W + 1):
            for m in range(w + 1):
                for c in C.basis(m):
                    for om in dga.basis(w - m):
                        bases.setdefault((dga.degree(om) + m, w), []).append((om, c))
        fam = BigradedFamily("Ω⊗C", bases, C.field)
        super().__init__(fam, ChainMapFamily(fam, fam, (-1, 0), self._b, "b_C"), "Ω⊗C")
        self.B = ChainMapFamily(fam, fam, (1, 0), self._B, "B_C")

    def _b(self, lab):
        dga, C = self.dga, self.C
        om, c = lab
        m = c[0]
        deg_om = dga.degree(om)
        out: dict = {}
        for x, v in dga.d(om).items():
            _acc(out, (x, c), v)
        for i in range(1, m + 1):
            # c' of weight i goes into the cobar factor on the right
            s1 = _sg(deg_om) * _sigma(i, m - i)
            for (c1, c2), v in C.coproduct(c, i).items():
                _acc(out, (om + (c1,), c2), s1 * v)
        for j in range(1, m + 1):
            # c'' of weight j goes into the cobar factor on the left
            i = m - j
            s2 = _sg(deg_om * j) * (1 if i else -1)
            for (c1, c2), v in C.coproduct(c, i).items():
                _acc(out, ((c2,) + om, c1), s2 * v)
        return out

    def _B(self, lab):
        om, c = lab
        if c[0] != 0 or not om:
            return {}
        degs = [n - 1 for n, _ in om]
        tot = sum(degs)
        out: dict = {}
        head = 0
        one = self.C.field.one
        for i, u in enumerate(om):
            tail = tot - head - degs[i]
            s = _sg(tail * (head + degs[i] + 1) + head)
            _acc(out, (om[i + 1:] + om[:i], u), s * one)
            head += degs[i]
        return out

    def check_mixed(self) -> Tuple[bool, bool, bool]:
        return (bool(check_square_zero(self.d)), bool(check_square_zero(self.B)),
                bool(check_square_zero(self.d, self.B)))


def coalgebra_hochschild_model(C: CoalgebraSlice, W: Optional[int] = None) -> CoalgebraHochschild:
    return CoalgebraHochschild(C, W)


# ---------------------------------------------------------------- comparison maps


def iterated_coproduct(C: CoalgebraSlice, c) -> Dict[Tuple, object]:
    """All reduced iterated coproducts ``c_(1) ⊗ ... ⊗ c_(k)``, ``k >= 1``."""
    out: dict = {}

    def rec(prefix, coef, rest):
        _acc(out, prefix + (rest,), coef)
        for i in range(1, rest[0]):
            for (a, b), v in C.coproduct(rest, i).items():
                rec(prefix + (a,), coef * v, b)

    rec((), C.field.one, c)
    return out


def eta(C: CoalgebraSlice, c) -> Dict[Tuple, object]:
    """η: C → BΩ(C), sum of (-1)^{k-1+sum_{j<l} n_j n_l} [<c_(1)>|...|<c_(k)>].

    The sign is forced by requiring η(c) to be a cycle of the bar complex.
    """
    if c[0] == 0:
        return {(): C.field.one}
    out: dict = {}
    for labs, v in iterated_coproduct(C, c).items():
        ns = [x[0] for x in labs]
        e = len(ns) - 1 + sum(ns[j] * ns[k] for j in range(len(ns)) for k in range(j + 1, len(ns)))
        _acc(out, tuple((x,) for x in labs), _sg(e) * v)
    return out


def _phi2_sign(m: int) -> int:
    # (-1)^{2+3+...+m}
    return _sg(m * (m + 1) // 2 - 1) if m >= 1 else 1


class ComparisonMaps:
    """The maps between the four Hochschild models of a Koszul algebra.

        K(A) --φ₁--> A⊗B(A) <--p₁-- Ω⊗BΩ --p₂--> Ω⊗A^¡ --φ₂--> K(A)
                                     ^----q₂----'

    ``i``, ``p`` and ``q`` are the underlying maps A^¡ → B(A), Ω(A^¡) → A and
    the cobar inclusion; ``φ₂`` carries the sign (-1)^{2+...+m} on A^¡_m,
    which compensates the gauge of η.
    """

    def __init__(self, A: AlgebraSlice, C: CoalgebraSlice, W: Optional[int] = None):
        from .smallcx import KoszulHomologyComplex

        W = min(A.W, C.W) if W is None else W
        self.A, self.C, self.W = A, C, W
        self.K = KoszulHomologyComplex(A, C)
        self.HA = HochschildChains(AlgebraDGA(A), W, "A⊗B(A)")
        self.phi1 = ChainMapFamily(self.K.family, self.HA.family, (0, 0), self._phi1, "φ₁")

    # the remaining models are built on first use; Ω⊗BΩ is by far the largest
    @cached_property
    def omega(self) -> CobarDGA:
        return CobarDGA(self.C, self.W)

    @cached_property
    def HO(self) -> HochschildChains:
        return HochschildChains(self.omega, self.W, "Ω⊗BΩ")

    @cached_property
    def HC(self) -> "CoalgebraHochschild":
        return CoalgebraHochschild(self.C, self.W)

    @cached_property
    def bar(self) -> BarComplex:
        return BarComplex(AlgebraDGA(self.A), self.W)

    @cached_property
    def cobar(self) -> CobarComplex:
        return CobarComplex(self.C, self.W)

    @cached_property
    def i(self) -> ChainMapFamily:
        return ChainMapFamily(_coalg_family(self.C, self.W), self.bar.family, (0, 0), self._i, "i")

    @cached_property
    def p(self) -> ChainMapFamily:
        return ChainMapFamily(self.cobar.family, _alg_family(self.A, self.W), (0, 0), self._p_vec, "p")

    @cached_property
    def phi2(self) -> ChainMapFamily:
        return ChainMapFamily(self.HC.family, self.K.family, (0, 0), self._phi2, "φ₂")

    @cached_property
    def q2(self) -> ChainMapFamily:
        return ChainMapFamily(self.HC.family, self.HO.family, (0, 0), self._q2, "q₂")

    @cached_property
    def p1(self) -> ChainMapFamily:
        return ChainMapFamily(self.HO.family, self.HA.family, (0, 0), self._p1, "p₁")

    @cached_property
    def p2(self) -> ChainMapFamily:
        return ChainMapFamily(self.HO.family, self.HC.family, (0, 0), self._p2, "p₂")

    # underlying maps
    def _i(self, c):
        one = self.C.field.one
        if c[0] == 0:
            return {(): one}
        return {tuple((g,) for g in w): v for w, v in self.C.word_expansion(c).items()}

    def p_of(self, om) -> Dict:
        """p(ω): the product of the generators if every letter has weight 1."""
        if any(n != 1 for n, _ in om):
            return {}
        out = {(): self.A.field.one}
        for _, k in om:
            out = self.A.mul(out, {(k,): self.A.field.one})
        return out

    def _p_vec(self, om):
        return self.p_of(om)

    def _phi1(self, lab):
        a, c = lab
        return {(a, w): v for w, v in self._i(c).items()}

    def _phi2(self, lab):
        om, c = lab
        s = _phi2_sign(c[0])
        return {(a, c): s * v for a, v in self.p_of(om).items()}

    def _q2(self, lab):
        om, c = lab
        return {(om, w): v for w, v in eta(self.C, c).items()}

    def _p1(self, lab):
        om0, word = lab
        out = {(a, ()): v for a, v in self.p_of(om0).items()}
        for om in word:
            po = self.p_of(om)
            if not po:
                return {}
            nxt: dict = {}
            for (a, w), x in out.items():
                for b, y in po.items():
                    _acc(nxt, (a, w + (b,)), x * y)
            out = nxt
        return out

    def _p2(self, lab):
        """Nonzero only on words of length <= 1; the sign is μ_i plus the letters before u_i."""
        om, word = lab
        one = self.C.field.one
        if not word:
            return {(om, (0, 0)): one}
        if len(word) > 1:
            return {}
        u = word[0]
        degs = [n - 1 for n, _ in u]
        A = self.omega.degree(om)
        tot = sum(degs)
        out: dict = {}
        head = 0
        for i, x in enumerate(u):
            tail = tot - head - degs[i]
            mu = tail * (A + head + degs[i] + 1)
            _acc(out, (u[i + 1:] + om + u[:i], x), _sg(mu + head) * one)
            head += degs[i]
        return out

    # checks
    def chain_map_report(self) -> Dict[str, bool]:
        K, HA, HO, HC = self.K, self.HA, self.HO, self.HC
        rep = {
            "i": bool(check_commutes(self.i, _zero_d(self.i.source), self.bar.d)),
            "φ₁": bool(check_commutes(self.phi1, K.d, HA.d)),
            "φ₂": bool(check_commutes(self.phi2, HC.d, K.d)),
            "q₂": bool(check_commutes(self.q2, HC.d, HO.d)),
            "p₁": bool(check_commutes(self.p1, HO.d, HA.d)),
            "p₂": bool(check_commutes(self.p2, HO.d, HC.d)),
            "p₁B": bool(check_commutes(self.p1, HO.B, HA.B)),
            "p₂B": bool(check_commutes(self.p2, HO.B, HC.B)),
        }
        rep["p₂q₂=id"] = self.p2_q2_identity()
        return rep

    def p2_q2_identity(self) -> bool:
        fam = self.HC.family
        one = fam.field.one
        return all(self.p2.apply(self.q2.image(lab)) == {lab: one}
                   for b in fam.support() for lab in fam.basis(b))

    def quasi_iso_report(self) -> Dict[str, bool]:
        """Invertibility of the induced maps at every bidegree of the source."""
        out = {}
        for name, f, s, t in (("φ₁", self.phi1, self.K, self.HA), ("φ₂", self.phi2, self.HC, self.K),
                              ("q₂", self.q2, self.HC, self.HO), ("p₁", self.p1, self.HO, self.HA),
                              ("p₂", self.p2, self.HO, self.HC)):
            ok = True
            for b in set(s.family.support()) | set(t.family.support()):
                if s.homology(b).dim != t.homology(b).dim:
                    ok = False
                    break
                if s.homology(b).dim and not is_invertible(induced_on_homology(f, s, t, b)):
                    ok = False
                    break
            out[name] = ok
        return out

    def connes_on_K(self, b: Bideg):
        """Matrix of B_A transported to H(K(A)) at ``b`` (from ``b`` to ``b + (1, 0)``)."""
        from .complexes import matrix_inverse

        inv = matrix_inverse(induced_on_homology(self.phi1, self.K, self.HA, (b[0] + 1, b[1])))
        return inv @ induced_on_homology(self.HA.B, self.HA, self.HA, b) @ induced_on_homology(
            self.phi1, self.K, self.HA, b)

    def connes_on_K_from_coalgebra(self, b: Bideg):
        """B of Ω⊗A^¡ transported to H(K(A)) through φ₂."""
        from .complexes import matrix_inverse

        inv = matrix_inverse(induced_on_homology(self.phi2, self.HC, self.K, b))
        return induced_on_homology(self.phi2, self.HC, self.K, (b[0] + 1, b[1])) @ \
            induced_on_homology(self.HC.B, self.HC, self.HC, b) @ inv


def _coalg_family(C: CoalgebraSlice, W: int) -> BigradedFamily:
    return BigradedFamily("A^¡", {(n, n): C.basis(n) for n in range(W + 1) if C.dim(n)}, C.field)


def _alg_family(A: AlgebraSlice, W: int) -> BigradedFamily:
    return BigradedFamily("A", {(0, n): A.basis(n) for n in range(W + 1) if A.dim(n)}, A.field)


def _zero_d(fam: BigradedFamily) -> ChainMapFamily:
    return ChainMapFamily(fam, fam, (-1, 0), lambda lab: {}, "0")


def comparison_maps(A: AlgebraSlice, C: CoalgebraSlice, W: Optional[int] = None) -> ComparisonMaps:
    cm = ComparisonMaps(A, C, W)
    bad = [k for k, v in cm.chain_map_report().items() if not v]
    if bad:
        raise ArithmeticError(f"comparison maps fail: {', '.join(bad)}")
    return cm


# ---------------------------------------------------------------- cochains


class HochschildCochains(ChainComplex):
    """Normalized Hochschild cochains of an ungraded quadratic algebra, truncated.

    The elementary cochain ``(word, out)`` sends the bar word ``word`` to the
    normal word ``out`` and every other basis word to 0.  A cochain of arity
    n with output weight minus input weight s sits at ``(-n, s)``, matching
    the A⊗A^! model.  Only input weights ``w <= W - s`` (and ``w <= W``) are
    kept; δ never lowers input weight, so this is a quotient complex and the
    cup and circle products descend to it.

        (δf)(a_1..a_{n+1}) = a_1 f(a_2..) + sum_i (-1)^i f(..a_i a_{i+1}..)
                             + (-1)^{n+1} f(a_1..a_n) a_{n+1}
    """

    def __init__(self, A: AlgebraSlice, W: Optional[int] = None, length_cap: Optional[int] = None):
        W = A.W if W is None else W
        L = W if length_cap is None else length_cap
        self.A, self.W, self.L = A, W, L
        self.alg = alg = AlgebraDGA(A)
        cache: dict = {}
        self._words = {w: bar_words(alg, w, cache) for w in range(W + 1)}
        bases: Dict[Bideg, list] = {}
        for w in range(W + 1):
            for word in self._words[w]:
                n = len(word)
                if n > L:
                    continue
                for ow in range(W + 1):
                    s = ow - w
                    for out in A.basis(ow):
                        bases.setdefault((-n, s), []).append((word, out))
        # products landing on each normal word, for the merge terms of δ
        self._split: Dict[Tuple, List] = {}
        for w1 in range(1, W + 1):
            for w2 in range(1, W + 1 - w1):
                for p in A.basis(w1):
                    for q in A.basis(w2):
                        for t, c in A.mul_words(p, q).items():
                            self._split.setdefault(t, []).append((p, q, c))
        fam = BigradedFamily("C*(A,A)", bases, A.field)
        super().__init__(fam, ChainMapFamily(fam, fam, (-1, 0), self._delta, "δ"), "C*(A,A)")

    def in_cap(self, word_weight: int, s: int) -> bool:
        return word_weight <= self.W and 0 <= word_weight + s <= self.W

    def _delta(self, lab):
        word, out = lab
        A = self.A
        n = len(word)
        if n + 1 > self.L:
            return {}
        w = sum(len(a) for a in word)
        s = len(out) - w
        res: dict = {}
        for lw in range(1, self.W + 1):
            if not self.in_cap(w + lw, s):
                break
            for a in A.basis(lw):
                for t, c in A.mul_words(a, out).items():
                    _acc(res, ((a,) + word, t), c)
                for t, c in A.mul_words(out, a).items():
                    _acc(res, (word + (a,), t), _sg(n + 1) * c)
        for i, t in enumerate(word):
            for p, q, c in self._split.get(t, ()):
                _acc(res, (word[:i] + (p, q) + word[i + 1:], out), _sg(i + 1) * c)
        return res

    # -- evaluation and products

    @staticmethod
    def values(f: Mapping) -> Dict[Tuple, Dict]:
        """Regroup a cochain as word -> value in A."""
        out: Dict[Tuple, Dict] = {}
        for (word, o), c in f.items():
            _acc(out.setdefault(word, {}), o, c)
        return out

    def _from_values(self, vals: Mapping[Tuple, Mapping], s: int) -> Dict:
        out: dict = {}
        for word, v in vals.items():
            w = sum(len(a) for a in word)
            if not self.in_cap(w, s) or len(word) > self.L:
                continue
            for o, c in v.items():
                _acc(out, (word, o), c)
        return out

    def cup(self, f: Mapping, g: Mapping, sf: int, sg: int) -> Dict:
        """(f ∪ g)(a_1..a_{p+q}) = f(a_1..a_p) g(a_{p+1}..a_{p+q})."""
        A = self.A
        out: dict = {}
        for (wf, of), x in f.items():
            for (wg, og), y in g.items():
                if len(of) + len(og) > self.W:
                    continue
                for t, c in A.mul_words(of, og).items():
                    _acc(out, (wf + wg, t), x * y * c)
        return self._from_values(self.values(out), sf + sg)

    def circle(self, f: Mapping, g: Mapping, nf: int, ng: int, sf: int, sg: int,
               upper: Optional[int] = None) -> Dict:
        """f ∘ g = sum_{i=1}^{upper} (-1)^{(i-1)(m-1)} f ∘_i g with m the arity of g.

        ``upper`` defaults to n, the arity of f.
        """
        upper = nf if upper is None else upper
        out: dict = {}
        fv = self.values(f)
        for (wg, og), y in g.items():
            if len(og) == 0:
                # normalized f vanishes on the unit
                continue
            for wf, val in fv.items():
                for i in range(1, min(upper, nf) + 1):
                    if wf[i - 1] != og:
                        continue
                    sgn = _sg((i - 1) * (ng - 1))
                    word = wf[: i - 1] + wg + wf[i:]
                    for o, x in val.items():
                        _acc(out, (word, o), sgn * x * y)
        return self._from_values(self.values(out), sf + sg)

    def bracket(self, f: Mapping, g: Mapping, nf: int, ng: int, sf: int, sg: int,
                upper_shift: int = 0) -> Dict:
        """{f, g} = f∘g - (-1)^{(n-1)(m-1)} g∘f; ``upper_shift=-1`` uses the sums to n-1."""
        a = self.circle(f, g, nf, ng, sf, sg, nf + upper_shift)
        b = self.circle(g, f, ng, nf, sg, sf, ng + upper_shift)
        vaxpy(a, b, -_sg((nf - 1) * (ng - 1)))
        return a

    def exact_bidegree(self, b: Bideg) -> bool:
        """Same window as the A⊗A^! model; the restriction map is an isomorphism there."""
        m, s = -b[0], b[1]
        return m >= 0 and m + s >= 0 and m + s + 1 <= self.W and m + 1 <= min(self.W, self.L)


def restriction_to_koszul(cochains: HochschildCochains, kcx) -> ChainMapFamily:
    """i*: C*(A,A) → A⊗A^!, evaluation on A^¡ ⊂ B(A).

    An elementary cochain on a word of generators g contributes out ⊗ [g]
    with [g] the class of g in A^!; words with longer letters pair to zero.
    """
    Ad = kcx.Ad

    def img(lab):
        word, out = lab
        if any(len(a) != 1 for a in word):
            return {}
        g = tuple(a[0] for a in word)
        if len(g) > Ad.W:
            return {}
        return {(out, x): c for x, c in Ad.algebra.normal_form(g).items()}

    return ChainMapFamily(cochains.family, kcx.family, (0, 0), img, "i*")


def hochschild_cochain_model(A: AlgebraSlice, W: Optional[int] = None,
                             length_cap: Optional[int] = None) -> HochschildCochains:
    cx = HochschildCochains(A, W, length_cap)
    rep = check_square_zero(cx.d)
    if not rep:
        raise ArithmeticError(f"δ does not square to zero at {rep.bidegree}")
    return cx


class GerstenhaberTransport:
    """Cup and bracket of Hochschild cochains, read on H(A⊗A^!).

    A class of the small model is lifted along i*, the product is formed
    with cochains and restricted back.  The circle product of f and g is
    only known on input weights up to ``W - max(0, s_f, s_g)``; a result is
    reported only when that window covers what i* and the cocycle test need.
    """

    def __init__(self, Q: HochschildCochains, kcx, upper_shift: int = 0):
        from .complexes import matrix_inverse

        self.Q, self.kcx, self.upper_shift = Q, kcx, upper_shift
        self.r = restriction_to_koszul(Q, kcx)
        self._inv: Dict[Bideg, object] = {}
        self._matrix_inverse = matrix_inverse
        self.F = Q.family.field

    def exact(self, b: Bideg) -> bool:
        return self.Q.exact_bidegree(b) and self.kcx.exact_bidegree(b)

    def lift(self, b: Bideg, coords: Sequence) -> Dict:
        if b not in self._inv:
            self._inv[b] = self._matrix_inverse(induced_on_homology(self.r, self.Q, self.kcx, b, check=False))
        x = self._inv[b].apply({i: c for i, c in enumerate(coords) if c})
        hq = self.Q.homology(b)
        return hq.element([x.get(i, self.F.zero) for i in range(hq.dim)])

    def _restrict(self, h: Mapping, tb: Bideg) -> List:
        kcx = self.kcx
        ht = kcx.homology(tb)
        z = self.r.apply(h)
        if z and kcx.d.apply(z):
            raise ArithmeticError(f"restricted product is not a cocycle at {tb}")
        return ht.class_of(z) if z else [self.F.zero] * ht.dim

    def target(self, kind: str, b1: Bideg, b2: Bideg) -> Bideg:
        return (b1[0] + b2[0] + (1 if kind == "bracket" else 0), b1[1] + b2[1])

    def available(self, kind: str, b1: Bideg, b2: Bideg) -> bool:
        tb = self.target(kind, b1, b2)
        if not (self.exact(b1) and self.exact(b2) and self.exact(tb)):
            return False
        if kind == "cup":
            return True
        window = self.Q.W - max(0, b1[1], b2[1])
        return -tb[0] + 1 <= window

    def product(self, kind: str, b1: Bideg, u: Sequence, b2: Bideg, v: Sequence) -> Tuple[Bideg, List]:
        tb = self.target(kind, b1, b2)
        if not self.available(kind, b1, b2):
            raise ValueError(f"{kind} of {b1} and {b2} is outside the certified window")
        Q = self.Q
        f, g = self.lift(b1, u), self.lift(b2, v)
        if kind == "cup":
            h = Q.cup(f, g, b1[1], b2[1])
        else:
            h = Q.bracket(f, g, -b1[0], -b2[0], b1[1], b2[1], self.upper_shift)
            window = Q.W - max(0, b1[1], b2[1])
            h = {k: c for k, c in h.items() if sum(len(a) for a in k[0]) <= window}
        return tb, self._restrict(h, tb)


@dataclass
class GerstenhaberReport:
    ok: bool
    upper_shift: int
    checked: int
    failures: List[str] = dc_field(default_factory=list)


def gerstenhaber_axioms(T: GerstenhaberTransport, bidegrees: Optional[Sequence[Bideg]] = None,
                        max_failures: int = 5) -> GerstenhaberReport:
    """Graded commutativity and associativity of ∪, antisymmetry and Jacobi
    for the bracket, and the Poisson rule, on basis classes.

    Degrees are cohomological: a class at (-n, s) has degree n.  The
    Poisson rule is tested as {a, b∪c} = (-1)^{l(n-1)} {a,b}∪c + b∪{a,c}
    (l = |c|), which is Gerstenhaber's [f∪g, h] = [f,h]∪g + (-1)^{(|h|-1)|f|} f∪[g,h]
    rewritten through antisymmetry.  Only combinations whose every product
    is available are tested.
    """
    F = T.F
    kcx = T.kcx
    if bidegrees is None:
        bidegrees = [b for b in kcx.family.support() if T.exact(b) and kcx.homology(b).dim]
    basis = [(b, i) for b in bidegrees for i in range(kcx.homology(b).dim)]
    memo: dict = {}

    def e(b, i):
        return tuple(F.one if k == i else F.zero for k in range(kcx.homology(b).dim))

    def op(kind, b1, u, b2, v):
        key = (kind, b1, tuple(u), b2, tuple(v))
        if key not in memo:
            tb = T.target(kind, b1, b2)
            acc = [F.zero] * kcx.homology(tb).dim
            for i, x in enumerate(u):
                for j, y in enumerate(v):
                    if x and y:
                        bk = (kind, b1, e(b1, i), b2, e(b2, j))
                        if bk not in memo:
                            memo[bk] = T.product(kind, b1, e(b1, i), b2, e(b2, j))
                        acc = [p + x * y * q for p, q in zip(acc, memo[bk][1])]
            memo[key] = (tb, acc)
        return memo[key]

    av = T.available

    def comb(x, y, c):
        return [p + c * q for p, q in zip(x, y)]

    fails: List[str] = []
    checked = 0

    def check(cond, name, *items):
        nonlocal checked
        checked += 1
        if not cond and len(fails) < max_failures:
            fails.append(f"{name} at {items}")

    try:
        _axiom_loops(basis, e, op, av, comb, check, F)
    except ArithmeticError as exc:
        fails.append(f"not closed: {exc}")
    return GerstenhaberReport(not fails, T.upper_shift, checked, fails)


def _axiom_loops(basis, e, op, av, comb, check, F) -> None:
    for b1, i in basis:
        n = -b1[0]
        a = e(b1, i)
        for b2, j in basis:
            m = -b2[0]
            bb = e(b2, j)
            if av("cup", b1, b2):
                x = op("cup", b1, a, b2, bb)[1]
                y = op("cup", b2, bb, b1, a)[1]
                check(x == comb([F.zero] * len(x), y, _sg(n * m)), "cup commutativity", b1, i, b2, j)
            if av("bracket", b1, b2):
                x = op("bracket", b1, a, b2, bb)[1]
                y = op("bracket", b2, bb, b1, a)[1]
                check(x == comb([F.zero] * len(x), y, -_sg((n - 1) * (m - 1))), "antisymmetry", b1, i, b2, j)
            for b3, k in basis:
                c = e(b3, k)
                if av("cup", b1, b2) and av("cup", b2, b3):
                    tab, ab = op("cup", b1, a, b2, bb)
                    tbc, bc = op("cup", b2, bb, b3, c)
                    if av("cup", tab, b3) and av("cup", b1, tbc):
                        check(op("cup", tab, ab, b3, c)[1] == op("cup", b1, a, tbc, bc)[1],
                              "cup associativity", b1, i, b2, j, b3, k)
                if av("bracket", b2, b3) and av("bracket", b1, b2) and av("bracket", b1, b3):
                    tbc, bc = op("bracket", b2, bb, b3, c)
                    tab, ab = op("bracket", b1, a, b2, bb)
                    tac, ac = op("bracket", b1, a, b3, c)
                    if av("bracket", b1, tbc) and av("bracket", tab, b3) and av("bracket", b2, tac):
                        lhs = op("bracket", b1, a, tbc, bc)[1]
                        rhs = comb(op("bracket", tab, ab, b3, c)[1], op("bracket", b2, bb, tac, ac)[1],
                                   _sg((n - 1) * (m - 1)))
                        check(lhs == rhs, "Jacobi", b1, i, b2, j, b3, k)
                if av("cup", b2, b3) and av("bracket", b1, b2) and av("bracket", b1, b3):
                    tbc, bc = op("cup", b2, bb, b3, c)
                    tab, ab = op("bracket", b1, a, b2, bb)
                    tac, ac = op("bracket", b1, a, b3, c)
                    if av("bracket", b1, tbc) and av("cup", tab, b3) and av("cup", b2, tac):
                        lhs = op("bracket", b1, a, tbc, bc)[1]
                        l = -b3[0]
                        r1 = [_sg(l * (n - 1)) * q for q in op("cup", tab, ab, b3, c)[1]]
                        rhs = comb(r1, op("cup", b2, bb, tac, ac)[1], 1)
                        check(lhs == rhs, "Poisson", b1, i, b2, j, b3, k)
