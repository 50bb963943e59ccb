"""Cyclic theories of a weight-graded mixed complex (C, b, B).

Every model here splits by weight and is finite in each weight, so the
u-adic complexes are finite per (degree, weight).  A truncation keeps the
powers ``u^i`` with ``lo <= i <= hi``:

* ``minus``    CC⁻ = C[[u]],                 powers 0..U
* ``cyclic``   CC  = C[u⁻¹] (u·u⁰ = 0),      powers -U..0
* ``periodic`` CC^per = C[[u, u⁻¹]],         powers -U..U

``x u^i`` sits at ``(|x| - 2i, weight)`` and ``d(x u^i) = bx u^i + Bx u^{i+1}``.
A bidegree is certified when every power that can carry a nonzero chain in
the three degrees around it lies inside the kept range; there the truncated
homology equals the untruncated one.  Characteristic zero only.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Dict, List, Mapping, Optional, Tuple

from .complexes import (
    BigradedFamily,
    ChainComplex,
    ChainMapFamily,
    check_commutes,
    check_square_zero,
    induced_on_homology,
    is_invertible,
    matrix_inverse,
)
from .exact_linear import SparseMatrix, rank, vaxpy

Bideg = Tuple[int, int]
Cls = Tuple[Bideg, int]

VARIANTS = ("minus", "cyclic", "periodic")


def _sg(e: int) -> int:
    return -1 if e % 2 else 1


def _acc(out: dict, key, c) -> None:
    v = out.get(key)
    v = c if v is None else v + c
    if v:
        out[key] = v
    else:
        out.pop(key, None)


class CharacteristicError(ValueError):
    """Cyclic theories are only computed in characteristic zero."""


class MixedComplex:
    """Bare (C, b, B); the Hochschild models already have this shape."""

    def __init__(self, complex_: ChainComplex, B: ChainMapFamily):
        if B.shift != (1, 0):
            raise ValueError("B raises the degree by one and keeps the weight")
        self.complex = complex_
        self.family = complex_.family
        self.d = complex_.d
        self.B = B
        self.name = complex_.name

    def homology(self, b: Bideg):
        return self.complex.homology(b)


def as_mixed(model) -> MixedComplex:
    if isinstance(model, MixedComplex):
        return model
    return MixedComplex(model, model.B)


def zero_B(cx: ChainComplex) -> MixedComplex:
    return MixedComplex(cx, ChainMapFamily(cx.family, cx.family, (1, 0), lambda lab: {}, "0"))


# ---------------------------------------------------------------- truncations


class MixedTruncation(ChainComplex):
    def __init__(self, model, U: int, variant: str = "minus"):
        if variant not in VARIANTS:
            raise ValueError(f"variant must be one of {', '.join(VARIANTS)}")
        if U < 0:
            raise ValueError("truncation order must be nonnegative")
        mx = as_mixed(model)
        F = mx.family.field
        if F.characteristic != 0:
            raise CharacteristicError("cyclic homology is computed over fields of characteristic 0 only")
        self.model, self.U, self.variant = mx, U, variant
        self.lo, self.hi = {"minus": (0, U), "cyclic": (-U, 0), "periodic": (-U, U)}[variant]
        self._range: Dict[int, Tuple[int, int]] = {}
        bases: Dict[Bideg, list] = {}
        for b in mx.family.support():
            lo, hi = self._range.get(b[1], (b[0], b[0]))
            self._range[b[1]] = (min(lo, b[0]), max(hi, b[0]))
            for i in range(self.lo, self.hi + 1):
                key = (b[0] - 2 * i, b[1])
                bases.setdefault(key, []).extend((lab, i) for lab in mx.family.basis(b))
        sym = {"minus": "CC⁻", "cyclic": "CC", "periodic": "CC^per"}[variant]
        fam = BigradedFamily(f"{sym}({mx.name}; U={U})", bases, F)
        super().__init__(fam, ChainMapFamily(fam, fam, (-1, 0), self._d, "b+uB"), fam.name)

    def _d(self, lab):
        x, i = lab
        out: dict = {}
        for y, c in self.model.d.image(x).items():
            _acc(out, (y, i), c)
        if i + 1 <= self.hi:
            for y, c in self.model.B.image(x).items():
                _acc(out, (y, i + 1), c)
        return out

    def _needed(self, N: int, w: int) -> Tuple[int, int]:
        """Powers i with a model chain at degree N + 2i, clipped to the intrinsic range."""
        dmin, dmax = self._range[w]
        lo = -((N - dmin) // 2)  # smallest i with N + 2i >= dmin
        hi = (dmax - N) // 2
        if self.variant == "minus":
            lo = max(lo, 0)
        elif self.variant == "cyclic":
            hi = min(hi, 0)
        return lo, hi

    def certified(self, b: Bideg) -> bool:
        N, w = b
        if w not in self._range:
            return True
        for k in (N - 1, N, N + 1):
            lo, hi = self._needed(k, w)
            if lo <= hi and (lo < self.lo or hi > self.hi):
                return False
        return True

    def support_certified(self) -> List[Bideg]:
        return [b for b in self.family.support() if self.certified(b)]

    # maps to and from the underlying complex
    def projection(self) -> ChainMapFamily:
        """π: Σ x_i u^i ↦ x_0 (a chain map for CC⁻)."""
        return ChainMapFamily(self.family, self.model.family, (0, 0),
                              lambda lab: {lab[0]: self.family.field.one} if lab[1] == 0 else {}, "π")

    def inclusion(self) -> ChainMapFamily:
        """x ↦ x u⁰ (E, a chain map for CC)."""
        return ChainMapFamily(self.model.family, self.family, (0, 0),
                              lambda x: {(x, 0): self.family.field.one}, "E")

    def u_map(self) -> ChainMapFamily:
        one = self.family.field.one
        return ChainMapFamily(self.family, self.family, (-2, 0),
                              lambda lab: {(lab[0], lab[1] + 1): one} if lab[1] + 1 <= self.hi else {}, "u")

    def beta(self) -> ChainMapFamily:
        """β: HH → HC⁻ of one degree higher, x ↦ B(x) u⁰."""
        return ChainMapFamily(self.model.family, self.family, (1, 0),
                              lambda x: {(y, 0): c for y, c in self.model.B.image(x).items()}, "β")

    def connecting_M(self) -> ChainMapFamily:
        """M: HC → HH one degree higher, Σ x_i u^{-i} ↦ B(x_0)."""
        return ChainMapFamily(self.family, self.model.family, (1, 0),
                              lambda lab: dict(self.model.B.image(lab[0])) if lab[1] == 0 else {}, "M")

    def lift(self, f: ChainMapFamily, target: "MixedTruncation") -> ChainMapFamily:
        """u-linear extension of a map of mixed complexes."""
        return ChainMapFamily(self.family, target.family, f.shift,
                              lambda lab: {(y, lab[1]): c for y, c in f.image(lab[0]).items()},
                              f"{f.name}[[u]]")


def truncate(model, U: int, variant: str = "minus") -> MixedTruncation:
    mt = MixedTruncation(model, U, variant)
    rep = check_square_zero(mt.d)
    if not rep:
        raise ArithmeticError(f"(b + uB)² ≠ 0 at {rep.bidegree}")
    return mt


@dataclass
class CyclicGroups:
    variant: str
    U: int
    ranks: Dict[Bideg, int]
    uncertified: List[Bideg]
    stable: bool
    truncation: MixedTruncation = dc_field(repr=False)

    def representatives(self, b: Bideg) -> List[Dict]:
        return self.truncation.homology(b).reps


def cyclic_groups(model, U: int, variant: str = "minus") -> CyclicGroups:
    """Ranks on the certified window; the U+1 run must agree there."""
    mt = truncate(model, U, variant)
    nxt = truncate(model, U + 1, variant)
    ranks, unc = {}, []
    stable = True
    for b in sorted(set(mt.family.support()) | set(nxt.family.support()), key=lambda b: (b[1], b[0])):
        if not mt.certified(b):
            unc.append(b)
            continue
        r = mt.homology(b).dim
        ranks[b] = r
        if nxt.homology(b).dim != r:
            stable = False
    if not stable:
        raise ArithmeticError("a certified rank changed between U and U+1")
    return CyclicGroups(variant, U, ranks, unc, stable, mt)


# ---------------------------------------------------------------- exact sequences


def _zero(nrows: int, ncols: int, F) -> SparseMatrix:
    return SparseMatrix.zero(nrows, ncols, F)


@dataclass
class ConnesSequenceReport:
    U: int
    ranks: Dict[str, Dict[Bideg, int]]
    exact: bool
    nodes: int
    identities: Dict[str, bool]
    failures: List[str]

    @property
    def ok(self) -> bool:
        return self.exact and all(self.identities.values())

    def summary(self) -> str:
        if self.ok:
            return f"connes: exact at {self.nodes} certified nodes; " + ", ".join(self.identities)
        return "connes: FAIL " + "; ".join(self.failures[:3])


class _Hom:
    """Matrices of induced maps between the homologies of two complexes, with zero padding."""

    def __init__(self, f: ChainMapFamily, src, tgt):
        self.f, self.src, self.tgt = f, src, tgt
        self._m: Dict[Bideg, SparseMatrix] = {}

    def __call__(self, b: Bideg) -> SparseMatrix:
        m = self._m.get(b)
        if m is None:
            tb = (b[0] + self.f.shift[0], b[1] + self.f.shift[1])
            hs, ht = self.src.homology(b).dim, self.tgt.homology(tb).dim
            if hs == 0 or ht == 0:
                m = _zero(ht, hs, self.src.family.field)
            else:
                m = induced_on_homology(self.f, self.src, self.tgt, b)
            self._m[b] = m
        return m


def _exact_at(f_in: SparseMatrix, g_out: SparseMatrix, dim: int) -> bool:
    if not (g_out @ f_in).is_zero():
        return False
    return rank(f_in) + rank(g_out) == dim


def connes_sequence_check(model, U: int) -> ConnesSequenceReport:
    """Both long exact sequences, node by node, plus B = M∘E, β∘π★ = 0 and π★∘β = B."""
    mx = as_mixed(model)
    cc = truncate(mx, U, "cyclic")
    cm = truncate(mx, U, "minus")
    H = mx.complex
    E, M, S = _Hom(cc.inclusion(), H, cc), _Hom(cc.connecting_M(), cc, H), _Hom(cc.u_map(), cc, cc)
    P, Bt, Um = _Hom(cm.projection(), cm, H), _Hom(cm.beta(), H, cm), _Hom(cm.u_map(), cm, cm)
    BH = _Hom(mx.B, H, H)
    failures: List[str] = []
    nodes = 0
    ranks = {"HH": {}, "HC": {}, "HC⁻": {}}
    weights = mx.family.weights()
    ident = {"B=M∘E": True, "β∘π★=0": True, "π★∘β=B": True}

    def node(label: str, f_in: SparseMatrix, g_out: SparseMatrix, dim: int) -> None:
        nonlocal nodes
        nodes += 1
        if not _exact_at(f_in, g_out, dim):
            failures.append(f"not exact at {label}")

    for w in weights:
        degs = [b[0] for b in cc.family.support() + cm.family.support() + mx.family.support() if b[1] == w]
        lo, hi = min(degs) - 2, max(degs) + 2
        for N in range(lo, hi + 1):
            b = (N, w)
            ranks["HH"][b] = H.homology(b).dim
            if cc.certified(b):
                ranks["HC"][b] = cc.homology(b).dim
            if cm.certified(b):
                ranks["HC⁻"][b] = cm.homology(b).dim
            hh = ranks["HH"][b]
            # HH_N -E-> HC_N -S-> HC_{N-2} -M-> HH_{N-1} -E-> HC_{N-1}
            if cc.certified(b) and cc.certified((N - 2, w)):
                node(f"HC{b} (E→S)", E(b), S(b), cc.homology(b).dim)
            if cc.certified((N + 2, w)) and cc.certified(b):
                node(f"HC{b} (S→M)", S((N + 2, w)), M(b), cc.homology(b).dim)
            if cc.certified((N - 1, w)) and cc.certified(b):
                node(f"HH{b} (M→E)", M((N - 1, w)), E(b), hh)
            # HC⁻_{N+2} -u-> HC⁻_N -π★-> HH_N -β-> HC⁻_{N+1} -u-> HC⁻_{N-1}
            if cm.certified((N + 2, w)) and cm.certified(b):
                node(f"HC⁻{b} (u→π★)", Um((N + 2, w)), P(b), cm.homology(b).dim)
            if cm.certified(b) and cm.certified((N + 1, w)):
                node(f"HH{b} (π★→β)", P(b), Bt(b), hh)
            if cm.certified((N + 1, w)) and cm.certified((N - 1, w)):
                node(f"HC⁻{(N + 1, w)} (β→u)", Bt(b), Um((N + 1, w)), cm.homology((N + 1, w)).dim)
            # identities on homology
            if cc.certified(b) and hh:
                if not (M(b) @ E(b) - BH(b)).is_zero():
                    ident["B=M∘E"] = False
                    failures.append(f"B ≠ M∘E at {b}")
            if cm.certified(b) and cm.certified((N + 1, w)):
                if not (Bt(b) @ P(b)).is_zero():
                    ident["β∘π★=0"] = False
                    failures.append(f"β∘π★ ≠ 0 at {b}")
                if hh and not (P((N + 1, w)) @ Bt(b) - BH(b)).is_zero():
                    ident["π★∘β=B"] = False
                    failures.append(f"π★∘β ≠ B at {b}")
    return ConnesSequenceReport(U, ranks, not any(f.startswith("not exact") for f in failures),
                                nodes, ident, failures)


# ---------------------------------------------------------------- products on HH


@dataclass
class HHProduct:
    """A graded commutative product on H(model), moved over from a BV structure.

    ``to_hh[b]`` maps BV classes at ``b`` to homology of the model at
    ``b + (n, n)``; the product on homology then has complete degree (-n, -n).
    """

    model: object
    bv: object
    n: int
    to_hh: Dict[Bideg, SparseMatrix]
    from_hh: Dict[Bideg, SparseMatrix]

    def hh_bidegree(self, b: Bideg) -> Bideg:
        return (b[0] + self.n, b[1] + self.n)

    def bv_bidegree(self, hb: Bideg) -> Bideg:
        return (hb[0] - self.n, hb[1] - self.n)

    def degree(self, hb: Bideg) -> int:
        """Degree after the shift by n; its parity is that of the BV degree."""
        return hb[0] - self.n

    def known(self, hb: Bideg) -> bool:
        return self.bv_bidegree(hb) in self.from_hh

    def mul(self, b1: Bideg, v1: Mapping[int, object], b2: Bideg, v2: Mapping[int, object]) -> Optional[Tuple[Bideg, Dict[int, object]]]:
        c1, c2 = self.bv_bidegree(b1), self.bv_bidegree(b2)
        if c1 not in self.from_hh or c2 not in self.from_hh:
            return None
        x = {(c1, i): c for i, c in self.from_hh[c1].apply(v1).items()}
        y = {(c2, i): c for i, c in self.from_hh[c2].apply(v2).items()}
        tc = (c1[0] + c2[0], c1[1] + c2[1])
        tb = self.hh_bidegree(tc)
        if not x or not y:
            return tb, {}
        p = self.bv.mul(x, y)
        if p is None or (p and tc not in self.to_hh):
            return None
        if not p:
            return tb, {}
        vec = {}
        for (cb, i), c in p.items():
            vec[i] = c
        return tb, self.to_hh[tc].apply(vec)


def hh_product(models, bv, side: str = "A") -> HHProduct:
    """Transport the cup product of ``bv`` to H(A⊗B(A)) (side A) or H(Ω⊗A^¡) (side A!)."""
    to, frm = {}, {}
    for b in bv.dims:
        kb = models.shifted(b)
        if side == "A":
            T = models.H("φ₁", kb) @ models.H("PD", b)
        else:
            T = models.H("PD'", b)
        if not is_invertible(T):
            raise ArithmeticError(f"duality is not an isomorphism at {b}")
        to[b], frm[b] = T, matrix_inverse(T)
    model = models.cm.HA if side == "A" else models.cm.HC
    return HHProduct(model, bv, models.n, to, frm)


# ---------------------------------------------------------------- brackets


@dataclass
class BracketTable:
    """A bilinear bracket on class bases; ``sdeg`` is the degree used in the Lie signs."""

    name: str
    table: Dict[Tuple[Cls, Cls], Dict[Cls, object]]
    sdeg: Dict[Bideg, int]
    field: object

    def bracket(self, x: Mapping[Cls, object], y: Mapping[Cls, object]) -> Optional[Dict[Cls, object]]:
        out: dict = {}
        for p, c in x.items():
            for q, d in y.items():
                v = self.table.get((p, q))
                if v is None:
                    return None
                vaxpy(out, v, c * d)
        return out

    def antisymmetry(self) -> Tuple[int, List[str]]:
        checked, bad = 0, []
        for (p, q), v in self.table.items():
            w = self.table.get((q, p))
            if w is None:
                continue
            checked += 1
            s = _sg(self.sdeg[p[0]] * self.sdeg[q[0]])
            tot = dict(v)
            vaxpy(tot, w, s)
            if tot:
                bad.append(f"{{{p},{q}}} + (−1)^(..){{{q},{p}}} = {tot}")
        return checked, bad

    def jacobi(self, limit: Optional[int] = None) -> Tuple[int, List[str]]:
        """Σ_cyc (−1)^{|a||c|} {{a,b},c} = 0 on basis triples where every term is known."""
        classes = sorted({p for p, _ in self.table} | {q for _, q in self.table})
        checked, bad = 0, []
        for a in classes:
            for b in classes:
                for c in classes:
                    terms = []
                    for (x, y, z) in ((a, b, c), (c, a, b), (b, c, a)):
                        inner = self.table.get((x, y))
                        if inner is None:
                            break
                        outer = self.bracket(inner, {z: 1})
                        if outer is None:
                            break
                        terms.append((_sg(self.sdeg[x[0]] * self.sdeg[z[0]]), outer))
                    if len(terms) < 3:
                        continue
                    checked += 1
                    tot: dict = {}
                    for s, v in terms:
                        vaxpy(tot, v, s)
                    if tot:
                        bad.append(f"Jacobi({a},{b},{c}) = {tot}")
                    if limit is not None and checked >= limit:
                        return checked, bad
        return checked, bad

    def nonzero_entries(self) -> int:
        return sum(1 for v in self.table.values() if v)


def _basis_vectors(mt: MixedTruncation, bideg: List[Bideg]):
    for b in bideg:
        d = mt.homology(b).dim
        for i in range(d):
            yield b, i


def hcminus_bracket(mt: MixedTruncation, prod: HHProduct) -> BracketTable:
    """{a,b} = (−1)^{|a|} β(π★a • π★b) on the certified classes of HC⁻; degree one."""
    if mt.variant != "minus":
        raise ValueError("the degree-one bracket lives on HC⁻")
    H = mt.model.complex
    P, Bt = _Hom(mt.projection(), mt, H), _Hom(mt.beta(), H, mt)
    F = mt.family.field
    cert = [b for b in mt.support_certified() if mt.homology(b).dim]
    table: Dict[Tuple[Cls, Cls], Dict[Cls, object]] = {}
    sdeg = {b: prod.degree(b) + 1 for b in cert}
    for b1, i in _basis_vectors(mt, cert):
        pa = P(b1).apply({i: F.one})
        for b2, j in _basis_vectors(mt, cert):
            pb = P(b2).apply({j: F.one})
            tb = (b1[0] + b2[0] - prod.n + 1, b1[1] + b2[1] - prod.n)
            if not mt.certified(tb) or not mt.certified((tb[0] - 1, tb[1])):
                continue
            if not pa or not pb:
                table[((b1, i), (b2, j))] = {}
                continue
            r = prod.mul(b1, pa, b2, pb)
            if r is None:
                continue
            hb, v = r
            out = Bt(hb).apply(v) if v else {}
            s = _sg(prod.degree(b1))
            table[((b1, i), (b2, j))] = {(tb, k): s * c for k, c in out.items() if c}
            sdeg.setdefault(tb, prod.degree(tb) + 1)
    return BracketTable("HC⁻ degree-one bracket", table, sdeg, F)


def menichi_bracket(mt: MixedTruncation, prod: HHProduct) -> BracketTable:
    """{a,b} = (−1)^{|a|+1} E(M a • M b) on the certified classes of HC; degree two."""
    if mt.variant != "cyclic":
        raise ValueError("the degree-two bracket lives on HC")
    H = mt.model.complex
    Mh, Eh = _Hom(mt.connecting_M(), mt, H), _Hom(mt.inclusion(), H, mt)
    F = mt.family.field
    cert = [b for b in mt.support_certified() if mt.homology(b).dim]
    table: Dict[Tuple[Cls, Cls], Dict[Cls, object]] = {}
    sdeg = {b: prod.degree(b) for b in cert}
    for b1, i in _basis_vectors(mt, cert):
        ma = Mh(b1).apply({i: F.one})
        for b2, j in _basis_vectors(mt, cert):
            mb = Mh(b2).apply({j: F.one})
            tb = (b1[0] + b2[0] + 2 - prod.n, b1[1] + b2[1] - prod.n)
            if not mt.certified(tb):
                continue
            if not ma or not mb:
                table[((b1, i), (b2, j))] = {}
                continue
            r = prod.mul((b1[0] + 1, b1[1]), ma, (b2[0] + 1, b2[1]), mb)
            if r is None:
                continue
            hb, v = r
            out = Eh(hb).apply(v) if v else {}
            s = _sg(prod.degree(b1) + 1)
            table[((b1, i), (b2, j))] = {(tb, k): s * c for k, c in out.items() if c}
            sdeg.setdefault(tb, prod.degree(tb))
    return BracketTable("HC degree-two bracket", table, sdeg, F)


@dataclass
class LieReport:
    name: str
    pairs: int
    triples: int
    failures: List[str]
    nonzero: int

    @property
    def ok(self) -> bool:
        return not self.failures


def lie_axioms(bt: BracketTable, jacobi_limit: Optional[int] = None) -> LieReport:
    pairs, bad = bt.antisymmetry()
    triples, bad2 = bt.jacobi(jacobi_limit)
    return LieReport(bt.name, pairs, triples, bad + bad2, bt.nonzero_entries())


# ---------------------------------------------------------------- HC⁻(A) ≅ HC^{-•}(A^!)


@dataclass
class CyclicBracketReport:
    ok: bool
    W: int
    U: int
    compared: int
    nonzero: int
    failures: List[str]
    lie: Dict[str, LieReport]
    iso_bidegrees: List[Bideg]

    def summary(self) -> str:
        if self.ok:
            return (f"cyclic-lie: PASS ({self.compared} bracket pairs agree, {self.nonzero} nonzero, "
                    f"U={self.U}, W={self.W})")
        return "cyclic-lie: FAIL " + "; ".join(self.failures[:3])


def cyclic_bracket_check(datum, W: Optional[int] = None, U: int = 3, budget: int = 2000,
                     models=None) -> CyclicBracketReport:
    """Compare the HC⁻ bracket of A with the one of the coalgebra side through Ω⊗BΩ.

    p₁ and p₂ are maps of mixed complexes, so Φ = H(p₂)∘H(p₁)⁻¹ is an
    isomorphism HC⁻(A⊗B(A)) → HC⁻(Ω⊗A^¡); the check is Φ{a,b}_A = {Φa, Φb}_C.
    """
    from .calabi_yau import CYModels, bv_delta, cy_check

    if datum.field.characteristic != 0:
        raise CharacteristicError("cyclic homology is computed over fields of characteristic 0 only")
    if models is None:
        cert = cy_check(datum, W, budget)
        models = CYModels(cert, W)
    W = models.W
    cm = models.cm
    failures: List[str] = []
    for name in ("p₁B", "p₂B"):
        f = cm.p1 if name == "p₁B" else cm.p2
        tgt = cm.HA if name == "p₁B" else cm.HC
        if not check_commutes(f, cm.HO.B, tgt.B):
            failures.append(f"{name[:2]} does not commute with B")
    bvA, bvC = bv_delta(models, "A"), bv_delta(models, "A!")
    PA, PC = hh_product(models, bvA, "A"), hh_product(models, bvC, "A!")
    mA, mC, mO = truncate(cm.HA, U), truncate(cm.HC, U), truncate(cm.HO, U)
    brA, brC = hcminus_bracket(mA, PA), hcminus_bracket(mC, PC)
    h1 = _Hom(mO.lift(cm.p1, mA), mO, mA)
    h2 = _Hom(mO.lift(cm.p2, mC), mO, mC)
    phi: Dict[Bideg, SparseMatrix] = {}
    iso = []
    for b in mA.support_certified():
        if not (mC.certified(b) and mO.certified(b)):
            continue
        dA, dC = mA.homology(b).dim, mC.homology(b).dim
        if dA != dC:
            failures.append(f"HC⁻ ranks differ at {b}: {dA} vs {dC}")
            continue
        if not dA:
            continue
        A1, A2 = h1(b), h2(b)
        if not (is_invertible(A1) and is_invertible(A2)):
            failures.append(f"p₁ or p₂ is not an isomorphism on HC⁻ at {b}")
            continue
        phi[b] = A2 @ matrix_inverse(A1)
        iso.append(b)

    def move(x: Mapping[Cls, object]) -> Optional[Dict[Cls, object]]:
        out: dict = {}
        for (b, i), c in x.items():
            if b not in phi:
                return None
            for j, v in phi[b].apply({i: c}).items():
                _acc(out, (b, j), v)
        return out

    compared = nonzero = 0
    for (p, q), v in sorted(brA.table.items()):
        if p[0] not in phi or q[0] not in phi:
            continue
        lhs = move(v)
        rhs = brC.bracket(move({p: 1}), move({q: 1}))
        if lhs is None or rhs is None:
            continue
        compared += 1
        nonzero += bool(v)
        if lhs != rhs:
            failures.append(f"Φ{{{p},{q}}}_A ≠ {{Φ{p},Φ{q}}}_C")
    lie = {"A": lie_axioms(brA), "A!": lie_axioms(brC)}
    for side, rep in lie.items():
        failures.extend(f"{side}: {f}" for f in rep.failures[:3])
    return CyclicBracketReport(not failures, W, U, compared, nonzero, failures, lie, iso)
