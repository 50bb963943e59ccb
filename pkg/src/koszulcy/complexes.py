"""Bigraded chain complexes over pinned bases.

A :class:`BigradedFamily` attaches a finite list of hashable labels to each
bidegree ``(degree, weight)``.  Linear maps are given label by label and
turned into sparse matrices on demand.  Everything is computed one
bidegree at a time; the maps used in this package never change the weight,
so each weight column is an honest finite complex.

Cohomological complexes are stored homologically with the degree negated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

from .exact_linear import QQ, SparseMatrix, Solver, kernel_basis, rref_rows, vaxpy

Bideg = Tuple[int, int]
Elem = Dict[Hashable, object]


class ChainMapError(ArithmeticError):
    """A map that should commute with differentials does not."""


def _add(a: Bideg, b: Bideg) -> Bideg:
    return (a[0] + b[0], a[1] + b[1])


class BigradedFamily:
    """Pinned bases indexed by bidegree; zero outside the listed support."""

    def __init__(self, name: str, bases: Mapping[Bideg, Sequence[Hashable]], field=QQ):
        self.name = name
        self.field = field
        self._bases: Dict[Bideg, List[Hashable]] = {b: list(v) for b, v in bases.items() if len(v)}
        self._index: Dict[Bideg, Dict[Hashable, int]] = {
            b: {lab: i for i, lab in enumerate(v)} for b, v in self._bases.items()
        }
        self._where: Dict[Hashable, Bideg] = {}
        for b, v in self._bases.items():
            for lab in v:
                self._where[lab] = b

    def basis(self, b: Bideg) -> List[Hashable]:
        return self._bases.get(b, [])

    def dim(self, b: Bideg) -> int:
        return len(self._bases.get(b, ()))

    def index(self, b: Bideg) -> Dict[Hashable, int]:
        return self._index.get(b, {})

    def bidegree_of(self, label: Hashable) -> Bideg:
        return self._where[label]

    def __contains__(self, label) -> bool:
        return label in self._where

    def support(self) -> List[Bideg]:
        return sorted(self._bases, key=lambda b: (b[1], b[0]))

    def weights(self) -> List[int]:
        return sorted({b[1] for b in self._bases})

    def to_vector(self, b: Bideg, elem: Mapping) -> dict:
        idx = self.index(b)
        out = {}
        for lab, c in elem.items():
            if c:
                try:
                    out[idx[lab]] = c
                except KeyError:
                    raise KeyError(f"{lab!r} is not a basis label of {self.name} at {b}") from None
        return out

    def from_vector(self, b: Bideg, vec: Mapping) -> Elem:
        bas = self.basis(b)
        return {bas[i]: c for i, c in vec.items() if c}

    def total_dims(self) -> Dict[Bideg, int]:
        return {b: len(v) for b, v in sorted(self._bases.items())}

    def __repr__(self) -> str:
        return f"BigradedFamily({self.name!r}, {len(self._bases)} bidegrees)"


class ChainMapFamily:
    """A linear map of fixed complete degree defined on basis labels.

    ``fn(label)`` returns the image as a dict ``{target label: coeff}``.
    Images outside the target support are rejected.
    """

    def __init__(
        self,
        source: BigradedFamily,
        target: BigradedFamily,
        shift: Bideg,
        fn: Callable[[Hashable], Mapping],
        name: str = "",
    ):
        self.source = source
        self.target = target
        self.shift = shift
        self.fn = fn
        self.name = name
        self._cache: Dict[Hashable, Elem] = {}
        self._mats: Dict[Bideg, SparseMatrix] = {}

    def image(self, label: Hashable) -> Elem:
        out = self._cache.get(label)
        if out is None:
            out = {k: v for k, v in self.fn(label).items() if v}
            self._cache[label] = out
        return out

    def apply(self, elem: Mapping) -> Elem:
        out: dict = {}
        for lab, c in elem.items():
            if c:
                vaxpy(out, self.image(lab), c)
        return out

    def matrix(self, b: Bideg) -> SparseMatrix:
        m = self._mats.get(b)
        if m is not None:
            return m
        tb = _add(b, self.shift)
        tidx = self.target.index(tb)
        cols = []
        for lab in self.source.basis(b):
            col = {}
            for t, c in self.image(lab).items():
                j = tidx.get(t)
                if j is None:
                    raise KeyError(f"{self.name}: image {t!r} of {lab!r} falls outside {self.target.name} at {tb}")
                col[j] = c
            cols.append(col)
        m = SparseMatrix.from_columns(self.target.dim(tb), cols, self.source.field)
        self._mats[b] = m
        return m

    def compose(self, other: "ChainMapFamily", name: str = "") -> "ChainMapFamily":
        """``self`` after ``other``."""
        return ChainMapFamily(
            other.source,
            self.target,
            _add(self.shift, other.shift),
            lambda lab: self.apply(other.image(lab)),
            name or f"{self.name}*{other.name}",
        )

    def __repr__(self) -> str:
        return f"ChainMapFamily({self.name!r}: {self.source.name} -> {self.target.name}, shift={self.shift})"


def linear_combination(maps: Sequence[Tuple[object, ChainMapFamily]], name: str = "") -> ChainMapFamily:
    first = maps[0][1]

    def fn(lab):
        out: dict = {}
        for c, m in maps:
            vaxpy(out, m.image(lab), c)
        return out

    return ChainMapFamily(first.source, first.target, first.shift, fn, name)


def zero_map(source: BigradedFamily, target: BigradedFamily, shift: Bideg, name: str = "0") -> ChainMapFamily:
    return ChainMapFamily(source, target, shift, lambda lab: {}, name)


def identity_map(fam: BigradedFamily) -> ChainMapFamily:
    one = fam.field.one
    return ChainMapFamily(fam, fam, (0, 0), lambda lab: {lab: one}, "id")


# ---------------------------------------------------------------- square zero


@dataclass
class SquareZeroReport:
    ok: bool
    bidegree: Optional[Bideg] = None
    witness: Optional[Elem] = None

    def __bool__(self) -> bool:
        return self.ok


def check_square_zero(d: ChainMapFamily, e: Optional[ChainMapFamily] = None,
                      bidegrees: Optional[Iterable[Bideg]] = None) -> SquareZeroReport:
    """Check d*d = 0, or d*e + e*d = 0 when a second map is given."""
    for b in bidegrees if bidegrees is not None else d.source.support():
        for lab in d.source.basis(b):
            if e is None:
                v = d.apply(d.image(lab))
            else:
                v = d.apply(e.image(lab))
                vaxpy(v, e.apply(d.image(lab)), 1)
            if v:
                return SquareZeroReport(False, b, {lab: d.source.field.one})
    return SquareZeroReport(True)


def check_commutes(f: ChainMapFamily, d_src: ChainMapFamily, d_tgt: ChainMapFamily, sign: int = 1,
                   bidegrees: Optional[Iterable[Bideg]] = None) -> SquareZeroReport:
    """Check d_tgt*f = sign * f*d_src label by label."""
    for b in bidegrees if bidegrees is not None else f.source.support():
        for lab in f.source.basis(b):
            v = d_tgt.apply(f.image(lab))
            vaxpy(v, f.apply(d_src.image(lab)), -sign)
            if v:
                return SquareZeroReport(False, b, {lab: f.source.field.one})
    return SquareZeroReport(True)


# ---------------------------------------------------------------- homology


class HomologySlice:
    """Homology at one bidegree with pinned representatives."""

    def __init__(self, complex_: "ChainComplex", b: Bideg):
        self.bidegree = b
        fam = complex_.family
        self.family = fam
        d_out = complex_.d.matrix(b)
        into = (b[0] - complex_.d.shift[0], b[1] - complex_.d.shift[1])
        d_in = complex_.d.matrix(into) if fam.dim(into) else None
        n = fam.dim(b)
        ker = kernel_basis(d_out) if n else None
        self.cycle_dim = ker.dim if ker else 0
        boundaries = d_in.columns() if d_in is not None else []
        self._bnd = rref_rows(boundaries)
        self.boundary_dim = len(self._bnd)
        bpiv = [p for p, _ in self._bnd]
        reps = []
        ech: Dict[int, Tuple[dict, dict]] = {}
        if ker is not None:
            for z in ker.basis:
                r = self._reduce_boundary(z, bpiv)
                tag = {len(reps): fam.field.one}
                while r:
                    p = min(r)
                    hit = ech.get(p)
                    if hit is None:
                        inv = 1 / r[p]
                        ech[p] = ({k: x * inv for k, x in r.items()}, {k: x * inv for k, x in tag.items()})
                        reps.append(z)
                        break
                    c = r[p]
                    vaxpy(r, hit[0], -c)
                    vaxpy(tag, hit[1], -c)
        self._ech = ech
        self._rep_vectors = reps
        self.reps: List[Elem] = [fam.from_vector(b, z) for z in reps]
        self.dim = len(reps)
        self._bpiv = bpiv
        self._d_out = d_out

    def _reduce_boundary(self, v: Mapping, bpiv=None) -> dict:
        out = dict(v)
        for p, row in self._bnd:
            c = out.get(p)
            if c:
                vaxpy(out, row, -c)
        return out

    def class_of_vector(self, v: Mapping) -> List:
        if v and self._d_out.apply(v):
            raise ValueError(f"not a cycle at {self.bidegree}")
        r = self._reduce_boundary(v)
        coords: dict = {}
        while r:
            p = min(r)
            hit = self._ech.get(p)
            if hit is None:
                raise ArithmeticError("cycle outside the span of representatives and boundaries")
            c = r[p]
            vaxpy(r, hit[0], -c)
            vaxpy(coords, hit[1], c)
        z = self.family.field.zero
        return [coords.get(k, z) for k in range(self.dim)]

    def class_of(self, elem: Mapping) -> List:
        """Coordinates of the class of a cycle in the representative basis."""
        return self.class_of_vector(self.family.to_vector(self.bidegree, elem))

    def is_boundary(self, elem: Mapping) -> bool:
        return not self._reduce_boundary(self.family.to_vector(self.bidegree, elem))

    def element(self, coords: Sequence) -> Elem:
        out: dict = {}
        for c, r in zip(coords, self.reps):
            if c:
                vaxpy(out, r, c)
        return out

    def __repr__(self) -> str:
        return f"HomologySlice({self.family.name} at {self.bidegree}: dim {self.dim})"


class ChainComplex:
    """A bigraded family with a differential of complete degree (-1, 0)."""

    def __init__(self, family: BigradedFamily, d: ChainMapFamily, name: str = ""):
        if d.shift != (-1, 0):
            raise ValueError("differentials lower the degree by one and keep the weight")
        self.family = family
        self.d = d
        self.name = name or family.name
        self._h: Dict[Bideg, HomologySlice] = {}

    def homology(self, b: Bideg) -> HomologySlice:
        h = self._h.get(b)
        if h is None:
            h = HomologySlice(self, b)
            self._h[b] = h
        return h

    def homology_dims(self, bidegrees: Optional[Iterable[Bideg]] = None) -> Dict[Bideg, int]:
        out = {}
        for b in bidegrees if bidegrees is not None else self.family.support():
            out[b] = self.homology(b).dim
        return out

    def check_square_zero(self) -> SquareZeroReport:
        return check_square_zero(self.d)

    def euler_characteristic(self, weight: int, from_homology: bool = False) -> int:
        tot = 0
        for b in self.family.support():
            if b[1] == weight:
                n = self.homology(b).dim if from_homology else self.family.dim(b)
                tot += (-1) ** (b[0] % 2) * n
        return tot


def homology(cx: ChainComplex, b: Bideg) -> HomologySlice:
    return cx.homology(b)


def induced_on_homology(f: ChainMapFamily, src: ChainComplex, tgt: ChainComplex, b: Bideg,
                        check: bool = True) -> SparseMatrix:
    """Matrix of H(f) from the representative basis at ``b`` to the one at ``b + shift``."""
    hs = src.homology(b)
    tb = _add(b, f.shift)
    ht = tgt.homology(tb)
    cols = []
    for rep in hs.reps:
        img = f.apply(rep)
        if check and img and tgt.d.apply(img):
            raise ChainMapError(f"{f.name}: image of a cycle at {b} is not a cycle")
        coords = ht.class_of(img) if img else [0] * ht.dim
        cols.append({i: c for i, c in enumerate(coords) if c})
    return SparseMatrix.from_columns(ht.dim, cols, src.family.field)


def lift_through_quasi_iso(f: ChainMapFamily, src: ChainComplex, tgt: ChainComplex, z: Mapping,
                           b: Bideg) -> Tuple[Elem, Elem]:
    """Find a source cycle w and u with f(w) - z = d(u).

    ``b`` is the bidegree of ``z`` in the target; w lives at ``b - shift``.
    """
    sb = (b[0] - f.shift[0], b[1] - f.shift[1])
    hs = src.homology(sb)
    bu = (b[0] + 1, b[1])
    u_basis = tgt.family.basis(bu)
    cols = []
    for rep in hs.reps:
        cols.append(tgt.family.to_vector(b, f.apply(rep)))
    for lab in u_basis:
        img = tgt.d.image(lab)
        cols.append({k: -c for k, c in tgt.family.to_vector(b, img).items()})
    # cycles of the source that are boundaries map to boundaries, so reps suffice
    m = SparseMatrix.from_columns(tgt.family.dim(b), cols, src.family.field)
    x = Solver(m).solve(tgt.family.to_vector(b, z))
    w: dict = {}
    u: dict = {}
    for i, c in x.items():
        if i < hs.dim:
            vaxpy(w, hs.reps[i], c)
        else:
            u[u_basis[i - hs.dim]] = c
    return w, u


def matrix_inverse(m: SparseMatrix) -> SparseMatrix:
    if m.nrows != m.ncols:
        raise ValueError("only square matrices are invertible")
    s = Solver(m)
    if s.rank != m.nrows:
        raise ArithmeticError("matrix is singular")
    cols = [s.solve({i: m.field.one}) for i in range(m.nrows)]
    return SparseMatrix.from_columns(m.nrows, cols, m.field)


def is_invertible(m: SparseMatrix) -> bool:
    return m.nrows == m.ncols and Solver(m).rank == m.nrows
