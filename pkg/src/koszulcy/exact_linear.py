"""Exact scalars and sparse linear algebra over Q or F_p.

Vectors are plain dicts ``{index: value}`` holding only nonzero entries.
Matrices keep one such dict per row.  Every basis, representative and
solution produced here is pinned by reduced row echelon form so repeated
runs give identical output.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

Vec = Dict[int, object]


class NoSolution(ValueError):
    """Raised when a linear system has no solution."""


class DimensionMismatch(ValueError):
    pass


# ---------------------------------------------------------------- fields


class RationalField:
    """The field Q, elements are :class:`fractions.Fraction`."""

    characteristic = 0
    name = "q"

    def __call__(self, x) -> Fraction:
        if isinstance(x, Fraction):
            return x
        if isinstance(x, str):
            return Fraction(x.strip())
        return Fraction(x)

    @property
    def zero(self) -> Fraction:
        return Fraction(0)

    @property
    def one(self) -> Fraction:
        return Fraction(1)

    def format(self, x) -> str:
        x = Fraction(x)
        if x.denominator == 1:
            return str(x.numerator)
        return f"{x.numerator}/{x.denominator}"

    def __eq__(self, other) -> bool:
        return isinstance(other, RationalField)

    def __hash__(self) -> int:
        return hash("Q")

    def __repr__(self) -> str:
        return "QQ"


class _FpElement:
    __slots__ = ("v",)
    p = 2

    def __init__(self, v: int):
        self.v = v % self.p

    def _lift(self, other):
        if isinstance(other, _FpElement):
            if other.p != self.p:
                raise ValueError("mixing prime fields")
            return other.v
        if isinstance(other, int):
            return other
        if isinstance(other, Fraction):
            return other.numerator * pow(other.denominator, -1, self.p)
        return NotImplemented

    def __add__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return type(self)(self.v + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return type(self)(self.v - o)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return type(self)(o - self.v)

    def __mul__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return type(self)(self.v * o)

    __rmul__ = __mul__

    def __neg__(self):
        return type(self)(-self.v)

    def __truediv__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        if o % self.p == 0:
            raise ZeroDivisionError("division by zero in F_%d" % self.p)
        return type(self)(self.v * pow(o, -1, self.p))

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        if self.v == 0:
            raise ZeroDivisionError("division by zero in F_%d" % self.p)
        return type(self)(o * pow(self.v, -1, self.p))

    def __eq__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return False
        return (self.v - o) % self.p == 0

    def __hash__(self):
        return hash((self.p, self.v))

    def __bool__(self):
        return self.v != 0

    def __repr__(self):
        return f"{self.v} mod {self.p}"


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


class PrimeField:
    """The prime field F_p."""

    def __init__(self, p: int):
        if not _is_prime(p):
            raise ValueError(f"{p} is not prime")
        self.characteristic = p
        self.name = f"fp:{p}"
        self._cls = type(f"F{p}", (_FpElement,), {"p": p, "__slots__": ()})

    def __call__(self, x):
        if isinstance(x, _FpElement):
            return self._cls(x.v)
        if isinstance(x, str):
            x = Fraction(x.strip())
        if isinstance(x, Fraction):
            if x.denominator % self.characteristic == 0:
                raise ZeroDivisionError(f"{x} has no image in F_{self.characteristic}")
            return self._cls(x.numerator * pow(x.denominator, -1, self.characteristic))
        return self._cls(int(x))

    @property
    def zero(self):
        return self._cls(0)

    @property
    def one(self):
        return self._cls(1)

    def format(self, x) -> str:
        return str(self(x).v)

    def __eq__(self, other) -> bool:
        return isinstance(other, PrimeField) and other.characteristic == self.characteristic

    def __hash__(self) -> int:
        return hash(("Fp", self.characteristic))

    def __repr__(self) -> str:
        return f"GF({self.characteristic})"


QQ = RationalField()


def GF(p: int) -> PrimeField:
    return PrimeField(p)


def parse_field(spec: str):
    """Parse ``q`` or ``fp:<p>``."""
    s = spec.strip().lower()
    if s in ("q", "qq", "rational"):
        return QQ
    if s.startswith("fp:"):
        return GF(int(s[3:]))
    raise ValueError(f"unknown field spec {spec!r}")


# ---------------------------------------------------------------- vectors


def vadd(u: Mapping, v: Mapping, c=1) -> dict:
    """Return u + c*v as a new dict."""
    out = dict(u)
    for k, x in v.items():
        y = out.get(k)
        y = c * x if y is None else y + c * x
        if y:
            out[k] = y
        else:
            out.pop(k, None)
    return out


def vaxpy(out: dict, v: Mapping, c) -> None:
    """In place: out += c*v."""
    for k, x in v.items():
        y = out.get(k)
        y = c * x if y is None else y + c * x
        if y:
            out[k] = y
        else:
            del out[k]


def vscale(v: Mapping, c) -> dict:
    if not c:
        return {}
    return {k: c * x for k, x in v.items()}


# ---------------------------------------------------------------- matrices


class SparseMatrix:
    """Sparse matrix with a dict of nonzero entries per row."""

    __slots__ = ("nrows", "ncols", "rows", "field")

    def __init__(self, nrows: int, ncols: int, rows: Optional[Sequence[Mapping]] = None, field=QQ):
        self.nrows = nrows
        self.ncols = ncols
        self.field = field
        if rows is None:
            self.rows = [dict() for _ in range(nrows)]
        else:
            if len(rows) != nrows:
                raise DimensionMismatch("row count does not match")
            self.rows = []
            for r in rows:
                clean = {}
                for c, x in r.items():
                    if not 0 <= c < ncols:
                        raise DimensionMismatch(f"column {c} out of range")
                    x = field(x)
                    if x:
                        clean[c] = x
                self.rows.append(clean)

    @classmethod
    def from_dense(cls, data: Sequence[Sequence], field=QQ, ncols: Optional[int] = None):
        data = [list(r) for r in data]
        n = ncols if ncols is not None else (len(data[0]) if data else 0)
        return cls(len(data), n, [{j: x for j, x in enumerate(r) if x} for r in data], field)

    @classmethod
    def from_triples(cls, nrows: int, ncols: int, triples: Iterable[Tuple[int, int, object]], field=QQ):
        rows: List[dict] = [dict() for _ in range(nrows)]
        for r, c, x in triples:
            if c in rows[r]:
                raise ValueError(f"duplicate entry ({r}, {c})")
            rows[r][c] = x
        return cls(nrows, ncols, rows, field)

    @classmethod
    def from_columns(cls, nrows: int, columns: Sequence[Mapping], field=QQ):
        rows: List[dict] = [dict() for _ in range(nrows)]
        for j, col in enumerate(columns):
            for i, x in col.items():
                if x:
                    rows[i][j] = x
        m = cls.__new__(cls)
        m.nrows, m.ncols, m.rows, m.field = nrows, len(columns), rows, field
        return m

    @classmethod
    def identity(cls, n: int, field=QQ):
        return cls(n, n, [{i: field.one} for i in range(n)], field)

    @classmethod
    def zero(cls, nrows: int, ncols: int, field=QQ):
        return cls(nrows, ncols, None, field)

    def triples(self) -> List[Tuple[int, int, object]]:
        return [(i, j, x) for i, r in enumerate(self.rows) for j, x in sorted(r.items())]

    def to_dense(self) -> List[list]:
        z = self.field.zero
        out = [[z] * self.ncols for _ in range(self.nrows)]
        for i, r in enumerate(self.rows):
            for j, x in r.items():
                out[i][j] = x
        return out

    def columns(self) -> List[dict]:
        cols: List[dict] = [dict() for _ in range(self.ncols)]
        for i, r in enumerate(self.rows):
            for j, x in r.items():
                cols[j][i] = x
        return cols

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix.from_columns(self.ncols, self.rows, self.field)

    def apply(self, v: Mapping) -> dict:
        """Matrix times sparse column vector."""
        out = {}
        for i, r in enumerate(self.rows):
            s = 0
            hit = False
            if len(r) < len(v):
                for j, x in r.items():
                    y = v.get(j)
                    if y is not None:
                        s = s + x * y
                        hit = True
            else:
                for j, y in v.items():
                    x = r.get(j)
                    if x is not None:
                        s = s + x * y
                        hit = True
            if hit and s:
                out[i] = s
        return out

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.ncols != other.nrows:
            raise DimensionMismatch(f"cannot multiply {self.shape} by {other.shape}")
        rows = []
        for r in self.rows:
            acc: dict = {}
            for k, x in r.items():
                vaxpy(acc, other.rows[k], x)
            rows.append(acc)
        m = SparseMatrix.__new__(SparseMatrix)
        m.nrows, m.ncols, m.rows, m.field = self.nrows, other.ncols, rows, self.field
        return m

    def __add__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.shape != other.shape:
            raise DimensionMismatch("shape mismatch in addition")
        m = SparseMatrix.__new__(SparseMatrix)
        m.nrows, m.ncols, m.field = self.nrows, self.ncols, self.field
        m.rows = [vadd(a, b) for a, b in zip(self.rows, other.rows)]
        return m

    def __sub__(self, other: "SparseMatrix") -> "SparseMatrix":
        return self + other.scale(-1)

    def scale(self, c) -> "SparseMatrix":
        m = SparseMatrix.__new__(SparseMatrix)
        m.nrows, m.ncols, m.field = self.nrows, self.ncols, self.field
        m.rows = [vscale(r, c) for r in self.rows]
        return m

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.nrows, self.ncols)

    def is_zero(self) -> bool:
        return not any(self.rows)

    def nnz(self) -> int:
        return sum(len(r) for r in self.rows)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return self.shape == other.shape and self.rows == other.rows

    def __repr__(self) -> str:
        return f"SparseMatrix({self.nrows}x{self.ncols}, nnz={self.nnz()})"


# ---------------------------------------------------------------- elimination


def _leading(v: Mapping) -> int:
    return min(v)


def rref_rows(rows: Iterable[Mapping], reverse: bool = False) -> List[Tuple[int, dict]]:
    """Reduced row echelon form of the span of ``rows``.

    Returns ``[(pivot, row), ...]`` sorted by pivot.  Each row has a 1 at its
    pivot and zeros at every other pivot.  With ``reverse`` the pivot of a row
    is its largest index instead of its smallest.
    """
    lead = max if reverse else min
    ech: Dict[int, dict] = {}
    for r in rows:
        r = {k: x for k, x in r.items() if x}
        while r:
            p = lead(r)
            row = ech.get(p)
            if row is None:
                inv = 1 / r[p]
                ech[p] = {k: x * inv for k, x in r.items()}
                break
            vaxpy(r, row, -r[p])
    order = sorted(ech, reverse=not reverse)
    # back substitution, later pivots first
    done: List[int] = []
    for p in order:
        row = ech[p]
        for q in done:
            c = row.get(q)
            if c:
                vaxpy(row, ech[q], -c)
        done.append(p)
    return [(p, ech[p]) for p in sorted(ech)]


class Subspace:
    """A subspace of k^n stored by its RREF basis."""

    __slots__ = ("ambient", "pivots", "basis", "field")

    def __init__(self, ambient: int, vectors: Iterable[Mapping] = (), field=QQ, _rref=None):
        self.ambient = ambient
        self.field = field
        if _rref is None:
            vectors = list(vectors)
            for v in vectors:
                for k in v:
                    if not 0 <= k < ambient:
                        raise DimensionMismatch(f"index {k} outside ambient dimension {ambient}")
            _rref = rref_rows(({k: field(x) for k, x in v.items()} for v in vectors))
        self.pivots = [p for p, _ in _rref]
        self.basis = [r for _, r in _rref]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def coordinates(self, v: Mapping) -> List:
        """Coordinates of a vector known to lie in the subspace."""
        return [v.get(p, 0) for p in self.pivots]

    def reduce(self, v: Mapping) -> dict:
        out = dict(v)
        for p, row in zip(self.pivots, self.basis):
            c = out.get(p)
            if c:
                vaxpy(out, row, -c)
        return out

    def contains(self, v: Mapping) -> bool:
        return not self.reduce(v)

    def contains_subspace(self, other: "Subspace") -> bool:
        return all(self.contains(b) for b in other.basis)

    def matrix(self) -> SparseMatrix:
        return SparseMatrix(self.dim, self.ambient, self.basis, self.field)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Subspace)
            and self.ambient == other.ambient
            and self.pivots == other.pivots
            and self.basis == other.basis
        )

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, ambient={self.ambient})"


class Solver:
    """Column elimination of a fixed matrix for repeated ``M x = t`` solves.

    Columns are processed left to right; a column that depends on earlier
    ones gets the value 0 in every solution, which matches setting free
    variables to zero after RREF.
    """

    def __init__(self, m: SparseMatrix):
        self.m = m
        self._ech: Dict[int, Tuple[dict, dict]] = {}
        for j, col in enumerate(m.columns()):
            vec = dict(col)
            tag = {j: m.field.one}
            while vec:
                p = _leading(vec)
                hit = self._ech.get(p)
                if hit is None:
                    inv = 1 / vec[p]
                    self._ech[p] = ({k: x * inv for k, x in vec.items()}, {k: x * inv for k, x in tag.items()})
                    break
                c = vec[p]
                vaxpy(vec, hit[0], -c)
                vaxpy(tag, hit[1], -c)

    @property
    def rank(self) -> int:
        return len(self._ech)

    def solve(self, target: Mapping) -> dict:
        t = {k: x for k, x in target.items() if x}
        x: dict = {}
        while t:
            p = _leading(t)
            hit = self._ech.get(p)
            if hit is None:
                raise NoSolution("target is not in the image")
            c = t[p]
            vaxpy(t, hit[0], -c)
            vaxpy(x, hit[1], c)
        return x

    def in_image(self, target: Mapping) -> bool:
        try:
            self.solve(target)
        except NoSolution:
            return False
        return True


# ---------------------------------------------------------------- public operations


def rank(m: SparseMatrix) -> int:
    if m.nrows <= m.ncols:
        return len(rref_rows(m.rows))
    return len(rref_rows(m.columns()))


def kernel_basis(m: SparseMatrix) -> Subspace:
    """Null space of ``m`` as an RREF subspace of k^ncols."""
    red = rref_rows(m.rows)
    pivots = {p for p, _ in red}
    one = m.field.one
    vecs = []
    for f in range(m.ncols):
        if f in pivots:
            continue
        v = {f: one}
        for p, row in red:
            c = row.get(f)
            if c:
                v[p] = -c
        vecs.append(v)
    return Subspace(m.ncols, field=m.field, _rref=rref_rows(vecs))


def solve(m: SparseMatrix, target: Sequence | Mapping) -> List:
    """One solution of ``m x = target`` with free variables set to zero."""
    if not isinstance(target, Mapping):
        if len(target) != m.nrows:
            raise DimensionMismatch("target length differs from row count")
        target = {i: m.field(x) for i, x in enumerate(target) if x}
    aug = []
    for i, r in enumerate(m.rows):
        row = dict(r)
        if target.get(i):
            row[m.ncols] = target[i]
        aug.append(row)
    red = rref_rows(aug)
    x = [m.field.zero] * m.ncols
    for p, row in red:
        if p == m.ncols:
            raise NoSolution("target is not in the image")
        x[p] = row.get(m.ncols, m.field.zero)
    return x


def subspace_sum(a: Subspace, b: Subspace) -> Subspace:
    if a.ambient != b.ambient:
        raise DimensionMismatch("ambient dimensions differ")
    return Subspace(a.ambient, a.basis + b.basis, field=a.field)


def subspace_intersection(a: Subspace, b: Subspace) -> Subspace:
    if a.ambient != b.ambient:
        raise DimensionMismatch("ambient dimensions differ")
    if a.dim == 0 or b.dim == 0:
        return Subspace(a.ambient, (), field=a.field)
    # solve sum alpha_i a_i - sum beta_j b_j = 0
    cols = list(a.basis) + [vscale(v, -1) for v in b.basis]
    ker = kernel_basis(SparseMatrix.from_columns(a.ambient, cols, a.field))
    vecs = []
    for k in ker.basis:
        v: dict = {}
        for i, c in k.items():
            if i < a.dim:
                vaxpy(v, a.basis[i], c)
        vecs.append(v)
    return Subspace(a.ambient, field=a.field, _rref=rref_rows(vecs))


def annihilator(a: Subspace) -> Subspace:
    """Vectors f with sum_i f_i v_i = 0 for every v in ``a``."""
    return kernel_basis(SparseMatrix(a.dim, a.ambient, a.basis, a.field))


def quotient_data(ambient_dim: int, r: Subspace) -> Tuple[List[int], SparseMatrix]:
    """Pinned complement of ``r`` and the projection onto it.

    The relations are echelonized with pivots at their largest index, so
    each pivot index is rewritten in terms of smaller indices.  The
    complement consists of the remaining standard basis vectors in index
    order.  Column j of the projection holds the complement coordinates of
    e_j modulo ``r``.
    """
    if r.ambient != ambient_dim:
        raise DimensionMismatch("relation subspace has the wrong ambient dimension")
    return quotient_from_span(ambient_dim, r.basis, r.field)


def quotient_from_span(ambient_dim: int, vectors: Iterable[Mapping], field=QQ) -> Tuple[List[int], SparseMatrix]:
    """Same as :func:`quotient_data` for the span of arbitrary vectors."""
    red = rref_rows(vectors, reverse=True)
    piv = {p: row for p, row in red}
    complement = [j for j in range(ambient_dim) if j not in piv]
    pos = {j: i for i, j in enumerate(complement)}
    rows: List[dict] = [dict() for _ in complement]
    one = field.one
    for j in range(ambient_dim):
        if j in pos:
            rows[pos[j]][j] = one
        else:
            for c, x in piv[j].items():
                if c != j:
                    rows[pos[c]][j] = -x
    proj = SparseMatrix.__new__(SparseMatrix)
    proj.nrows, proj.ncols, proj.rows, proj.field = len(complement), ambient_dim, rows, field
    return complement, proj
