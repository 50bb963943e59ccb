"""Finite-dimensional Lie algebras: U(g) as a linear-quadratic datum and the CE side.

Structure constants are stored as ``brackets[(i, j)] = {k: c}`` for ``i < j``,
meaning ``[g_i, g_j] = sum_k c g_k``.  Exterior powers use strictly increasing
index tuples as basis; ``C_k = Λ^k g`` and ``C^k = Λ^k g*`` with the dual basis.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .exact_linear import QQ, SparseMatrix, parse_field, vaxpy
from .quadratic import PresentationError, QuadraticDatum, linquad_check, word_index

Wedge = Tuple[int, ...]


class LieDataError(ValueError):
    """Malformed structure constants or a Jacobi failure."""


def _minus(s: str) -> str:
    return "−" + s[1:] if s.startswith("-") else s


@dataclass(frozen=True)
class LieAlgebraData:
    names: Tuple[str, ...]
    brackets: Tuple[Tuple[Tuple[int, int], Tuple[Tuple[int, object], ...]], ...]
    field: object = QQ

    @classmethod
    def from_dict(cls, names: Sequence[str], brackets: Mapping[Tuple[int, int], Mapping[int, object]],
                  field=QQ) -> "LieAlgebraData":
        """Accepts pairs in either order; ``(j, i)`` entries are negated into ``(i, j)``."""
        n = len(names)
        acc: Dict[Tuple[int, int], dict] = {}
        for (i, j), vec in brackets.items():
            if not (0 <= i < n and 0 <= j < n):
                raise LieDataError(f"index pair {(i, j)} out of range")
            if i == j:
                if any(field(c) for c in vec.values()):
                    raise LieDataError(f"[g_{i}, g_{i}] must vanish")
                continue
            sgn, key = (1, (i, j)) if i < j else (-1, (j, i))
            row = acc.setdefault(key, {})
            for k, c in vec.items():
                if not 0 <= k < n:
                    raise LieDataError(f"output index {k} out of range")
                vaxpy(row, {k: field(c)}, sgn)
        frozen = tuple(sorted((key, tuple(sorted(v.items()))) for key, v in acc.items() if v))
        return cls(tuple(names), frozen, field)

    @property
    def dim(self) -> int:
        return len(self.names)

    def bracket_basis(self, i: int, j: int) -> Dict[int, object]:
        if i == j:
            return {}
        table = dict(self.brackets)
        if i < j:
            return dict(table.get((i, j), ()))
        return {k: -c for k, c in table.get((j, i), ())}

    def bracket(self, u: Mapping[int, object], v: Mapping[int, object]) -> Dict[int, object]:
        out: dict = {}
        for i, a in u.items():
            for j, b in v.items():
                vaxpy(out, self.bracket_basis(i, j), a * b)
        return out

    def ad(self, i: int) -> SparseMatrix:
        """Matrix of ad_{g_i}; column j is [g_i, g_j]."""
        n = self.dim
        return SparseMatrix.from_columns(n, [self.bracket_basis(i, j) for j in range(n)], self.field)

    def jacobi_failure(self) -> Optional[Tuple[int, int, int]]:
        n = self.dim
        for i, j, k in combinations(range(n), 3):
            tot: dict = {}
            for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
                vaxpy(tot, self.bracket({a: 1}, self.bracket_basis(b, c)), 1)
            if tot:
                return (i, j, k)
        return None

    def is_abelian(self) -> bool:
        return not self.brackets

    def change_basis(self, P: Sequence[Sequence[object]]) -> "LieAlgebraData":
        """Structure constants in the basis h_j = sum_i P[i][j] g_i (P invertible)."""
        F = self.field
        n = self.dim
        M = SparseMatrix.from_dense([[F(x) for x in row] for row in P], F)
        from .complexes import is_invertible, matrix_inverse

        if not is_invertible(M):
            raise LieDataError("basis change matrix is singular")
        Minv = matrix_inverse(M)
        cols = [{i: M.rows[i][j] for i in range(n) if M.rows[i].get(j)} for j in range(n)]
        new = {}
        for a in range(n):
            for b in range(a + 1, n):
                v = Minv.apply(self.bracket(cols[a], cols[b]))
                if v:
                    new[(a, b)] = v
        return LieAlgebraData.from_dict(self.names, new, F)


# ---------------------------------------------------------------- U(g)


def to_linquad_datum(L: LieAlgebraData, weight_cap: int = 4, check: bool = True) -> QuadraticDatum:
    """U(g) = T(g)/(g_i g_j − g_j g_i − [g_i, g_j])."""
    bad = L.jacobi_failure()
    if bad is not None:
        raise LieDataError("Jacobi identity fails on ({}, {}, {})".format(*(L.names[t] for t in bad)))
    F = L.field
    n = L.dim
    rels, lin = [], []
    for i in range(n):
        for j in range(i + 1, n):
            rels.append({word_index((i, j), n): F.one, word_index((j, i), n): -F.one})
            lin.append(L.bracket_basis(i, j))
    datum = QuadraticDatum(L.names, tuple(rels), tuple(lin), F, weight_cap)
    if check and n and not linquad_check(datum, min(weight_cap, n + 1)).ok:
        raise LieDataError("U(g) datum fails the linear-quadratic check")
    return datum


# ---------------------------------------------------------------- unimodularity


@dataclass
class UnimodularityReport:
    ok: bool
    traces: Tuple[object, ...]
    names: Tuple[str, ...]
    field: object = QQ

    @property
    def witness(self) -> Optional[str]:
        for nm, t in zip(self.names, self.traces):
            if t:
                return f"Tr(ad_{nm}) = {_minus(self.field.format(t))}"
        return None

    def __bool__(self) -> bool:
        return self.ok

    def summary(self) -> str:
        return "unimodular" if self.ok else f"unimodularity fails: {self.witness}"


def unimodularity_check(L: LieAlgebraData) -> UnimodularityReport:
    F = L.field
    traces = []
    for i in range(L.dim):
        tr = F.zero
        for k in range(L.dim):
            tr += L.bracket_basis(i, k).get(k, F.zero)
        traces.append(tr)
    return UnimodularityReport(not any(traces), tuple(traces), L.names, F)


# ---------------------------------------------------------------- exterior algebra


def wedge_mul(u: Wedge, v: Wedge) -> Tuple[int, Optional[Wedge]]:
    """Sign and sorted support of u∧v (None when it vanishes)."""
    seq = list(u) + list(v)
    if len(set(seq)) < len(seq):
        return 0, None
    inv = sum(1 for a in range(len(seq)) for b in range(a + 1, len(seq)) if seq[a] > seq[b])
    return (-1 if inv % 2 else 1), tuple(sorted(seq))


class CEComplexes:
    """CE chains (∂ lowers k) and cochains (δ raises k) of a Lie algebra.

    ∂(x_1∧…∧x_k) = Σ_{s<t} (−1)^{s+t} [x_s, x_t]∧x_1∧…x̂_s…x̂_t…∧x_k and δ is the
    derivation of Λg* with δe^k = −Σ_{i<j} c_{ij}^k e^i∧e^j.  Both squares are
    checked on construction.
    """

    def __init__(self, L: LieAlgebraData):
        self.L = L
        self.n = n = L.dim
        self.field = L.field
        self.basis: List[List[Wedge]] = [list(combinations(range(n), k)) for k in range(n + 1)]
        self.index = [{w: r for r, w in enumerate(b)} for b in self.basis]
        self.omega: Wedge = tuple(range(n))
        self.dchain = [self._matrix(k, k - 1, self._boundary) for k in range(n + 1)]
        self.dcochain = [self._matrix(k, k + 1, self._coboundary) for k in range(n + 1)]
        for k in range(2, n + 1):
            if (self.dchain[k - 1] @ self.dchain[k]).nnz():
                raise LieDataError(f"∂² ≠ 0 on Λ^{k}: Jacobi must fail")
        for k in range(n - 1):
            if (self.dcochain[k + 1] @ self.dcochain[k]).nnz():
                raise LieDataError(f"δ² ≠ 0 on Λ^{k}*: Jacobi must fail")

    def _matrix(self, k: int, t: int, fn) -> SparseMatrix:
        rows = len(self.basis[t]) if 0 <= t <= self.n else 0
        cols = []
        for w in self.basis[k]:
            img = fn(w) if rows else {}
            cols.append({self.index[t][u]: c for u, c in img.items()})
        return SparseMatrix.from_columns(rows, cols, self.field)

    def _boundary(self, w: Wedge) -> Dict[Wedge, object]:
        out: dict = {}
        k = len(w)
        for s in range(k):
            for t in range(s + 1, k):
                rest = w[:s] + w[s + 1:t] + w[t + 1:]
                sgn = -1 if (s + t) % 2 else 1
                for g, c in self.L.bracket_basis(w[s], w[t]).items():
                    e, u = wedge_mul((g,), rest)
                    if u is not None:
                        vaxpy(out, {u: c}, sgn * e)
        return out

    def _coboundary(self, w: Wedge) -> Dict[Wedge, object]:
        out: dict = {}
        for s, k in enumerate(w):
            sgn = -1 if s % 2 else 1
            for (i, j), vec in self.L.brackets:
                c = dict(vec).get(k)
                if not c:
                    continue
                e, u = wedge_mul(w[:s] + (i, j), w[s + 1:])
                if u is not None:
                    # w[:s] and (i, j) are already placed; wedge_mul sorts the whole word
                    vaxpy(out, {u: -c}, sgn * e)
        return out

    def dims(self) -> Tuple[int, ...]:
        return tuple(len(b) for b in self.basis)

    def cap_omega(self, w: Wedge) -> Tuple[int, Wedge]:
        """e^w ∩ Ω: contraction from the left into g_1∧…∧g_n."""
        rest = tuple(i for i in self.omega if i not in w)
        e, _ = wedge_mul(w, rest)
        return e, rest

    def psi_matrix(self, i: int) -> SparseMatrix:
        """ψ: C^i → C_{n−i} in the wedge bases."""
        t = self.n - i
        cols = []
        for w in self.basis[i]:
            e, rest = self.cap_omega(w)
            cols.append({self.index[t][rest]: self.field(e)})
        return SparseMatrix.from_columns(len(self.basis[t]), cols, self.field)


# ---------------------------------------------------------------- Poincaré duality on the CE side


@dataclass
class CEDualityReport:
    ok: bool
    unimodular: UnimodularityReport
    defects: Dict[int, SparseMatrix] = dc_field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.ok

    def defect_degrees(self) -> List[int]:
        return sorted(self.defects)


def ce_duality_check(L: LieAlgebraData, cx: Optional[CEComplexes] = None) -> CEDualityReport:
    """Whether ψ(f) = f∩Ω intertwines δ with ∂, i.e. ∂ψ = (−1)^{i+1} ψδ on C^i.

    ψ is always a linear isomorphism degreewise; the report records the
    residual ∂ψ − (−1)^{i+1}ψδ for every i where it is nonzero.
    """
    cx = cx or CEComplexes(L)
    n = cx.n
    defects = {}
    for i in range(n + 1):
        t = n - i
        # ∂ψ on C^i lands in C_{t-1}; ψδ lands there too
        lhs = cx.dchain[t] @ cx.psi_matrix(i) if t >= 1 else None
        rhs = cx.psi_matrix(i + 1) @ cx.dcochain[i] if i + 1 <= n else None
        if lhs is None and rhs is None:
            continue
        sgn = 1 if i % 2 else -1
        if lhs is None:
            diff = rhs.scale(-sgn)
        elif rhs is None:
            diff = lhs
        else:
            diff = lhs - rhs.scale(sgn)
        if diff.nnz():
            defects[i] = diff
    uni = unimodularity_check(L)
    ok = not defects
    if ok != uni.ok:
        raise ArithmeticError("CE duality and unimodularity disagree: the CE complexes are wrong")
    return CEDualityReport(ok, uni, defects)


def ce_matches_dual_algebra(L: LieAlgebraData, cx: Optional[CEComplexes] = None) -> Optional[str]:
    """Compare Λg* with A^! of U(g) under the identification u ↔ (−1)^{|u|} e^u.

    The sign is the parity automorphism: A^!'s differential is dual to d_φ,
    which is −δ on plain wedges.

    Returns None on agreement (dimensions, products and differential), else a message.
    """
    from .quadratic import CoalgebraSlice, DualAlgebraSlice

    cx = cx or CEComplexes(L)
    n = cx.n
    datum = to_linquad_datum(L, n + 1, check=False)
    C = CoalgebraSlice(datum, n + 1)
    Ad = DualAlgebraSlice(datum, n + 1, C)
    for k in range(n + 1):
        if Ad.basis(k) != cx.basis[k]:
            return f"weight {k}: A^! normal words differ from increasing wedges"
    if Ad.dim(n + 1):
        return "A^! does not stop at weight n"
    for k in range(n + 1):
        for u in cx.basis[k]:
            for j in range(n + 1 - k):
                for v in cx.basis[j]:
                    e, w = wedge_mul(u, v)
                    prod = Ad.mul_words(u, v)
                    want = {} if w is None else {w: Ad.field(e)}
                    if prod != want:
                        return f"product {u}·{v} differs"
    for k in range(n):
        for col, u in enumerate(cx.basis[k]):
            got = Ad.differential({u: Ad.field.one}, k)
            want = {cx.basis[k + 1][r]: -c for r, c in cx.dcochain[k].columns()[col].items()}
            if got != want:
                return f"differential on {u} differs"
    return None


# ---------------------------------------------------------------- U(g) Calabi-Yau


@dataclass
class UeCYReport:
    certificate: object
    unimodular: UnimodularityReport
    agrees: bool

    @property
    def is_cy(self) -> bool:
        return self.certificate.is_cy

    def summary(self) -> str:
        if self.certificate.is_cy:
            return self.certificate.summary()
        if not self.unimodular.ok:
            return f"NotCyclic (unimodularity fails: {self.unimodular.witness})"
        return self.certificate.summary()


class VerdictMismatch(ArithmeticError):
    """cy_check and the trace test disagree on U(g)."""


def ue_cy_check(L: LieAlgebraData, W: Optional[int] = None, budget: int = 2000) -> UeCYReport:
    from .calabi_yau import cy_check

    n = L.dim
    W = max(n, 1) if W is None else W
    if W < n:
        raise ValueError(f"weight cap {W} is below dim g = {n}")
    cert = cy_check(to_linquad_datum(L, W), W, budget)
    uni = unimodularity_check(L)
    agrees = cert.is_cy == uni.ok and (not cert.is_cy or cert.n == n)
    if not agrees:
        raise VerdictMismatch(f"cy_check says {cert.summary()} but {uni.summary()}")
    return UeCYReport(cert, uni, agrees)


# ---------------------------------------------------------------- examples and random algebras


def abelian(n: int, field=QQ) -> LieAlgebraData:
    names = ("x", "y", "z", "w")[:n] if n <= 4 else tuple(f"x{i}" for i in range(1, n + 1))
    return LieAlgebraData.from_dict(names, {}, field)


def nonabelian2(field=QQ) -> LieAlgebraData:
    return LieAlgebraData.from_dict(("x", "y"), {(0, 1): {0: 1}}, field)


def heisenberg(field=QQ) -> LieAlgebraData:
    return LieAlgebraData.from_dict(("x", "y", "z"), {(0, 1): {2: 1}}, field)


def random_solvable(rng: random.Random, dim: int, unimodular: Optional[bool] = None,
                    field=QQ, entries: int = 2) -> LieAlgebraData:
    """A semidirect product k·t ⋉ (k^{dim−2}·h ⊕ nilpotent part), conjugated by a random basis change.

    Built as span{t} ⋉ V with V two-step nilpotent: ``[t, v] = D v`` for a
    derivation D of V and a random central bracket on V.  Jacobi holds by
    construction and is re-checked.
    """
    if dim < 1:
        raise ValueError("dimension must be positive")
    names = tuple("xyzw"[:dim]) if dim <= 4 else tuple(f"x{i}" for i in range(dim))
    if dim == 1:
        return LieAlgebraData.from_dict(names, {}, field)
    m = dim - 1  # V = span{g_1..g_m}, t = g_0
    br: Dict[Tuple[int, int], Dict[int, object]] = {}
    if m >= 3 and rng.random() < 0.5:
        # V Heisenberg-like: [g_1, g_2] = g_m, g_m central; D must preserve this
        a, b, c, d_ = (rng.randint(-entries, entries) for _ in range(4))
        D = [[0] * m for _ in range(m)]
        D[0][0], D[0][1], D[1][0], D[1][1] = a, b, c, d_
        for r in range(2, m - 1):
            D[r][r] = rng.randint(-entries, entries)
        D[m - 1][m - 1] = a + d_  # derivation condition on the centre
        br[(1, 2)] = {m: 1}
    else:
        D = [[rng.randint(-entries, entries) for _ in range(m)] for _ in range(m)]
    if unimodular is not None:
        tr = sum(D[r][r] for r in range(m))
        if unimodular and tr:
            # ad_t must be traceless; shift a diagonal entry not tied to the derivation constraint
            if (1, 2) in br:
                # tr = 2(a+d) + middle; solve by adjusting the middle, else by rescaling
                if m > 3:
                    D[2][2] -= tr
                else:
                    D[0][0] = -D[1][1]
                    D[m - 1][m - 1] = 0
            else:
                D[0][0] -= tr
        if not unimodular and not sum(D[r][r] for r in range(m)):
            D[0][0] += 1
            if (1, 2) in br:
                D[m - 1][m - 1] += 1
    for j in range(m):
        col = {r + 1: D[r][j] for r in range(m) if D[r][j]}
        if col:
            br[(0, j + 1)] = col
    L = LieAlgebraData.from_dict(names, br, field)
    P = random_invertible(rng, dim, field)
    L = L.change_basis(P)
    if L.jacobi_failure() is not None:
        raise AssertionError("random construction violated Jacobi")
    return L


def random_invertible(rng: random.Random, n: int, field=QQ, entries: int = 2) -> List[List[object]]:
    from .complexes import is_invertible

    while True:
        P = [[field(rng.randint(-entries, entries)) for _ in range(n)] for _ in range(n)]
        if is_invertible(SparseMatrix.from_dense(P, field)):
            return P


def random_lie_algebras(seed: int, count: int = 24, max_dim: int = 4, field=QQ) -> List[LieAlgebraData]:
    """Seeded mix of unimodular and non-unimodular solvable algebras of dim 2..max_dim."""
    rng = random.Random(seed)
    out = []
    for t in range(count):
        dim = 2 + t % (max_dim - 1) if max_dim >= 2 else 1
        out.append(random_solvable(rng, dim, unimodular=(t % 2 == 0), field=field))
    return out


# ---------------------------------------------------------------- .lie files

LIE_HEADER = "koszulcy-lie 1"


def print_lie(L: LieAlgebraData) -> str:
    F = L.field
    lines = [LIE_HEADER, f"field {F.name}", f"dim {L.dim}", "names " + " ".join(L.names)]
    for (i, j), vec in L.brackets:
        for k, c in vec:
            lines.append(f"{i + 1} {j + 1} {k + 1} {F.format(c)}")
    return "\n".join(lines) + "\n"


def parse_lie(text: str) -> LieAlgebraData:
    """Header, optional ``field``, ``dim n``, optional ``names``, then ``i j k c`` lines (1-based)."""
    F = QQ
    dim: Optional[int] = None
    names: Optional[Tuple[str, ...]] = None
    br: Dict[Tuple[int, int], Dict[int, object]] = {}
    seen = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not seen:
            if line != LIE_HEADER:
                raise PresentationError(f"line {lineno}: expected {LIE_HEADER!r}")
            seen = True
            continue
        toks = line.split()
        if toks[0] == "field":
            if dim is not None:
                raise PresentationError(f"line {lineno}: field must precede dim")
            F = parse_field(" ".join(toks[1:]))
        elif toks[0] == "dim":
            try:
                dim = int(toks[1])
            except (IndexError, ValueError):
                raise PresentationError(f"line {lineno}: bad dimension") from None
            if dim < 0:
                raise PresentationError(f"line {lineno}: negative dimension")
        elif toks[0] == "names":
            names = tuple(toks[1:])
        else:
            if dim is None:
                raise PresentationError(f"line {lineno}: structure constant before dim")
            if len(toks) != 4:
                raise PresentationError(f"line {lineno}: expected 'i j k c'")
            try:
                i, j, k = (int(t) - 1 for t in toks[:3])
                c = F(Fraction(toks[3]))
            except (ValueError, ZeroDivisionError):
                raise PresentationError(f"line {lineno}: bad structure constant") from None
            if not all(0 <= t < dim for t in (i, j, k)):
                raise PresentationError(f"line {lineno}: index out of range 1..{dim}")
            if i == j:
                raise PresentationError(f"line {lineno}: [g_i, g_i] is zero by antisymmetry")
            key, sgn = ((i, j), 1) if i < j else ((j, i), -1)
            row = br.setdefault(key, {})
            if k in row:
                raise PresentationError(f"line {lineno}: repeated constant for ({i + 1},{j + 1},{k + 1})")
            row[k] = sgn * c
    if not seen:
        raise PresentationError("empty Lie file")
    if dim is None:
        raise PresentationError("no dim line")
    if names is None:
        names = abelian(dim).names
    if len(names) != dim or len(set(names)) != dim:
        raise PresentationError("names must list dim distinct symbols")
    try:
        return LieAlgebraData.from_dict(names, br, F)
    except LieDataError as e:
        raise PresentationError(str(e)) from e


def load_lie(path) -> LieAlgebraData:
    with open(path, encoding="utf-8") as fh:
        return parse_lie(fh.read())
