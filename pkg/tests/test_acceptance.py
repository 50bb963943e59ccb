"""Acceptance criteria, one check per criterion.

Run under pytest (one test per criterion; the PASS/FAIL lines are repeated in
the terminal summary) or directly with ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import sys
import tempfile
import time
from pathlib import Path
from typing import Callable, Dict, List, Tuple

import pytest
from click.testing import CliRunner

sys.path.insert(0, str(Path(__file__).resolve().parent))

from conftest import DATA, LIE_FILES, PRES_FILES, load, polynomial  # noqa: E402
from koszulcy.calabi_yau import (CYModels, bv_delta, compare_brackets, cy_check, main_theorem_check,  # noqa: E402
                                 pd_A, pd_dual, second_order_check)
from koszulcy.cli import main as cli_main  # noqa: E402
from koszulcy.complexes import check_square_zero  # noqa: E402
from koszulcy.cyclic import (connes_sequence_check, hcminus_bracket, hh_product, lie_axioms,  # noqa: E402
                             menichi_bracket, cyclic_bracket_check, truncate)
from koszulcy.hochschild import (ComparisonMaps, GerstenhaberTransport, bar, coalgebra_hochschild_model,  # noqa: E402
                                 cobar, gerstenhaber_axioms, hochschild_chain_model, hochschild_cochain_model)
from koszulcy.lie import (CEComplexes, ce_matches_dual_algebra, load_lie, nonabelian2,  # noqa: E402
                          random_lie_algebras, to_linquad_datum, ue_cy_check, unimodularity_check)
from koszulcy.quadratic import koszulness_check, linquad_check  # noqa: E402
from koszulcy.smallcx import (build_bimodule_resolution, build_cohomology_complex,  # noqa: E402
                              build_koszul_complex, small_setup)

CRITERIA: Dict[int, Tuple[str, Callable[[], str]]] = {}
RESULTS: List[str] = []


def criterion(n: int, title: str):
    def deco(f):
        CRITERIA[n] = (title, f)
        return f
    return deco


class Failed(AssertionError):
    pass


def need(cond, what: str) -> None:
    if not cond:
        raise Failed(what)


_models: Dict[Tuple[int, int], CYModels] = {}


def models(n: int, W: int) -> CYModels:
    if (n, W) not in _models:
        cert = cy_check(polynomial(n, W), W)
        need(cert.is_cy, f"k[{n} vars] is not certified CY")
        _models[(n, W)] = CYModels(cert, W)
    return _models[(n, W)]


# ---------------------------------------------------------------- 1


@criterion(1, "d² = 0, B² = 0, bB + Bb = 0 on every built complex of the example data")
def sign_soundness() -> str:
    W = 5
    n = 0
    for name in PRES_FILES:
        D = load(name, W)
        if D.is_linear_quadratic:
            need(linquad_check(D, W).ok, f"{name}: d_φ")
            n += 1
            continue
        S = small_setup(D, W)
        need(build_koszul_complex(S.A, S.C).check_square_zero(), f"{name}: K(A)")
        kc = build_cohomology_complex(S.A, S.Ad)
        need(kc.check_square_zero() and kc.check_derivation(), f"{name}: A⊗A^!")
        need(build_bimodule_resolution(S.A, S.C).check_square_zero(), f"{name}: bimodule resolution")
        need(check_square_zero(bar(S.A, W).d), f"{name}: bar")
        need(check_square_zero(cobar(S.C, W).d), f"{name}: cobar")
        need(check_square_zero(hochschild_cochain_model(S.A, W).d), f"{name}: Hochschild cochains")
        n += 6
        for M in (hochschild_chain_model(S.A, W), coalgebra_hochschild_model(S.C, W), ComparisonMaps(S.A, S.C, W).HO):
            need(M.check_mixed() == (True, True, True), f"{name}: mixed identities")
            n += 1
    for name in LIE_FILES:
        L = load_lie(DATA / name)
        cx = CEComplexes(L)  # ∂² and δ² are verified on construction
        for k in range(2, L.dim + 1):
            need(not (cx.dchain[k - 1] @ cx.dchain[k]).nnz(), f"{name}: CE ∂²")
        need(ce_matches_dual_algebra(L, cx) is None, f"{name}: CE vs A^!")
        need(linquad_check(to_linquad_datum(L, 3), 3).ok, f"{name}: U(g) d_φ")
        n += 3
    return f"{n} complexes over {len(PRES_FILES)} presentations and {len(LIE_FILES)} Lie files, W = {W}"


# ---------------------------------------------------------------- 2


@criterion(2, "Koszulness of k[x,y], k[x,y,z] to W = 6; small model = bar model to (4,4)")
def koszulness() -> str:
    for k in (2, 3):
        rep = koszulness_check(polynomial(k, 6), 6)
        need(rep.koszul_up_to_W and rep.hilbert_ok, f"k[{k} vars] at W = 6")
    cells = 0
    for k in (2, 3):
        S = small_setup(polynomial(k, 4), 4)
        K = build_koszul_complex(S.A, S.C)
        H = hochschild_chain_model(S.A, 4)
        for b in set(K.family.support()) | set(H.family.support()):
            if b[0] <= 4 and b[1] <= 4:
                need(K.homology(b).dim == H.homology(b).dim, f"k[{k} vars] at {b}")
                cells += 1
    return f"Koszul and Hilbert product pass at W = 6; {cells} bidegrees agree with the bar model"


# ---------------------------------------------------------------- 3, 4


_plane_cm: List[ComparisonMaps] = []


def plane_cm() -> ComparisonMaps:
    if not _plane_cm:
        S = small_setup(polynomial(2, 4), 4)
        _plane_cm.append(ComparisonMaps(S.A, S.C, 4))
    return _plane_cm[0]


@criterion(3, "HH(A) = H(K(A)) = HH(A^¡) with matching Connes operators, k[x,y] to (4,4)")
def three_models() -> str:
    cm = plane_cm()
    cells = connes = 0
    for b in set(cm.K.family.support()) | set(cm.HA.family.support()) | set(cm.HC.family.support()):
        if b[0] <= 4 and b[1] <= 4:
            need(cm.K.homology(b).dim == cm.HA.homology(b).dim == cm.HC.homology(b).dim, f"dims at {b}")
            cells += 1
    need(all(cm.quasi_iso_report().values()), "comparison maps are not quasi-isomorphisms")
    for b in cm.K.family.support():
        if cm.K.homology(b).dim and cm.K.homology((b[0] + 1, b[1])).dim:
            need(cm.connes_on_K(b) == cm.connes_on_K_from_coalgebra(b), f"Connes at {b}")
            connes += 1
    need(connes > 0, "no Connes matrix compared")
    return f"{cells} bidegrees, {connes} Connes matrices"


@criterion(4, "p₂∘q₂ = id and p₂ is a map of mixed complexes, k[x,y] to (4,4)")
def mixed_maps() -> str:
    rep = plane_cm().chain_map_report()
    need({"p₂", "p₂B", "p₂q₂=id"} <= set(rep), "missing checks")
    bad = [k for k, v in rep.items() if not v]
    need(not bad, f"failed: {bad}")
    return ", ".join(sorted(rep))


# ---------------------------------------------------------------- 5


@criterion(5, "cyclic pairings on polynomial duals; NotCyclic for [x,y] = x; verdicts = unimodularity")
def cy_verdicts() -> str:
    for n in (1, 2, 3):
        cert = cy_check(polynomial(n, 4), 4)
        need(cert.is_cy and cert.n == n, f"n = {n}")
    rep = ue_cy_check(nonabelian2())
    need(not rep.is_cy and rep.summary() == "NotCyclic (unimodularity fails: Tr(ad_y) = −1)", rep.summary())
    algs = random_lie_algebras(seed=0, count=24, max_dim=4)
    need(len(algs) >= 20 and all(L.dim <= 4 for L in algs), "random sample")
    uni = 0
    for L in algs:
        r = ue_cy_check(L)  # raises on a disagreement
        need(r.is_cy == unimodularity_check(L).ok, f"random algebra {L.names}")
        uni += r.is_cy
    return f"n = 1, 2, 3 certified; {len(algs)} random algebras agree ({uni} unimodular)"


# ---------------------------------------------------------------- 6


@criterion(6, "Poincaré duality dims and invertibility on the CY examples")
def poincare() -> str:
    cells = 0
    for n, W in ((1, 4), (2, 4), (3, 3)):
        M = models(n, W)
        for rep in (pd_A(M), pd_dual(M)):
            need(rep.ok, f"n = {n}: {rep.failures[:3]}")
            for b, (d1, d2) in rep.dims.items():
                need(d1 == d2, f"n = {n} at {b}")
                cells += 1
    return f"{cells} bidegree pairs with invertible PD"


# ---------------------------------------------------------------- 7


@criterion(7, "Δ² = 0 and the second-order identity on both sides, k[x,y] W = 4, k[x,y,z] W = 3")
def bv_axioms() -> str:
    total = 0
    for n, W in ((2, 4), (3, 3)):
        for side in ("A", "A!"):
            bv = bv_delta(models(n, W), side)
            need(bv.delta_squared_zero(), f"Δ² on {side}, n = {n}")
            rep = second_order_check(bv)
            need(rep.ok and rep.max_residual == 0, f"second order on {side}, n = {n}: {rep.failures[:3]}")
            total += rep.checked
    return f"{total} triples with zero residual"


# ---------------------------------------------------------------- 8


@criterion(8, "the two BV algebras agree, k[x,y] W = 4 and k[x,y,z] W = 3")
def main_theorem() -> str:
    out = []
    for n, W in ((2, 4), (3, 3)):
        rep = main_theorem_check(polynomial(n, W), W, models=models(n, W))
        need(rep.ok, f"n = {n}: {rep.failures[:3]}")
        out.append(rep.summary())
    return "; ".join(out)


# ---------------------------------------------------------------- 9


@criterion(9, "Δ-bracket = transported cochain bracket on k[x,y]; Gerstenhaber axioms")
def gerstenhaber() -> str:
    M = models(2, 4)
    T = GerstenhaberTransport(hochschild_cochain_model(M.kc.A, M.W), M.kc, 0)
    compared, bad = compare_brackets(bv_delta(M, "A"), T)
    need(compared > 0 and not bad, f"{len(bad)} of {compared} pairs differ")
    rep = gerstenhaber_axioms(T)
    need(rep.ok and rep.checked > 0, str(rep.failures[:3]))
    return f"{compared} pairs agree; {rep.checked} axiom instances"


# ---------------------------------------------------------------- 10


@criterion(10, "Connes sequences, cyclic bracket axioms and bracket agreement for k[x], k[x,y] (U = 3)")
def cyclic() -> str:
    U = 3
    parts = []
    for n, W in ((1, 4), (2, 4)):
        M = models(n, W)
        for H in (M.cm.HA, M.cm.HC):
            rep = connes_sequence_check(H, U)
            need(rep.ok and all(rep.identities.values()), f"Connes sequences, n = {n}: {rep.failures[:3]}")
        prod = hh_product(M, bv_delta(M, "A"), "A")
        for variant, f in (("minus", hcminus_bracket), ("cyclic", menichi_bracket)):
            r = lie_axioms(f(truncate(M.cm.HA, U, variant), prod))
            need(r.ok, f"{variant} bracket, n = {n}: {r.failures[:3]}")
        t = cyclic_bracket_check(polynomial(n, W), W, U=U, models=M)
        need(t.ok and t.compared > 0, f"n = {n}: {t.failures[:3]}")
        parts.append(t.summary())
    return "; ".join(parts)


# ---------------------------------------------------------------- 11


@criterion(11, "byte-identical reports across runs; cached = uncached")
def determinism() -> str:
    runner = CliRunner()
    runs = [
        ("--weight-cap", "3", "hh", str(DATA / "commutative_plane.pres")),
        ("--weight-cap", "3", "--format", "json", "bv", str(DATA / "commutative_plane.pres")),
        ("--seed", "5", "lie", str(DATA / "heisenberg.lie"), "--random", "6"),
        ("--weight-cap", "3", "--u-order", "2", "--format", "csv", "cyclic", str(DATA / "polynomial_1.pres")),
    ]
    with tempfile.TemporaryDirectory() as cache:
        for args in runs:
            outs = [runner.invoke(cli_main, list(args)) for _ in range(2)]
            outs += [runner.invoke(cli_main, ["--cache-dir", cache, *args]) for _ in range(2)]
            need(all(r.exit_code == 0 for r in outs), f"{args[-1]}: nonzero exit")
            need(len({r.output for r in outs}) == 1, f"{' '.join(args)}: outputs differ")
    return f"{len(runs)} commands, 4 runs each (2 fresh, 2 through the cache)"


# ---------------------------------------------------------------- drivers


def run_criterion(n: int) -> Tuple[bool, str]:
    title, f = CRITERIA[n]
    t0 = time.perf_counter()
    try:
        detail = f()
        ok = True
    except Failed as e:
        ok, detail = False, str(e)
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {title} ({detail}; {time.perf_counter() - t0:.1f}s)"
    RESULTS.append(line)
    print(line)
    return ok, line


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n):
    ok, line = run_criterion(n)
    assert ok, line


if __name__ == "__main__":
    failed = [n for n in sorted(CRITERIA) if not run_criterion(n)[0]]
    sys.exit(1 if failed else 0)
