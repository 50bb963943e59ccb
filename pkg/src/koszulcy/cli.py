"""``koszulcy`` command line: one subcommand per pipeline, text/JSON/CSV reports.

Exit codes: 0 when every verification that ran passed (a NotCyclic verdict
counts as a clean result), 1 on a verification failure, 2 on usage or
parse errors, including a stage whose precondition the input does not meet.
"""

from __future__ import annotations

import csv
import functools
import hashlib
import io
import json
import os
import tempfile
from dataclasses import asdict, dataclass, replace
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import click

from .exact_linear import parse_field
from .quadratic import PresentationError, QuadraticDatum, parse_presentation

REPORT_VERSION = 1


@dataclass(frozen=True)
class RunConfig:
    field: Optional[str]
    weight_cap: Optional[int]
    u_order: int
    length_cap: Optional[int]
    budget: int
    format: str
    seed: int
    cache_dir: Optional[str]

    def echo(self) -> Dict[str, object]:
        """The part of the config that can change results (format and cache do not)."""
        d = asdict(self)
        d.pop("format")
        d.pop("cache_dir")
        return d


class StageError(click.ClickException):
    exit_code = 2


class VerificationFailed(Exception):
    pass


# ---------------------------------------------------------------- serialization


def _scalar(x) -> object:
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if hasattr(x, "v") and hasattr(x, "p"):
        return str(x.v)
    return str(x)


def jsonable(x):
    if isinstance(x, dict):
        return {str(k) if not isinstance(k, tuple) else ",".join(map(str, k)): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    return _scalar(x)


def _table(dims: Dict[Tuple[int, int], int]) -> List[List[int]]:
    return [[i, j, d] for (i, j), d in sorted(dims.items())]


def render(report: Dict[str, object], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["table", "i", "j", "dim"])
        for name, rows in sorted(report.get("tables", {}).items()):
            for row in rows:
                w.writerow([name] + list(row))
        return buf.getvalue()
    lines = [f"# koszulcy {report['command']} {report['input']}"]
    cfg = report["config"]
    lines.append("# config: " + " ".join(f"{k}={cfg[k]}" for k in sorted(cfg)))
    for key, val in report.get("results", {}).items():
        if isinstance(val, (dict, list)):
            lines.append(f"{key}: {json.dumps(val, sort_keys=True, ensure_ascii=False)}")
        else:
            lines.append(f"{key}: {val}")
    for name, rows in sorted(report.get("tables", {}).items()):
        lines.append(f"[{name}]")
        for row in rows:
            lines.append("  " + " ".join(str(v) for v in row))
    lines.extend(report.get("verdicts", []))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- input handling


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise StageError(f"cannot read {path}: {e.strerror}") from None


def _directive_field(text: str) -> Optional[str]:
    for raw in text.splitlines():
        toks = raw.split("#", 1)[0].split()
        if len(toks) >= 2 and toks[0] == "field":
            return " ".join(toks[1:])
    return None


def _apply_field(text: str, cfg: RunConfig) -> str:
    """Put ``--field`` into the file text; a file that names a different field is a usage error."""
    if cfg.field is None:
        return text
    want = parse_field(cfg.field)
    have = _directive_field(text)
    if have is not None:
        try:
            same = parse_field(have) == want
        except ValueError:
            return text  # the parser reports the bad field line itself
        if not same:
            raise StageError(f"--field {cfg.field} conflicts with 'field {have}' in the input")
        return text
    lines = text.splitlines()
    for i, raw in enumerate(lines):
        if raw.split("#", 1)[0].strip():
            lines.insert(i + 1, f"field {cfg.field}")
            break
    return "\n".join(lines) + "\n"


def load_datum(text: str, cfg: RunConfig) -> QuadraticDatum:
    try:
        d = parse_presentation(_apply_field(text, cfg))
    except (PresentationError, ValueError) as e:
        raise StageError(f"parse error: {e}") from None
    if cfg.weight_cap is not None:
        d = d.with_cap(cfg.weight_cap)
    return d


def load_lie_data(text: str, cfg: RunConfig):
    from .lie import parse_lie

    try:
        return parse_lie(_apply_field(text, cfg))
    except (PresentationError, ValueError) as e:
        raise StageError(f"parse error: {e}") from None


def is_lie_text(text: str) -> bool:
    from .lie import LIE_HEADER

    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            return line == LIE_HEADER
    return False


# ---------------------------------------------------------------- cache


def _cache_key(command: str, name: str, text: str, cfg: RunConfig, extra: Dict[str, object]) -> str:
    blob = json.dumps({"v": REPORT_VERSION, "cmd": command, "name": name, "text": text, "cfg": cfg.echo(),
                       "extra": extra},
                      sort_keys=True)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _atomic_write(path: Path, data: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run(ctx: click.Context, command: str, path: str, body: Callable[[str, RunConfig], Dict[str, object]],
        extra: Optional[Dict[str, object]] = None) -> None:
    cfg: RunConfig = ctx.obj
    extra = extra or {}
    text = _read(path)
    report = None
    cache_file = None
    if cfg.cache_dir:
        cache_file = Path(cfg.cache_dir) / f"{_cache_key(command, Path(path).name, text, cfg, extra)}.json"
        if cache_file.exists():
            report = json.loads(cache_file.read_text(encoding="utf-8"))
    if report is None:
        res = body(text, cfg)
        report = jsonable({
            "command": command,
            "input": Path(path).name,
            "input_sha256": hashlib.sha256(text.encode("utf-8")).hexdigest(),
            "config": cfg.echo(),
            "options": extra,
            "results": res.get("results", {}),
            "tables": res.get("tables", {}),
            "verdicts": res.get("verdicts", []),
            "ok": bool(res.get("ok", True)),
        })
        if cache_file is not None:
            _atomic_write(cache_file, json.dumps(report, ensure_ascii=False))
    click.echo(render(report, cfg.format), nl=False)
    if not report["ok"]:
        ctx.exit(1)


# ---------------------------------------------------------------- pipelines


def _require_quadratic(text: str, cfg: RunConfig, stage: str) -> QuadraticDatum:
    if is_lie_text(text):
        raise StageError(f"stage {stage}: expects a presentation file, got a Lie file")
    return load_datum(text, cfg)


def _require_cy(datum: QuadraticDatum, cfg: RunConfig, stage: str):
    from .calabi_yau import cy_check

    cert = cy_check(datum, datum.weight_cap, cfg.budget)
    if not cert.is_cy:
        raise StageError(f"stage {stage} needs a Calabi-Yau datum; stage cy says: {cert.summary()}")
    if datum.is_linear_quadratic:
        raise StageError(f"stage {stage} is built for quadratic data only")
    return cert


def body_build(text: str, cfg: RunConfig) -> Dict[str, object]:
    from .quadratic import AlgebraSlice, CoalgebraSlice, DualAlgebraSlice

    d = _require_quadratic(text, cfg, "build")
    W = d.weight_cap
    try:
        A = AlgebraSlice(d.quadratic_part(), W)
        C = CoalgebraSlice(d, W)
        Ad = DualAlgebraSlice(d, W, C)
    except ArithmeticError as e:
        raise StageError(f"stage build: {e}") from None
    return {
        "results": {"generators": list(d.generators), "field": d.field.name, "W": W,
                    "linear_quadratic": d.is_linear_quadratic,
                    "A": list(A.dims()), "A^¡": list(C.dims()), "A^!": list(Ad.dims())},
        "tables": {"A": [[0, w, n] for w, n in enumerate(A.dims())],
                   "A^¡": [[w, w, n] for w, n in enumerate(C.dims())],
                   "A^!": [[w, w, n] for w, n in enumerate(Ad.dims())]},
    }


def body_koszul(text: str, cfg: RunConfig) -> Dict[str, object]:
    from .quadratic import LinearQuadraticError, koszulness_check, linquad_check

    d = _require_quadratic(text, cfg, "koszul")
    W = d.weight_cap
    res: Dict[str, object] = {"W": W}
    try:
        rep = koszulness_check(d, W)
    except LinearQuadraticError as e:
        return {"results": {"W": W, "linear_quadratic_condition": False}, "verdicts": [f"koszul: {e}"],
                "ok": True}
    res["koszul_up_to_W"] = rep.koszul_up_to_W
    res["hilbert_product"] = rep.hilbert_ok
    verdicts = [f"koszul: {rep.summary()}"]
    ok = rep.hilbert_ok or not rep.koszul_up_to_W
    if d.is_linear_quadratic:
        lq = linquad_check(d, W)
        res.update({"linear_quadratic_condition": lq.condition, "d_phi_square_zero": lq.d_phi_square_zero})
        verdicts.append("linear-quadratic: " + ("PASS" if lq.ok else "FAIL"))
    return {"results": res, "tables": {"koszul-homology": _table({b: h for b, h in rep.homology.items() if h})},
            "verdicts": verdicts, "ok": ok}


def body_hh(text: str, cfg: RunConfig, compare: bool) -> Dict[str, object]:
    from .hochschild import ComparisonMaps
    from .smallcx import build_cohomology_complex, build_koszul_complex, small_setup

    d = _require_quadratic(text, cfg, "hh")
    if d.is_linear_quadratic:
        raise StageError("stage hh is built for quadratic data only")
    W = d.weight_cap
    S = small_setup(d, W)
    K = build_koszul_complex(S.A, S.C)
    kc = build_cohomology_complex(S.A, S.Ad)
    hh = {b: K.homology(b).dim for b in K.family.support()}
    hc = {b: kc.homology(b).dim for b in kc.exact_support()}
    tables = {"H(K(A))": _table({b: v for b, v in hh.items() if v}),
              "H(A⊗A^!)": _table({b: v for b, v in hc.items() if v})}
    res: Dict[str, object] = {"W": W, "field": d.field.name}
    verdicts: List[str] = []
    ok = True
    if compare:
        cm = ComparisonMaps(S.A, S.C, W)
        maps = cm.chain_map_report()
        quasi = cm.quasi_iso_report()
        connes = all(cm.connes_on_K(b) == cm.connes_on_K_from_coalgebra(b)
                     for b in hh if hh[b] and hh.get((b[0] + 1, b[1])))
        res.update({"chain_maps": maps, "quasi_isomorphisms": quasi, "connes_agree": connes})
        ok = all(maps.values()) and all(quasi.values()) and connes
        verdicts.append("hochschild-comparison: " + ("PASS" if ok else "FAIL") + f" at weights ≤ {W}")
    return {"results": res, "tables": tables, "verdicts": verdicts, "ok": ok}


def body_cy(text: str, cfg: RunConfig) -> Dict[str, object]:
    from .calabi_yau import cy_check

    if is_lie_text(text):
        from .lie import ue_cy_check

        L = load_lie_data(text, cfg)
        W = cfg.weight_cap if cfg.weight_cap is not None else max(L.dim, 1)
        rep = ue_cy_check(L, W, cfg.budget)
        res = {"lie": True, "dim": L.dim, "unimodular": rep.unimodular.ok,
               "traces": {n: L.field.format(t) for n, t in zip(L.names, rep.unimodular.traces)},
               "certificate": rep.certificate.as_dict()}
        return {"results": res, "verdicts": [rep.summary()], "ok": rep.agrees}
    d = load_datum(text, cfg)
    cert = cy_check(d, d.weight_cap, cfg.budget)
    res = cert.as_dict()
    tables = {}
    if cert.is_cy:
        tables = {f"psi_{k}": [[r, c, d.field.format(v)] for r, row in enumerate(M.rows) for c, v in sorted(row.items())]
                  for k, M in sorted(cert.psi_matrices.items())}
    return {"results": res, "tables": tables, "verdicts": [cert.summary()]}


def body_bv(text: str, cfg: RunConfig) -> Dict[str, object]:
    from .calabi_yau import CYModels, bv_delta, second_order_check

    d = _require_quadratic(text, cfg, "bv")
    cert = _require_cy(d, cfg, "bv")
    models = CYModels(cert, d.weight_cap)
    res: Dict[str, object] = {"n": cert.n, "W": d.weight_cap}
    tables = {}
    verdicts = []
    ok = True
    for side in ("A", "A!"):
        bv = bv_delta(models, side)
        so = second_order_check(bv)
        res[f"{side}:delta_squared_zero"] = bv.delta_squared_zero()
        res[f"{side}:second_order_triples"] = so.checked
        ok = ok and so.ok and bv.delta_squared_zero()
        verdicts.append(f"bv[{side}]: " + ("PASS" if so.ok else "FAIL " + "; ".join(so.failures[:2]))
                        + f" ({so.checked} triples)")
        tables[f"delta[{side}]"] = [[b[0], b[1], r, c, d.field.format(v)]
                                    for b, M in sorted(bv.delta.items()) for r, row in enumerate(M.rows)
                                    for c, v in sorted(row.items())]
    tables["HH^ij"] = _table({(-b[0], -b[1]): models.kc.homology(b).dim for b in models.window})
    return {"results": res, "tables": tables, "verdicts": verdicts, "ok": ok}


def body_verify_main(text: str, cfg: RunConfig) -> Dict[str, object]:
    from .calabi_yau import main_theorem_check

    d = _require_quadratic(text, cfg, "verify-main")
    cert = _require_cy(d, cfg, "verify-main")
    from .calabi_yau import CYModels

    rep = main_theorem_check(d, d.weight_cap, cfg.budget, models=CYModels(cert, d.weight_cap),
                             length_cap=cfg.length_cap)
    return {"results": {"n": rep.n, "W": rep.W, "checks": rep.checks, "bidegrees": len(rep.bidegrees)},
            "verdicts": [rep.summary()], "ok": rep.ok}


def emit_presentation(path: str, cfg: RunConfig, out: str) -> None:
    from .lie import to_linquad_datum
    from .quadratic import print_presentation

    text = _read(path)
    if not is_lie_text(text):
        raise StageError("stage lie: expects a Lie file")
    L = load_lie_data(text, cfg)
    W = cfg.weight_cap if cfg.weight_cap is not None else max(L.dim, 1)
    try:
        d = to_linquad_datum(L, W)
    except ValueError as e:
        raise StageError(f"stage lie: {e}") from None
    _atomic_write(Path(out), print_presentation(d))


def body_lie(text: str, cfg: RunConfig, random_count: int) -> Dict[str, object]:
    import random

    from .lie import (CEComplexes, ce_duality_check, ce_matches_dual_algebra, random_solvable,
                      ue_cy_check, unimodularity_check)

    if not is_lie_text(text):
        raise StageError("stage lie: expects a Lie file")
    L = load_lie_data(text, cfg)
    bad = L.jacobi_failure()
    if bad is not None:
        raise StageError("stage lie: Jacobi identity fails on ({}, {}, {})".format(*(L.names[t] for t in bad)))
    W = cfg.weight_cap if cfg.weight_cap is not None else max(L.dim, 1)
    cx = CEComplexes(L)
    uni = unimodularity_check(L)
    dual = ce_duality_check(L, cx)
    match = ce_matches_dual_algebra(L, cx)
    res: Dict[str, object] = {
        "dim": L.dim, "unimodular": uni.ok,
        "traces": {n: L.field.format(t) for n, t in zip(L.names, uni.traces)},
        "ce_dims": list(cx.dims()), "ce_duality": dual.ok, "ce_defect_degrees": dual.defect_degrees(),
        "ce_equals_dual_algebra": match is None,
    }
    verdicts = [uni.summary(), "ce-duality: " + ("chain isomorphism" if dual.ok else
                                                 f"defect in degrees {dual.defect_degrees()}")]
    ok = match is None
    if match is not None:
        verdicts.append(f"ce-vs-A^!: FAIL ({match})")
    if L.dim <= 4:
        rep = ue_cy_check(L, W, cfg.budget)
        verdicts.append(rep.summary())
    if random_count:
        rng = random.Random(cfg.seed)
        agree = 0
        for t in range(random_count):
            R = random_solvable(rng, 2 + t % 3, unimodular=(t % 2 == 0), field=L.field)
            u = unimodularity_check(R).ok
            if ce_duality_check(R).ok == u and ue_cy_check(R, R.dim, cfg.budget).is_cy == u:
                agree += 1
        res["random_agree"] = f"{agree}/{random_count}"
        ok = ok and agree == random_count
        verdicts.append(f"random: {agree}/{random_count} verdicts match unimodularity (seed {cfg.seed})")
    return {"results": res, "verdicts": verdicts, "ok": ok}


def body_cyclic(text: str, cfg: RunConfig) -> Dict[str, object]:
    from .cyclic import VARIANTS, connes_sequence_check, cyclic_groups, cyclic_bracket_check
    from .hochschild import ComparisonMaps
    from .smallcx import small_setup

    d = _require_quadratic(text, cfg, "cyclic")
    if d.field.characteristic != 0:
        raise StageError("stage cyclic: cyclic homology needs characteristic 0 (use --field q)")
    W, U = d.weight_cap, cfg.u_order
    S = small_setup(d, W)
    cm = ComparisonMaps(S.A, S.C, W)
    tables = {}
    for var in VARIANTS:
        g = cyclic_groups(cm.HA, U, var)
        tables[{"minus": "HC-", "cyclic": "HC", "periodic": "HCper"}[var]] = _table(
            {b: r for b, r in g.ranks.items() if r})
    cs = connes_sequence_check(cm.HA, U)
    res: Dict[str, object] = {"W": W, "U": U, "connes_nodes": cs.nodes, "identities": cs.identities}
    verdicts = [cs.summary()]
    ok = cs.ok
    from .calabi_yau import CYModels, cy_check

    cert = cy_check(d, W, cfg.budget)
    if cert.is_cy and not d.is_linear_quadratic:
        rep = cyclic_bracket_check(d, W, U, cfg.budget, models=CYModels(cert, W))
        res["lie"] = {k: {"pairs": v.pairs, "triples": v.triples, "nonzero": v.nonzero} for k, v in rep.lie.items()}
        verdicts.append(rep.summary())
        ok = ok and rep.ok
    else:
        verdicts.append(f"cyclic-lie: skipped ({cert.summary()})")
    return {"results": res, "tables": tables, "verdicts": verdicts, "ok": ok}


# ---------------------------------------------------------------- click surface


_DEFAULTS = {"u_order": 3, "budget": 2000, "fmt": "text", "seed": 0}


def common_options(on_group: bool):
    """The run options; accepted both before and after the subcommand name.

    On subcommands every default is None so that only flags actually given
    override what the group already parsed.
    """
    def dflt(key):
        return _DEFAULTS.get(key) if on_group else None

    opts = [
        click.option("--field", "field_", default=None, help="q or fp:<p>; overrides the file's field."),
        click.option("--weight-cap", type=click.IntRange(min=0), default=None,
                     help="Weight cap W (default: from the file)."),
        click.option("--u-order", type=click.IntRange(min=0), default=dflt("u_order"), show_default=on_group,
                     help="u-truncation order U."),
        click.option("--length-cap", type=click.IntRange(min=1), default=None, help="Cochain length cap L."),
        click.option("--budget", type=click.IntRange(min=1), default=dflt("budget"), show_default=on_group,
                     help="Pairing search budget."),
        click.option("--format", "fmt", type=click.Choice(["text", "json", "csv"]), default=dflt("fmt"),
                     show_default=on_group),
        click.option("--seed", type=int, default=dflt("seed"), show_default=on_group,
                     help="Seed for sampled property checks."),
        click.option("--cache-dir", type=click.Path(file_okay=False), default=None,
                     help="Directory for cached reports."),
    ]

    def deco(f):
        for o in reversed(opts):
            f = o(f)
        return f
    return deco


_OPTION_KEYS = ("field_", "weight_cap", "u_order", "length_cap", "budget", "fmt", "seed", "cache_dir")


def _check_field(field_: Optional[str]) -> None:
    if field_ is not None:
        try:
            parse_field(field_)
        except ValueError as e:
            raise click.BadParameter(str(e), param_hint="--field") from None


def pipeline_command(name: Optional[str] = None):
    """``main.command`` plus the run options, merged into ``ctx.obj`` before the body runs."""
    def deco(f):
        @functools.wraps(f)
        def wrapper(*args, **kwargs):
            ctx = click.get_current_context()
            given = {k: kwargs.pop(k) for k in _OPTION_KEYS}
            _check_field(given["field_"])
            renames = {"field_": "field", "fmt": "format"}
            upd = {renames.get(k, k): v for k, v in given.items() if v is not None}
            if upd:
                ctx.obj = replace(ctx.obj, **upd)
            return f(*args, **kwargs)
        return main.command(name)(common_options(False)(wrapper))
    return deco


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@common_options(True)
@click.pass_context
def main(ctx, field_, weight_cap, u_order, length_cap, budget, fmt, seed, cache_dir):
    """Exact Koszul, Hochschild, Calabi-Yau and cyclic computations."""
    _check_field(field_)
    ctx.obj = RunConfig(field_, weight_cap, u_order, length_cap, budget, fmt, seed, cache_dir)


@pipeline_command()
@click.argument("path", type=click.Path())
@click.pass_context
def build(ctx, path):
    """Dimensions of A, A^¡ and A^! per weight."""
    run(ctx, "build", path, body_build)


@pipeline_command()
@click.argument("path", type=click.Path())
@click.pass_context
def koszul(ctx, path):
    """Koszulness up to the weight cap, with the Hilbert-series cross-check."""
    run(ctx, "koszul", path, body_koszul)


@pipeline_command()
@click.argument("path", type=click.Path())
@click.option("--compare/--no-compare", default=True, help="Cross-check against the bar and cobar models.")
@click.pass_context
def hh(ctx, path, compare):
    """Hochschild homology and cohomology tables of the small models."""
    run(ctx, "hh", path, lambda t, c: body_hh(t, c, compare), {"compare": compare})


@pipeline_command()
@click.argument("path", type=click.Path())
@click.pass_context
def cy(ctx, path):
    """Calabi-Yau certificate (presentation) or the unimodularity route (Lie file)."""
    run(ctx, "cy", path, body_cy)


@pipeline_command()
@click.argument("path", type=click.Path())
@click.pass_context
def bv(ctx, path):
    """BV operators on both sides and the second-order identity."""
    run(ctx, "bv", path, body_bv)


@pipeline_command("verify-main")
@click.argument("path", type=click.Path())
@click.pass_context
def verify_main(ctx, path):
    """Compare the two BV algebras on cohomology."""
    run(ctx, "verify-main", path, body_verify_main)


@pipeline_command()
@click.argument("path", type=click.Path())
@click.option("--random", "random_count", type=click.IntRange(min=0), default=0,
              help="Also test this many seeded random solvable algebras.")
@click.option("--emit-presentation", "emit", type=click.Path(dir_okay=False), default=None,
              help="Write the U(g) presentation here.")
@click.pass_context
def lie(ctx, path, random_count, emit):
    """CE complexes, unimodularity and the U(g) Calabi-Yau verdict."""
    if emit:
        emit_presentation(path, ctx.obj, emit)
    run(ctx, "lie", path, lambda t, c: body_lie(t, c, random_count), {"random": random_count})


@pipeline_command()
@click.argument("path", type=click.Path())
@click.pass_context
def cyclic(ctx, path):
    """HC⁻, HC, HC^per ranks, Connes sequences and the cyclic brackets."""
    run(ctx, "cyclic", path, body_cyclic)


if __name__ == "__main__":  # pragma: no cover
    main()
