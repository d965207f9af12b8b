"""Command-line front end.

Exit codes: 0 ok or isotropic, 1 violation or not isotropic, 2 configuration
error, 3 domain error, 4 inconclusive, 5 unsupported dimension.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from dataclasses import asdict
from typing import Sequence

import numpy as np

from . import __version__
from . import autodiff as ad
from . import finsler
from .analysis import (
    PreconditionError,
    UnsupportedDimension,
    classify,
    term_breakdown,
    verify,
    verify_summary,
)
from .closed_form import bh_volume, closed_form
from .fields import CATALOG, FieldConfigError, FieldSpec, check_field_point, load_catalog, load_field
from .riemannian import rs_data

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_DOMAIN, EXIT_INCONCLUSIVE, EXIT_DIMENSION = range(6)
CSV_COLUMNS = ("point_index", "x", "quantity", "closed_form", "pipeline", "residual")
VERDICT_EXIT = {"isotropic": EXIT_OK, "not-isotropic": EXIT_FAIL, "inconclusive": EXIT_INCONCLUSIVE}

DESCRIPTIONS = {
    "F": "Kropina metric value alpha^2/beta",
    "beta": "one-form beta(y)",
    "alpha2": "alpha^2(y)",
    "g": "fundamental tensor g_ij",
    "g_inv": "inverse fundamental tensor g^ij",
    "alphaRic": "Ricci curvature of alpha along y",
    "T": "Ricci correction T = Ric - alphaRic",
    "Ric": "Ricci curvature Ric(y)",
    "Ric_kl": "Ricci curvature tensor",
    "R": "scalar curvature",
    "f": "bb-contracted curvature scalar f",
    "kappa": "predicted isotropy factor kappa",
    "predicted_R": "n(n-1) kappa",
    "sigma": "Busemann-Hausdorff volume density",
    "S": "S-curvature for the Busemann-Hausdorff density",
}


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


# --------------------------------------------------------------------------
# Serialisation helpers
# --------------------------------------------------------------------------


def _plain(v):
    """JSON-friendly version of floats, arrays and nested containers."""
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


def _cell(v) -> str:
    if v is None:
        return ""
    v = _plain(v)
    if isinstance(v, list):
        return json.dumps(v, separators=(",", ":"))
    if isinstance(v, float):
        return repr(v)
    return str(v)


def config_hash(spec: FieldSpec) -> str:
    text = json.dumps(spec.to_document(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def emit_report(data: dict, fmt: str) -> str:
    """Render a report dict as Markdown, CSV or JSON text."""
    if fmt == "json":
        return json.dumps(_plain(data), indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in data.get("rows", []):
            w.writerow([_cell(row.get(c)) for c in CSV_COLUMNS])
        return buf.getvalue()
    return _markdown(data)


def _md_table(header: Sequence[str], rows: Sequence[Sequence]) -> list[str]:
    out = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    out += ["| " + " | ".join(_cell(c) for c in r) + " |" for r in rows]
    return out


def _markdown(data: dict) -> str:
    meta = data["meta"]
    lines = [f"# kropina {meta['command']}", ""]
    lines += [f"- {k}: {_cell(v)}" for k, v in meta.items() if k != "command"]
    for key in ("summary", "verdict"):
        if key in data:
            lines += ["", f"## {key}", ""]
            block = data[key]
            if isinstance(block, dict):
                lines += _md_table(["item", "value"], [[k, v] for k, v in block.items()])
            else:
                lines.append(str(block))
    if data.get("rows"):
        cols = list(CSV_COLUMNS)
        if any("description" in r for r in data["rows"]):
            cols.insert(3, "description")
        lines += ["", "## samples", ""]
        lines += _md_table(cols, [[r.get(c) for c in cols] for r in data["rows"]])
    if data.get("terms"):
        lines += ["", "## term breakdown", ""]
        for entry in data["terms"]:
            lines.append(f"### point {entry['point_index']} direction {entry.get('dir_index', 0)}")
            lines += _md_table(["term", "value"], [[t["term"], t["value"]] for t in entry["T"]])
            lines.append("")
            lines += _md_table(
                ["term", "power of 1/F", "value"],
                [[t["term"], t["power_of_inverse_F"], t["value"]] for t in entry["R"]],
            )
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------


def _load_spec(args) -> FieldSpec:
    try:
        if args.config:
            return load_field(args.config)
        if args.catalog:
            return load_catalog(args.catalog, seed=args.seed)
    except FieldConfigError as exc:
        raise CliError(str(exc), EXIT_CONFIG) from exc
    raise CliError("one of --config or --catalog is required", EXIT_CONFIG)


def _vector(text: str | None, n: int, flag: str) -> np.ndarray | None:
    if text is None:
        return None
    try:
        v = np.array([float(t) for t in text.split(",")])
    except ValueError as exc:
        raise CliError(f"{flag}: {exc}", EXIT_CONFIG) from exc
    if len(v) != n:
        raise CliError(f"{flag}: expected {n} comma-separated numbers", EXIT_CONFIG)
    return v


def _meta(args, spec: FieldSpec | None, **extra) -> dict:
    meta = {"command": args.command, "version": __version__}
    if spec is not None:
        meta.update(field=spec.name, dimension=spec.n, config_hash=config_hash(spec))
    meta.update(extra)
    return meta


def run_eval(args) -> tuple[dict, int]:
    spec = _load_spec(args)
    x = _vector(args.point, spec.n, "--point")
    y = _vector(args.dir, spec.n, "--dir")
    if x is None or y is None:
        raise CliError("eval needs --point and --dir", EXIT_CONFIG)
    try:
        check_field_point(spec, x)
    except FieldConfigError as exc:
        raise CliError(f"field data invalid at x: {exc}", EXIT_DOMAIN) from exc
    d = rs_data(spec, x)
    if float(d.beta(y)) <= 0:
        raise CliError("direction lies outside the Kropina cone beta(y) > 0", EXIT_DOMAIN)
    try:
        cf = closed_form(spec, x, y, d)
        ev = finsler.evaluate(finsler.kropina_metric(spec), x, y, sigma=lambda X: bh_volume(spec, X))
    except ad.DomainError as exc:
        raise CliError(f"domain error: {exc}", EXIT_DOMAIN) from exc
    alpha_ric = float(d.alpha.ricci_y(y))
    values = [
        ("F", cf.F, ev.F),
        ("beta", cf.beta, None),
        ("alpha2", cf.alpha2, None),
        ("g", cf.g, ev.g),
        ("g_inv", cf.g_inv, ev.g_inv),
        ("alphaRic", alpha_ric, None),
        ("T", cf.T, ev.Ric - alpha_ric),
        ("Ric", cf.Ric, ev.Ric),
        ("Ric_kl", cf.ric, ev.ric),
        ("R", cf.R, ev.R),
        ("f", cf.f, None),
        ("kappa", cf.kappa, None),
        ("predicted_R", cf.predicted_R, None),
        ("sigma", bh_volume(spec, x), None),
        ("S", None, ev.S),
    ]
    rows = []
    for name, c, p in values:
        res = None
        if c is not None and p is not None:
            a, b = np.asarray(c, float), np.asarray(p, float)
            res = float(np.max(np.abs(a - b)) / (1 + np.max(np.abs(b))))
        rows.append(
            {
                "point_index": 0,
                "x": x,
                "quantity": name,
                "description": DESCRIPTIONS[name],
                "closed_form": c,
                "pipeline": p,
                "residual": res,
            }
        )
    data = {"meta": _meta(args, spec, x=x, y=y), "rows": rows}
    if args.verbose_terms:
        data["terms"] = [{"point_index": 0, "dir_index": 0, **term_breakdown(d, y)}]
    return data, EXIT_OK


def run_verify(args) -> tuple[dict, int]:
    spec = _load_spec(args)
    x = _vector(args.point, spec.n, "--point")
    try:
        samples = verify(
            spec, args.points, args.dirs, args.seed, args.workers, xs=None if x is None else [x]
        )
    except ad.DomainError as exc:
        raise CliError(f"domain error: {exc}", EXIT_DOMAIN) from exc
    rows = [
        {
            "point_index": s.point_index,
            "x": s.x,
            "quantity": f"{s.quantity}@dir{s.dir_index}",
            "closed_form": s.closed_form,
            "pipeline": s.pipeline,
            "residual": s.residual,
        }
        for s in samples
    ]
    summary = {}
    for q, st in verify_summary(samples).items():
        summary[f"{q} max"] = st["max"]
        summary[f"{q} mean"] = st["mean"]
    ok = all(s.residual <= args.tol for s in samples)
    summary["status"] = "pass" if ok else "fail"
    data = {
        "meta": _meta(args, spec, points=args.points if x is None else 1, dirs=args.dirs, seed=args.seed, tol=args.tol),
        "summary": summary,
        "rows": rows,
    }
    if args.verbose_terms:
        data["terms"] = _terms_for(spec, samples)
    return data, EXIT_OK if ok else EXIT_FAIL


def _terms_for(spec, samples) -> list[dict]:
    out, cache = [], {}
    for s in samples:
        if s.quantity != "Ric":
            continue
        if s.point_index not in cache:
            cache[s.point_index] = rs_data(spec, s.x)
        out.append(
            {"point_index": s.point_index, "dir_index": s.dir_index, **term_breakdown(cache[s.point_index], s.y)}
        )
    return out


def _classify_rows(report) -> list[dict]:
    rows = []
    diag = {r.index: r for r in report.diagnostics.records} if report.diagnostics else {}
    nn = report.n * (report.n - 1)
    for p in report.points:
        base = {"point_index": p.index, "x": p.x}
        for i in (1, 2, 3):
            rows.append(
                {**base, "quantity": f"condition{i}", "closed_form": getattr(p, f"raw_cond{i}"), "pipeline": None, "residual": getattr(p, f"residual_cond{i}")}
            )
        dr = diag.get(p.index)
        pipe_kappa = float(np.mean(dr.R_pipeline)) / nn if dr else None
        rows.append(
            {
                **base,
                "quantity": "kappa",
                "closed_form": p.kappa,
                "pipeline": pipe_kappa,
                "residual": None if dr is None else abs(p.kappa - pipe_kappa) / (1 + abs(pipe_kappa)),
            }
        )
        if dr is None:
            continue
        for name, entry in dr.identities.items():
            val = entry.get("sum", entry.get("value", entry.get("contracted_bb")))
            rows.append({**base, "quantity": name, "closed_form": val, "pipeline": None, "residual": entry["residual"]})
        rows.append({**base, "quantity": "S", "closed_form": None, "pipeline": max(dr.S, key=abs), "residual": max(abs(v) for v in dr.S)})
        rows.append(
            {**base, "quantity": "R_vs_predicted", "closed_form": dr.predicted_R, "pipeline": float(np.mean(dr.R_pipeline)), "residual": dr.R_vs_predicted}
        )
    return rows


def _run_classification(args, spec):
    x = _vector(args.point, spec.n, "--point") if spec.n >= 3 else None
    try:
        return classify(
            spec,
            points=args.points if x is None else [x],
            dirs=args.dirs,
            tol=args.tol,
            mode=args.mode,
            seed=args.seed,
            workers=args.workers,
        )
    except UnsupportedDimension as exc:
        raise CliError(str(exc), EXIT_DIMENSION) from exc
    except PreconditionError as exc:
        raise CliError(str(exc), EXIT_CONFIG) from exc
    except ad.DomainError as exc:
        raise CliError(f"domain error: {exc}", EXIT_DOMAIN) from exc
    except ValueError as exc:
        raise CliError(str(exc), EXIT_CONFIG) from exc


def _classify_summary(report) -> dict:
    out = {
        "verdict": report.verdict,
        "mode": report.mode,
        "kappa_mean": report.kappa_mean,
        "kappa_spread": report.kappa_spread,
        "flagged": ", ".join(report.flagged) or "none",
    }
    out.update({f"max {k}": v for k, v in report.max_residual.items()})
    if report.diagnostics:
        out.update({f"diagnostic {k}": v for k, v in report.diagnostics.max_residual.items()})
        out["failing diagnostics"] = ", ".join(report.diagnostics.failing) or "none"
    return out


def run_classify(args) -> tuple[dict, int]:
    spec = _load_spec(args)
    report = _run_classification(args, spec)
    data = {
        "meta": _meta(args, spec, points=len(report.points), dirs=args.dirs, seed=args.seed, tol=args.tol),
        "verdict": _classify_summary(report),
        "rows": _classify_rows(report),
        "report": asdict(report),
    }
    return data, VERDICT_EXIT[report.verdict]


def run_report(args) -> tuple[dict, int]:
    ver, ver_code = run_verify(args)
    cls, cls_code = run_classify(args)
    data = {
        "meta": {**ver["meta"], "command": "report"},
        "summary": ver["summary"],
        "verdict": cls["verdict"],
        "rows": ver["rows"] + cls["rows"],
        "report": cls["report"],
    }
    if "terms" in ver:
        data["terms"] = ver["terms"]
    return data, ver_code if ver_code != EXIT_OK else cls_code


def run_catalog(args) -> tuple[dict, int]:
    """List the built-in fields, or print the config document of one field."""
    if args.catalog or args.config:
        spec = _load_spec(args)
        return {"meta": _meta(args, spec), "summary": spec.to_document()}, EXIT_OK
    summary = {name: f"n = {load_catalog(name, seed=args.seed).n}" for name in CATALOG}
    rows = [{"quantity": name, "closed_form": text[4:]} for name, text in summary.items()]
    return {"meta": _meta(args, None), "summary": summary, "rows": rows}, EXIT_OK


COMMANDS = {
    "eval": run_eval,
    "verify": run_verify,
    "classify": run_classify,
    "report": run_report,
    "catalog": run_catalog,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kropina", description="Curvature of Kropina metrics: closed forms vs autodiff.")
    p.add_argument("--version", action="version", version=f"kropina {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--config", metavar="PATH", help="field config JSON file")
    src.add_argument("--catalog", metavar="NAME", help=f"built-in field ({', '.join(CATALOG)})")
    common.add_argument("--points", type=int, default=20)
    common.add_argument("--dirs", type=int, default=8)
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--tol", type=float, default=1e-6)
    common.add_argument("--format", choices=("md", "csv", "json"), default="md")
    common.add_argument("--mode", choices=("general", "s0-zero"), default="general")
    common.add_argument("--point", metavar="X1,X2,...")
    common.add_argument("--dir", metavar="Y1,Y2,...")
    common.add_argument("--verbose-terms", action="store_true", help="include per-term breakdowns")
    common.add_argument("--workers", type=int, default=1, help="worker processes (output is unaffected)")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        if args.points < 1 or args.dirs < 1 or not args.tol > 0 or args.workers < 1:
            raise CliError("--points, --dirs and --workers must be >= 1 and --tol > 0", EXIT_CONFIG)
        data, code = COMMANDS[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    sys.stdout.write(emit_report(data, args.format))
    return code


if __name__ == "__main__":
    sys.exit(main())
