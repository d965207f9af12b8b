"""Oracle comparison, isotropy classification and consistency diagnostics.

Work is split into pure per-point jobs (``_verify_job``, ``_classify_job``,
``_diagnose_job``) so that :func:`~kropina.sampling.ordered_map` can farm them
out to processes without affecting the result.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from functools import partial
from typing import Sequence

import numpy as np

from . import autodiff as ad
from . import finsler
from .closed_form import (
    Ctx,
    bh_volume,
    closed_fundamental,
    closed_ricci,
    predicted_kappa,
    ricci_correction_terms,
    ricci_tensor,
    scalar_curvature,
    scalar_curvature_terms,
)
from .fields import FieldSpec
from .riemannian import RSData, rs_data
from .sampling import ordered_map, sample_directions, sample_point, sample_rng

VERIFY_QUANTITIES = ("g", "Ric", "Ric_kl", "R")
INCONCLUSIVE_FACTOR = 10.0


class UnsupportedDimension(ValueError):
    """The isotropy criterion needs n >= 3."""


class PreconditionError(ValueError):
    """The requested classification mode does not apply to this field."""


def rel_residual(closed, pipeline) -> float:
    """max |closed - pipeline| / (1 + max |pipeline|)."""
    c = np.asarray(closed, float)
    p = np.asarray(pipeline, float)
    return float(np.max(np.abs(c - p)) / (1.0 + np.max(np.abs(p))))


def _case(spec: FieldSpec, seed: int, k: int, dirs: int, x=None):
    rng = sample_rng(seed, k)
    if x is None:
        x = sample_point(spec, rng)
    x = np.asarray(x, float)
    d = rs_data(spec, x)
    return x, d, sample_directions(d.a, d.b, dirs, rng)


# --------------------------------------------------------------------------
# Oracle verification
# --------------------------------------------------------------------------


@dataclass
class VerifySample:
    point_index: int
    dir_index: int
    x: list
    y: list
    quantity: str
    closed_form: object
    pipeline: object
    residual: float


def _verify_job(args, spec: FieldSpec, seed: int, dirs: int) -> list[VerifySample]:
    k, x = args
    x, d, ys = _case(spec, seed, k, dirs, x)
    F = finsler.kropina_metric(spec)
    out = []
    for j, y in enumerate(ys):
        ev = finsler.evaluate(F, x, y)
        g, _ = closed_fundamental(d, y)
        Ric, _ = closed_ricci(d, y)
        pairs = {
            "g": (g, ev.g),
            "Ric": (Ric, ev.Ric),
            "Ric_kl": (ricci_tensor(d, y), ev.ric),
            "R": (scalar_curvature(d, y), ev.R),
        }
        for q in VERIFY_QUANTITIES:
            c, p = pairs[q]
            out.append(
                VerifySample(k, j, x.tolist(), y.tolist(), q, np.asarray(c).tolist(), np.asarray(p).tolist(), rel_residual(c, p))
            )
    return out


def verify(
    spec: FieldSpec,
    points: int = 20,
    dirs: int = 8,
    seed: int = 42,
    workers: int = 1,
    xs: Sequence[Sequence[float]] | None = None,
) -> list[VerifySample]:
    """Closed form vs first-principles pipeline at points x dirs samples."""
    jobs = list(enumerate(xs)) if xs is not None else [(k, None) for k in range(points)]
    chunks = ordered_map(partial(_verify_job, spec=spec, seed=seed, dirs=dirs), jobs, workers)
    return [s for chunk in chunks for s in chunk]


def verify_summary(samples: Sequence[VerifySample]) -> dict[str, dict[str, float]]:
    out: dict[str, dict[str, float]] = {}
    for q in VERIFY_QUANTITIES:
        vals = [s.residual for s in samples if s.quantity == q]
        if vals:
            out[q] = {"max": max(vals), "mean": math.fsum(vals) / len(vals)}
    return out


# --------------------------------------------------------------------------
# Classification
# --------------------------------------------------------------------------


@dataclass
class PointRecord:
    index: int
    x: list
    residual_cond1: float
    residual_cond2: float
    residual_cond3: float
    raw_cond1: float
    raw_cond2: float
    raw_cond3: float
    kappa: float
    predicted_R: float
    c: float
    b2: float
    r_norm: float
    s_norm: float


def _normalized(raw: float, scales: Sequence[float]) -> float:
    return raw / (1.0 + max((abs(s) for s in scales), default=0.0))


def condition1_terms(d: RSData, reduced: bool = False) -> tuple[float, list[float]]:
    """(left side, right side terms) of the b^k b^l alpha-Ric_kl condition."""
    n, b2 = d.n, d.b2
    rhs = [
        b2 / (2 * (n - 1)) * d.alpha.scalar,
        -(n - 2) / (2 * (n - 1)) * d.s_tr2,
        -(n - 2) / 2 * (2 * d.c_b - d.c**2),
    ]
    if not reduced:
        rhs.append(-(n - 2) * (n + 1) / (2 * (n - 1) * b2) * d.ss)
    return d.ricci_bb, rhs


def condition3_matrices(d: RSData, reduced: bool = False) -> tuple[np.ndarray, list[np.ndarray]]:
    """Quadratic-form matrices of both sides of the f alpha^2 condition.

    Each side is written as a function of y and its y-Hessian is taken by
    automatic differentiation; the matrix of a quadratic form is half of it.
    """
    n, b2 = d.n, d.b2

    def quad(fn):
        return 0.5 * ad.hessian(lambda v: fn(np.array(v, dtype=object)), np.ones(n))

    lhs = quad(lambda y: d.f * d.alpha2(y))
    k = n - 2
    parts = [
        lambda y: -b2 * b2 * d.alpha.ricci_y(y),
        lambda y: k * d.c**2 * d.beta(y) ** 2,
        lambda y: -k * b2 * d.c0(y) * d.beta(y),
    ]
    if not reduced:
        parts += [
            lambda y: 2 * k * d.c * d.s0(y) * d.beta(y),
            lambda y: k * d.s0(y) ** 2,
            lambda y: -k * b2 * d.s0_0(y),
        ]
    return lhs, [quad(p) for p in parts]


def _classify_job(args, spec: FieldSpec, mode: str) -> PointRecord:
    k, x = args
    x = np.asarray(x, float)
    d = rs_data(spec, x)
    reduced = mode == "s0-zero"
    lhs1, rhs1 = condition1_terms(d, reduced)
    raw1 = abs(lhs1 - math.fsum(rhs1))
    r_norm = float(np.linalg.norm(d.r))
    raw2 = float(np.linalg.norm(d.r - d.c * d.a))
    lhs3, rhs3 = condition3_matrices(d, reduced)
    raw3 = float(np.linalg.norm(lhs3 - sum(rhs3)))
    kappa, pred = predicted_kappa(d)
    return PointRecord(
        index=k,
        x=x.tolist(),
        residual_cond1=_normalized(raw1, [lhs1, *rhs1]),
        residual_cond2=raw2 / max(1.0, r_norm),
        residual_cond3=_normalized(raw3, [float(np.linalg.norm(m)) for m in [lhs3, *rhs3]]),
        raw_cond1=raw1,
        raw_cond2=raw2,
        raw_cond3=raw3,
        kappa=kappa,
        predicted_R=pred,
        c=d.c,
        b2=d.b2,
        r_norm=r_norm,
        s_norm=math.sqrt(max(d.ss, 0.0)),
    )


@dataclass
class ClassificationReport:
    field: str
    n: int
    mode: str
    tol: float
    points: list[PointRecord]
    verdict: str
    kappa_mean: float
    kappa_spread: float
    max_residual: dict[str, float]
    flagged: list[str]
    diagnostics: "DiagnosticBlock | None" = None

    def to_dict(self) -> dict:
        return asdict(self)


def decide(max_residual: float, kappa_mean: float, kappa_spread: float, tol: float) -> str:
    """isotropic iff everything is within tol; a band up to 10 tol is inconclusive."""
    score = max(max_residual, kappa_spread / max(1.0, abs(kappa_mean)))
    if score <= tol:
        return "isotropic"
    if score <= INCONCLUSIVE_FACTOR * tol:
        return "inconclusive"
    return "not-isotropic"


def classify(
    spec: FieldSpec,
    points: Sequence[Sequence[float]] | int = 20,
    dirs: int = 8,
    tol: float = 1e-6,
    mode: str = "general",
    seed: int = 42,
    workers: int = 1,
    with_diagnostics: bool = True,
) -> ClassificationReport:
    """Test the three-condition isotropic scalar curvature criterion point by point."""
    if spec.n < 3:
        raise UnsupportedDimension(f"the criterion requires n >= 3, got n = {spec.n}")
    if mode not in ("general", "s0-zero"):
        raise ValueError(f"unknown mode {mode!r}")
    if isinstance(points, int):
        xs = [sample_point(spec, sample_rng(seed, k)) for k in range(points)]
    else:
        xs = [np.asarray(p, float) for p in points]
    if not xs:
        raise ValueError("classify needs at least one point")
    for x in xs:
        if not spec.in_guard(x):
            raise ValueError(f"point {np.round(x, 6).tolist()} lies outside the guard box")
    records = ordered_map(partial(_classify_job, spec=spec, mode=mode), list(enumerate(xs)), workers)
    if mode == "s0-zero":
        worst = max(r.s_norm / max(1.0, math.sqrt(r.b2)) for r in records)
        if worst > tol:
            raise PreconditionError(f"s0-zero mode needs s_i = 0, found |s| = {worst:.3g}")

    kappas = [r.kappa for r in records]
    kappa_mean = math.fsum(kappas) / len(kappas)
    kappa_spread = max(kappas) - min(kappas)
    max_res = {
        "cond1": max(r.residual_cond1 for r in records),
        "cond2": max(r.residual_cond2 for r in records),
        "cond3": max(r.residual_cond3 for r in records),
    }
    flagged = [k for k, v in max_res.items() if v > tol]
    if kappa_spread > tol * max(1.0, abs(kappa_mean)):
        flagged.append("kappa")
    verdict = decide(max(max_res.values()), kappa_mean, kappa_spread, tol)
    report = ClassificationReport(
        field=spec.name,
        n=spec.n,
        mode=mode,
        tol=tol,
        points=records,
        verdict=verdict,
        kappa_mean=kappa_mean,
        kappa_spread=kappa_spread,
        max_residual=max_res,
        flagged=flagged,
    )
    if with_diagnostics:
        report.diagnostics = diagnostics(spec, [np.asarray(r.x) for r in records], dirs, tol, seed, workers)
    return report


# --------------------------------------------------------------------------
# Diagnostics
# --------------------------------------------------------------------------


def identity_residuals(d: RSData) -> dict[str, dict[str, float]]:
    """Consistency identities that every isotropic instance must satisfy.

    Returned per identity: the two compared values (or the vanishing sum) and
    a normalized residual.
    """
    n, b2 = d.n, d.b2
    bbR, aR = d.ricci_bb, d.alpha.scalar
    f_trace = b2 / (n - 1) * (bbR - b2 * aR) + (n - 2) / (n - 1) * (2 * d.ss - b2 * d.s_div)
    div_pred_terms = [
        -(b2 * aR - n * bbR) / (n - 2),
        (n - 1) * (d.c_b - d.c**2),
        (n + 1) * d.ss / b2,
    ]
    div_pred = math.fsum(div_pred_terms)
    contracted = [(n - 1) * d.c_b, bbR, d.s_div, d.s_tr2]
    combined = [
        (n - 1) * (2 * d.c_b - d.c**2),
        2 * (n - 1) / (n - 2) * bbR,
        -b2 * aR / (n - 2),
        d.s_tr2,
        (n + 1) * d.ss / b2,
    ]
    return {
        "f_two_ways": {
            "contracted_bb": d.f,
            "trace_combination": f_trace,
            "residual": _normalized(abs(d.f - f_trace), [d.f, f_trace]),
        },
        "divergence_of_s": {
            "value": d.s_div,
            "predicted": div_pred,
            "residual": _normalized(abs(d.s_div - div_pred), [d.s_div, *div_pred_terms]),
        },
        "contracted_linear_condition": {
            "sum": math.fsum(contracted),
            "residual": _normalized(abs(math.fsum(contracted)), contracted),
        },
        "combined_identity": {
            "sum": math.fsum(combined),
            "residual": _normalized(abs(math.fsum(combined)), combined),
        },
    }


@dataclass
class DiagnosticRecord:
    index: int
    x: list
    identities: dict
    S: list[float]
    R_closed: list[float]
    R_pipeline: list[float]
    predicted_R: float
    R_spread: float
    R_vs_predicted: float


@dataclass
class DiagnosticBlock:
    tol: float
    records: list[DiagnosticRecord]
    max_residual: dict[str, float]
    failing: list[str] = field(default_factory=list)


def _diagnose_job(args, spec: FieldSpec, seed: int, dirs: int) -> DiagnosticRecord:
    k, x = args
    x, d, ys = _case(spec, seed, k, dirs, x)
    F = finsler.kropina_metric(spec)
    sigma = partial(bh_volume, spec)
    S, Rc, Rp = [], [], []
    for y in ys:
        ev = finsler.evaluate(F, x, y, sigma=sigma)
        S.append(ev.S)
        Rp.append(ev.R)
        Rc.append(scalar_curvature(d, y))
    _, pred = predicted_kappa(d)
    scale = 1.0 + max(abs(v) for v in Rp)
    return DiagnosticRecord(
        index=k,
        x=x.tolist(),
        identities=identity_residuals(d),
        S=S,
        R_closed=Rc,
        R_pipeline=Rp,
        predicted_R=pred,
        R_spread=(max(Rp) - min(Rp)) / scale,
        R_vs_predicted=max(abs(v - pred) for v in Rp) / (1.0 + abs(pred)),
    )


def diagnostics(
    spec: FieldSpec,
    points: Sequence[Sequence[float]],
    dirs: int = 8,
    tol: float = 1e-6,
    seed: int = 42,
    workers: int = 1,
) -> DiagnosticBlock:
    """Identity residuals, S-curvature and scalar curvature cross-checks at each point."""
    records = ordered_map(
        partial(_diagnose_job, spec=spec, seed=seed, dirs=dirs), list(enumerate(points)), workers
    )
    max_res: dict[str, float] = {}
    for r in records:
        for name, entry in r.identities.items():
            max_res[name] = max(max_res.get(name, 0.0), entry["residual"])
        max_res["S"] = max(max_res.get("S", 0.0), max(abs(s) for s in r.S))
        max_res["R_direction_spread"] = max(max_res.get("R_direction_spread", 0.0), r.R_spread)
        max_res["R_vs_predicted"] = max(max_res.get("R_vs_predicted", 0.0), r.R_vs_predicted)
    return DiagnosticBlock(
        tol=tol, records=records, max_residual=max_res, failing=[k for k, v in max_res.items() if v > tol]
    )


# --------------------------------------------------------------------------
# Per-term breakdowns
# --------------------------------------------------------------------------


def term_breakdown(d: RSData, y: Sequence[float]) -> dict:
    """Labelled terms of the Ricci correction T and the scalar curvature expansion."""
    c = Ctx(d, np.asarray(y, float))
    return {
        "T": [{"term": label, "value": v} for label, v in ricci_correction_terms(c)],
        "R": [
            {"term": label, "power_of_inverse_F": p, "coefficient": v, "value": v / c.F**p}
            for label, p, v in scalar_curvature_terms(c)
        ],
    }
