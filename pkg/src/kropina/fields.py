"""Geometric input data: the Riemannian metric a_ij(x) and the 1-form b_i(x)."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from . import autodiff as ad
from .expr import Expr, UnknownIdentifier, evaluate, free_names, parse_expr, to_text

DEFAULT_GUARD = (-0.8, 0.8)
B2_MIN = 1e-6
PIVOT_MIN = 1e-12

CATALOG = ("euclidean-constant", "conformal-gradient", "sphere-hopf", "random-poly")


class FieldConfigError(ValueError):
    """The field document is malformed or violates a guard."""


@dataclass(frozen=True)
class FieldSpec:
    name: str
    n: int
    a: tuple  # n x n tuple of Expr, symmetric (lower triangle mirrors upper)
    b: tuple  # n Expr
    defs: tuple = ()  # ((name, Expr), ...) in dependency order
    guard: tuple = ()  # ((lo, hi), ...)
    source: dict = field(default_factory=dict, compare=False, hash=False)

    def env(self, x: Sequence) -> dict:
        env = {f"x{i + 1}": xi for i, xi in enumerate(x)}
        for name, node in self.defs:
            env[name] = evaluate(node, env)
        return env

    def in_guard(self, x: Sequence[float], slack: float = 1e-12) -> bool:
        return all(lo - slack <= float(v) <= hi + slack for v, (lo, hi) in zip(x, self.guard))

    def to_document(self) -> dict:
        """Config document that parses back to an equivalent spec."""
        return {
            "name": self.name,
            "dimension": self.n,
            "defs": {k: to_text(v) for k, v in self.defs},
            "metric_upper": [[to_text(self.a[i][j]) for j in range(i, self.n)] for i in range(self.n)],
            "oneform": [to_text(e) for e in self.b],
            "guard_box": [list(g) for g in self.guard],
        }


@dataclass
class FieldValue:
    """a_ij, b_i and derived linear algebra at one point, on any scalar type."""

    a: list
    b: list
    a_inv: list
    det_a: object
    b_up: list
    b2: object


def _matrix_from_upper(upper, n: int, where: str) -> list[list]:
    """Square matrix of entry texts; rows may be upper-triangle or full length.

    Full-length rows carry a lower triangle, which is checked against the upper
    one after parsing (see ``parse_field_config``).
    """
    if not isinstance(upper, list) or len(upper) != n:
        raise FieldConfigError(f"{where}: expected {n} rows")
    full: list[list] = [[None] * n for _ in range(n)]
    lower: dict = {}
    for i, row in enumerate(upper):
        if not isinstance(row, list):
            raise FieldConfigError(f"{where}: row {i} is not a list")
        if len(row) == n:
            for j in range(i):
                lower[(i, j)] = row[j]
            row = row[i:]
        elif len(row) != n - i:
            raise FieldConfigError(f"{where}: row {i} has {len(row)} entries")
        for k, e in enumerate(row):
            full[i][i + k] = full[i + k][i] = e
    return full, lower


def parse_field_config(document: dict | str, check_points: int = 8, rng_seed: int = 0) -> FieldSpec:
    """Build and validate a :class:`FieldSpec` from a config document.

    ``document`` is the decoded JSON object (or its text).  The metric is read
    from its upper triangle.  SPD-ness of a and the b**2 floor are probed at the
    box corners, centre and ``check_points`` random points.
    """
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise FieldConfigError(f"invalid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise FieldConfigError("config must be a JSON object")
    for key in ("dimension", "metric_upper", "oneform"):
        if key not in document:
            raise FieldConfigError(f"missing key {key!r}")
    n = document["dimension"]
    if not isinstance(n, int) or n < 2:
        raise FieldConfigError("dimension must be an integer >= 2")

    defs = []
    known: set[str] = set()
    raw_defs = document.get("defs", {}) or {}
    if not isinstance(raw_defs, dict):
        raise FieldConfigError("defs must be an object")
    for name, text in raw_defs.items():
        if not name.isidentifier() or name.startswith("x") and name[1:].isdigit():
            raise FieldConfigError(f"bad definition name {name!r}")
        try:
            node = parse_expr(str(text), known)
        except (ValueError, UnknownIdentifier) as exc:
            raise FieldConfigError(f"def {name}: {exc}") from exc
        defs.append((name, node))
        known.add(name)

    def parse(text, where):
        try:
            node = parse_expr(str(text), known)
        except (ValueError, UnknownIdentifier) as exc:
            raise FieldConfigError(f"{where}: {exc}") from exc
        for v in free_names(node):
            if v not in known and int(v[1:]) > n:
                raise FieldConfigError(f"{where}: coordinate {v} exceeds dimension {n}")
        return node

    a_text, lower = _matrix_from_upper(document["metric_upper"], n, "metric_upper")
    a = tuple(tuple(parse(a_text[i][j], f"a[{i + 1}][{j + 1}]") for j in range(n)) for i in range(n))
    for (i, j), text in lower.items():
        if parse(text, f"a[{i + 1}][{j + 1}]") != a[j][i]:
            raise FieldConfigError(f"metric_upper: entry ({i + 1},{j + 1}) breaks symmetry")
    oneform = document["oneform"]
    if not isinstance(oneform, list) or len(oneform) != n:
        raise FieldConfigError(f"oneform: expected {n} entries")
    b = tuple(parse(t, f"b[{i + 1}]") for i, t in enumerate(oneform))

    guard = document.get("guard_box") or [list(DEFAULT_GUARD)] * n
    if len(guard) != n or any(len(g) != 2 or not g[0] < g[1] for g in guard):
        raise FieldConfigError("guard_box must hold one [lo, hi] pair per dimension")
    spec = FieldSpec(
        name=str(document.get("name", "unnamed")),
        n=n,
        a=a,
        b=b,
        defs=tuple(defs),
        guard=tuple((float(lo), float(hi)) for lo, hi in guard),
        source=document,
    )
    _probe(spec, check_points, rng_seed)
    return spec


def _probe(spec: FieldSpec, count: int, rng_seed: int) -> None:
    lo = np.array([g[0] for g in spec.guard])
    hi = np.array([g[1] for g in spec.guard])
    rng = np.random.default_rng(rng_seed)
    pts = [0.5 * (lo + hi), lo, hi] + list(rng.uniform(lo, hi, size=(count, spec.n)))
    for x in pts:
        try:
            check_field_point(spec, x)
        except (ad.DomainError, FieldConfigError) as exc:
            raise FieldConfigError(f"guard violation at x={np.round(x, 6).tolist()}: {exc}") from exc


def check_field_point(spec: FieldSpec, x: Sequence[float]) -> FieldValue:
    """Evaluate on floats and enforce SPD metric and the b**2 floor."""
    fv = eval_field(spec, [float(v) for v in x])
    a = np.array(fv.a, dtype=float)
    if not np.allclose(a, a.T, rtol=0, atol=1e-12):
        raise FieldConfigError("metric is not symmetric")
    try:
        np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        raise FieldConfigError("metric is not positive definite") from None
    if fv.b2 < B2_MIN:
        raise FieldConfigError(f"b^2 = {fv.b2:.3g} below {B2_MIN}")
    return fv


def eval_field(spec: FieldSpec, x: Sequence) -> FieldValue:
    """a_ij, b_i, a^ij, det a, b^i and b**2 at ``x`` (floats, duals or jets)."""
    if len(x) != spec.n:
        raise ValueError(f"expected {spec.n} coordinates, got {len(x)}")
    env = spec.env(x)
    n = spec.n
    a = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            a[i][j] = a[j][i] = evaluate(spec.a[i][j], env)
    b = [evaluate(e, env) for e in spec.b]
    a_inv = ad.solve_inverse(a)
    for i in range(n):
        for j in range(i + 1, n):
            a_inv[j][i] = a_inv[i][j]
    det_a = ad.determinant(a)
    b_up = [sum(a_inv[i][j] * b[j] for j in range(n)) for i in range(n)]
    b2 = sum(b_up[i] * b[i] for i in range(n))
    return FieldValue(a=a, b=b, a_inv=a_inv, det_a=det_a, b_up=b_up, b2=b2)


# --------------------------------------------------------------------------
# Catalog
# --------------------------------------------------------------------------


def catalog_document(name: str, seed: int = 42) -> dict:
    """Config document for a catalog entry.

    ``random-poly`` is shipped as a generator recipe; its coefficients are drawn
    from ``seed``.
    """
    if name not in CATALOG:
        raise FieldConfigError(f"unknown catalog entry {name!r}; choose from {', '.join(CATALOG)}")
    text = resources.files("kropina").joinpath("catalog", f"{name}.json").read_text()
    doc = json.loads(text)
    if "generator" in doc:
        doc = _generate_random_poly(doc, seed)
    return doc


def load_catalog(name: str, seed: int = 42) -> FieldSpec:
    return parse_field_config(catalog_document(name, seed))


def load_field(path: str | Path) -> FieldSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FieldConfigError(f"cannot read {path}: {exc}") from exc
    return parse_field_config(text)


def _poly_text(coeffs: dict[tuple[int, ...], float]) -> str:
    terms = []
    for mono, c in coeffs.items():
        factors = [f"x{i + 1}^{e}" if e > 1 else f"x{i + 1}" for i, e in enumerate(mono) if e]
        terms.append("*".join([repr(float(c))] + factors))
    return " + ".join(terms).replace("+ -", "- ") if terms else "0"


def _monomials(n: int, lo: int, hi: int) -> list[tuple[int, ...]]:
    from itertools import combinations_with_replacement

    out = []
    for deg in range(lo, hi + 1):
        for combo in combinations_with_replacement(range(n), deg):
            m = [0] * n
            for v in combo:
                m[v] += 1
            out.append(tuple(m))
    return out


def _generate_random_poly(recipe: dict, seed: int) -> dict:
    gen = recipe["generator"]
    n = recipe["dimension"]
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x6B726F70]))
    metric_scale = float(gen.get("metric_scale", 0.1))
    oneform_scale = float(gen.get("oneform_scale", 0.3))
    quad = _monomials(n, 1, 2)
    cubic = _monomials(n, 1, 3)
    upper = []
    for i in range(n):
        row = []
        for j in range(i, n):
            coeffs = {(0,) * n: 1.0} if i == j else {}
            for m in quad:
                coeffs[m] = coeffs.get(m, 0.0) + metric_scale * rng.uniform(-1, 1)
            row.append(_poly_text(coeffs))
        upper.append(row)
    base = np.array(gen.get("oneform_base", [1.0] + [0.0] * (n - 1)), dtype=float)
    oneform = []
    for i in range(n):
        coeffs = {(0,) * n: float(base[i])}
        for m in cubic:
            coeffs[m] = oneform_scale * rng.uniform(-1, 1)
        oneform.append(_poly_text(coeffs))
    return {
        "name": f"{recipe['name']}-{seed}",
        "dimension": n,
        "defs": {},
        "metric_upper": upper,
        "oneform": oneform,
        "guard_box": recipe.get("guard_box") or [list(DEFAULT_GUARD)] * n,
    }
