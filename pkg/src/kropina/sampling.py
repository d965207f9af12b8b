"""Reproducible sampling of points and admissible directions.

Sample k draws from its own generator seeded by ``SeedSequence([seed, k])``,
so results never depend on how samples are spread across workers.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, TypeVar

import numpy as np

from . import autodiff as ad
from .fields import FieldConfigError, FieldSpec, check_field_point

CONE_RATIO = 0.1
MAX_TRIES = 10_000

T = TypeVar("T")
R = TypeVar("R")


def sample_rng(seed: int, k: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1), k]))


def sample_point(spec: FieldSpec, rng: np.random.Generator) -> np.ndarray:
    """Uniform point of the guard box at which the field data is admissible."""
    lo = np.array([g[0] for g in spec.guard])
    hi = np.array([g[1] for g in spec.guard])
    for _ in range(MAX_TRIES):
        x = rng.uniform(lo, hi)
        try:
            check_field_point(spec, x)
        except (FieldConfigError, ad.DomainError):
            continue
        return x
    raise FieldConfigError("no admissible point found in the guard box")


def sample_directions(a: np.ndarray, b: np.ndarray, count: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Directions uniform on the a-unit sphere with beta >= 0.1 * |b|_a * alpha."""
    L = np.linalg.cholesky(a)
    bnorm = float(np.sqrt(b @ np.linalg.solve(a, b)))
    out: list[np.ndarray] = []
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > MAX_TRIES:
            raise ad.DomainError("cone sampling did not converge")
        z = rng.standard_normal(len(b))
        y = np.linalg.solve(L.T, z / np.linalg.norm(z))
        if b @ y >= CONE_RATIO * bnorm:
            out.append(y)
    return out


def sample_points(spec: FieldSpec, count: int, seed: int) -> list[np.ndarray]:
    return [sample_point(spec, sample_rng(seed, k)) for k in range(count)]


def ordered_map(fn: Callable[[T], R], items: Iterable[T], workers: int = 1) -> list[R]:
    """``list(map(fn, items))``, optionally across processes; order is preserved."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def monte_carlo_density(a: np.ndarray, b: np.ndarray, samples: int = 100_000, seed: int = 0) -> float:
    """Busemann-Hausdorff density estimated by hit-or-miss volume of {alpha^2 < beta}.

    The bounding box comes from the a-ellipsoid extent; the set itself is tested
    only through the defining inequality.
    """
    from math import gamma, pi

    n = len(b)
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    a_inv = np.linalg.inv(a)
    centre = 0.5 * a_inv @ b
    radius = 0.5 * float(np.sqrt(b @ a_inv @ b))
    half = radius * np.sqrt(np.diag(a_inv)) * 1.0001
    rng = np.random.default_rng(seed)
    pts = centre + rng.uniform(-1, 1, size=(samples, n)) * half
    inside = np.einsum("pi,ij,pj->p", pts, a, pts) < pts @ b
    volume = inside.mean() * float(np.prod(2 * half))
    unit_ball = pi ** (n / 2) / gamma(n / 2 + 1)
    return unit_ball / volume

