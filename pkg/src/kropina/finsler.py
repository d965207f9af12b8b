"""First-principles Finsler curvature from an arbitrary metric function F(x, y).

F is treated as an opaque scalar function of coordinate and direction lists.
It is expanded once as a truncated Taylor jet in (x, y); every quantity below
is then obtained by exact jet differentiation:

    g_ij    = 1/2 (F^2)_{y^i y^j}
    G^i     = 1/4 g^{ik} [(F^2)_{x^j y^k} y^j - (F^2)_{x^k}]
    R^i_k   = 2 G^i_{x^k} - y^j G^i_{x^j y^k} + 2 G^j G^i_{y^j y^k} - G^i_{y^j} G^j_{y^k}
    R^i_jkl = 1/3 (R^i_{k.l.j} - R^i_{l.k.j})
    Ric_jl  = sym(R^k_{jkl}),   R = g^{ij} Ric_ij
    S       = G^m_{y^m} - y^m (ln sigma)_{x^m}
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import autodiff as ad
from .fields import FieldSpec

MetricFunction = Callable[[Sequence, Sequence], object]


class ConeError(ad.DomainError):
    """Direction outside the admissible cone of F (or g not positive definite)."""


def _restrict_all(items, space):
    if isinstance(items, list):
        return [_restrict_all(e, space) for e in items]
    if isinstance(items, ad.Jet):
        return items.restrict(space)
    return ad.Jet.constant(space, float(items))


def _vals(arr) -> np.ndarray:
    return ad.jet_values(arr)


def _check_metric_value(F: MetricFunction, x, y) -> float:
    try:
        val = ad.value_of(F(list(map(float, x)), list(map(float, y))))
    except ad.DomainError as exc:
        raise ConeError(str(exc)) from exc
    if not np.isfinite(val) or val <= 0:
        raise ConeError(f"F(x, y) = {val!r} is not positive")
    return val


def _spray_jets(F: MetricFunction, x, y, order: int, x_order: int):
    """F^2, g_ij and G^i as jets; G carries order - 2 in total, x_order - 1 in x."""
    n = len(x)
    space = ad.JetSpace(2 * n, order, n, x_order)
    V = ad.jet_variables(list(map(float, x)) + list(map(float, y)), space)
    X, Y = V[:n], V[n:]
    try:
        f = F(X, Y)
    except ad.DomainError as exc:
        raise ConeError(str(exc)) from exc
    F2 = f * f
    F2y = [F2.d(n + k) for k in range(n)]
    g = [[0.5 * F2y[k].d(n + l) for l in range(n)] for k in range(n)]
    g_val = _vals(g)
    eig = np.linalg.eigvalsh(0.5 * (g_val + g_val.T))
    if eig[0] <= 0:
        raise ConeError(f"fundamental tensor not positive definite (smallest eigenvalue {eig[0]:.3g})")

    gspace = ad.JetSpace(2 * n, order - 2, n, x_order - 1)
    g_s = _restrict_all(g, gspace)
    g_inv = ad.solve_inverse(g_s)
    Y_s = _restrict_all(Y, gspace)
    bracket = [
        sum(F2y[k].d(j).restrict(gspace) * Y_s[j] for j in range(n)) - F2.d(k).restrict(gspace)
        for k in range(n)
    ]
    G = [0.25 * sum(g_inv[i][k] * bracket[k] for k in range(n)) for i in range(n)]
    return X, Y, g_val, G


def _riemann_jets(F: MetricFunction, x, y, order: int):
    """R^i_k as jets in the direction variables of total order ``order - 4``."""
    n = len(x)
    X, Y, g_val, G = _spray_jets(F, x, y, order, 2)
    rspace = ad.JetSpace(2 * n, order - 4, n, 0)
    dGx = [[G[i].d(k).restrict(rspace) for k in range(n)] for i in range(n)]
    dGy_full = [[G[i].d(n + j) for j in range(n)] for i in range(n)]
    dGy = _restrict_all(dGy_full, rspace)
    dGxy = [[[dGy_full[i][k].d(j).restrict(rspace) for k in range(n)] for j in range(n)] for i in range(n)]
    dGyy = [[[dGy_full[i][j].d(n + k).restrict(rspace) for k in range(n)] for j in range(n)] for i in range(n)]
    Gs = _restrict_all(G, rspace)
    Ys = _restrict_all(Y, rspace)
    Rik = [
        [
            2.0 * dGx[i][k]
            - sum(Ys[j] * dGxy[i][j][k] for j in range(n))
            + 2.0 * sum(Gs[j] * dGyy[i][j][k] for j in range(n))
            - sum(dGy[i][j] * dGy[j][k] for j in range(n))
            for k in range(n)
        ]
        for i in range(n)
    ]
    return g_val, G, Rik


def _ln_sigma_gradient(sigma: Callable, x) -> np.ndarray:
    n = len(x)
    X = ad.jet_variables(list(map(float, x)), ad.JetSpace(n, 1))
    s = sigma(X)
    if not isinstance(s, ad.Jet):
        if float(s) <= 0:
            raise ad.DomainError("volume density must be positive")
        return np.zeros(n)
    if s.value <= 0:
        raise ad.DomainError("volume density must be positive")
    return np.array([s.d(m).value for m in range(n)]) / s.value


@dataclass
class FinslerEval:
    F: float
    g: np.ndarray
    g_inv: np.ndarray
    G: np.ndarray
    Rk: np.ndarray  # R^i_k
    riemann: np.ndarray  # R^i_jkl
    Ric: float
    ric_bar: np.ndarray
    ric: np.ndarray  # symmetric Ricci tensor Ric_ij
    R: float
    S: float | None = None


def fundamental_tensor(F: MetricFunction, x, y) -> tuple[np.ndarray, np.ndarray]:
    """(g_ij, g^ij) = (1/2 Hessian_y F^2, its inverse)."""
    _check_metric_value(F, x, y)
    n = len(x)
    xs = [float(v) for v in x]
    try:
        g = 0.5 * ad.hessian(lambda v: F(xs, v) * F(xs, v), [float(v) for v in y])
    except ad.DomainError as exc:
        raise ConeError(str(exc)) from exc
    eig = np.linalg.eigvalsh(g)
    if eig[0] <= 0:
        raise ConeError(f"fundamental tensor not positive definite (smallest eigenvalue {eig[0]:.3g})")
    assert g.shape == (n, n)
    return g, np.linalg.inv(g)


def spray(F: MetricFunction, x, y) -> np.ndarray:
    """Geodesic (spray) coefficients G^i."""
    _check_metric_value(F, x, y)
    return _vals(_spray_jets(F, x, y, 2, 1)[3])


def riemann_curvature(F: MetricFunction, x, y) -> np.ndarray:
    """Riemann curvature R^i_k."""
    _check_metric_value(F, x, y)
    return _vals(_riemann_jets(F, x, y, 4)[2])


def s_curvature(F: MetricFunction, x, y, sigma: Callable) -> float:
    """S-curvature for the volume form sigma(x) dx."""
    _check_metric_value(F, x, y)
    n = len(x)
    G = _spray_jets(F, x, y, 3, 1)[3]
    div = sum(G[m].d(n + m).value for m in range(n))
    return float(div - np.dot(np.asarray(y, float), _ln_sigma_gradient(sigma, x)))


def evaluate(F: MetricFunction, x, y, sigma: Callable | None = None, order: int = ad.MAX_DEPTH) -> FinslerEval:
    """All curvature quantities of F at (x, y)."""
    Fval = _check_metric_value(F, x, y)
    n = len(x)
    g, G, Rik = _riemann_jets(F, x, y, order)
    riemann = np.zeros((n, n, n, n))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    riemann[i, j, k, l] = (
                        Rik[i][k].partial([n + l, n + j]) - Rik[i][l].partial([n + k, n + j])
                    ) / 3.0
    Rk = _vals(Rik)
    ric_bar = np.einsum("kjkl->jl", riemann)
    ric = 0.5 * (ric_bar + ric_bar.T)
    g_inv = np.linalg.inv(g)
    S = None
    if sigma is not None:
        div = sum(G[m].d(n + m).value for m in range(n))
        S = float(div - np.dot(np.asarray(y, float), _ln_sigma_gradient(sigma, x)))
    return FinslerEval(
        F=Fval,
        g=g,
        g_inv=g_inv,
        G=_vals(G),
        Rk=Rk,
        riemann=riemann,
        Ric=float(np.trace(Rk)),
        ric_bar=ric_bar,
        ric=ric,
        R=float(np.einsum("ij,ij->", g_inv, ric)),
        S=S,
    )


def riemann_tensor(F: MetricFunction, x, y) -> np.ndarray:
    return evaluate(F, x, y).riemann


def ricci_family(F: MetricFunction, x, y):
    """(Ric, overline-Ric_ij, Ric_ij, R)."""
    ev = evaluate(F, x, y)
    return ev.Ric, ev.ric_bar, ev.ric, ev.R


# --------------------------------------------------------------------------
# Metric functions built from field data
# --------------------------------------------------------------------------


def _ab(spec: FieldSpec, x):
    from .expr import evaluate as ev

    env = spec.env(x)
    n = spec.n
    a = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            a[i][j] = a[j][i] = ev(spec.a[i][j], env)
    return a, [ev(e, env) for e in spec.b]


def _quad(a, y):
    n = len(y)
    return sum(a[i][i] * y[i] * y[i] for i in range(n)) + 2.0 * sum(
        a[i][j] * y[i] * y[j] for i in range(n) for j in range(i + 1, n)
    )


def kropina_metric(spec: FieldSpec) -> MetricFunction:
    """F = alpha^2 / beta, defined on the cone beta > 0."""

    def F(x, y):
        a, b = _ab(spec, x)
        beta = sum(b[i] * y[i] for i in range(spec.n))
        if ad.value_of(beta) <= 0:
            raise ConeError("direction outside the cone beta > 0")
        return _quad(a, y) / beta

    return F


def riemannian_metric(spec: FieldSpec) -> MetricFunction:
    """F = alpha."""

    def F(x, y):
        a, _ = _ab(spec, x)
        return ad.sqrt(_quad(a, y))

    return F
