"""Closed-form curvature of a Kropina metric F = alpha^2/beta.

Each large expression is assembled from a list of labelled terms so that an
individual term can be printed or compared when hunting transcription errors.
All functions take an :class:`~kropina.riemannian.RSData` (the point data) and a
float direction y with beta(y) > 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import autodiff as ad
from .fields import B2_MIN, FieldSpec, eval_field
from .riemannian import RSData, rs_data


class KropinaDomainError(ad.DomainError):
    pass


@dataclass
class Ctx:
    """Every y-contraction used by the closed forms, evaluated once."""

    d: RSData
    y: np.ndarray
    n: int = field(init=False)
    b2: float = field(init=False)
    b4: float = field(init=False)
    b6: float = field(init=False)
    A2: float = field(init=False)  # alpha^2
    B: float = field(init=False)  # beta
    F: float = field(init=False)
    bb: float = field(init=False)  # b^2 r^m_m - r

    def __post_init__(self):
        d, y = self.d, self.y
        self.n = d.n
        self.b2 = d.b2
        if self.b2 < B2_MIN:
            raise KropinaDomainError(f"b^2 = {self.b2:.3g} below guard")
        self.b4 = self.b2**2
        self.b6 = self.b2**3
        self.A2 = float(d.alpha2(y))
        self.B = float(d.beta(y))
        if self.B <= 0:
            raise KropinaDomainError("direction outside the cone beta > 0")
        self.F = self.A2 / self.B
        self.bb = self.b2 * d.r_trace - d.r_scalar
        # scalars
        self.r00 = float(d.r00(y))
        self.r0 = float(d.r0(y))
        self.s0 = float(d.s0(y))
        self.rk0 = d.r_k0(y)  # r_k0
        self.su0 = d.s_up0(y)  # s^k_0
        self.ru0 = d.r_mixed @ y  # r^k_0
        self.r00_0 = float(d.r00_0(y))
        self.r00_k = d.r00_k(y)
        self.r00_mb = float(d.r00_mb(y))
        self.r0_0 = float(d.r0_0(y))
        self.s0_0 = float(d.s0_0(y))
        self.s0_mb = float(d.s0_mb(y))
        self.r0_mb = float(d.r0_mb(y))
        self.s_div0 = float(d.s_div0(y))
        self.r_div0 = float(d.r_div0(y))
        self.r_trace_0 = float(d.r_trace_0(y))
        self.ss = d.ss
        self.s_tr2 = d.s_tr2
        self.y_low = d.y_low(y)
        self.aric_y = float(d.alpha.ricci_y(y))
        self.aric_by = float(d.alpha.ricci_by(d.b_up, y))


# --------------------------------------------------------------------------
# Fundamental tensor and derivatives of F
# --------------------------------------------------------------------------


def closed_fundamental(d: RSData, y: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """(g_ij, g^ij) from the explicit Kropina expressions."""
    y = np.asarray(y, float)
    c = Ctx(d, y)
    F, B, A2, b2 = c.F, c.B, c.A2, c.b2
    b, yl, a = d.b, c.y_low, d.a
    g = (F / B) * (
        2 * a
        + (3 * F / B) * np.outer(b, b)
        - (4 / B) * (np.outer(b, yl) + np.outer(yl, b))
        + 4 * np.outer(yl, yl) / A2
    )
    bu = d.b_up
    g_inv = (B / (2 * F)) * (
        d.a_inv
        - np.outer(bu, bu) / b2
        + (2 / (b2 * F)) * (np.outer(bu, y) + np.outer(y, bu))
        + 2 * (1 - 2 * B / (b2 * F)) * np.outer(y, y) / A2
    )
    return g, g_inv


def F_derivatives(d: RSData, y: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """(F_{.k}, F_{.k.l}) of F = alpha^2/beta in closed form."""
    y = np.asarray(y, float)
    B = float(d.beta(y))
    A2 = float(d.alpha2(y))
    yl, b = d.a @ y, d.b
    Fk = (2 * B * yl - A2 * b) / B**2
    Fkl = (
        2 * d.a / B
        - 2 * (np.outer(yl, b) + np.outer(b, yl)) / B**2
        + 2 * A2 * np.outer(b, b) / B**3
    )
    return Fk, Fkl


# --------------------------------------------------------------------------
# Ricci curvature: alpha-Ric(y) + T
# --------------------------------------------------------------------------


def ricci_correction_terms(c: Ctx) -> list[tuple[str, float]]:
    d, n = c.d, c.n
    b2, b4, A2, B = c.b2, c.b4, c.A2, c.B
    return [
        ("3(n-1) r00^2 beta^2 / (b^4 alpha^4)", 3 * (n - 1) * c.r00**2 * B**2 / (b4 * A2**2)),
        ("(n-1) r00|0 beta / (b^2 alpha^2)", (n - 1) * c.r00_0 * B / (b2 * A2)),
        ("-4(n-1) r00 r0 beta / (b^4 alpha^2)", -4 * (n - 1) * c.r00 * c.r0 * B / (b4 * A2)),
        ("2(n-1) r00 s0 beta / (b^4 alpha^2)", 2 * (n - 1) * c.r00 * c.s0 * B / (b4 * A2)),
        ("-r r00 / b^4", -d.r_scalar * c.r00 / b4),
        ("r^k_k r00 / b^2", d.r_trace * c.r00 / b2),
        ("2n r_k0 s^k_0 / b^2", 2 * n * float(c.rk0 @ c.su0) / b2),
        ("b^k r00|k / b^2", c.r00_mb / b2),
        ("r0^2 / b^4", c.r0**2 / b4),
        ("-r0|0 / b^2", -c.r0_0 / b2),
        ("-2(2n-3) r0 s0 / b^4", -2 * (2 * n - 3) * c.r0 * c.s0 / b4),
        ("(n-2) s0|0 / b^2", (n - 2) * c.s0_0 / b2),
        ("-(n-2) s0^2 / b^4", -(n - 2) * c.s0**2 / b4),
        ("-r_k0 s^k alpha^2 / (b^2 beta)", -float(c.rk0 @ d.s_up) * A2 / (b2 * B)),
        ("-r_k s^k_0 alpha^2 / (b^2 beta)", -float(d.r_vec @ c.su0) * A2 / (b2 * B)),
        ("-r s0 alpha^2 / (b^4 beta)", -d.r_scalar * c.s0 * A2 / (b4 * B)),
        ("r^k_k s0 alpha^2 / (b^2 beta)", d.r_trace * c.s0 * A2 / (b2 * B)),
        ("(n-1) s^k_0 s_k alpha^2 / (b^2 beta)", (n - 1) * float(c.su0 @ d.s_vec) * A2 / (b2 * B)),
        ("-s^k_0|k alpha^2 / beta", -c.s_div0 * A2 / B),
        ("b^k s_0|k alpha^2 / (b^2 beta)", c.s0_mb * A2 / (b2 * B)),
        ("-s^j_k s^k_j alpha^4 / (4 beta^2)", -c.s_tr2 * A2**2 / (4 * B**2)),
        ("-s^k s_k alpha^4 / (2 b^2 beta^2)", -c.ss * A2**2 / (2 * b2 * B**2)),
    ]


def closed_ricci(d: RSData, y: Sequence[float]) -> tuple[float, float]:
    """(Ric, T) with Ric = alpha-Ric(y) + T."""
    c = Ctx(d, np.asarray(y, float))
    T = math.fsum(v for _, v in ricci_correction_terms(c))
    return c.aric_y + T, T


# --------------------------------------------------------------------------
# Ricci curvature tensor
# --------------------------------------------------------------------------


def _ricci_tensor_parts(c: Ctx):
    d, n = c.d, c.n
    b2, b4, F = c.b2, c.b4, c.F
    bb = c.bb
    r, s_vec, r_vec, s_up = d.r, d.s_vec, d.r_vec, d.s_up
    s_mixed = d.s_mixed
    rk0, su0 = c.rk0, c.su0
    r0m_su0 = float(rk0 @ su0)

    A = [
        ("-(n-5) r00^2 / (b^4 F^3)", -(n - 5) * c.r00**2 / (b4 * F**3)),
        ("2 r00 (s0 - 2 r0) / (b^4 F^2)", 2 * c.r00 * (c.s0 - 2 * c.r0) / (b4 * F**2)),
        ("r00|0 / (b^2 F^2)", c.r00_0 / (b2 * F**2)),
        ("(n-1) s_m s^m_0 / (2 b^2)", (n - 1) * float(s_vec @ su0) / (2 * b2)),
        ("(b^2 r^m_m - r) s0 / (2 b^4)", bb * c.s0 / (2 * b4)),
        ("(n+1) r_0m s^m_0 / (b^2 F)", (n + 1) * r0m_su0 / (b2 * F)),
        (
            "(s_0|m b^m - r_m s^m_0 - r_0m s^m) / (2 b^2)",
            (c.s0_mb - float(r_vec @ su0) - float(rk0 @ s_up)) / (2 * b2),
        ),
        (
            "-(s^m_0|m + F s_m s^m / b^2 + F s^t_m s^m_t / 2) / 2",
            -0.5 * (c.s_div0 + F * c.ss / b2 + F * c.s_tr2 / 2),
        ),
        ("-(n+1) s0 r0 / (b^4 F)", -(n + 1) * c.s0 * c.r0 / (b4 * F)),
    ]
    Bt = [
        ("3(n-5) r00^2 / (b^4 F^4)", 3 * (n - 5) * c.r00**2 / (b4 * F**4)),
        ("4 r00 (2 r0 - s0) / (b^4 F^3)", 4 * c.r00 * (2 * c.r0 - c.s0) / (b4 * F**3)),
        ("-2 r00|0 / (b^2 F^3)", -2 * c.r00_0 / (b2 * F**3)),
        ("(n+1) s0 r0 / (b^4 F^2)", (n + 1) * c.s0 * c.r0 / (b4 * F**2)),
        ("-(n+1) r_0m s^m_0 / (b^2 F^2)", -(n + 1) * r0m_su0 / (b2 * F**2)),
        ("-s^m s_m / (2 b^2)", -c.ss / (2 * b2)),
        ("-s^t_m s^m_t / 4", -c.s_tr2 / 4),
    ]
    r_l0_0 = d.r_k0_0(c.y)
    s_m_sml = s_vec @ s_mixed  # s_m s^m_l
    r_m_sml = r_vec @ s_mixed  # r_m s^m_l
    r_lm_sm = r @ s_up  # r^m_l s_m = r_lm s^m
    C = [
        ("-6(n-3) r00 r_l0 / (b^4 F^3)", -6 * (n - 3) * c.r00 * rk0 / (b4 * F**3)),
        ("(n-7) r_0l r0 / (b^4 F^2)", (n - 7) * rk0 * c.r0 / (b4 * F**2)),
        ("-(n-3) r_0l s0 / (b^4 F^2)", -(n - 3) * rk0 * c.s0 / (b4 * F**2)),
        ("(n-3) r00 r_l / (b^4 F^2)", (n - 3) * c.r00 * r_vec / (b4 * F**2)),
        ("2 r00 s_l / (b^4 F^2)", 2 * c.r00 * s_vec / (b4 * F**2)),
        ("2 r_l0|0 / (b^2 F^2)", 2 * r_l0_0 / (b2 * F**2)),
        ("-(n-1) r00|l / (2 b^2 F^2)", -(n - 1) * c.r00_k / (2 * b2 * F**2)),
        ("(n-1) s_m s^m_l / (2 b^2)", (n - 1) * s_m_sml / (2 * b2)),
        ("(b^2 r^m_m - r) s_l / (2 b^4)", bb * s_vec / (2 * b4)),
        ("-r_m s^m_l / (2 b^2)", -r_m_sml / (2 * b2)),
        ("-r^m_l s_m / (2 b^2)", -r_lm_sm / (2 * b2)),
        ("-s^m_l|m / 2", -d.s_div_l / 2),
        ("s_l|m b^m / (2 b^2)", d.s_l_mb / (2 * b2)),
        ("-(n+1)(s_l r0 + s0 r_l) / (2 b^4 F)", -(n + 1) * (s_vec * c.r0 + c.s0 * r_vec) / (2 * b4 * F)),
        (
            "(n+1)(r_lm s^m_0 + r_0m s^m_l) / (2 b^2 F)",
            (n + 1) * (r @ su0 + rk0 @ s_mixed) / (2 * b2 * F),
        ),
    ]
    ri = np.outer
    r_k0_l = d.r_k0_l(c.y)  # [k, l] = r_{k0|l}
    rs_sym = r @ s_mixed  # [k, l] = r_km s^m_l
    D = [
        ("8(n-2) r_k0 r_l0 / (b^4 F^2)", 8 * (n - 2) * ri(rk0, rk0) / (b4 * F**2)),
        ("4(n-2) r00 r_kl / (b^4 F^2)", 4 * (n - 2) * c.r00 * r / (b4 * F**2)),
        ("2(n-1) r_kl s0 / (b^4 F)", 2 * (n - 1) * r * c.s0 / (b4 * F)),
        ("-2(n-3) r_kl r0 / (b^4 F)", -2 * (n - 3) * r * c.r0 / (b4 * F)),
        ("-(3n-5)(r_l0 r_k + r_k0 r_l) / (b^4 F)", -(3 * n - 5) * (ri(r_vec, rk0) + ri(rk0, r_vec)) / (b4 * F)),
        ("(n-3)(r_k0 s_l + r_l0 s_k) / (b^4 F)", (n - 3) * (ri(rk0, s_vec) + ri(s_vec, rk0)) / (b4 * F)),
        ("-(3n-7)(r_k s_l + r_l s_k) / (2 b^4)", -(3 * n - 7) * (ri(r_vec, s_vec) + ri(s_vec, r_vec)) / (2 * b4)),
        ("-(n-2) s_k s_l / b^4", -(n - 2) * ri(s_vec, s_vec) / b4),
        ("r_k r_l / b^4", ri(r_vec, r_vec) / b4),
        ("-2 r_kl|0 / (b^2 F)", -2 * d.r_kl_0(c.y) / (b2 * F)),
        ("(n-1)(r_k0|l + r_l0|k) / (b^2 F)", (n - 1) * (r_k0_l + r_k0_l.T) / (b2 * F)),
        ("(n-2)(s_k|l + s_l|k) / (2 b^2)", (n - 2) * (d.s_i_j + d.s_i_j.T) / (2 * b2)),
        ("(b^2 r^m_m - r) r_kl / b^4", bb * r / b4),
        ("b^m r_kl|m / b^2", d.r_kl_mb / b2),
        ("-(r_k|l + r_l|k) / (2 b^2)", -(d.r_i_j + d.r_i_j.T) / (2 * b2)),
        ("(n-1)(r_km s^m_l + r_lm s^m_k) / (2 b^2)", (n - 1) * (rs_sym + rs_sym.T) / (2 * b2)),
    ]
    return A, Bt, C, D


def ricci_tensor(d: RSData, y: Sequence[float]) -> np.ndarray:
    """Symmetric Ricci curvature tensor Ric_kl in closed form."""
    y = np.asarray(y, float)
    c = Ctx(d, y)
    A, Bt, C, D = _ricci_tensor_parts(c)
    Fk, Fkl = F_derivatives(d, y)
    a_val = math.fsum(v for _, v in A)
    b_val = math.fsum(v for _, v in Bt)
    c_vec = sum(v for _, v in C)
    d_mat = sum(v for _, v in D)
    return (
        d.alpha.ricci
        + Fkl * a_val
        + np.outer(Fk, Fk) * b_val
        + np.outer(Fk, c_vec)
        + np.outer(c_vec, Fk)
        + d_mat
    )


# --------------------------------------------------------------------------
# Scalar curvature
# --------------------------------------------------------------------------


def scalar_curvature_terms(c: Ctx) -> list[tuple[str, int, float]]:
    """(label, power p of 1/F, coefficient) with R = sum coefficient / F^p."""
    d, n = c.d, c.n
    b2, b4, b6, B = c.b2, c.b4, c.b6, c.B
    bb = c.bb
    rk0, su0, ru0 = c.rk0, c.su0, c.ru0
    r = d.r_scalar
    rt = d.r_trace
    t = []

    def add(p, label, value):
        t.append((label, p, float(value)))

    add(5, "-24(n-2) beta r00^2 / b^6", -24 * (n - 2) * B * c.r00**2 / b6)

    add(4, "-(n-1)(n-8) r00^2 / b^4", -(n - 1) * (n - 8) * c.r00**2 / b4)
    add(4, "40(n-2) beta r00 r0 / b^6", 40 * (n - 2) * B * c.r00 * c.r0 / b6)
    add(4, "-8(n-2) beta r00 s0 / b^6", -8 * (n - 2) * B * c.r00 * c.s0 / b6)
    add(4, "-4(n-2) beta r00|0 / b^4", -4 * (n - 2) * B * c.r00_0 / b4)

    add(3, "2(n-1) r00|0 / b^2", 2 * (n - 1) * c.r00_0 / b2)
    add(3, "4(n-1) r00 (s0 - 2 r0) / b^4", 4 * (n - 1) * c.r00 * (c.s0 - 2 * c.r0) / b4)
    add(3, "2(n-2) beta r0|0 / b^4", 2 * (n - 2) * B * c.r0_0 / b4)
    add(3, "-2(n-2) beta s0|0 / b^4", -2 * (n - 2) * B * c.s0_0 / b4)
    add(3, "2(n-2) beta b^m r00|m / b^4", 2 * (n - 2) * B * c.r00_mb / b4)
    add(3, "2(n-1) beta r^k_0 r_k0 / b^4", 2 * (n - 1) * B * float(ru0 @ rk0) / b4)
    add(3, "-4(n-2) beta r_k0 s^k_0 / b^4", -4 * (n - 2) * B * float(rk0 @ su0) / b4)
    add(3, "-14(n-2) beta r0^2 / b^6", -14 * (n - 2) * B * c.r0**2 / b6)
    add(3, "2(n-2) beta s0^2 / b^6", 2 * (n - 2) * B * c.s0**2 / b6)
    add(3, "2(n-3)(b^2 r^m_m - r) beta r00 / b^6", 2 * (n - 3) * bb * B * c.r00 / b6)
    add(3, "12(n-2) beta r0 s0 / b^6", 12 * (n - 2) * B * c.r0 * c.s0 / b6)
    add(3, "-2(3n-5) beta r00 r / b^6", -2 * (3 * n - 5) * B * c.r00 * r / b6)
    add(3, "-2 beta aRic / b^2", -2 * B * c.aric_y / b2)

    add(2, "-(n^2+4n-7) s0 r0 / b^4", -(n * n + 4 * n - 7) * c.s0 * c.r0 / b4)
    add(2, "(n^2+2n-1) r_0m s^m_0 / b^2", (n * n + 2 * n - 1) * float(rk0 @ su0) / b2)
    add(2, "-(n-5)(b^2 r^m_m - r) beta r0 / b^6", -(n - 5) * bb * B * c.r0 / b6)
    add(2, "3(n-1) beta r r0 / b^6", 3 * (n - 1) * B * r * c.r0 / b6)
    add(2, "(n-1)(b^2 r^m_m - r) beta s0 / b^6", (n - 1) * bb * B * c.s0 / b6)
    add(2, "-(2n-3) beta r^m_0 s_m / b^4", -(2 * n - 3) * B * float(rk0 @ d.s_up) / b4)
    add(2, "-(3n-7) beta r s0 / b^6", -(3 * n - 7) * B * r * c.s0 / b6)
    add(2, "-(n-2) s0^2 / b^4", -(n - 2) * c.s0**2 / b4)
    add(2, "r0^2 / b^4", c.r0**2 / b4)
    add(2, "-beta r^m_m|0 / b^2", -B * c.r_trace_0 / b2)
    add(2, "(n-1) beta r^m_0|m / b^2", (n - 1) * B * c.r_div0 / b2)
    add(2, "-(2n-1) beta r_m0 r^m / b^4", -(2 * n - 1) * B * float(rk0 @ d.r_up) / b4)
    add(2, "(n-2) beta b^m s_0|m / b^4", (n - 2) * B * c.s0_mb / b4)
    add(2, "-(n-2) beta s_m s^m_0 / b^4", -(n - 2) * B * float(d.s_vec @ su0) / b4)
    add(2, "(n-2) s0|0 / b^2", (n - 2) * c.s0_0 / b2)
    add(2, "(b^2 r^m_m - r) r00 / b^4", bb * c.r00 / b4)
    add(2, "-(n-2) beta b^m r_0|m / b^4", -(n - 2) * B * c.r0_mb / b4)
    add(2, "b^m r00|m / b^2", c.r00_mb / b2)
    add(2, "-r0|0 / b^2", -c.r0_0 / b2)
    add(2, "(n-2) beta r_m s^m_0 / b^4", (n - 2) * B * float(d.r_vec @ su0) / b4)
    add(2, "aRic", c.aric_y)
    add(2, "beta (b^k y^l + b^l y^k) aRic_kl / b^2", 2 * B * c.aric_by / b2)

    add(1, "(n^2-1) s_m s^m_0 / (2 b^2)", (n * n - 1) * float(d.s_vec @ su0) / (2 * b2))
    add(1, "(n+1)(b^2 r^m_m - r) s0 / (2 b^4)", (n + 1) * bb * c.s0 / (2 * b4))
    add(1, "(n+1) s_0|m b^m / (2 b^2)", (n + 1) * c.s0_mb / (2 * b2))
    add(1, "-(n+1) r_m s^m_0 / (2 b^2)", -(n + 1) * float(d.r_vec @ su0) / (2 * b2))
    add(1, "-(n+1) r_0m s^m / (2 b^2)", -(n + 1) * float(rk0 @ d.s_up) / (2 * b2))
    add(1, "-(n+1) s^m_0|m / 2", -(n + 1) * c.s_div0 / 2)
    add(1, "-(n-2) beta s_m s^m / b^4", -(n - 2) * B * c.ss / b4)
    add(1, "beta r^m r_m / b^4", B * float(d.r_up @ d.r_vec) / b4)
    add(1, "-(n-3) beta r^k s_k / (2 b^4)", -(n - 3) * B * float(d.r_up @ d.s_vec) / (2 * b4))
    add(1, "(n-2) beta s^m_|m / (2 b^2)", (n - 2) * B * d.s_div / (2 * b2))
    add(1, "r^m_m r^t_t beta / (2 b^2)", rt * rt * B / (2 * b2))
    add(1, "-r r^m_m beta / b^4", -r * rt * B / b4)
    add(1, "beta b^m r^k_k|m / (2 b^2)", B * d.b_rtrace_d / (2 * b2))
    add(1, "-beta r^m_|m / (2 b^2)", -B * d.r_div / (2 * b2))
    add(
        1,
        "(n-1) beta r^k_m s^m_k / (2 b^2)",
        (n - 1) * B * float(np.trace(d.r_mixed @ d.s_mixed)) / (2 * b2),
    )
    add(1, "beta (b^2 aR - b^k b^l aRic_kl) / (2 b^2)", B * (b2 * d.alpha.scalar - d.ricci_bb) / (2 * b2))

    add(0, "-n s_m s^m / (2 b^2)", -n * c.ss / (2 * b2))
    add(0, "-n s^t_m s^m_t / 4", -n * c.s_tr2 / 4)
    return t


def scalar_curvature(d: RSData, y: Sequence[float]) -> float:
    """Scalar curvature R grouped by powers of 1/F."""
    c = Ctx(d, np.asarray(y, float))
    groups: dict[int, list[float]] = {}
    for _, p, v in scalar_curvature_terms(c):
        groups.setdefault(p, []).append(v)
    return math.fsum(math.fsum(vs) / c.F**p for p, vs in groups.items())


# --------------------------------------------------------------------------
# Isotropy-related scalars
# --------------------------------------------------------------------------


def compute_f(d: RSData) -> float:
    """f = -b^2 b^i b^j aRic_ij + (n-2)(b^2 c^2 - b^2 c_b - s^m s_m)."""
    return d.f


def predicted_kappa(d: RSData) -> tuple[float, float]:
    """(kappa, n(n-1) kappa) with (n-1) kappa = -(2 s^m s_m + b^2 s^t_m s^m_t) / (4 b^2)."""
    n = d.n
    kappa = -(2 * d.ss + d.b2 * d.s_tr2) / (4 * (n - 1) * d.b2) + 0.0  # no negative zero
    return kappa, n * (n - 1) * kappa


def bh_volume(spec: FieldSpec, x) -> object:
    """Busemann-Hausdorff density sigma(x) = (2/b)^n sqrt(det a).

    The indicatrix {alpha^2 < beta} is the a-ball of radius b/2 centred at b^i/2.
    Accepts float, dual or jet coordinates.
    """
    fv = eval_field(spec, x)
    if ad.value_of(fv.b2) < B2_MIN:
        raise KropinaDomainError("degenerate one-form")
    return (2.0**spec.n) * ad.sqrt(fv.det_a) / ad.sqrt(fv.b2) ** spec.n


@dataclass
class KropinaClosedForm:
    F: float
    beta: float
    alpha2: float
    g: np.ndarray
    g_inv: np.ndarray
    T: float
    Ric: float
    ric: np.ndarray
    R: float
    f: float
    kappa: float
    predicted_R: float


def closed_form(spec: FieldSpec, x, y, data: RSData | None = None) -> KropinaClosedForm:
    d = data if data is not None else rs_data(spec, x)
    y = np.asarray(y, float)
    g, g_inv = closed_fundamental(d, y)
    Ric, T = closed_ricci(d, y)
    kappa, pred = predicted_kappa(d)
    A2, B = float(d.alpha2(y)), float(d.beta(y))
    return KropinaClosedForm(
        F=A2 / B,
        beta=B,
        alpha2=A2,
        g=g,
        g_inv=g_inv,
        T=T,
        Ric=Ric,
        ric=ricci_tensor(d, y),
        R=scalar_curvature(d, y),
        f=d.f,
        kappa=kappa,
        predicted_R=pred,
    )
