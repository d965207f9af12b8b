"""Levi-Civita calculus of alpha and the r/s symbol family of beta.

Everything here is evaluated at a single point x.  Coordinate derivatives of
a_ij and b_i come from second-order jets in x; tensors are returned as plain
numpy arrays with index order matching their symbol, e.g. ``r_ijk[i, j, k]``
is r_{ij|k}.  Quantities contracted with a direction y are methods of
:class:`RSData` that accept float or jet-valued y.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import autodiff as ad
from .fields import FieldSpec, eval_field


def _vals(arr) -> np.ndarray:
    return ad.jet_values(arr)


def _lift(v, space: ad.JetSpace):
    if isinstance(v, list):
        return [_lift(e, space) for e in v]
    return v if isinstance(v, ad.Jet) else ad.Jet.constant(space, float(v))


def _field_jets(spec: FieldSpec, x: Sequence[float]):
    space = ad.JetSpace(spec.n, 2)
    fv = eval_field(spec, ad.jet_variables([float(v) for v in x], space))
    for name in ("a", "b", "a_inv", "det_a", "b_up", "b2"):
        setattr(fv, name, _lift(getattr(fv, name), space))
    return fv


def _christoffel_jets(fv, n: int) -> list:
    """Gamma^i_jk as first-order jets, so that one more x-derivative is available."""
    a, a_inv = fv.a, fv.a_inv
    da = [[[a[l][k].d(j) for j in range(n)] for k in range(n)] for l in range(n)]  # da[l][k][j] = d_j a_lk
    lower = [
        [[0.5 * (da[l][k][j] + da[l][j][k] - da[j][k][l]) for k in range(n)] for j in range(n)]
        for l in range(n)
    ]
    return [
        [[sum(a_inv[i][l] * lower[l][j][k] for l in range(n)) for k in range(n)] for j in range(n)]
        for i in range(n)
    ]


def christoffel(spec: FieldSpec, x: Sequence[float]) -> np.ndarray:
    """Gamma^i_jk of a at x, shape (n, n, n)."""
    return _vals(_christoffel_jets(_field_jets(spec, x), spec.n))


@dataclass
class AlphaCurvature:
    gamma: np.ndarray  # Gamma^i_jk
    dgamma: np.ndarray  # dgamma[i, j, k, l] = d_l Gamma^i_jk
    riemann: np.ndarray  # R^i_jkl
    ricci: np.ndarray  # Ric_jl
    scalar: float
    a_inv: np.ndarray

    def ricci_y(self, y) -> object:
        """alpha-Ric(y) = Ric_kl y^k y^l."""
        return y @ self.ricci @ y

    def ricci_by(self, b_up: np.ndarray, y) -> object:
        """b^k y^l alpha-Ric_kl."""
        return (b_up @ self.ricci) @ y

    def ricci_bb(self, b_up: np.ndarray) -> float:
        return float(b_up @ self.ricci @ b_up)


def _alpha_from_gamma(gamma: np.ndarray, dgamma: np.ndarray, a_inv: np.ndarray) -> AlphaCurvature:
    # R^i_jkl = d_k G^i_jl - d_l G^i_jk + G^i_km G^m_jl - G^i_lm G^m_jk
    riemann = (
        np.einsum("ijlk->ijkl", dgamma)
        - dgamma
        + np.einsum("ikm,mjl->ijkl", gamma, gamma)
        - np.einsum("ilm,mjk->ijkl", gamma, gamma)
    )
    ricci = np.einsum("ijil->jl", riemann)
    ricci = 0.5 * (ricci + ricci.T)
    return AlphaCurvature(
        gamma=gamma,
        dgamma=dgamma,
        riemann=riemann,
        ricci=ricci,
        scalar=float(np.einsum("jl,jl->", a_inv, ricci)),
        a_inv=a_inv,
    )


def alpha_curvature(spec: FieldSpec, x: Sequence[float]) -> AlphaCurvature:
    fv = _field_jets(spec, x)
    n = spec.n
    gj = _christoffel_jets(fv, n)
    gamma = _vals(gj)
    dgamma = _vals([[[[gj[i][j][k].d(l) for l in range(n)] for k in range(n)] for j in range(n)] for i in range(n)])
    return _alpha_from_gamma(gamma, dgamma, _vals(fv.a_inv))


def _beta_jets(fv, gj, n):
    """b_{i|j} as first-order jets."""
    b = fv.b
    return [
        [b[i].d(j) - sum(gj[k][i][j] * b[k] for k in range(n)) for j in range(n)] for i in range(n)
    ]


def _second_cov(db_j, gamma: np.ndarray, n: int) -> np.ndarray:
    """b_{i|j|k} = d_k b_{i|j} - Gamma^m_ik b_{m|j} - Gamma^m_jk b_{i|m}."""
    db = _vals(db_j)
    d_db = _vals([[[db_j[i][j].d(k) for k in range(n)] for j in range(n)] for i in range(n)])
    return d_db - np.einsum("mik,mj->ijk", gamma, db) - np.einsum("mjk,im->ijk", gamma, db)


def beta_derivatives(spec: FieldSpec, x: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """(b_{i|j}, b_{i|j|k}) at x."""
    fv = _field_jets(spec, x)
    n = spec.n
    gj = _christoffel_jets(fv, n)
    db_j = _beta_jets(fv, gj, n)
    return _vals(db_j), _second_cov(db_j, _vals(gj), n)


@dataclass
class RSData:
    """The r/s family of beta with respect to alpha at one point.

    Naming: a trailing ``_ijk`` marks a covariant derivative in the last slot,
    ``*_up`` a raised index.  ``r_vec`` is r_i = b^j r_ji, ``r_scalar`` is r = b^i r_i.
    """

    n: int
    a: np.ndarray
    a_inv: np.ndarray
    det_a: float
    b: np.ndarray
    b_up: np.ndarray
    b2: float
    db: np.ndarray  # b_{i|j}
    ddb: np.ndarray  # b_{i|j|k}
    r: np.ndarray
    s: np.ndarray
    r_vec: np.ndarray
    s_vec: np.ndarray
    r_up: np.ndarray
    s_up: np.ndarray
    r_scalar: float
    r_trace: float  # r^m_m
    r_mixed: np.ndarray  # r^i_j
    s_mixed: np.ndarray  # s^i_j
    r_ijk: np.ndarray  # r_{ij|k}
    s_ijk: np.ndarray  # s_{ij|k}
    r_i_j: np.ndarray  # r_{i|j}
    s_i_j: np.ndarray  # s_{i|j}
    c: float
    c_i: np.ndarray
    alpha: AlphaCurvature
    f: float = 0.0

    # -- y-independent contractions --------------------------------------

    @property
    def c_b(self) -> float:
        return float(self.c_i @ self.b_up)

    @property
    def ss(self) -> float:
        """s^m s_m."""
        return float(self.s_up @ self.s_vec)

    @property
    def s_tr2(self) -> float:
        """s^t_m s^m_t."""
        return float(np.einsum("tm,mt->", self.s_mixed, self.s_mixed))

    @property
    def s_div(self) -> float:
        """s^m_{|m}."""
        return float(np.einsum("mk,km->", self.a_inv, self.s_i_j))

    @property
    def r_div(self) -> float:
        """r^m_{|m}."""
        return float(np.einsum("mk,km->", self.a_inv, self.r_i_j))

    @property
    def b_rtrace_d(self) -> float:
        """b^m r^k_{k|m}."""
        return float(np.einsum("m,kl,klm->", self.b_up, self.a_inv, self.r_ijk))

    @property
    def ricci_bb(self) -> float:
        return self.alpha.ricci_bb(self.b_up)

    @property
    def s_l_mb(self) -> np.ndarray:
        """s_{l|m} b^m."""
        return self.s_i_j @ self.b_up

    @property
    def s_div_l(self) -> np.ndarray:
        """s^m_{l|m} = a^{mk} s_{kl|m}."""
        return np.einsum("mk,klm->l", self.a_inv, self.s_ijk)

    @property
    def r_kl_mb(self) -> np.ndarray:
        """b^m r_{kl|m}."""
        return self.r_ijk @ self.b_up

    # -- y contractions (y may be float or jet valued) --------------------

    def y_low(self, y):
        return self.a @ y

    def alpha2(self, y):
        return y @ self.a @ y

    def beta(self, y):
        return self.b @ y

    def r00(self, y):
        return y @ self.r @ y

    def r0(self, y):
        return self.r_vec @ y

    def s0(self, y):
        return self.s_vec @ y

    def r_k0(self, y):
        return self.r @ y

    def s_up0(self, y):
        """s^i_0 = a^{ij} s_jk y^k."""
        return self.s_mixed @ y

    def r00_0(self, y):
        return np.einsum("ijk,i,j,k->", self.r_ijk, y, y, y)

    def r00_k(self, y):
        return np.einsum("ijk,i,j->k", self.r_ijk, y, y)

    def r_k0_0(self, y):
        return np.einsum("kjm,j,m->k", self.r_ijk, y, y)

    def r_k0_l(self, y):
        """r_{k0|l}, indexed [k, l]."""
        return np.einsum("kjl,j->kl", self.r_ijk, y)

    def r_kl_0(self, y):
        return self.r_ijk @ y

    def r0_0(self, y):
        return y @ self.r_i_j @ y

    def s0_0(self, y):
        return y @ self.s_i_j @ y

    def s0_mb(self, y):
        """s_{0|m} b^m."""
        return y @ self.s_i_j @ self.b_up

    def r0_mb(self, y):
        """r_{0|m} b^m."""
        return y @ self.r_i_j @ self.b_up

    def r00_mb(self, y):
        """b^m r_{00|m}."""
        return np.einsum("ijm,i,j,m->", self.r_ijk, y, y, self.b_up)

    def s_div0(self, y):
        """s^m_{0|m} = a^{mk} s_{kj|m} y^j."""
        return np.einsum("mk,kjm,j->", self.a_inv, self.s_ijk, y)

    def r_div0(self, y):
        """r^m_{0|m} = a^{mk} r_{kj|m} y^j."""
        return np.einsum("mk,kjm,j->", self.a_inv, self.r_ijk, y)

    def r_trace_0(self, y):
        """r^m_{m|0}."""
        return np.einsum("ml,lmk,k->", self.a_inv, self.r_ijk, y)

    def c0(self, y):
        return self.c_i @ y


def rs_data(spec: FieldSpec, x: Sequence[float]) -> RSData:
    """Populate the full r/s family, alpha curvature, c, c_i and f at x."""
    n = spec.n
    fv = _field_jets(spec, x)
    gj = _christoffel_jets(fv, n)
    gamma = _vals(gj)
    dgamma = _vals([[[[gj[i][j][k].d(l) for l in range(n)] for k in range(n)] for j in range(n)] for i in range(n)])
    a_inv = _vals(fv.a_inv)
    alpha = _alpha_from_gamma(gamma, dgamma, a_inv)

    db_j = _beta_jets(fv, gj, n)
    db = _vals(db_j)
    ddb = _second_cov(db_j, gamma, n)
    r = 0.5 * (db + db.T)
    s = 0.5 * (db - db.T)
    r_ijk = 0.5 * (ddb + ddb.transpose(1, 0, 2))
    s_ijk = 0.5 * (ddb - ddb.transpose(1, 0, 2))

    a = _vals(fv.a)
    b = _vals(fv.b)
    b_up = a_inv @ b
    b2 = float(b_up @ b)
    r_vec = b_up @ r
    s_vec = b_up @ s  # s_i = b^j s_ji
    # covariant derivative of b^j, then of r_i = b^j r_ji and s_i = b^j s_ji
    db_up = a_inv @ db
    r_i_j = np.einsum("jk,ji->ik", db_up, r) + np.einsum("j,jik->ik", b_up, r_ijk)
    s_i_j = np.einsum("jk,ji->ik", db_up, s) + np.einsum("j,jik->ik", b_up, s_ijk)

    # c = (1/n) a^{ij} r_ij, differentiated as a jet in x
    c_jet = sum(
        fv.a_inv[i][j] * 0.5 * (db_j[i][j] + db_j[j][i]) for i in range(n) for j in range(n)
    ) * (1.0 / n)
    c = c_jet.value
    c_i = np.array([c_jet.d(i).value for i in range(n)])

    data = RSData(
        n=n,
        a=a,
        a_inv=a_inv,
        det_a=ad.value_of(fv.det_a),
        b=b,
        b_up=b_up,
        b2=b2,
        db=db,
        ddb=ddb,
        r=r,
        s=s,
        r_vec=r_vec,
        s_vec=s_vec,
        r_up=a_inv @ r_vec,
        s_up=a_inv @ s_vec,
        r_scalar=float(b_up @ r_vec),
        r_trace=float(np.einsum("ij,ij->", a_inv, r)),
        r_mixed=a_inv @ r,
        s_mixed=a_inv @ s,
        r_ijk=r_ijk,
        s_ijk=s_ijk,
        r_i_j=r_i_j,
        s_i_j=s_i_j,
        c=c,
        c_i=c_i,
        alpha=alpha,
    )
    data.f = f_from_data(data)
    return data


def f_from_data(d: RSData) -> float:
    """f = -b^2 b^i b^j aRic_ij + (n-2) b^2 c^2 - (n-2) b^2 c_b - (n-2) s^m s_m."""
    n = d.n
    return (
        -d.b2 * d.ricci_bb
        + (n - 2) * d.b2 * d.c**2
        - (n - 2) * d.b2 * d.c_b
        - (n - 2) * d.ss
    )
