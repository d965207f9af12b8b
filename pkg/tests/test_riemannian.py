import numpy as np
import pytest

from kropina import autodiff as ad
from kropina.fields import eval_field, parse_field_config
from kropina.riemannian import alpha_curvature, beta_derivatives, christoffel, rs_data

from conftest import cases

SPHERE = parse_field_config(
    {
        "name": "conformal-sphere",
        "dimension": 3,
        "defs": {"w": "4/(1+x1^2+x2^2+x3^2)^2"},
        "metric_upper": [["w", "0", "0"], ["w", "0"], ["w"]],
        "oneform": ["1", "0", "0"],
    }
)


def test_flat_christoffel(catalog):
    assert np.all(christoffel(catalog["euclidean-constant"], [0.3, 0.1, -0.2]) == 0)
    assert np.allclose(christoffel(SPHERE, [0.0, 0.0, 0.0]), 0, atol=1e-15)


def test_christoffel_matches_finite_differences():
    x = np.array([0.1, 0.0, 0.0])
    gamma = christoffel(SPHERE, x)
    np.testing.assert_allclose(gamma, gamma.transpose(0, 2, 1), atol=1e-15)
    h = 1e-6

    def a_at(p):
        return np.array(eval_field(SPHERE, p).a, float)

    da = np.zeros((3, 3, 3))  # da[i, j, k] = d_k a_ij
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        da[:, :, k] = (a_at(x + e) - a_at(x - e)) / (2 * h)
    lower = 0.5 * (da.transpose(0, 1, 2) + da.transpose(0, 2, 1) - np.einsum("jki->ijk", da))
    fd = np.einsum("il,ljk->ijk", np.linalg.inv(a_at(x)), lower)
    np.testing.assert_allclose(gamma, fd, atol=1e-6)


def test_alpha_curvature_flat(catalog):
    ac = alpha_curvature(catalog["euclidean-constant"], [0.1, 0.2, 0.3])
    assert np.all(ac.ricci == 0) and ac.scalar == 0
    assert np.all(alpha_curvature(catalog["conformal-gradient"], [1.0, 0.1, 0.0]).ricci == 0)


def test_unit_sphere_is_einstein(catalog):
    rng = np.random.default_rng(5)
    for _ in range(10):
        x = rng.uniform(-0.8, 0.8, 3)
        ac = alpha_curvature(catalog["sphere-hopf"], x)
        a = np.array(eval_field(catalog["sphere-hopf"], x).a, float)
        np.testing.assert_allclose(ac.ricci, 2 * a, atol=1e-12)
        assert ac.scalar == pytest.approx(6.0, rel=1e-12)
        np.testing.assert_allclose(ac.ricci, ac.ricci.T, atol=0)
        assert ac.scalar == pytest.approx(np.einsum("ij,ij->", ac.a_inv, ac.ricci), rel=1e-12)


def test_beta_derivatives_examples(catalog):
    db, ddb = beta_derivatives(catalog["euclidean-constant"], [0.2, 0.2, 0.2])
    assert np.all(db == 0) and np.all(ddb == 0)
    db, ddb = beta_derivatives(catalog["conformal-gradient"], [0.9, 0.2, -0.1])
    np.testing.assert_array_equal(db, np.eye(3))
    assert np.all(ddb == 0)


def test_hopf_field_is_unit_killing(catalog):
    spec = catalog["sphere-hopf"]
    for x, d, _ in cases(spec, 20):
        assert np.max(np.abs(d.r)) < 1e-12
        assert d.b2 == pytest.approx(1.0, abs=1e-12)
        assert np.max(np.abs(d.s)) > 0.1
        assert abs(d.c) < 1e-12


def test_conformal_gradient_rs_family(catalog):
    d = rs_data(catalog["conformal-gradient"], [1.0, 0.0, 0.0])
    np.testing.assert_allclose(d.r, np.eye(3), atol=1e-15)
    assert d.c == pytest.approx(1.0) and np.allclose(d.c_i, 0)
    assert d.r_scalar == pytest.approx(1.0) and d.b2 == pytest.approx(1.0)
    assert np.all(d.s == 0) and np.all(d.s_vec == 0) and np.all(d.s_i_j == 0)


def test_flat_rs_family(catalog):
    d = rs_data(catalog["euclidean-constant"], [0.5, -0.5, 0.1])
    for arr in (d.r, d.s, d.r_vec, d.s_vec, d.r_ijk, d.s_ijk, d.r_i_j, d.s_i_j, d.c_i):
        assert np.all(arr == 0)
    assert d.b2 == 1.0 and d.c == 0


def test_decomposition_and_contractions(catalog):
    for spec in catalog.values():
        for x, d, _ in cases(spec, 20):
            ulp = np.finfo(float).eps * max(1.0, np.max(np.abs(d.db)))
            assert np.max(np.abs(d.r + d.s - d.db)) <= 4 * ulp
            assert np.max(np.abs(d.s + d.s.T)) <= 1e-12
            np.testing.assert_allclose(d.s_vec, d.b_up @ d.s, atol=1e-12)
            np.testing.assert_allclose(d.r_vec, d.b_up @ d.r, atol=1e-12)
            assert d.r_scalar == pytest.approx(d.b_up @ d.r_vec, abs=1e-12)
            assert d.c == pytest.approx(np.einsum("ij,ij->", d.a_inv, d.r) / spec.n, abs=1e-12)


def test_ricci_identity_for_one_forms(catalog):
    # with R^i_jkl = d_k G^i_jl - ..., b_{i|j|k} - b_{i|k|j} = b_m R^m_ijk
    for name in ("euclidean-constant", "conformal-gradient"):
        for x, d, _ in cases(catalog[name], 5):
            assert np.max(np.abs(d.ddb - d.ddb.transpose(0, 2, 1))) < 1e-10
    for x, d, _ in cases(catalog["sphere-hopf"], 10):
        lhs = d.ddb - d.ddb.transpose(0, 2, 1)
        rhs = np.einsum("m,mijk->ijk", d.b, d.alpha.riemann)
        assert np.max(np.abs(lhs - rhs)) < 1e-8


def test_isotropic_r_consequences(catalog):
    d = rs_data(catalog["conformal-gradient"], [0.8, 0.3, -0.2])
    assert np.max(np.abs(d.r - d.c * d.a)) < 1e-10
    rng = np.random.default_rng(2)
    for _ in range(10):
        y = rng.normal(size=3)
        assert d.r0(y) == pytest.approx(d.c * d.beta(y), rel=1e-12)
        assert d.r0_0(y) == pytest.approx(d.c0(y) * d.beta(y) + d.c**2 * d.alpha2(y), rel=1e-12, abs=1e-12)
    assert d.r_scalar == pytest.approx(d.c * d.b2)
    assert d.r_trace == pytest.approx(3 * d.c)


def test_rs_methods_accept_jets(catalog):
    d = rs_data(catalog["random-poly"], [0.1, 0.2, 0.3])
    y = [0.4, -0.2, 0.7]
    jy = np.array(ad.jet_variables(y, ad.JetSpace(3, 2)), dtype=object)
    assert ad.value_of(d.s0_0(jy)) == pytest.approx(d.s0_0(np.array(y)), rel=1e-14)
