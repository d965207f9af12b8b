import numpy as np
import pytest

from kropina import finsler
from kropina.closed_form import bh_volume
from kropina.fields import parse_field_config
from kropina.riemannian import christoffel

from conftest import cases, rel


def euclid_norm(x, y):
    return finsler.riemannian_metric(parse_field_config({"name": "e", "dimension": 3, "metric_upper": [["1", "0", "0"], ["1", "0"], ["1"]], "oneform": ["1", "0", "0"]}))(x, y)


PLANE = parse_field_config({"name": "plane", "dimension": 2, "metric_upper": [["1", "0"], ["1"]], "oneform": ["1", "0"]})


def test_euclidean_fundamental_tensor():
    g, g_inv = finsler.fundamental_tensor(euclid_norm, [0.1, 0.2, 0.3], [0.3, -1.0, 2.0])
    np.testing.assert_allclose(g, np.eye(3), atol=1e-14)


def test_kropina_plane_fundamental_tensor():
    g, _ = finsler.fundamental_tensor(finsler.kropina_metric(PLANE), [0.4, -0.1], [1.0, 0.0])
    np.testing.assert_allclose(g, np.diag([1.0, 2.0]), atol=1e-10)


def test_cone_error():
    with pytest.raises(finsler.ConeError, match="beta > 0"):
        finsler.evaluate(finsler.kropina_metric(PLANE), [0, 0], [0.0, 1.0])


def test_flat_kropina_pipeline(catalog):
    spec = catalog["euclidean-constant"]
    F = finsler.kropina_metric(spec)
    for x, _, ys in cases(spec, 3, 2):
        for y in ys:
            ev = finsler.evaluate(F, x, y, sigma=lambda X: bh_volume(spec, X))
            assert np.all(ev.G == 0) and np.all(ev.Rk == 0)
            assert ev.Ric == 0 and ev.R == 0 and ev.S == 0


def test_riemannian_spray_is_half_christoffel(catalog):
    spec = catalog["sphere-hopf"]
    F = finsler.riemannian_metric(spec)
    for x, _, ys in cases(spec, 3, 2):
        for y in ys:
            G = finsler.spray(F, x, y)
            expected = 0.5 * np.einsum("ijk,j,k->i", christoffel(spec, x), y, y)
            np.testing.assert_allclose(G, expected, atol=1e-10)


def test_round_sphere_curvature(catalog):
    spec = catalog["sphere-hopf"]
    F = finsler.riemannian_metric(spec)
    for x, d, ys in cases(spec, 3, 2):
        for y in ys:
            ev = finsler.evaluate(F, x, y)
            assert ev.Ric == pytest.approx(2 * d.alpha2(y), rel=1e-8)
            np.testing.assert_allclose(ev.ric, 2 * ev.g, rtol=0, atol=1e-7 * np.max(np.abs(ev.g)))
            assert ev.R == pytest.approx(6.0, rel=1e-7)
            assert rel(ev.ric, d.alpha.ricci) < 1e-8


def test_pipeline_invariants(catalog):
    for name in ("sphere-hopf", "random-poly", "conformal-gradient"):
        spec = catalog[name]
        F = finsler.kropina_metric(spec)
        for x, _, ys in cases(spec, 2, 3, seed=9):
            for y in ys:
                for lam in (0.5, 2.0, 7.0):
                    assert F(list(x), list(lam * y)) == pytest.approx(lam * F(list(x), list(y)), rel=1e-12)
                ev = finsler.evaluate(F, x, y)
                scale = 1 + np.max(np.abs(ev.Rk))
                np.testing.assert_allclose(ev.g_inv @ ev.g, np.eye(3), atol=1e-12 * np.max(np.abs(ev.g)))
                assert np.max(np.abs(ev.Rk @ y)) / scale < 1e-9
                assert abs(y @ ev.ric @ y - ev.Ric) / (1 + abs(ev.Ric)) < 1e-9
                assert np.array_equal(ev.riemann, -ev.riemann.transpose(0, 1, 3, 2))
                recon = np.einsum("ijkl,j,l->ik", ev.riemann, y, y)
                assert np.max(np.abs(recon - ev.Rk)) / scale < 1e-9
                np.testing.assert_array_equal(ev.ric, ev.ric.T)
                assert ev.Ric == pytest.approx(np.trace(ev.Rk))
                ev3 = finsler.evaluate(F, x, 3 * y)
                assert ev3.R == pytest.approx(ev.R, rel=1e-9, abs=1e-9)
                np.testing.assert_allclose(ev3.g, ev.g, rtol=1e-12)
                np.testing.assert_allclose(ev3.G, 9 * ev.G, rtol=1e-10, atol=1e-10)
                np.testing.assert_allclose(finsler.riemann_curvature(F, x, 3 * y), 9 * ev.Rk, rtol=1e-9, atol=1e-9 * scale)


def test_s_curvature_homogeneity_and_lemma(catalog):
    spec = catalog["random-poly"]
    F = finsler.kropina_metric(spec)
    sigma = lambda X: bh_volume(spec, X)
    for x, _, ys in cases(spec, 2, 2):
        for y in ys:
            s1 = finsler.s_curvature(F, x, y, sigma)
            assert finsler.s_curvature(F, x, 2 * y, sigma) == pytest.approx(2 * s1, rel=1e-10)
    spec = catalog["conformal-gradient"]
    F = finsler.kropina_metric(spec)
    for x, _, ys in cases(spec, 5, 2):
        for y in ys:
            assert abs(finsler.s_curvature(F, x, y, lambda X: bh_volume(spec, X))) <= 1e-8
