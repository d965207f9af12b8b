import json

import numpy as np
import pytest

from kropina import autodiff as ad
from kropina.fields import (
    CATALOG,
    FieldConfigError,
    catalog_document,
    check_field_point,
    eval_field,
    load_catalog,
    parse_field_config,
)

EUCLID = {"name": "flat", "dimension": 3, "metric_upper": [["1", "0", "0"], ["1", "0"], ["1"]], "oneform": ["1", "0", "0"]}


def test_euclidean_config():
    spec = parse_field_config(EUCLID)
    for x in ([0, 0, 0], [0.3, -0.7, 0.1]):
        fv = eval_field(spec, x)
        np.testing.assert_array_equal(np.array(fv.a, float), np.eye(3))
        assert fv.b == [1.0, 0.0, 0.0]
        assert fv.b2 == 1.0


def test_conformal_sphere_factor_at_origin():
    doc = {
        "name": "conformal-sphere",
        "dimension": 3,
        "defs": {"w": "4/(1+x1^2+x2^2+x3^2)^2"},
        "metric_upper": [["w", "0", "0"], ["w", "0"], ["w"]],
        "oneform": ["1", "0", "0"],
    }
    fv = eval_field(parse_field_config(doc), [0.0, 0.0, 0.0])
    np.testing.assert_array_equal(np.array(fv.a, float), 4 * np.eye(3))
    assert fv.det_a == pytest.approx(64.0)


def test_conformal_gradient_b2(catalog):
    assert eval_field(catalog["conformal-gradient"], [1.0, 0.0, 0.0]).b2 == 1.0


def test_asymmetric_metric_rejected():
    doc = dict(EUCLID, metric_upper=[["1", "x1", "0"], ["x2", "1", "0"], ["0", "0", "1"]])
    with pytest.raises(FieldConfigError, match="symmetry"):
        parse_field_config(doc)


def test_full_symmetric_rows_accepted():
    doc = dict(EUCLID, metric_upper=[["1", "0.1*x1", "0"], ["0.1*x1", "1", "0"], ["0", "0", "1"]])
    spec = parse_field_config(doc)
    assert eval_field(spec, [0.5, 0, 0]).a[1][0] == pytest.approx(0.05)


@pytest.mark.parametrize(
    "patch, message",
    [
        ({"dimension": 1}, "dimension"),
        ({"oneform": ["1", "0"]}, "oneform"),
        ({"metric_upper": [["1", "0", "0"], ["1"], ["1"]]}, "row 1"),
        ({"metric_upper": [["-1", "0", "0"], ["1", "0"], ["1"]]}, "positive definite"),
        ({"oneform": ["0", "0", "0"]}, "b\\^2"),
        ({"oneform": ["1", "y", "0"]}, "unknown identifier"),
        ({"oneform": ["1", "x4", "0"]}, "exceeds dimension"),
        ({"guard_box": [[1, 0], [0, 1], [0, 1]]}, "guard_box"),
    ],
)
def test_config_errors(patch, message):
    with pytest.raises(FieldConfigError, match=message):
        parse_field_config(dict(EUCLID, **patch))


def test_invalid_json_text():
    with pytest.raises(FieldConfigError):
        parse_field_config("{not json")


def test_catalog_round_trip(catalog):
    rng = np.random.default_rng(3)
    for spec in catalog.values():
        again = parse_field_config(json.loads(json.dumps(spec.to_document())))
        for _ in range(5):
            x = rng.uniform(-0.5, 0.5, spec.n)
            a, b = eval_field(spec, x), eval_field(again, x)
            assert a.a == b.a and a.b == b.b


def test_catalog_guard_invariants(catalog):
    for spec in catalog.values():
        rng = np.random.default_rng(11)
        lo, hi = np.array(spec.guard).T
        for _ in range(50):
            x = rng.uniform(lo, hi)
            fv = check_field_point(spec, x)
            assert np.all(np.linalg.eigvalsh(np.array(fv.a, float)) > 0)
            assert fv.b2 >= 1e-6


def test_diff_scalar_evaluation_matches_reals(catalog):
    spec = catalog["sphere-hopf"]
    x = [0.2, -0.3, 0.4]
    plain = eval_field(spec, x)
    jets = eval_field(spec, ad.jet_variables(x, ad.JetSpace(3, 2)))
    np.testing.assert_array_equal(ad.jet_values(jets.a), np.array(plain.a, float))
    np.testing.assert_array_equal(ad.jet_values(jets.b), np.array(plain.b, float))


def test_random_poly_seeds_differ():
    a = catalog_document("random-poly", seed=1)
    b = catalog_document("random-poly", seed=2)
    assert a["oneform"] != b["oneform"]
    assert catalog_document("random-poly", seed=1) == a


def test_unknown_catalog_entry():
    with pytest.raises(FieldConfigError):
        load_catalog("no-such-field")
    assert len(CATALOG) == 4
