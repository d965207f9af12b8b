import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kropina import autodiff as ad


def test_seed_power_rule():
    (t,) = ad.seed([2.0], {0})
    f = t * t
    assert f.value == 4.0
    assert f.grad == (4.0,)


def test_seed_product_rule():
    y1, y2 = ad.seed([1.0, 1.0], {0, 1})
    assert (y1 * y2).grad[0] == 1.0


def test_constant_lift_has_zero_derivative():
    (c,) = ad.seed([3.0], set())
    assert (c * c + 2.0).grad == ()
    assert ad.derive(lambda v: 3.0, [3.0], [0]) == 0.0
    assert ad.derive(lambda v: 3.0, [3.0], [0, 0, 0]) == 0.0


@pytest.mark.parametrize(
    "f, x, idx, expected",
    [
        (lambda v: v[0] ** 4, [1.0], [0, 0, 0, 0], 24.0),
        (lambda v: v[0] ** 2 * v[1], [1.0, 1.0], [0, 1], 2.0),
        (lambda v: ad.sqrt(v[0] ** 2 + v[1] ** 2), [3.0, 4.0], [0], 0.6),
    ],
)
def test_derive_examples(f, x, idx, expected):
    assert ad.derive(f, x, idx) == pytest.approx(expected, rel=1e-14)


def test_depth_limit():
    with pytest.raises(ad.DepthError):
        ad.derive(lambda v: v[0], [1.0], [0] * (ad.MAX_DEPTH + 1))


@pytest.mark.parametrize(
    "f, x, expected",
    [
        (lambda v: 0.5 * (v[0] ** 2 + v[1] ** 2), [0.3, -1.2], np.eye(2)),
        (lambda v: 0.5 * ((v[0] ** 2 + v[1] ** 2) / v[0]) ** 2, [1.0, 0.0], np.diag([1.0, 2.0])),
        (lambda v: v[0] * v[1], [2.0, 5.0], [[0.0, 1.0], [1.0, 0.0]]),
    ],
)
def test_hessian_examples(f, x, expected):
    np.testing.assert_allclose(ad.hessian(f, x), expected, atol=1e-13)


def test_division_by_tiny_value_is_domain_error():
    with pytest.raises(ad.DomainError):
        ad.derive(lambda v: 1.0 / (v[0] - 1.0), [1.0], [0])
    with pytest.raises(ad.DomainError):
        ad.sqrt(-1.0)


def test_value_slot_matches_real_arithmetic():
    x = [0.7, -1.3]
    f = lambda v: (v[0] * v[1] - 3.0) / (1.0 + v[0] ** 2) + ad.exp(v[1]) * ad.cos(v[0])
    duals = ad.seed(x, {0, 1})
    space = ad.JetSpace(2, 3)
    jets = ad.jet_variables(x, space)
    assert ad.value_of(f(duals)) == f(x)
    assert ad.value_of(f(jets)) == pytest.approx(f(x), rel=1e-15)


def test_jet_partials_match_nested_duals():
    f = lambda v: ad.sin(v[0] * v[1]) / (2.0 + v[2] ** 2) + ad.log(1.5 + v[0])
    x = [0.3, -0.4, 0.8]
    space = ad.JetSpace(3, 4)
    j = f(ad.jet_variables(x, space))
    for idx in ([0], [1, 2], [0, 0, 1], [0, 1, 2, 2]):
        assert j.partial(idx) == pytest.approx(ad.derive(f, x, idx), rel=1e-11, abs=1e-13)


def test_x_order_truncation_keeps_retained_coefficients_exact():
    full = ad.JetSpace(4, 4)
    mixed = ad.JetSpace(4, 4, 2, 1)
    f = lambda v: (v[0] * v[2] + v[1] * v[3] ** 2) / (1.0 + v[0] ** 2 + v[2] ** 2)
    x = [0.2, -0.1, 0.5, 0.9]
    a = f(ad.jet_variables(x, full))
    b = f(ad.jet_variables(x, mixed))
    for idx in ([0, 2, 3], [2, 3, 3], [1, 3], [3, 3, 3, 2]):
        assert b.partial(idx) == pytest.approx(a.partial(idx), rel=1e-13, abs=1e-14)


coeffs = st.lists(st.floats(-2, 2), min_size=10, max_size=10)
points = st.tuples(st.floats(-1, 1), st.floats(-1, 1))


def _poly(c):
    def f(v):
        x, y = v
        return (
            c[0] + c[1] * x + c[2] * y + c[3] * x * y + c[4] * x**2 * y
            + c[5] * y**3 + c[6] * x**3 * y**2 + c[7] * x**2 + c[8] * x * y**4 + c[9] * y**2
        )

    return f


@settings(max_examples=100, deadline=None)
@given(coeffs, points)
def test_clairaut_symmetry(c, p):
    f = _poly(c)
    a = ad.derive(f, list(p), [0, 1])
    b = ad.derive(f, list(p), [1, 0])
    assert a == pytest.approx(b, rel=1e-12, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=3, max_size=3), points)
def test_finite_difference_agreement(c, p):
    def f(v):
        x, y = v
        return ad.exp(c[0] * x) * ad.sin(y + c[1]) + c[2] * x * y / (2.0 + x * x)

    x0 = list(p)
    h = 1e-5
    for i in range(2):
        e = [0.0, 0.0]
        e[i] = h
        plus = f([x0[0] + e[0], x0[1] + e[1]])
        minus = f([x0[0] - e[0], x0[1] - e[1]])
        first = (plus - minus) / (2 * h)
        assert ad.derive(f, x0, [i]) == pytest.approx(first, rel=1e-4, abs=1e-8)
    h2 = 1e-4
    second = (f([x0[0] + h2, x0[1]]) - 2 * f(x0) + f([x0[0] - h2, x0[1]])) / h2**2
    assert ad.derive(f, x0, [0, 0]) == pytest.approx(second, rel=1e-4, abs=1e-5)


@settings(max_examples=30, deadline=None)
@given(coeffs, points)
def test_nesting_matches_hessian(c, p):
    f = _poly(c)
    H = ad.hessian(f, list(p))
    for i in range(2):
        for j in range(2):
            assert ad.derive(f, list(p), [i, j]) == pytest.approx(H[i, j], rel=1e-12, abs=1e-12)


def test_inverse_and_determinant():
    A = [[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]]
    inv = np.array(ad.solve_inverse(A))
    np.testing.assert_allclose(inv @ np.array(A), np.eye(3), atol=1e-14)
    assert ad.determinant(A) == pytest.approx(np.linalg.det(A), rel=1e-14)
    assert math.isclose(ad.value_of(ad.determinant([[2.0]])), 2.0)
