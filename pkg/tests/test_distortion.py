import math
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from so3atlas.cubic import ChartId, ChartPoint, Model
from so3atlas.distortion import (DistortionRange, compose, distortion_range_mu, energy_expanded,
                                 energy_forms, jacobian_mu, jacobian_mu3, metric_distortion,
                                 metric_distortion_batch, optimal_scale, pullback_form,
                                 scaled_model_range, so3_range)
from so3atlas.errors import InvalidArgument
from so3atlas.oracle import finite_difference_jacobian

coord = st.floats(-1, 1, allow_nan=False)
nonzero = st.tuples(coord, coord, coord).filter(lambda t: sum(v * v for v in t) > 1e-6)

# Jacobian of (1, x, y, z)/sqrt(1+x^2+y^2+z^2), evaluated symbolically
J_CORNER = np.array([[-1, -1, -1], [3, -1, -1], [-1, 3, -1], [-1, -1, 3]]) / 8
J_CENTER = np.vstack([np.zeros(3), np.eye(3)])
J_AT_POINT = np.array([  # (0.3, -0.7, 0.2)
    [-0.1454952224663678, 0.3394888524215249, -0.09699681497757853],
    [0.7420256345784758, 0.10184665572645746, -0.029099044493273562],
    [0.10184665572645746, 0.5480320046233187, 0.06789777048430498],
    [-0.029099044493273562, 0.06789777048430498, 0.7662748383228705],
])


def w_point(*c):
    return ChartPoint(ChartId(Model.S3, 0, 1), c)


def test_jacobian_center():
    np.testing.assert_array_equal(jacobian_mu3(w_point(0, 0, 0)), J_CENTER)


def test_jacobian_corner():
    np.testing.assert_allclose(jacobian_mu3(w_point(1, 1, 1)), J_CORNER, atol=1e-16)


def test_jacobian_frozen_point():
    np.testing.assert_allclose(jacobian_mu3(w_point(0.3, -0.7, 0.2)), J_AT_POINT, atol=1e-15)


def test_jacobian_matches_symbolic_derivative():
    x, y, z = sp.symbols("x y z")
    F = sp.Matrix([1, x, y, z]) / sp.sqrt(1 + x**2 + y**2 + z**2)
    J = F.jacobian([x, y, z])
    rng = np.random.default_rng(4)
    for c in rng.uniform(-1, 1, (20, 3)):
        ref = np.array(J.subs(dict(zip((x, y, z), c))).evalf(30), dtype=float)
        np.testing.assert_allclose(jacobian_mu(c), ref, atol=1e-15)


def test_jacobian_mu3_shape_check():
    with pytest.raises(InvalidArgument):
        jacobian_mu3(ChartPoint(ChartId(Model.S2, 0, 1), (0.0, 0.0)))


def test_jacobian_matches_finite_differences_all_charts():
    rng = np.random.default_rng(8)
    for model in (Model.S2, Model.S3, Model.SO3):
        for _ in range(200):
            ch = model.charts[rng.integers(len(model.charts))]
            p = ChartPoint(ch, tuple(rng.uniform(-0.999, 0.999, model.dim)))
            assert np.max(np.abs(jacobian_mu(p) - finite_difference_jacobian(p))) <= 1e-6


def test_pullback_examples():
    np.testing.assert_array_equal(pullback_form(w_point(0, 0, 0)), np.eye(3))
    np.testing.assert_allclose(pullback_form(w_point(1, 1, 1)), (4 * np.eye(3) - np.ones((3, 3))) / 16,
                               atol=1e-17)


def test_pullback_is_jtj_and_bounded():
    rng = np.random.default_rng(12)
    for c in rng.uniform(-1, 1, (2000, 3)):
        G = pullback_form(c)
        J = jacobian_mu(c)
        assert np.max(np.abs(G - J.T @ J)) <= 1e-12
        assert np.max(np.abs(G - G.T)) <= 1e-14
        w = np.linalg.eigvalsh(G)
        assert w[0] >= 1 / 16 - 1e-12 and w[-1] <= 1 + 1e-12


def test_pullback_minimum_eigenvalue_attained_at_corner():
    assert np.linalg.eigvalsh(pullback_form(w_point(1, 1, 1)))[0] == pytest.approx(1 / 16, abs=1e-16)


def test_metric_distortion_examples():
    for v in ([1, 0, 0], [0.3, -0.2, 0.9], [0, 0, 1]):
        assert metric_distortion(w_point(0, 0, 0), v) == 1.0
    assert metric_distortion(w_point(1, 1, 1), np.ones(3) / math.sqrt(3)) == 0.25
    assert metric_distortion(w_point(1, 0, 0), [1, 0, 0]) == 0.5


def test_metric_distortion_s2_corner():
    assert metric_distortion([1.0, 1.0], [1.0, 1.0]) == pytest.approx(1 / 3, abs=1e-16)


def test_metric_distortion_rejects_zero_tangent():
    with pytest.raises(InvalidArgument):
        metric_distortion(w_point(0, 0, 0), [0, 0, 0])


def test_metric_distortion_equals_jacobian_stretch():
    rng = np.random.default_rng(13)
    c = rng.uniform(-1, 1, (1000, 3))
    v = rng.standard_normal((1000, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    ref = np.array([np.linalg.norm(jacobian_mu(ci) @ vi) for ci, vi in zip(c, v)])
    np.testing.assert_allclose(metric_distortion_batch(c, v), ref, atol=1e-14)


def test_metric_distortion_pointwise_bounds():
    rng = np.random.default_rng(14)
    c = rng.uniform(-1, 1, (10**5, 3))
    r = metric_distortion_batch(c, rng.standard_normal((10**5, 3)))
    assert r.min() >= 0.25 - 1e-12 and r.max() <= 1 + 1e-12


@settings(max_examples=200)
@given(st.tuples(coord, coord, coord), nonzero, st.permutations([0, 1, 2]),
       st.tuples(*[st.sampled_from([-1, 1])] * 3))
def test_metric_distortion_chart_symmetry(c, v, perm, signs):
    c, v, s = np.array(c), np.array(v), np.array(signs)
    base = metric_distortion(c, v)
    assert metric_distortion(s * c[perm], s * v[perm]) == pytest.approx(base, abs=1e-14)


def test_energy_form_examples():
    assert energy_forms(w_point(0, 0, 0), [1, 0, 0]) == (1.0, 1.0)
    a, b = energy_forms(w_point(1, 1, 1), np.ones(3) / math.sqrt(3))
    # the first form has no cancellation; the second subtracts 3 from 4
    assert a == pytest.approx(1.0, abs=1e-15)
    assert b == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=500)
@given(st.tuples(coord, coord, coord), nonzero)
def test_energy_forms_agree(c, v):
    a, b = energy_forms(c, v)
    assert abs(a - b) <= 1e-12
    assert abs(energy_expanded(c, v) - b) <= 1e-12


def test_ranges():
    r3, r2 = distortion_range_mu(3), distortion_range_mu(2)
    assert (r3.lo, r3.hi, r3.constant()) == (Fraction(1, 4), 1, 4)
    assert (r2.lo, r2.hi, r2.constant()) == (Fraction(1, 3), 1, 3)
    with pytest.raises(InvalidArgument):
        distortion_range_mu(4)


def test_range_validation():
    with pytest.raises(InvalidArgument):
        DistortionRange(0, 1)
    with pytest.raises(InvalidArgument):
        DistortionRange(2, 1)


def test_compose_examples():
    r = compose(distortion_range_mu(3), DistortionRange(Fraction(2), Fraction(2)))
    assert (r.lo, r.hi) == (Fraction(1, 2), 2)
    one = DistortionRange(Fraction(1), Fraction(1))
    r2 = distortion_range_mu(2)
    assert compose(r2, one) == r2
    k = 1 / math.sqrt(3)
    s = compose(r2, DistortionRange(1 / k, 1 / k))
    assert s.as_floats() == pytest.approx((math.sqrt(3) / 3, math.sqrt(3)), abs=1e-15)


fracs = st.fractions(min_value=Fraction(1, 100), max_value=100)
ranges = st.tuples(fracs, fracs).map(lambda t: DistortionRange(min(t), max(t)))


@given(ranges, ranges, ranges)
def test_compose_associative(a, b, c):
    assert compose(compose(a, b), c) == compose(a, compose(b, c))


@given(ranges, ranges, fracs)
def test_compose_monotone(a, b, t):
    wider = DistortionRange(a.lo, a.hi + t)
    assert compose(wider, b).hi >= compose(a, b).hi
    assert compose(wider, b).lo == compose(a, b).lo


def test_scaled_model_examples():
    assert scaled_model_range(3, Fraction(1, 2)).constant() == 2
    assert scaled_model_range(2, 1 / math.sqrt(3)).constant() == pytest.approx(math.sqrt(3), abs=1e-15)
    assert scaled_model_range(2, Fraction(1, 2)).constant() == 2
    with pytest.raises(InvalidArgument):
        scaled_model_range(3, 0)


def test_optimal_scale_examples():
    assert optimal_scale(3) == (0.5, 2.0)
    k, c0 = optimal_scale(2)
    assert abs(k - 1 / math.sqrt(3)) <= 1e-15 and abs(c0 - math.sqrt(3)) <= 1e-15
    assert optimal_scale(2, dyadic_only=True) == (0.5, 2.0)
    assert optimal_scale(3, dyadic_only=True) == (0.5, 2.0)


def test_optimal_scale_is_optimal():
    for n in (2, 3):
        k0, c0 = optimal_scale(n)
        for k in np.linspace(0.05, 2, 400):
            assert max(1 / k, (n + 1) * k) >= c0 - 1e-12


def test_so3_range():
    r = so3_range()
    assert (r.lo, r.hi) == (Fraction(1, 2), 2)
