import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from so3atlas.errors import InvalidArgument
from so3atlas.geometry import (UnitQuaternion, axis_angle_rotation, check_rotation, dist_s3, phi3,
                               phi6, quat_multiply, quat_to_rotation, random_quaternions,
                               rotation_angle, rotation_to_quat)

quat_entries = st.floats(-1, 1, allow_nan=False)
quats = st.tuples(quat_entries, quat_entries, quat_entries, quat_entries).filter(
    lambda t: sum(v * v for v in t) > 1e-6)


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def test_unit_quaternion_normalizes():
    q = UnitQuaternion(2.0, 0.0, 0.0, 0.0)
    assert tuple(q) == (1.0, 0.0, 0.0, 0.0)
    assert q.renormalized


def test_unit_quaternion_rejects_zero():
    with pytest.raises(InvalidArgument):
        UnitQuaternion(0.0, 0.0, 0.0, 0.0)


@given(quats)
def test_unit_quaternion_norm(t):
    q = UnitQuaternion(*t)
    assert abs(float(q.array @ q.array) - 1.0) <= 1e-12


def test_identity_rotation():
    np.testing.assert_array_equal(quat_to_rotation([1, 0, 0, 0]), np.eye(3))


def test_half_turn_about_x():
    np.testing.assert_array_equal(quat_to_rotation([0, 1, 0, 0]), np.diag([1.0, -1.0, -1.0]))


def test_quat_to_rotation_rejects_zero():
    with pytest.raises(InvalidArgument):
        quat_to_rotation([0, 0, 0, 0])


def test_rotation_is_even_in_q(rng):
    q = random_quaternions(1000, rng)
    assert np.max(np.abs(quat_to_rotation(q) - quat_to_rotation(-q))) <= 1e-12


def test_rotation_matrix_invariants(rng):
    R = quat_to_rotation(random_quaternions(1000, rng))
    eye = np.broadcast_to(np.eye(3), R.shape)
    assert np.max(np.abs(np.swapaxes(R, -1, -2) @ R - eye)) <= 1e-10
    assert np.max(np.abs(np.linalg.det(R) - 1.0)) <= 1e-10


def test_multiplication_matches_matrix_product(rng):
    a, b = random_quaternions(2, rng)
    np.testing.assert_allclose(quat_to_rotation(quat_multiply(a, b)),
                               quat_to_rotation(a) @ quat_to_rotation(b), atol=1e-12)


def test_rotation_to_quat_round_trip(rng):
    q = random_quaternions(200, rng)
    back = rotation_to_quat(quat_to_rotation(q))
    # equal up to sign
    assert np.max(np.abs(np.abs(np.sum(back * q, axis=1)) - 1.0)) <= 1e-12


def test_check_rotation_rejects_non_orthogonal():
    with pytest.raises(InvalidArgument):
        check_rotation(np.diag([1.0, 1.0, 1.1]))
    with pytest.raises(InvalidArgument):
        check_rotation(np.diag([1.0, 1.0, -1.0]))


def test_phi3_examples():
    assert phi3([1, 0, 0, 0], [1, 0, 0, 0]) == 0.0
    assert phi3([1, 0, 0, 0], [0, 1, 0, 0]) == pytest.approx(math.pi / 2, abs=1e-15)
    assert phi3([1, 0, 0, 0], [math.cos(0.3), math.sin(0.3), 0, 0]) == pytest.approx(0.3, abs=1e-15)


def test_phi3_ignores_sign(rng):
    a, b = random_quaternions(2, rng)
    assert phi3(a, b) == pytest.approx(phi3(a, -b), abs=1e-15)


def test_phi6_examples():
    assert phi6(np.eye(3), np.eye(3)) == 0.0
    for axis in ([1, 0, 0], [0.3, -0.4, 0.5], [0, 0, 1]):
        assert phi6(np.eye(3), axis_angle_rotation(axis, 1.2)) == pytest.approx(1.2, abs=1e-13)


def test_phi6_rejects_non_rotation():
    with pytest.raises(InvalidArgument):
        phi6(np.eye(3), 2 * np.eye(3))


def test_phi6_range(rng):
    R1 = quat_to_rotation(random_quaternions(1000, rng))
    R2 = quat_to_rotation(random_quaternions(1000, rng))
    a = phi6(R1, R2)
    assert np.all((a >= 0) & (a <= math.pi))


def test_rotation_angle_half_turn_is_pi():
    assert rotation_angle(np.diag([1.0, -1.0, -1.0])) == pytest.approx(math.pi, abs=1e-15)


def test_dist_s3_examples():
    q = np.array([0.5, -0.5, 0.5, 0.5])
    assert dist_s3(q, q) == 0.0
    assert dist_s3(q, -q) == pytest.approx(math.pi, abs=1e-15)
    # arccos(1/2) evaluated at 40 digits
    assert dist_s3([1, 0, 0, 0], [0.5, 0.5, 0.5, 0.5]) == pytest.approx(1.0471975511965977, abs=1e-15)


def test_dist_s3_accurate_for_close_points():
    a = np.array([1.0, 0.0, 0.0, 0.0])
    b = np.array([math.cos(1e-9), math.sin(1e-9), 0.0, 0.0])
    assert dist_s3(a, b) == pytest.approx(1e-9, rel=1e-9)


def test_double_cover_relation(rng):
    a = random_quaternions(10**5, rng)
    b = random_quaternions(10**5, rng)
    err = np.abs(phi6(quat_to_rotation(a), quat_to_rotation(b)) - 2.0 * phi3(a, b))
    assert err.max() <= 1e-9


def test_bi_invariance(rng):
    R = quat_to_rotation(random_quaternions(1000, rng))
    R1 = quat_to_rotation(random_quaternions(1000, rng))
    R2 = quat_to_rotation(random_quaternions(1000, rng))
    base = phi6(R1, R2)
    assert np.max(np.abs(phi6(R @ R1, R @ R2) - base)) <= 1e-9
    assert np.max(np.abs(phi6(R1 @ R, R2 @ R) - base)) <= 1e-9


@settings(max_examples=300)
@given(quats, quats, quats)
def test_triangle_inequalities(a, b, c):
    a, b, c = (np.array(t) / np.linalg.norm(t) for t in (a, b, c))
    for d in (dist_s3, phi3):
        assert d(a, c) <= d(a, b) + d(b, c) + 1e-9
    Ra, Rb, Rc = quat_to_rotation(np.array([a, b, c]))
    assert phi6(Ra, Rc) <= phi6(Ra, Rb) + phi6(Rb, Rc) + 1e-9
