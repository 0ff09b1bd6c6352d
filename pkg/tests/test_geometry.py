import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from rigidcrlb.errors import NotRotation
from rigidcrlb.geometry import (
    EulerAngles,
    GimbalLockWarning,
    Pose,
    apply_pose,
    as_rotation,
    euler_from_rotation,
    is_so3,
    kron_landmark,
    random_rotation,
    rot_x,
    rot_y,
    rot_z,
    rotation_from_euler,
    unvec,
    vec,
)
from rigidcrlb.scenario import TABLE3_TARGET

angle = st.floats(-math.pi, math.pi, allow_nan=False)
half_pitch = st.floats(-1.5, 1.5, allow_nan=False)  # keeps clear of gimbal lock
coord = st.floats(-10, 10, allow_nan=False)


def test_explicit_matrix_matches_product():
    a = EulerAngles(0.3, -0.7, 1.9)
    np.testing.assert_allclose(rotation_from_euler(a), rot_z(a.gamma) @ rot_y(a.beta) @ rot_x(a.alpha), atol=1e-15)


def test_matches_scipy_intrinsic_zyx():
    # independent oracle: scipy's intrinsic Z-Y-X Euler sequence
    a = EulerAngles.from_degrees(10, 20, 45)
    ref = Rotation.from_euler("ZYX", [45, 20, 10], degrees=True).as_matrix()
    np.testing.assert_allclose(rotation_from_euler(a), ref, atol=1e-15)


def test_identity_pose_leaves_conformation():
    C = np.arange(12.0).reshape(3, 4)
    np.testing.assert_array_equal(apply_pose(Pose.identity(), C), C)


def test_quarter_turn_about_z():
    pose = Pose(rot_z(math.pi / 2), np.zeros(3))
    np.testing.assert_allclose(apply_pose(pose, [1, 0, 0]).ravel(), [0, 1, 0], atol=1e-15)


def test_reference_body_transform():
    pose = Pose.from_euler(EulerAngles.from_degrees(10, 20, 45), [-3, 0.5, 7])
    Q = Rotation.from_euler("ZYX", [45, 20, 10], degrees=True).as_matrix()
    expected = np.column_stack([Q @ c + [-3, 0.5, 7] for c in TABLE3_TARGET.T])
    np.testing.assert_allclose(apply_pose(pose, TABLE3_TARGET), expected, atol=1e-14)


def test_is_so3_examples():
    assert is_so3(np.eye(3), 1e-9)
    assert not is_so3(np.diag([1.0, 1.0, -1.0]), 1e-9)
    assert is_so3(rotation_from_euler(EulerAngles.from_degrees(10, 20, 45)), 1e-9)
    assert not is_so3(2 * np.eye(3))
    assert not is_so3(np.eye(2))
    with pytest.raises(ValueError):
        is_so3(np.eye(3), 0.0)


def test_as_rotation_rejects_reflection():
    with pytest.raises(NotRotation):
        as_rotation(np.diag([1.0, -1.0, 1.0]))
    with pytest.raises(NotRotation):
        Pose(np.diag([1.0, -1.0, 1.0]), np.zeros(3))


def test_kron_landmark_blocks():
    K = kron_landmark([1, 0, 0])
    np.testing.assert_array_equal(K[:3], np.eye(3))
    np.testing.assert_array_equal(K[3:], 0)
    K = kron_landmark([0, 0, 1])
    np.testing.assert_array_equal(K[6:], np.eye(3))
    np.testing.assert_array_equal(K[:6], 0)
    K = kron_landmark([2, -1, 3])
    np.testing.assert_array_equal(K, np.vstack([2 * np.eye(3), -np.eye(3), 3 * np.eye(3)]))


def test_vec_is_column_stacking():
    A = np.arange(9.0).reshape(3, 3)
    np.testing.assert_array_equal(vec(A), [0, 3, 6, 1, 4, 7, 2, 5, 8])
    np.testing.assert_array_equal(unvec(vec(A)), A)


def test_gimbal_lock_flagged():
    Q = rotation_from_euler(EulerAngles(0.4, math.pi / 2, 1.0))
    with pytest.warns(GimbalLockWarning):
        a = euler_from_rotation(Q)
    assert a.gimbal_lock and a.alpha == 0.0
    np.testing.assert_allclose(rotation_from_euler(a), Q, atol=1e-12)


def test_no_warning_away_from_lock():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        a = euler_from_rotation(rotation_from_euler(EulerAngles(0.1, 0.2, 0.3)))
    assert not a.gimbal_lock


def test_pose_arrays_are_read_only():
    pose = Pose.identity()
    with pytest.raises(ValueError):
        pose.translation[0] = 1.0


@given(angle, half_pitch, angle)
def test_euler_always_so3(a, b, g):
    assert is_so3(rotation_from_euler(EulerAngles(a, b, g)), 1e-12)


@given(angle, half_pitch, angle)
def test_euler_round_trip(a, b, g):
    back = euler_from_rotation(rotation_from_euler(EulerAngles(a, b, g)))
    # compare on the circle so that -pi and pi are the same angle
    for x, y in zip(back.as_array(), (a, b, g)):
        assert abs(math.remainder(x - y, 2 * math.pi)) < 1e-9


@given(st.integers(0, 2**32 - 1), st.lists(st.tuples(coord, coord, coord), min_size=2, max_size=6))
def test_rigidity(seed, pts):
    rng = np.random.default_rng(seed)
    C = np.array(pts, dtype=float).T
    X = apply_pose(Pose(random_rotation(rng), rng.normal(size=3)), C)
    dc = np.linalg.norm(C[:, :, None] - C[:, None, :], axis=0)
    dx = np.linalg.norm(X[:, :, None] - X[:, None, :], axis=0)
    np.testing.assert_allclose(dx, dc, rtol=1e-12, atol=1e-12 * max(1.0, dc.max()))


@settings(max_examples=200)
@given(st.integers(0, 2**32 - 1))
def test_vectorization_identity(seed):
    rng = np.random.default_rng(seed)
    Q = rng.normal(size=(3, 3))
    c = rng.normal(size=3)
    np.testing.assert_allclose(kron_landmark(c).T @ vec(Q), Q @ c, rtol=1e-13, atol=1e-13)


def test_random_rotation_is_haar_like():
    rng = np.random.default_rng(0)
    Qs = np.array([random_rotation(rng) for _ in range(4000)])
    assert all(is_so3(Q, 1e-12) for Q in Qs[:100])
    # E[Q] = 0 for the Haar measure
    assert np.abs(Qs.mean(axis=0)).max() < 0.05
