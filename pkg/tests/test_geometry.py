import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hoisolver import rotation as rot
from hoisolver.errors import BehindCamera, DegenerateCloud
from hoisolver.geometry import (CameraModel, PointCloud, RigidPose,
                                align_to_depth, compose, inverse, project,
                                transform_point, unproject)


def random_pose(rng, max_angle=np.pi, max_t=1.0, scale_range=(0.5, 2.0)):
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    angle = rng.uniform(-max_angle, max_angle)
    q = rot.quat_from_axis_angle(axis, angle)
    t = rng.uniform(-max_t, max_t, 3)
    s = rng.uniform(*scale_range)
    return RigidPose(q, t, s)


def test_transform_identity():
    p = np.array([1.0, 2.0, 3.0])
    assert np.allclose(transform_point(RigidPose.identity(), p), p)


def test_transform_pure_translation():
    pose = RigidPose(translation=np.array([0.1, 0.0, 0.0]))
    assert np.allclose(transform_point(pose, np.zeros(3)), [0.1, 0.0, 0.0])


def test_transform_axis_rotation():
    pose = RigidPose(rotation=rot.quat_from_axis_angle([0, 0, 1], np.pi / 2))
    out = transform_point(pose, [1.0, 0.0, 0.0])
    assert np.allclose(out, [0.0, 1.0, 0.0], atol=1e-12)


def test_scale_applied_before_rotation():
    pose = RigidPose(rotation=rot.quat_from_axis_angle([0, 0, 1], np.pi / 2),
                     translation=np.array([1.0, 0.0, 0.0]), scale=2.0)
    out = transform_point(pose, [1.0, 0.0, 0.0])
    assert np.allclose(out, [1.0, 2.0, 0.0], atol=1e-12)


def test_pose_invariants():
    with pytest.raises(ValueError):
        RigidPose(rotation=np.array([1.0, 0.1, 0.0, 0.0]))
    with pytest.raises(ValueError):
        RigidPose(scale=0.0)
    with pytest.raises(ValueError):
        RigidPose(scale=-1.0)


def test_compose_matches_sequential_application(rng):
    for _ in range(50):
        a = random_pose(rng)
        b = random_pose(rng)
        p = rng.normal(size=3)
        lhs = transform_point(compose(a, b), p)
        rhs = transform_point(a, transform_point(b, p))
        assert np.allclose(lhs, rhs, atol=1e-9)


def test_inverse_roundtrip(rng):
    for _ in range(50):
        a = random_pose(rng)
        p = rng.normal(size=3)
        back = transform_point(inverse(a), transform_point(a, p))
        assert np.allclose(back, p, atol=1e-9)


def test_project_on_axis():
    cam = CameraModel(500, 500, 320, 240, 640, 480)
    assert np.allclose(project(cam, [0.0, 0.0, 2.0]), [320.0, 240.0])


def test_project_forced_arithmetic():
    cam = CameraModel(500, 500, 320, 240, 640, 480)
    assert np.allclose(project(cam, [1.0, 0.0, 2.0]), [570.0, 240.0])


def test_project_behind_camera():
    cam = CameraModel(500, 500, 320, 240, 640, 480)
    with pytest.raises(BehindCamera):
        project(cam, [0.0, 0.0, -1.0])


def test_project_unproject_identity(rng):
    cam = CameraModel(480, 510, 315, 250, 640, 480)
    for _ in range(100):
        uv = rng.uniform([0, 0], [cam.width, cam.height])
        depth = rng.uniform(0.1, 10.0)
        assert np.allclose(project(cam, unproject(cam, uv, depth)), uv, atol=1e-9)


def test_camera_invariants():
    with pytest.raises(ValueError):
        CameraModel(0.0, 500, 320, 240, 640, 480)
    with pytest.raises(ValueError):
        CameraModel(500, 500, 700, 240, 640, 480)


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 32 - 1))
def test_compose_inverse_is_identity(seed):
    rng = np.random.default_rng(seed)
    a = random_pose(rng)
    ident = compose(inverse(a), a)
    assert np.allclose(ident.translation, 0.0, atol=1e-9)
    assert np.isclose(ident.scale, 1.0, atol=1e-12)
    assert np.isclose(abs(ident.rotation[0]), 1.0, atol=1e-9)


# -- depth alignment ---------------------------------------------------------


def test_align_to_depth_recovers_scale_translation(icosphere, rng):
    truth = RigidPose(rot.IDENTITY_QUAT.copy(), np.array([0.0, 0.0, 1.0]), 2.0)
    cloud = PointCloud(transform_point(truth, icosphere.vertices))
    init = RigidPose.identity()
    fitted = align_to_depth(icosphere, init, cloud)
    assert np.isclose(fitted.scale, 2.0, atol=1e-3)
    assert np.allclose(fitted.translation, [0.0, 0.0, 1.0], atol=1e-3)
    assert np.array_equal(fitted.rotation, init.rotation)


def test_align_to_depth_fixed_point(icosphere):
    init = RigidPose(rot.quat_from_axis_angle([0, 1, 0], 0.3),
                     np.array([0.2, -0.1, 0.5]), 1.3)
    cloud = PointCloud(transform_point(init, icosphere.vertices))
    fitted = align_to_depth(icosphere, init, cloud)
    assert np.isclose(fitted.scale, init.scale, atol=1e-9)
    assert np.allclose(fitted.translation, init.translation, atol=1e-9)


def test_align_to_depth_degenerate_cloud(unit_cube):
    with pytest.raises(DegenerateCloud):
        align_to_depth(unit_cube, RigidPose.identity(),
                       PointCloud(np.zeros((3, 3))))
