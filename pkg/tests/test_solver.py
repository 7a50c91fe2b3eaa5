import numpy as np
import pytest

from hoisolver import rotation as rot
from hoisolver.config import SolverOptions
from hoisolver.errors import BehindCamera, NonFinite, UnderConstrained
from hoisolver.geometry import CameraModel, RigidPose, project, transform_point
from hoisolver.solver import (Correspondence3D2D, Correspondence3D3D,
                              FrameCorrespondences, estimate_static_pose,
                              solve_rigid_pose)

CAM = CameraModel(500, 500, 320, 240, 640, 480)


# -- independent oracles -------------------------------------------------------

def kabsch(P, Q):
    """Closed-form rotation/translation minimizing sum ||R p + t - q||^2."""
    Pc = P - P.mean(axis=0)
    Qc = Q - Q.mean(axis=0)
    H = Pc.T @ Qc
    U, _, Vt = np.linalg.svd(H)
    d = np.sign(np.linalg.det(Vt.T @ U.T))
    R = Vt.T @ np.diag([1.0, 1.0, d]) @ U.T
    t = Q.mean(axis=0) - R @ P.mean(axis=0)
    return R, t


def random_gt_pose(rng, max_angle=np.deg2rad(60.0), max_t=0.5):
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    angle = rng.uniform(0, max_angle)
    t = rng.uniform(-max_t, max_t, 3)
    return RigidPose(rot.quat_from_axis_angle(axis, angle), t, 1.0)


def make_scene(rng, pose, n33=6, n32=4, center=np.array([0.0, 0.0, 2.0]),
               px_noise=0.0):
    pts33 = rng.uniform(-0.3, 0.3, size=(n33, 3)) + center
    c33 = [Correspondence3D3D(p, transform_point(pose, p)) for p in pts33]
    pts32 = rng.uniform(-0.3, 0.3, size=(n32, 3)) + center
    c32 = []
    for p in pts32:
        uv = project(CAM, transform_point(pose, p))
        if px_noise > 0:
            uv = uv + rng.normal(0.0, px_noise, 2)
        c32.append(Correspondence3D2D(p, uv))
    return c33, c32


def pose_error(a: RigidPose, b: RigidPose):
    dq = rot.quat_mul(rot.quat_conj(a.rotation), b.rotation)
    return rot.geodesic_angle(rot.IDENTITY_QUAT, dq), np.linalg.norm(
        a.translation - b.translation)


# -- examples -------------------------------------------------------------------

def test_zero_residual_returns_init(rng):
    pose = random_gt_pose(rng)
    pts = rng.uniform(-0.3, 0.3, size=(4, 3))
    c33 = [Correspondence3D3D(p, transform_point(pose, p)) for p in pts]
    out, report = solve_rigid_pose(pose, c33, [])
    assert report.final_cost < 1e-20
    assert np.allclose(out.rotation, pose.rotation, atol=1e-12)
    assert np.allclose(out.translation, pose.translation, atol=1e-12)


def test_pure_translation_recovered(rng):
    pts = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0],
                    [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    c33 = [Correspondence3D3D(p, p + np.array([0.1, 0.0, 0.0])) for p in pts]
    out, _ = solve_rigid_pose(RigidPose.identity(), c33, [])
    assert np.allclose(out.translation, [0.1, 0.0, 0.0], atol=1e-8)
    assert rot.geodesic_angle(out.rotation, rot.IDENTITY_QUAT) < 1e-8


def test_recovery_over_random_scenes(rng):
    for _ in range(50):
        gt = random_gt_pose(rng)
        c33, c32 = make_scene(rng, gt)
        out, report = solve_rigid_pose(RigidPose.identity(), c33, c32, CAM)
        ang, dt = pose_error(out, gt)
        assert ang < 1e-6 and dt < 1e-6, (ang, dt, report)


def test_under_constrained():
    c33 = [Correspondence3D3D(np.zeros(3), np.zeros(3))]
    with pytest.raises(UnderConstrained):
        solve_rigid_pose(RigidPose.identity(), c33, [])


def test_non_finite_input():
    c33 = [Correspondence3D3D(np.zeros(3), np.array([np.nan, 0, 0])),
           Correspondence3D3D(np.ones(3), np.ones(3))]
    with pytest.raises(NonFinite):
        solve_rigid_pose(RigidPose.identity(), c33, [])


def test_behind_camera_at_init(rng):
    # target 2D points whose object points sit behind the camera at init
    pts = rng.uniform(-0.1, 0.1, size=(4, 3)) + np.array([0.0, 0.0, -2.0])
    c32 = [Correspondence3D2D(p, np.array([320.0, 240.0])) for p in pts]
    with pytest.raises(BehindCamera):
        solve_rigid_pose(RigidPose.identity(), [], c32, CAM)


# -- invariants ------------------------------------------------------------------

def test_weight_rescaling_leaves_argmin(rng):
    gt = random_gt_pose(rng)
    c33, c32 = make_scene(rng, gt)
    out1, rep1 = solve_rigid_pose(RigidPose.identity(), c33, c32, CAM)
    k = 7.3
    c33s = [Correspondence3D3D(c.object_point, c.target, c.weight * k) for c in c33]
    c32s = [Correspondence3D2D(c.object_point, c.target, c.weight * k) for c in c32]
    out2, rep2 = solve_rigid_pose(RigidPose.identity(), c33s, c32s, CAM)
    ang, dt = pose_error(out1, out2)
    assert ang < 1e-8 and dt < 1e-8


def test_cost_scales_linearly_with_weights(rng):
    gt = random_gt_pose(rng)
    c33, c32 = make_scene(rng, gt, px_noise=2.0)  # noise so the cost is nonzero
    _, rep1 = solve_rigid_pose(RigidPose.identity(), c33, c32, CAM)
    k = 2.0
    c33s = [Correspondence3D3D(c.object_point, c.target, c.weight * k) for c in c33]
    c32s = [Correspondence3D2D(c.object_point, c.target, c.weight * k) for c in c32]
    _, rep2 = solve_rigid_pose(RigidPose.identity(), c33s, c32s, CAM)
    assert np.isclose(rep2.final_cost, k * rep1.final_cost, rtol=1e-6)


def test_matches_kabsch_on_3d_only(rng):
    for _ in range(20):
        gt = random_gt_pose(rng)
        pts = rng.uniform(-0.5, 0.5, size=(5, 3))
        targets = np.array([transform_point(gt, p) for p in pts])
        targets += rng.normal(0.0, 0.01, targets.shape)  # noise: nontrivial argmin
        c33 = [Correspondence3D3D(p, q) for p, q in zip(pts, targets)]
        out, _ = solve_rigid_pose(RigidPose.identity(), c33, [])
        R_ref, t_ref = kabsch(pts, targets)
        assert np.allclose(rot.quat_to_matrix(out.rotation), R_ref, atol=1e-8)
        assert np.allclose(out.translation, t_ref, atol=1e-8)


def test_jacobian_matches_finite_differences(rng):
    from hoisolver.solver import _residuals_and_jacobian
    for _ in range(20):
        q = rot.random_quat(rng)
        # small object points and a deep translation keep z well in front of
        # the camera for any rotation
        t = rng.normal(size=3) * 0.3 + np.array([0.0, 0.0, 3.0])
        p33 = rng.uniform(-0.3, 0.3, (3, 3))
        q33 = rng.uniform(-0.3, 0.3, (3, 3)) + [0, 0, 2]
        p32 = rng.uniform(-0.3, 0.3, (2, 3))
        q32 = rng.uniform(0, [640, 480], (2, 2))
        w33 = np.full(3, 1.0)
        w32 = np.full(2, 1e-4)
        r0, J = _residuals_and_jacobian(q, t, 1.0, p33, q33, w33, p32, q32, w32, CAM)
        step = 1e-6
        for k in range(6):
            d = np.zeros(6)
            d[k] = step
            qp = rot.normalize(rot.quat_mul(q, rot.quat_exp(d[:3])))
            qm = rot.normalize(rot.quat_mul(q, rot.quat_exp(-d[:3])))
            rp, _ = _residuals_and_jacobian(qp, t + d[3:], 1.0, p33, q33, w33,
                                            p32, q32, w32, CAM, with_jacobian=False)
            rm, _ = _residuals_and_jacobian(qm, t - d[3:], 1.0, p33, q33, w33,
                                            p32, q32, w32, CAM, with_jacobian=False)
            fd = (rp - rm) / (2 * step)
            scale = max(1.0, np.max(np.abs(fd)))
            assert np.max(np.abs(fd - J[:, k])) / scale < 1e-5


def test_stationarity_on_resolve(rng):
    gt = random_gt_pose(rng)
    c33, c32 = make_scene(rng, gt, px_noise=3.0)
    out, rep = solve_rigid_pose(RigidPose.identity(), c33, c32, CAM)
    out2, rep2 = solve_rigid_pose(out, c33, c32, CAM)
    assert abs(rep2.final_cost - rep.final_cost) < 1e-12


def test_scale_held_fixed(rng):
    gt = random_gt_pose(rng)
    init = RigidPose(rot.IDENTITY_QUAT.copy(), np.zeros(3), 1.7)
    pts = rng.uniform(-0.3, 0.3, size=(4, 3))
    c33 = [Correspondence3D3D(p, transform_point(gt, 1.7 * p)) for p in pts]
    out, _ = solve_rigid_pose(init, c33, [])
    assert out.scale == 1.7


# -- static strategy ---------------------------------------------------------------

def frame_with(rng, gt, n33):
    c33, _ = make_scene(rng, gt, n33=n33, n32=0)
    return FrameCorrespondences(c33=c33, c32=[])


def test_static_pose_argmax_with_tiebreak(rng):
    gt = random_gt_pose(rng)
    frames = [frame_with(rng, gt, 2), frame_with(rng, gt, 5), frame_with(rng, gt, 5)]
    pose, report, chosen = estimate_static_pose(frames)
    assert chosen == 1
    ang, dt = pose_error(pose, gt)
    assert ang < 1e-6 and dt < 1e-6


def test_static_single_frame(rng):
    gt = random_gt_pose(rng)
    frames = [frame_with(rng, gt, 4)]
    _, _, chosen = estimate_static_pose(frames)
    assert chosen == 0


def test_static_delegates_to_solver(rng):
    gt = random_gt_pose(rng)
    frames = [frame_with(rng, gt, 3), frame_with(rng, gt, 6)]
    pose, report, chosen = estimate_static_pose(frames)
    direct, direct_report = solve_rigid_pose(RigidPose.identity(),
                                             frames[chosen].c33, frames[chosen].c32)
    assert np.array_equal(pose.rotation, direct.rotation)
    assert np.array_equal(pose.translation, direct.translation)
    assert report.final_cost == direct_report.final_cost


def test_static_under_constrained():
    frames = [FrameCorrespondences(), FrameCorrespondences()]
    with pytest.raises(UnderConstrained):
        estimate_static_pose(frames)
