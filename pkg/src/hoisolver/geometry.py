"""Rigid transforms, pinhole projection, point clouds, depth alignment."""

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import rotation as rot
from .errors import BehindCamera, DegenerateCloud

# Minimum positive depth (meters) at which projection is considered valid.
DEPTH_EPSILON = 1e-6

QUAT_NORM_TOL = 1e-9


@dataclass(frozen=True)
class RigidPose:
    """Scaled rigid transform: world point = R (s * p) + t.

    Scale multiplies object-local coordinates before rotation, matching the
    pre-annotation scale adjustment of object meshes.
    """

    rotation: np.ndarray = field(default_factory=lambda: rot.IDENTITY_QUAT.copy())
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))
    scale: float = 1.0

    def __post_init__(self):
        q = np.asarray(self.rotation, dtype=float)
        t = np.asarray(self.translation, dtype=float)
        if q.shape != (4,):
            raise ValueError("rotation must be a quaternion [w, x, y, z]")
        if t.shape != (3,):
            raise ValueError("translation must be a 3-vector")
        if abs(np.linalg.norm(q) - 1.0) > QUAT_NORM_TOL:
            raise ValueError("quaternion is not unit norm")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        object.__setattr__(self, "rotation", q)
        object.__setattr__(self, "translation", t)

    @staticmethod
    def identity():
        return RigidPose()

    def matrix(self):
        """4x4 homogeneous matrix (scale folded into the linear part)."""
        M = np.eye(4)
        M[:3, :3] = rot.quat_to_matrix(self.rotation) * self.scale
        M[:3, 3] = self.translation
        return M


def transform_point(pose: RigidPose, p):
    """Apply scale, then rotation, then translation to one point or an (N, 3) batch."""
    p = np.asarray(p, dtype=float)
    return rot.quat_rotate(pose.rotation, pose.scale * p) + pose.translation


def compose(a: RigidPose, b: RigidPose) -> RigidPose:
    """Pose such that transform(compose(a, b), p) == transform(a, transform(b, p))."""
    q = rot.normalize(rot.quat_mul(a.rotation, b.rotation))
    t = rot.quat_rotate(a.rotation, a.scale * b.translation) + a.translation
    return RigidPose(q, t, a.scale * b.scale)


def inverse(a: RigidPose) -> RigidPose:
    q = rot.quat_conj(a.rotation)
    s = 1.0 / a.scale
    t = -s * rot.quat_rotate(q, a.translation)
    return RigidPose(rot.normalize(q), t, s)


@dataclass(frozen=True)
class CameraModel:
    """Pinhole camera: pixel = (fx x/z + cx, fy y/z + cy)."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point must lie inside the image")


def project(cam: CameraModel, p):
    """Project camera-frame points to pixels.

    Accepts a single 3-vector or an (N, 3) batch. Raises BehindCamera when any
    depth is at or below DEPTH_EPSILON: silently clamping near-zero depths
    would corrupt least-squares residuals built on this projection.
    """
    p = np.asarray(p, dtype=float)
    single = p.ndim == 1
    pts = np.atleast_2d(p)
    z = pts[:, 2]
    if np.any(z <= DEPTH_EPSILON):
        raise BehindCamera(f"point depth <= {DEPTH_EPSILON}")
    uv = np.stack([cam.fx * pts[:, 0] / z + cam.cx,
                   cam.fy * pts[:, 1] / z + cam.cy], axis=-1)
    return uv[0] if single else uv


def unproject(cam: CameraModel, uv, depth):
    """Inverse of project at a known depth."""
    uv = np.asarray(uv, dtype=float)
    x = (uv[..., 0] - cam.cx) / cam.fx * depth
    y = (uv[..., 1] - cam.cy) / cam.fy * depth
    return np.stack([x, y, np.broadcast_to(depth, x.shape)], axis=-1)


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray
    pixels: np.ndarray | None = None  # optional per-point source pixel coords

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 3)
        object.__setattr__(self, "points", pts)
        if self.pixels is not None:
            px = np.asarray(self.pixels, dtype=float).reshape(-1, 2)
            if len(px) != len(pts):
                raise ValueError("pixels must match points in length")
            object.__setattr__(self, "pixels", px)

    def __len__(self):
        return len(self.points)


def align_to_depth(object_mesh, initial: RigidPose, depth_cloud: PointCloud,
                   max_iters: int = 50, tol: float = 1e-10) -> RigidPose:
    """Fit object scale and translation to a depth point cloud.

    Alternates nearest-neighbor association with a closed-form least-squares
    update of (scale, translation); rotation is held at the initial value
    because full 7-DoF fitting to noisy monocular depth is ill-conditioned.

    Args:
        object_mesh: TriangleMesh whose vertices are used as sample points.
        initial: starting pose; its rotation is kept.
        depth_cloud: target cloud, at least 10 points.

    Returns:
        RigidPose with updated scale and translation.
    """
    if len(depth_cloud) < 10:
        raise DegenerateCloud(f"depth cloud has {len(depth_cloud)} points, need >= 10")
    samples = np.asarray(object_mesh.vertices, dtype=float)
    if len(samples) == 0:
        raise DegenerateCloud("object mesh has no vertices")

    rotated = rot.quat_rotate(initial.rotation, samples)  # scale enters linearly after this
    tree = cKDTree(depth_cloud.points)

    def icp(s, t):
        prev_cost = np.inf
        cost = np.inf
        for _ in range(max_iters):
            transformed = s * rotated + t
            dist, idx = tree.query(transformed)
            targets = depth_cloud.points[idx]
            cost = float(np.sum(dist ** 2))
            if prev_cost - cost < tol * max(prev_cost, 1.0):
                break
            prev_cost = cost
            # minimize sum || s * a_i + t - q_i ||^2 over (s, t), linear in both
            a_mean = rotated.mean(axis=0)
            q_mean = targets.mean(axis=0)
            ac = rotated - a_mean
            qc = targets - q_mean
            denom = float(np.sum(ac * ac))
            if denom < 1e-15:
                break
            s_new = float(np.sum(ac * qc)) / denom
            if s_new <= 0:
                break  # degenerate association; keep last valid estimate
            s = s_new
            t = q_mean - s * a_mean
        return s, t, cost

    # candidate A: the provided initialization
    best = icp(initial.scale, initial.translation.copy())
    # candidate B: centroid/spread statistics, which rescue far-off starts
    a_mean = rotated.mean(axis=0)
    spread_a = float(np.sqrt(np.mean(np.sum((rotated - a_mean) ** 2, axis=1))))
    q_mean = depth_cloud.points.mean(axis=0)
    spread_q = float(np.sqrt(np.mean(np.sum(
        (depth_cloud.points - q_mean) ** 2, axis=1))))
    if spread_a > 1e-12 and spread_q > 1e-12:
        s0 = spread_q / spread_a
        cand = icp(s0, q_mean - s0 * a_mean)
        if cand[2] < best[2]:
            best = cand
    s, t, _ = best
    return RigidPose(initial.rotation.copy(), t, s)
