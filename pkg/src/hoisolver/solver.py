"""Rigid object pose from annotated correspondences.

Weighted nonlinear least squares over SE(3) mixing two residual blocks:
3D-3D contact alignment (object point to human keypoint) and 3D-2D
reprojection alignment (object point to tracked pixel). Rotation updates use
exponential-map increments composed onto a quaternion; object scale is fixed
upstream and is not a solve variable.
"""

from dataclasses import dataclass, field

import numpy as np

from . import rotation as rot
from .config import SolverOptions
from .errors import BehindCamera, NonFinite, UnderConstrained
from .geometry import DEPTH_EPSILON, CameraModel, RigidPose


@dataclass
class Correspondence3D3D:
    """Object-local point matched to a world-space target (a human keypoint)."""

    object_point: np.ndarray
    target: np.ndarray
    weight: float = 1.0

    def __post_init__(self):
        self.object_point = np.asarray(self.object_point, dtype=float).reshape(3)
        self.target = np.asarray(self.target, dtype=float).reshape(3)
        if self.weight < 0:
            raise ValueError("weight must be non-negative")


@dataclass
class Correspondence3D2D:
    """Object-local point matched to a tracked pixel location."""

    object_point: np.ndarray
    target: np.ndarray
    weight: float = 2e-6

    def __post_init__(self):
        self.object_point = np.asarray(self.object_point, dtype=float).reshape(3)
        self.target = np.asarray(self.target, dtype=float).reshape(2)
        if self.weight < 0:
            raise ValueError("weight must be non-negative")


@dataclass
class SolveReport:
    final_cost: float
    cost_3d: float
    cost_2d: float
    iterations: int
    converged: bool
    num_3d: int
    num_2d: int
    message: str = ""

    def to_dict(self):
        return {
            "final_cost": self.final_cost, "cost_3d": self.cost_3d,
            "cost_2d": self.cost_2d, "iterations": self.iterations,
            "converged": self.converged, "num_3d": self.num_3d,
            "num_2d": self.num_2d, "message": self.message,
        }


def _check_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NonFinite("solver input contains NaN or Inf")


def _residuals_and_jacobian(q, t, scale, p33, q33, w33, p32, q32, w32, cam,
                            with_jacobian=True):
    """Stacked residual vector and Jacobian w.r.t. [rotation increment, translation].

    Returns (r, J) or (r, None); raises BehindCamera if a 2D block point sits
    at or behind the camera plane.
    """
    R = rot.quat_to_matrix(q)
    blocks_r = []
    blocks_J = []

    if len(p33):
        u = scale * p33
        Ru = u @ R.T
        r = (Ru + t - q33) * np.sqrt(w33)[:, None]
        blocks_r.append(r.reshape(-1))
        if with_jacobian:
            J = np.zeros((len(p33), 3, 6))
            for i in range(len(p33)):
                J[i, :, :3] = -R @ _skew(u[i])
                J[i, :, 3:] = np.eye(3)
            blocks_J.append(J.reshape(-1, 6) * np.repeat(np.sqrt(w33), 3)[:, None])

    if len(p32):
        u = scale * p32
        X = u @ R.T + t
        z = X[:, 2]
        if np.any(z <= DEPTH_EPSILON):
            raise BehindCamera("2D correspondence point behind camera")
        uv = np.stack([cam.fx * X[:, 0] / z + cam.cx,
                       cam.fy * X[:, 1] / z + cam.cy], axis=-1)
        r = (uv - q32) * np.sqrt(w32)[:, None]
        blocks_r.append(r.reshape(-1))
        if with_jacobian:
            J = np.zeros((len(p32), 2, 6))
            for i in range(len(p32)):
                x, y, zz = X[i]
                dpi = np.array([[cam.fx / zz, 0.0, -cam.fx * x / zz ** 2],
                                [0.0, cam.fy / zz, -cam.fy * y / zz ** 2]])
                dX = np.hstack([-R @ _skew(u[i]), np.eye(3)])
                J[i] = dpi @ dX
            blocks_J.append(J.reshape(-1, 6) * np.repeat(np.sqrt(w32), 2)[:, None])

    r = np.concatenate(blocks_r) if blocks_r else np.zeros(0)
    J = np.vstack(blocks_J) if (with_jacobian and blocks_J) else None
    return r, J


def _skew(v):
    return np.array([[0.0, -v[2], v[1]],
                     [v[2], 0.0, -v[0]],
                     [-v[1], v[0], 0.0]])


def _weighted_kabsch(p, q, w):
    """Closed-form R, t minimizing sum w_i ||R p_i + t - q_i||^2."""
    wsum = float(np.sum(w))
    if wsum <= 0:
        return None
    wn = w / wsum
    p_mean = wn @ p
    q_mean = wn @ q
    H = (p - p_mean).T @ ((q - q_mean) * wn[:, None])
    U, _, Vt = np.linalg.svd(H)
    d = np.sign(np.linalg.det(Vt.T @ U.T))
    R = Vt.T @ np.diag([1.0, 1.0, d]) @ U.T
    return R, q_mean - R @ p_mean


def _split_cost(r, n33):
    c3 = float(0.5 * np.sum(r[:3 * n33] ** 2))
    c2 = float(0.5 * np.sum(r[3 * n33:] ** 2))
    return c3, c2


def solve_rigid_pose(init: RigidPose, c33, c32, cam: CameraModel = None,
                     opts: SolverOptions = None):
    """Levenberg-Marquardt estimate of object rotation and translation.

    Args:
        init: starting pose; its scale is held fixed.
        c33: list of Correspondence3D3D.
        c32: list of Correspondence3D2D; requires `cam` when non-empty.
        opts: solver options (damping schedule, tolerances).

    Returns:
        (RigidPose, SolveReport).

    Raises:
        UnderConstrained: fewer than 6 scalar residual rows.
        BehindCamera: a 2D point is behind the camera at the start, or damping
            escalation could not step around a behind-camera candidate.
        NonFinite: NaN/Inf in the inputs.
    """
    opts = opts or SolverOptions()
    rows = 3 * len(c33) + 2 * len(c32)
    if rows < 6:
        raise UnderConstrained(f"{rows} residual rows < 6")
    if c32 and cam is None:
        raise ValueError("camera required for 3D-2D correspondences")

    p33 = np.array([c.object_point for c in c33]).reshape(-1, 3)
    q33 = np.array([c.target for c in c33]).reshape(-1, 3)
    w33 = np.array([c.weight for c in c33]).reshape(-1)
    p32 = np.array([c.object_point for c in c32]).reshape(-1, 3)
    q32 = np.array([c.target for c in c32]).reshape(-1, 2)
    w32 = np.array([c.weight for c in c32]).reshape(-1)
    _check_finite(p33, q33, w33, p32, q32, w32, init.translation, init.rotation)

    scale = init.scale
    # candidate starts: the caller's init, and (with enough 3D-3D pairs) a
    # closed-form Procrustes fit of that block, which keeps descent out of the
    # mixed objective's mirror-pose local minima
    candidates = [(init.rotation.copy(), init.translation.copy())]
    if len(p33) >= 3:
        fit = _weighted_kabsch(scale * p33, q33, w33)
        if fit is not None:
            candidates.append((rot.matrix_to_quat(fit[0]), fit[1].copy()))
    q = t = r = J = None
    cost = np.inf
    behind = None
    for cq, ct in candidates:
        try:
            cr, cJ = _residuals_and_jacobian(cq, ct, scale, p33, q33, w33,
                                             p32, q32, w32, cam)
        except BehindCamera as exc:
            behind = exc
            continue
        c_cost = float(0.5 * np.dot(cr, cr))
        if c_cost < cost:
            q, t, r, J, cost = cq, ct, cr, cJ, c_cost
    if q is None:
        raise behind
    lam = opts.lm_lambda0
    converged = False
    message = "max iterations"
    iters = 0
    for iters in range(1, opts.max_iters + 1):
        g = J.T @ r
        if np.max(np.abs(g)) < opts.grad_tol:
            converged = True
            message = "gradient below tolerance"
            break
        H = J.T @ J
        stepped = False
        behind_blocked = False
        while lam <= opts.lm_lambda_max:
            try:
                delta = np.linalg.solve(H + lam * np.eye(6), -g)
            except np.linalg.LinAlgError:
                lam *= opts.lm_lambda_up
                continue
            if not np.all(np.isfinite(delta)):
                raise NonFinite("non-finite LM step")
            q_new = rot.normalize(rot.quat_mul(q, rot.quat_exp(delta[:3])))
            t_new = t + delta[3:]
            try:
                r_new, J_new = _residuals_and_jacobian(
                    q_new, t_new, scale, p33, q33, w33, p32, q32, w32, cam)
            except BehindCamera:
                behind_blocked = True
                lam *= opts.lm_lambda_up
                continue
            behind_blocked = False
            cost_new = float(0.5 * np.dot(r_new, r_new))
            if cost_new <= cost:
                rel_decrease = (cost - cost_new) / max(cost, 1e-300)
                q, t, r, J, cost = q_new, t_new, r_new, J_new, cost_new
                lam = max(lam * opts.lm_lambda_down, 1e-15)
                stepped = True
                if rel_decrease < opts.cost_tol:
                    converged = True
                    message = "relative cost decrease below tolerance"
                break
            lam *= opts.lm_lambda_up
        if not stepped:
            if behind_blocked:
                raise BehindCamera(
                    "damping escalation kept projecting a 2D point behind the camera")
            converged = True
            message = "damping saturated (stationary)"
            break
        if converged:
            break

    c3, c2 = _split_cost(r, len(p33))
    pose = RigidPose(q, t, scale)
    report = SolveReport(final_cost=cost, cost_3d=c3, cost_2d=c2,
                         iterations=iters, converged=converged,
                         num_3d=len(p33), num_2d=len(p32), message=message)
    return pose, report


@dataclass
class FrameCorrespondences:
    """Per-frame annotation bundle handed to the static-object strategy."""

    c33: list = field(default_factory=list)
    c32: list = field(default_factory=list)

    @property
    def count(self):
        return len(self.c33) + len(self.c32)

    @property
    def rows(self):
        return 3 * len(self.c33) + 2 * len(self.c32)


def estimate_static_pose(frames, cam: CameraModel = None,
                         init: RigidPose = None, opts: SolverOptions = None):
    """Solve one frozen pose for a static object.

    Picks the frame with the most annotated interaction points (earliest frame
    on ties) among frames meeting the minimal constraint count, solves it, and
    returns (pose, report, chosen frame index). The caller applies the pose to
    every frame.
    """
    init = init or RigidPose.identity()
    best = -1
    best_count = -1
    for i, f in enumerate(frames):
        if f.rows >= 6 and f.count > best_count:
            best = i
            best_count = f.count
    if best < 0:
        raise UnderConstrained("no frame meets the minimal constraint count")
    pose, report = solve_rigid_pose(init, frames[best].c33, frames[best].c32,
                                    cam=cam, opts=opts)
    return pose, report, best
