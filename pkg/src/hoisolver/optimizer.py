"""Stage-two refinement: composite contact/collision/mask loss, Adam updates
on masked joints and object pose, keyframe interpolation, low-pass smoothing.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from . import rotation as rot
from . import silhouette
from .config import LossWeights, RasterOptions, RefineOptions
from .errors import SequenceTooShort
from .geometry import RigidPose, transform_point
from .mesh import make_capsule_mesh
from .skeleton import (SkeletonModel, SkeletonPose, apply_joint_increments,
                       forward_kinematics)


@dataclass(frozen=True)
class ContactPair:
    """Annotated correspondence: human keypoint <-> object-local point,
    active on frames start <= t < end."""

    keypoint: int
    object_point: np.ndarray
    start: int
    end: int

    def __post_init__(self):
        object.__setattr__(self, "object_point",
                           np.asarray(self.object_point, dtype=float).reshape(3))
        if self.start >= self.end:
            raise ValueError("pair frame range must satisfy start < end")
        if self.keypoint < 0:
            raise ValueError("keypoint id must be non-negative")

    def active(self, frame):
        return self.start <= frame < self.end


class FrameState:
    """Skeleton pose plus object pose for one frame, with a cached FK result."""

    def __init__(self, skeleton_pose: SkeletonPose, object_pose: RigidPose):
        self.skeleton_pose = skeleton_pose
        self.object_pose = object_pose
        self._fk = None
        self._fk_model = None

    def fk(self, model: SkeletonModel):
        if self._fk is None or self._fk_model is not model:
            self._fk = forward_kinematics(model, self.skeleton_pose)
            self._fk_model = model
        return self._fk

    def copy(self):
        return FrameState(self.skeleton_pose.copy(),
                          RigidPose(self.object_pose.rotation.copy(),
                                    self.object_pose.translation.copy(),
                                    self.object_pose.scale))


# -- gradient plumbing ---------------------------------------------------------

def _point_jacobian(model, fk, owner, point, joint_list):
    """(3, 3*len(joint_list)) Jacobian of a point rigidly attached to `owner`
    w.r.t. local exp-map increments of the listed joints."""
    chain = {owner, *model.ancestors(owner)}
    J = np.zeros((3, 3 * len(joint_list)))
    for col, j in enumerate(joint_list):
        if j not in chain:
            continue
        Rw = rot.quat_to_matrix(fk.joint_rotations[j])
        lever = point - fk.joint_positions[j]
        for c in range(3):
            J[:, 3 * col + c] = np.cross(Rw[:, c], lever)
    return J


def _object_point_jacobian(pose: RigidPose, local_point):
    """(3, 6) Jacobian of a transformed object point w.r.t. [rot increment, t]."""
    R = rot.quat_to_matrix(pose.rotation)
    u = pose.scale * np.asarray(local_point, dtype=float)
    J = np.zeros((3, 6))
    J[:, :3] = -R @ np.array([[0.0, -u[2], u[1]],
                              [u[2], 0.0, -u[0]],
                              [-u[1], u[0], 0.0]])
    J[:, 3:] = np.eye(3)
    return J


# -- contact loss ---------------------------------------------------------------

def contact_weights(distances, eps):
    """Normalized pair weights (d_i + eps)^2 / sum_j (d_j + eps)^2."""
    de = np.asarray(distances, dtype=float) + eps
    denom = float(np.sum(de ** 2))
    if denom <= 0.0:
        return np.full(len(de), 1.0 / len(de))
    return de ** 2 / denom


def contact_loss(model, state: FrameState, pairs, eps,
                 joint_list=None, with_grad=True, fixed_weights=None):
    """Distance-weighted contact energy over the active pairs.

    Pair weights w_i = (d_i + eps)^2 / sum_j (d_j + eps)^2 pull distant pairs
    hardest; they are recomputed from the current distances but held constant
    inside each gradient evaluation, which keeps small pair sets stable
    (pass fixed_weights to evaluate at externally frozen weights). With no
    active pairs the loss is 0 by convention.

    Returns (loss, grad_joints, grad_object); gradient terms are None when
    with_grad is False.
    """
    joint_list = list(joint_list or [])
    if not pairs:
        zero_j = np.zeros(3 * len(joint_list)) if with_grad else None
        return 0.0, zero_j, (np.zeros(6) if with_grad else None)

    fk = state.fk(model)
    kp = np.array([fk.keypoints[p.keypoint] for p in pairs])
    obj_pts = np.array([transform_point(state.object_pose, p.object_point)
                        for p in pairs])
    diff = kp - obj_pts
    d = np.linalg.norm(diff, axis=1)
    w = contact_weights(d, eps) if fixed_weights is None else np.asarray(fixed_weights)
    loss = float(np.sum(w * d ** 2))
    if not with_grad:
        return loss, None, None

    grad_joints = np.zeros(3 * len(joint_list))
    grad_obj = np.zeros(6)
    for i, p in enumerate(pairs):
        dL_dkp = 2.0 * w[i] * diff[i]
        if joint_list:
            Jk = _point_jacobian(model, fk, int(model.keypoint_joints[p.keypoint]),
                                 kp[i], joint_list)
            grad_joints += Jk.T @ dL_dkp
        Jo = _object_point_jacobian(state.object_pose, p.object_point)
        grad_obj += Jo.T @ (-dL_dkp)
    return loss, grad_joints, grad_obj


# -- collision loss --------------------------------------------------------------

def capsule_local_samples(model: SkeletonModel, axial: int = 5, radial: int = 6):
    """Deterministic surface samples of each collision capsule, expressed in
    the parent joint's local frame (capsules span parent->child bones, so the
    geometry is rigid in that frame)."""
    out = []
    for c in model.capsules:
        if model.parents[c.joint_b] != c.joint_a:
            raise ValueError("capsule must span a parent->child bone")
        b_local = model.offsets[c.joint_b]
        length = np.linalg.norm(b_local)
        axis = b_local / length if length > 0 else np.array([0.0, 1.0, 0.0])
        ref = np.array([1.0, 0.0, 0.0])
        if abs(np.dot(ref, axis)) > 0.9:
            ref = np.array([0.0, 0.0, 1.0])
        e1 = np.cross(axis, ref)
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(axis, e1)
        pts = []
        for ai in range(axial):
            h = (ai + 0.5) / axial * length
            for ri in range(radial):
                ang = 2 * np.pi * ri / radial
                pts.append(h * axis + c.radius * (np.cos(ang) * e1 + np.sin(ang) * e2))
        pts.append(-c.radius * axis)          # cap poles
        pts.append(b_local + c.radius * axis)
        out.append((c.joint_a, np.asarray(pts)))
    return out


def _segment_closest(x, a, b):
    """Closest point on segment [a, b] and its parameter tau in [0, 1]."""
    ab = b - a
    denom = float(np.dot(ab, ab))
    tau = 0.0 if denom == 0.0 else float(np.clip(np.dot(x - a, ab) / denom, 0.0, 1.0))
    return a + tau * ab, tau


def collision_loss(model, state: FrameState, object_mesh, lambda_h2o,
                   joint_list=None, human_samples=None, with_grad=True,
                   warn_log=None):
    """Bidirectional penetration energy between the capsule proxy and the object.

    human->object: squared surface distance of each penetrating human sample
    point; object->human: squared capsule penetration depth of each object
    vertex (deepest capsule when several overlap). Combined as
    lambda_h2o * L_h2o + L_o2h. A non-watertight object downgrades to the
    object->human direction only, with a recorded warning.
    """
    joint_list = list(joint_list or [])
    if human_samples is None:
        human_samples = capsule_local_samples(model)
    fk = state.fk(model)
    pose = state.object_pose
    grad_joints = np.zeros(3 * len(joint_list)) if with_grad else None
    grad_obj = np.zeros(6) if with_grad else None

    loss_h2o = 0.0
    if object_mesh.is_watertight:
        inv_R = rot.quat_conj(pose.rotation)
        lo, hi = object_mesh.bounds()
        for owner, local_pts in human_samples:
            world = (fk.joint_positions[owner]
                     + rot.quat_rotate(fk.joint_rotations[owner], local_pts))
            local = rot.quat_rotate(inv_R, world - pose.translation) / pose.scale
            near = np.all((local >= lo) & (local <= hi), axis=1)
            if not np.any(near):
                continue
            cand = np.flatnonzero(near)
            inside = object_mesh.contains(local[cand])
            idx = cand[np.atleast_1d(inside)]
            if len(idx) == 0:
                continue
            d_local, c_local = object_mesh.surface_distance(local[idx])
            d_local = np.atleast_1d(d_local)
            c_local = np.atleast_2d(c_local)
            depths = pose.scale * d_local
            loss_h2o += float(np.sum(depths ** 2))
            if with_grad:
                for k, i in enumerate(idx):
                    s_pt = world[i]
                    c_world = transform_point(pose, c_local[k])
                    dL_ds = 2.0 * (s_pt - c_world)
                    if joint_list:
                        Jh = _point_jacobian(model, fk, owner, s_pt, joint_list)
                        grad_joints += lambda_h2o * (Jh.T @ dL_ds)
                    Jo = _object_point_jacobian(pose, c_local[k])
                    grad_obj += lambda_h2o * (Jo.T @ (-dL_ds))
    elif warn_log is not None:
        warn_log.append("object mesh not watertight: collision loss is object->human only")

    # object->human: depth of every object vertex in the deepest capsule
    verts_world = transform_point(pose, object_mesh.vertices)
    V = len(verts_world)
    depth_best = np.zeros(V)
    proj_best = np.zeros((V, 3))
    tau_best = np.zeros(V)
    cap_best = np.full(V, -1)
    for ci, c in enumerate(model.capsules):
        a = fk.joint_positions[c.joint_a]
        b = fk.joint_positions[c.joint_b]
        ab = b - a
        denom = float(np.dot(ab, ab))
        if denom == 0.0:
            tau = np.zeros(V)
        else:
            tau = np.clip((verts_world - a) @ ab / denom, 0.0, 1.0)
        proj = a + tau[:, None] * ab
        dist = np.linalg.norm(verts_world - proj, axis=1)
        depth = c.radius - dist
        better = depth > depth_best
        depth_best = np.where(better, depth, depth_best)
        proj_best = np.where(better[:, None], proj, proj_best)
        tau_best = np.where(better, tau, tau_best)
        cap_best = np.where(better, ci, cap_best)

    pen = np.flatnonzero(depth_best > 0)
    loss_o2h = float(np.sum(depth_best[pen] ** 2))
    if with_grad and len(pen):
        for vi in pen:
            x = verts_world[vi]
            proj = proj_best[vi]
            dist = np.linalg.norm(x - proj)
            u = (x - proj) / dist if dist > 1e-12 else np.zeros(3)
            depth = depth_best[vi]
            dL_dx = -2.0 * depth * u
            Jo = _object_point_jacobian(pose, object_mesh.vertices[vi])
            grad_obj += Jo.T @ dL_dx
            if joint_list:
                # depth gradient flows to the capsule endpoints (envelope form)
                c = model.capsules[int(cap_best[vi])]
                tau = tau_best[vi]
                dL_da = 2.0 * depth * (1.0 - tau) * u
                dL_db = 2.0 * depth * tau * u
                Ja = _point_jacobian(model, fk, c.joint_a,
                                     fk.joint_positions[c.joint_a], joint_list)
                Jb = _point_jacobian(model, fk, c.joint_b,
                                     fk.joint_positions[c.joint_b], joint_list)
                grad_joints += Ja.T @ dL_da + Jb.T @ dL_db

    loss = lambda_h2o * loss_h2o + loss_o2h
    return loss, grad_joints, grad_obj


# -- mask loss -------------------------------------------------------------------

def human_proxy_mesh(model, fk, segments=8, rings=3):
    """Capsule-union mesh of the posed human, for silhouette rendering."""
    from .mesh import TriangleMesh
    verts = []
    faces = []
    for c in model.capsules:
        m = make_capsule_mesh(fk.joint_positions[c.joint_a],
                              fk.joint_positions[c.joint_b],
                              c.radius, segments=segments, rings=rings)
        base = len(verts)
        verts.extend(m.vertices)
        faces.extend(m.faces + base)
    return TriangleMesh(np.asarray(verts), np.asarray(faces))


@dataclass
class MaskInputs:
    """Ground-truth masks for one frame, already at loss resolution."""

    gt_human: np.ndarray = None
    gt_object: np.ndarray = None
    cam: object = None  # loss-resolution CameraModel


def mask_loss_value(model, state: FrameState, object_mesh, inputs: MaskInputs,
                    alpha, beta, sigma=1.0):
    """alpha * (occluded silhouette MSE) + beta * (edge-to-GT-edge distance sum)."""
    cam = inputs.cam
    fk = state.fk(model)
    parts = []
    rendered_o = (silhouette.rasterize_silhouette(object_mesh, state.object_pose,
                                                  cam, sigma)
                  if inputs.gt_object is not None else None)
    rendered_h = None
    if inputs.gt_human is not None:
        proxy = human_proxy_mesh(model, fk)
        rendered_h = silhouette.rasterize_silhouette(proxy, RigidPose.identity(),
                                                     cam, sigma)
    loss = 0.0
    if rendered_h is not None:
        occ_h = silhouette.occlusion_mask(
            rendered_h, inputs.gt_object if inputs.gt_object is not None
            else np.zeros_like(rendered_h))
        gt_edges = silhouette.extract_edges(inputs.gt_human)
        w = silhouette.distance_transform(gt_edges)
        loss += alpha * silhouette.mse(occ_h, inputs.gt_human)
        loss += beta * silhouette.weighted_edge_sum(silhouette.extract_edges(occ_h), w)
        parts.append("human")
    if rendered_o is not None:
        occ_o = silhouette.occlusion_mask(
            rendered_o, inputs.gt_human if inputs.gt_human is not None
            else np.zeros_like(rendered_o))
        gt_edges = silhouette.extract_edges(inputs.gt_object)
        w = silhouette.distance_transform(gt_edges)
        loss += alpha * silhouette.mse(occ_o, inputs.gt_object)
        loss += beta * silhouette.weighted_edge_sum(silhouette.extract_edges(occ_o), w)
        parts.append("object")
    return loss, parts


def mask_loss(model, state: FrameState, object_mesh, inputs: MaskInputs,
              alpha, beta, raster: RasterOptions = None, with_grad=True,
              warn_log=None):
    """Mask loss and its object-pose gradient.

    The gradient uses central finite differences on the six object pose
    parameters (the correctness reference for silhouette gradients); the
    human side of the mask term is treated as constant. Frames with no
    ground-truth masks contribute zero and are recorded in warn_log.
    """
    raster = raster or RasterOptions()
    if inputs is None or (inputs.gt_human is None and inputs.gt_object is None):
        if warn_log is not None:
            warn_log.append("mask loss skipped: no ground-truth masks")
        return 0.0, (np.zeros(6) if with_grad else None)
    loss, _ = mask_loss_value(model, state, object_mesh, inputs, alpha, beta,
                              raster.sigma)
    if not with_grad:
        return loss, None
    grad = np.zeros(6)
    if inputs.gt_object is None:
        return loss, grad  # only the human term is present; no object gradient
    base_pose = state.object_pose
    for k in range(6):
        step = raster.fd_step_rot if k < 3 else raster.fd_step_t
        vals = []
        for sgn in (+1.0, -1.0):
            delta = np.zeros(6)
            delta[k] = sgn * step
            q = rot.normalize(rot.quat_mul(base_pose.rotation, rot.quat_exp(delta[:3])))
            pose = RigidPose(q, base_pose.translation + delta[3:], base_pose.scale)
            pert = FrameState(state.skeleton_pose, pose)
            v, _ = mask_loss_value(model, pert, object_mesh, inputs, alpha, beta,
                                   raster.sigma)
            vals.append(v)
        grad[k] = (vals[0] - vals[1]) / (2.0 * step)
    return loss, grad


# -- composite refinement ---------------------------------------------------------

@dataclass
class RefineResult:
    state: FrameState
    loss_trace: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    aborted: bool = False


def total_loss(model, state, object_mesh, pairs, weights: LossWeights,
               mask_inputs=None, joint_list=None, raster=None,
               human_samples=None, with_grad=True, warn_log=None):
    """Weighted sum of the three refinement terms plus its gradients.

    Returns (loss, grad_joints, grad_object); gradients are None without
    with_grad. Terms with zero weight are skipped entirely.
    """
    joint_list = list(joint_list or [])
    warn_log = warn_log if warn_log is not None else []
    loss = 0.0
    gj = np.zeros(3 * len(joint_list)) if with_grad else None
    go = np.zeros(6) if with_grad else None

    if weights.w_c > 0:
        lc, gjc, goc = contact_loss(model, state, pairs, weights.eps,
                                    joint_list, with_grad)
        loss += weights.w_c * lc
        if with_grad:
            gj += weights.w_c * gjc
            go += weights.w_c * goc
    if weights.w_coll > 0:
        lk, gjk, gok = collision_loss(model, state, object_mesh, weights.lambda_h2o,
                                      joint_list, human_samples, with_grad, warn_log)
        loss += weights.w_coll * lk
        if with_grad:
            gj += weights.w_coll * gjk
            go += weights.w_coll * gok
    if weights.w_m > 0 and mask_inputs is not None:
        lm, gom = mask_loss(model, state, object_mesh, mask_inputs,
                            weights.alpha, weights.beta, raster, with_grad, warn_log)
        loss += weights.w_m * lm
        if with_grad and gom is not None:
            go += weights.w_m * gom
    return loss, gj, go


def refine_frame(model, object_mesh, state: FrameState, pairs,
                 weights: LossWeights, mask_inputs=None, chain_joints=None,
                 opts: RefineOptions = None, raster: RasterOptions = None,
                 static_object=False, human_samples=None) -> RefineResult:
    """Adam refinement of masked joint rotations and the object pose.

    Parameters are exponential-map increments from the input state (joint
    rotations and object rotation) plus an object translation offset; the
    root translation and all joints outside chain_joints are untouched. With
    static_object the object variables are removed from the problem entirely,
    so the object pose is returned bit-exact. Returns the best iterate seen.
    """
    opts = opts or RefineOptions()
    joint_list = sorted(chain_joints or [])
    if human_samples is None:
        human_samples = capsule_local_samples(model)
    nj = 3 * len(joint_list)
    nobj = 0 if static_object else 6
    n = nj + nobj

    def build_state(x):
        pose = state.skeleton_pose
        if nj:
            pose = apply_joint_increments(pose, joint_list, x[:nj])
        obj = state.object_pose
        if nobj:
            w = x[nj:nj + 3]
            dt = x[nj + 3:nj + 6]
            obj = RigidPose(rot.normalize(rot.quat_mul(obj.rotation, rot.quat_exp(w))),
                            obj.translation + dt, obj.scale)
        return FrameState(pose, obj)

    def evaluate(x, with_grad=True, warn_log=None):
        st = build_state(x)
        loss, gj, go = total_loss(model, st, object_mesh, pairs, weights,
                                  mask_inputs, joint_list, raster,
                                  human_samples, with_grad, warn_log)
        if not with_grad:
            return loss, None
        g = np.zeros(n)
        if nj:
            g[:nj] = gj
        if nobj:
            g[nj:] = go
        return loss, g

    result = RefineResult(state=state.copy())
    if n == 0:
        return result

    lr = np.empty(n)
    lr[:nj] = opts.lr_rotation
    if nobj:
        lr[nj:nj + 3] = opts.lr_rotation
        lr[nj + 3:] = opts.lr_translation

    x = np.zeros(n)
    m = np.zeros(n)
    v = np.zeros(n)
    warn_log = result.warnings
    best_loss, _ = evaluate(x, with_grad=False, warn_log=warn_log)
    best_x = x.copy()
    result.loss_trace.append(best_loss)
    for it in range(1, opts.iters + 1):
        _, g = evaluate(x, with_grad=True)
        if not np.all(np.isfinite(g)):
            warn_log.append(f"non-finite gradient at iteration {it}; aborting")
            result.aborted = True
            break
        m = opts.beta1 * m + (1 - opts.beta1) * g
        v = opts.beta2 * v + (1 - opts.beta2) * g * g
        mh = m / (1 - opts.beta1 ** it)
        vh = v / (1 - opts.beta2 ** it)
        x = x - lr * mh / (np.sqrt(vh) + opts.adam_eps)
        loss, _ = evaluate(x, with_grad=False)
        result.loss_trace.append(loss)
        if np.isfinite(loss) and loss < best_loss:
            best_loss = loss
            best_x = x.copy()
    if np.any(best_x):
        result.state = build_state(best_x)
    # else: zero increments, keep the input state bit-exact
    return result


# -- temporal operators ------------------------------------------------------------

def interpolate_frames(state_a: FrameState, state_b: FrameState, stride: int):
    """States for the stride-1 intermediate frames between two keyframes.

    Translations interpolate linearly; every rotation (each joint and the
    object) follows the spherical geodesic with parameter i/stride, which is
    the linear path in the local exponential map.
    """
    if stride < 2:
        raise ValueError("stride must be >= 2")

    def slerp_or_copy(qa, qb, t):
        # identical endpoints pass through bit-exact
        return qa if np.array_equal(qa, qb) else rot.normalize(rot.quat_slerp(qa, qb, t))

    def lerp_or_copy(va, vb, t):
        return va.copy() if np.array_equal(va, vb) else (1 - t) * va + t * vb

    out = []
    qa = state_a.skeleton_pose.joint_rotations
    qb = state_b.skeleton_pose.joint_rotations
    for i in range(1, stride):
        t = i / stride
        joints = np.array([slerp_or_copy(qa[j], qb[j], t) for j in range(len(qa))])
        root = lerp_or_copy(state_a.skeleton_pose.root_translation,
                            state_b.skeleton_pose.root_translation, t)
        oq = slerp_or_copy(state_a.object_pose.rotation,
                           state_b.object_pose.rotation, t)
        ot = lerp_or_copy(state_a.object_pose.translation,
                          state_b.object_pose.translation, t)
        out.append(FrameState(SkeletonPose(joints, root),
                              RigidPose(oq, ot, state_a.object_pose.scale)))
    return out


def _continuous_rotvecs(quats):
    """Rotation-vector trajectory with per-step continuity (handles the
    antipodal sign and the 2*pi wrap nearest the previous sample)."""
    out = np.zeros((len(quats), 3))
    prev = None
    for i, q in enumerate(quats):
        r = rot.quat_log(q)
        if prev is not None:
            angle = np.linalg.norm(r)
            if angle > 1e-12:
                alt = r * (1.0 - 2.0 * np.pi / angle)
                if np.linalg.norm(alt - prev) < np.linalg.norm(r - prev):
                    r = alt
        out[i] = r
        prev = r
    return out


def smooth_sequence(states, cutoff_hz, fps, joint_subset=None,
                    smooth_root=True, smooth_object=True):
    """Zero-phase second-order Butterworth low-pass over the whole sequence.

    Filters translations and the exponential-map coordinates of the rotation
    channels, then rebuilds unit quaternions. joint_subset restricts
    filtering to the listed joints (the pipeline passes the optimized chain
    so untouched joints stay bit-exact); channels outside the subset are
    copied through unchanged. Sequences shorter than the filter warm-up
    length are returned unchanged with a warning.
    """
    if len(states) < 2:
        raise SequenceTooShort("smoothing needs at least 2 frames")
    if not (0 < cutoff_hz < fps / 2):
        raise ValueError("cutoff must satisfy 0 < cutoff < fps/2")
    b, a = signal.butter(2, cutoff_hz / (fps / 2.0))
    padlen = 3 * max(len(a), len(b))
    T = len(states)
    if T <= padlen:
        warnings.warn(f"sequence of {T} frames is shorter than the filter "
                      f"warm-up ({padlen + 1}); returning it unsmoothed")
        return [s.copy() for s in states]

    J = states[0].skeleton_pose.num_joints
    subset = list(range(J)) if joint_subset is None else sorted(joint_subset)

    def lp(x):
        # Gustafsson edge handling makes forward-backward filtering exactly
        # time-reversal symmetric
        return signal.filtfilt(b, a, x, axis=0, method="gust")

    joint_f = {}
    for j in subset:
        logs = _continuous_rotvecs([s.skeleton_pose.joint_rotations[j]
                                    for s in states])
        joint_f[j] = lp(logs)
    root_f = (lp(np.array([s.skeleton_pose.root_translation for s in states]))
              if smooth_root else None)
    objt_f = obj_f = None
    if smooth_object:
        objt_f = lp(np.array([s.object_pose.translation for s in states]))
        obj_f = lp(_continuous_rotvecs([s.object_pose.rotation for s in states]))

    out = []
    for t in range(T):
        joints = states[t].skeleton_pose.joint_rotations.copy()
        for j in subset:
            joints[j] = rot.quat_exp(joint_f[j][t])
        root = root_f[t] if smooth_root else states[t].skeleton_pose.root_translation.copy()
        pose = SkeletonPose(joints, root)
        if smooth_object:
            opose = RigidPose(rot.quat_exp(obj_f[t]), objt_f[t],
                              states[t].object_pose.scale)
        else:
            opose = states[t].object_pose
        out.append(FrameState(pose, opose))
    return out
