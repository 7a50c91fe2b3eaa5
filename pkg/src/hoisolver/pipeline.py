"""End-to-end solve for one session: keyframe rigid solves, limb IK,
gradient refinement, interpolation, and low-pass smoothing.
"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import PipelineConfig
from .errors import HoiSolverError, UnderConstrained
from .geometry import RigidPose, transform_point
from .optimizer import (ContactPair, FrameState, capsule_local_samples,
                        interpolate_frames, refine_frame, smooth_sequence)
from .session import (SceneSession, frames_to_states, states_to_frames,
                      motion_to_doc, write_canonical)
from .silhouette import camera_scaled, downsample_mask, load_mask_png
from .skeleton import SkeletonPose, chain_mask, solve_limb_ik
from .solver import (Correspondence3D2D, Correspondence3D3D,
                     FrameCorrespondences, estimate_static_pose,
                     solve_rigid_pose)
from .optimizer import MaskInputs


@dataclass
class PipelineResult:
    states: list                      # final per-frame FrameState
    keyframes: list                   # keyframe indices
    reports: dict = field(default_factory=dict)   # frame -> SolveReport dict
    loss_traces: dict = field(default_factory=dict)
    failed_frames: dict = field(default_factory=dict)  # frame -> error string
    warnings: list = field(default_factory=list)
    static_frame: int | None = None

    def report_doc(self):
        return {
            "keyframes": list(self.keyframes),
            "static_frame": self.static_frame,
            "solver_reports": {str(k): v for k, v in sorted(self.reports.items())},
            "loss_traces": {str(k): v for k, v in sorted(self.loss_traces.items())},
            "failed_frames": {str(k): v for k, v in sorted(self.failed_frames.items())},
            "warnings": list(self.warnings),
        }


def contact_pairs(session: SceneSession):
    return [ContactPair(keypoint=p.keypoint, object_point=p.object_point,
                        start=p.start, end=p.end)
            for p in session.annotations.pairs]


def frame_correspondences(session: SceneSession, states, frame,
                          w_3d, w_2d) -> FrameCorrespondences:
    """Solver inputs for one frame: 3D-3D rows from active contact pairs
    (targets are the frame's human keypoints) and 3D-2D rows from valid
    track points."""
    fc = FrameCorrespondences()
    kp = states[frame].fk(session.skeleton).keypoints
    for p in session.annotations.pairs:
        if p.start <= frame < p.end:
            fc.c33.append(Correspondence3D3D(object_point=p.object_point,
                                             target=kp[p.keypoint], weight=w_3d))
    for t in session.annotations.tracks:
        uv = t.valid_at(frame)
        if uv is not None:
            fc.c32.append(Correspondence3D2D(object_point=t.object_point,
                                             target=uv, weight=w_2d))
    return fc


def keyframe_indices(num_frames, stride):
    idx = list(range(0, num_frames, stride))
    if idx[-1] != num_frames - 1:
        idx.append(num_frames - 1)
    return idx


def mask_inputs_for(session: SceneSession, frame, cfg: PipelineConfig):
    paths = session.mask_path(frame)
    if paths is None:
        return None
    hp, op = paths
    if hp is None and op is None:
        return None
    cam = camera_scaled(session.camera, cfg.raster.max_dim)
    gt_h = gt_o = None
    if hp is not None:
        gt_h = downsample_mask(load_mask_png(hp), cam.height, cam.width)
    if op is not None:
        gt_o = downsample_mask(load_mask_png(op), cam.height, cam.width)
    return MaskInputs(gt_human=gt_h, gt_object=gt_o, cam=cam)


def run_pipeline(session: SceneSession, cfg: PipelineConfig = None) -> PipelineResult:
    """Execute the full two-stage optimization over a session.

    Deterministic: identical session and config produce identical states.
    Per-frame solver failures are recorded and the frame keeps its warm-start
    pose; the run only aborts when no frame is solvable at all.
    """
    cfg = cfg or PipelineConfig()
    model = session.skeleton
    mesh = session.mesh
    pairs = contact_pairs(session)
    states = frames_to_states(session.human_frames, scale=session.scale)
    T = len(states)

    total_ann = sum(frame_correspondences(session, states, t,
                                          cfg.solver.w_3d, cfg.solver.w_2d).count
                    for t in range(T))
    if total_ann == 0:
        raise UnderConstrained("session has no annotations")

    input_states = frames_to_states(session.human_frames, scale=session.scale)
    result = PipelineResult(states=states, keyframes=keyframe_indices(T, cfg.keyframe_stride))
    human_samples = capsule_local_samples(model)

    # stage one object pose: static strategy or per-keyframe warm-started solves
    if session.static:
        frames_fc = [frame_correspondences(session, states, t,
                                           cfg.solver.w_3d, cfg.solver.w_2d)
                     for t in range(T)]
        init = states[0].object_pose
        pose, report, chosen = estimate_static_pose(frames_fc, session.camera,
                                                    init=init, opts=cfg.solver)
        result.static_frame = chosen
        result.reports[chosen] = report.to_dict()
        for st in states:
            st.object_pose = pose
    else:
        prev_pose = None
        for t in result.keyframes:
            fc = frame_correspondences(session, states, t,
                                       cfg.solver.w_3d, cfg.solver.w_2d)
            init = prev_pose if prev_pose is not None else states[t].object_pose
            try:
                pose, report = solve_rigid_pose(init, fc.c33, fc.c32,
                                                cam=session.camera, opts=cfg.solver)
                states[t].object_pose = pose
                result.reports[t] = report.to_dict()
                prev_pose = pose
            except HoiSolverError as exc:
                result.failed_frames[t] = f"{type(exc).__name__}: {exc}"
                if prev_pose is not None:
                    states[t].object_pose = prev_pose

    # stage one limb IK, then stage two refinement at each keyframe
    union_mask = set()
    for t in result.keyframes:
        active = [p for p in pairs if p.active(t)]
        if active:
            kp_ids = {p.keypoint for p in active}
            mask = chain_mask(model, kp_ids, cfg.chain_depth)
            union_mask |= mask
            targets = [(p.keypoint,
                        transform_point(states[t].object_pose, p.object_point))
                       for p in active]
            new_pose = solve_limb_ik(model, states[t].skeleton_pose, targets, mask,
                                     max_iters=cfg.ik.max_iters, tol=cfg.ik.tol,
                                     damping=cfg.ik.damping)
            states[t] = FrameState(new_pose, states[t].object_pose)
        else:
            mask = set()
        refine = refine_frame(model, mesh, states[t], active, cfg.weights,
                              mask_inputs=mask_inputs_for(session, t, cfg),
                              chain_joints=mask, opts=cfg.refine,
                              raster=cfg.raster,
                              static_object=session.static,
                              human_samples=human_samples)
        states[t] = refine.state
        result.loss_traces[t] = refine.loss_trace
        result.warnings.extend(f"frame {t}: {w}" for w in refine.warnings)

    # interpolate the optimized channels between keyframes; non-optimized
    # joints and the root keep their dense upstream values so that everything
    # outside the chain mask stays bit-exact through the run
    for a, b in zip(result.keyframes[:-1], result.keyframes[1:]):
        gap = b - a
        if gap >= 2:
            mid = interpolate_frames(states[a], states[b], gap)
            for i, interp in enumerate(mid, start=1):
                t = a + i
                joints = input_states[t].skeleton_pose.joint_rotations.copy()
                for j in union_mask:
                    joints[j] = interp.skeleton_pose.joint_rotations[j]
                pose = SkeletonPose(joints,
                                    input_states[t].skeleton_pose.root_translation)
                states[t] = FrameState(pose, interp.object_pose)

    if session.static:
        frozen = states[0].object_pose
    smoothed = smooth_sequence(states, cfg.cutoff_hz, session.fps,
                               joint_subset=union_mask, smooth_root=False,
                               smooth_object=True)
    if session.static:
        # the frozen pose must survive smoothing bit-exact
        for st in smoothed:
            st.object_pose = frozen
    result.states = smoothed
    return result


def write_results(out_dir, session: SceneSession, result: PipelineResult):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    motion_path = out_dir / "motion.json"
    report_path = out_dir / "report.json"
    frames = states_to_frames(result.states)
    write_canonical(motion_path, motion_to_doc(frames, session.fps))
    write_canonical(report_path, result.report_doc())
    return motion_path, report_path
