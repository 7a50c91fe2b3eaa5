"""Synthetic test scenes: a scripted human carrying a box, with annotations
whose contacts are closed by construction.

The object rides rigidly on the left hand, so the annotated object-local
points coincide with the hand keypoints at every frame; 2D tracks are exact
projections of box corners. Perturbing the per-frame object poses then gives
a controlled reconstruction problem with known ground truth.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import rotation as rot
from .geometry import CameraModel, RigidPose, project, transform_point
from .mesh import make_box, save_obj
from .session import (MotionFrame, motion_to_doc, write_canonical)
from .skeleton import SkeletonPose, forward_kinematics, load_skeleton

HAND_KEYPOINT_NAMES = ["leftHand/Thumb", "leftHand/Index", "leftHand/Middle",
                       "leftHand/Ring", "leftHand/Pinky"]
EXTRA_KEYPOINT_NAMES = ["leftForeArm/wrist", "leftForeArm/back"]

# box center in the left-hand frame: just beyond the fingertips so the
# carried object never penetrates the hand capsules
REL_T = np.array([0.20, 0.0, 0.0])
BOX_EXTENT = 0.12

DEFAULT_CAMERA = CameraModel(fx=500.0, fy=500.0, cx=320.0, cy=240.0,
                             width=640, height=480)

TRACK_POINTS = np.array([
    [0.06, 0.06, 0.06],
    [-0.06, 0.06, -0.06],
    [0.06, -0.06, -0.06],
    [-0.06, -0.06, 0.06],
])


@dataclass
class SyntheticScene:
    session_path: Path
    gt_object_poses: list       # list[RigidPose], one per frame
    skeleton_poses: list        # list[SkeletonPose] ground truth human motion
    camera: CameraModel
    contact_keypoints: list     # keypoint ids carrying annotations
    num_frames: int
    fps: float


def scripted_skeleton_poses(model, num_frames, fps=30.0, static_arm=False):
    """Smooth whole-body motion; with static_arm the left arm chain is frozen
    so a hand-anchored object stays still."""
    joints = {name: model.joint_index(name) for name in model.joint_names}
    poses = []
    for t in range(num_frames):
        s = t / fps
        q = np.tile(rot.IDENTITY_QUAT, (model.num_joints, 1))

        def set_rot(name, vec):
            q[joints[name]] = rot.quat_exp(np.asarray(vec))

        set_rot("rightUpperArm", [0.25 * np.sin(2 * np.pi * 0.40 * s + 1.0),
                                  0.20 * np.sin(2 * np.pi * 0.31 * s),
                                  -0.30 + 0.15 * np.sin(2 * np.pi * 0.5 * s)])
        set_rot("leftUpperLeg", [0.15 * np.sin(2 * np.pi * 0.45 * s), 0.0, 0.0])
        set_rot("rightUpperLeg", [-0.15 * np.sin(2 * np.pi * 0.45 * s), 0.0, 0.0])
        set_rot("neck", [0.05 * np.sin(2 * np.pi * 0.2 * s), 0.0, 0.0])
        if not static_arm:
            set_rot("spine01", [0.08 * np.sin(2 * np.pi * 0.30 * s), 0.0,
                                0.06 * np.sin(2 * np.pi * 0.23 * s + 0.5)])
            set_rot("leftUpperArm", [0.30 * np.sin(2 * np.pi * 0.35 * s),
                                     0.25 * np.sin(2 * np.pi * 0.50 * s + 0.3),
                                     0.20 + 0.15 * np.sin(2 * np.pi * 0.42 * s)])
            set_rot("leftForeArm", [0.0,
                                    0.25 * np.sin(2 * np.pi * 0.55 * s + 0.8),
                                    0.10 * np.sin(2 * np.pi * 0.37 * s)])
            set_rot("leftHand", [0.10 * np.sin(2 * np.pi * 0.6 * s), 0.0, 0.0])
            root = np.array([0.20 * np.sin(2 * np.pi * 0.25 * s),
                             0.05 * np.sin(2 * np.pi * 0.35 * s + 0.2),
                             2.5 + 0.10 * np.sin(2 * np.pi * 0.20 * s)])
        else:
            # everything on the root-to-hand chain stays frozen so the
            # carried object is genuinely static
            set_rot("leftUpperArm", [0.0, 0.0, 0.25])
            root = np.array([0.0, 0.0, 2.5])
        poses.append(SkeletonPose(q, root))
    return poses


def carried_object_pose(model, pose) -> RigidPose:
    """Object pose anchored to the left hand (rotation = hand rotation)."""
    fk = forward_kinematics(model, pose)
    j = model.joint_index("leftHand")
    q = fk.joint_rotations[j]
    t = fk.joint_positions[j] + rot.quat_rotate(q, REL_T)
    return RigidPose(rot.normalize(q), t, 1.0)


def contact_object_points(model, keypoint_ids):
    """Object-local coordinates of the given hand keypoints (valid because
    both the keypoints and the object are rigid in the hand frame)."""
    out = []
    for kp in keypoint_ids:
        out.append(np.asarray(model.keypoint_offsets[kp]) - REL_T)
    return out


def perturb_pose(pose: RigidPose, rng, sigma_rot_rad, sigma_t) -> RigidPose:
    w = rng.normal(0.0, sigma_rot_rad, 3)
    dt = rng.normal(0.0, sigma_t, 3)
    q = rot.normalize(rot.quat_mul(pose.rotation, rot.quat_exp(w)))
    return RigidPose(q, pose.translation + dt, pose.scale)


def build_synthetic_session(out_dir, num_frames=90, fps=30.0,
                            sigma_rot_deg=5.0, sigma_t=0.05, seed=0,
                            static=False, session_id="synthetic") -> SyntheticScene:
    """Write a complete session directory with ground truth on the side.

    Produces session.json, box.obj, human_poses.json (object poses perturbed),
    and gt_object.json holding the unperturbed object trajectory.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    model = load_skeleton()
    cam = DEFAULT_CAMERA

    poses = scripted_skeleton_poses(model, num_frames, fps, static_arm=static)
    gt_obj = [carried_object_pose(model, p) for p in poses]
    if static:
        gt_obj = [gt_obj[0]] * num_frames

    kp_ids = [model.keypoint_id(n) for n in HAND_KEYPOINT_NAMES]
    obj_points = contact_object_points(model, kp_ids)
    pairs = [{"keypoint": kp, "object_point": [float(x) for x in p],
              "start": 0, "end": num_frames}
             for kp, p in zip(kp_ids, obj_points)]
    if static:
        # extra pairs over a sub-range make one frame the clear annotation argmax
        extra_ids = [model.keypoint_id(n) for n in EXTRA_KEYPOINT_NAMES]
        lo, hi = max(0, num_frames // 3), max(2, 2 * num_frames // 3)
        fk0 = forward_kinematics(model, poses[0])
        inv = rot.quat_conj(gt_obj[0].rotation)
        for kp in extra_ids:
            local = rot.quat_rotate(inv, fk0.keypoints[kp]
                                    - gt_obj[0].translation) / gt_obj[0].scale
            pairs.append({"keypoint": kp, "object_point": [float(x) for x in local],
                          "start": lo, "end": hi})

    tracks = []
    for tp in TRACK_POINTS:
        points = []
        for t in range(num_frames):
            uv = project(cam, transform_point(gt_obj[t], tp))
            points.append([t, float(uv[0]), float(uv[1]), 1])
        tracks.append({"object_point": [float(x) for x in tp],
                       "points": points, "source": "external"})

    sigma_rot = np.deg2rad(sigma_rot_deg)
    noisy_obj = [perturb_pose(p, rng, sigma_rot, sigma_t) for p in gt_obj]

    save_obj(out_dir / "box.obj", make_box((BOX_EXTENT, BOX_EXTENT, BOX_EXTENT)))

    def motion_frames(object_poses):
        return [MotionFrame(frame=t, root_t=poses[t].root_translation,
                            joint_quats=poses[t].joint_rotations,
                            object_q=object_poses[t].rotation,
                            object_t=object_poses[t].translation)
                for t in range(num_frames)]

    write_canonical(out_dir / "human_poses.json",
                    motion_to_doc(motion_frames(noisy_obj), fps))
    write_canonical(out_dir / "gt_object.json",
                    motion_to_doc(motion_frames(gt_obj), fps))

    session_doc = {
        "version": 1,
        "id": session_id,
        "revision": 0,
        "camera": {"fx": cam.fx, "fy": cam.fy, "cx": cam.cx, "cy": cam.cy,
                   "width": cam.width, "height": cam.height},
        "fps": fps,
        "object": {"mesh_path": "box.obj", "scale": 1.0, "static": static},
        "skeleton_path": None,
        "human_poses_path": "human_poses.json",
        "masks_dir": None,
        "frames_dir": None,
        "annotations": {"pairs": pairs, "tracks": tracks, "events": []},
    }
    session_path = out_dir / "session.json"
    write_canonical(session_path, session_doc)
    return SyntheticScene(session_path=session_path, gt_object_poses=gt_obj,
                          skeleton_poses=poses, camera=cam,
                          contact_keypoints=kp_ids, num_frames=num_frames,
                          fps=fps)
