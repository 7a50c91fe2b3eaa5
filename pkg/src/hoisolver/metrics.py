"""Motion-quality metrics: MPJPE, contact score, jitter.

All metrics work in meters internally; millimeter conversion happens only in
the CLI report.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import LengthMismatch, SequenceTooShort, ShapeMismatch
from .geometry import transform_point
from .optimizer import ContactPair, FrameState
from .skeleton import SkeletonModel


@dataclass
class MotionSequence:
    """Per-frame states with the contact table driving contact metrics."""

    frames: list            # list[FrameState]
    fps: float
    pairs: list = field(default_factory=list)  # list[ContactPair]

    def __post_init__(self):
        if len(self.frames) < 1:
            raise ValueError("sequence needs at least one frame")
        if self.fps <= 0:
            raise ValueError("fps must be positive")

    def __len__(self):
        return len(self.frames)

    def active_pairs(self, t):
        return [p for p in self.pairs if p.active(t)]

    def joint_positions(self, model: SkeletonModel):
        """(T, J, 3) world joint positions."""
        return np.array([f.fk(model).joint_positions for f in self.frames])


@dataclass
class ContactLabels:
    """Binary per-frame, per-keypoint contact indicators."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if not np.isin(v, (0, 1)).all():
            raise ValueError("contact labels must be 0/1")
        self.values = v.astype(float)


def mpjpe(sim: MotionSequence, ref: MotionSequence, model: SkeletonModel) -> float:
    """Mean Euclidean joint-position error over all frames and joints (meters)."""
    if len(sim) != len(ref):
        raise LengthMismatch(f"frame counts differ: {len(sim)} vs {len(ref)}")
    ps = sim.joint_positions(model)
    pr = ref.joint_positions(model)
    if ps.shape != pr.shape:
        raise LengthMismatch(f"joint layouts differ: {ps.shape} vs {pr.shape}")
    return float(np.mean(np.linalg.norm(ps - pr, axis=-1)))


def contact_score(seq: MotionSequence, model: SkeletonModel) -> float:
    """Sum over frames and active pairs of squared keypoint-to-object-point
    distance (m^2); 0 with an empty contact table."""
    total = 0.0
    for t, frame in enumerate(seq.frames):
        pairs = seq.active_pairs(t)
        if not pairs:
            continue
        kp = frame.fk(model).keypoints
        for p in pairs:
            x = transform_point(frame.object_pose, p.object_point)
            total += float(np.sum((x - kp[p.keypoint]) ** 2))
    return total


def frame_contact_score(state: FrameState, pairs, model: SkeletonModel) -> float:
    """Single-frame restriction of contact_score."""
    kp = state.fk(model).keypoints
    total = 0.0
    for p in pairs:
        x = transform_point(state.object_pose, p.object_point)
        total += float(np.sum((x - kp[p.keypoint]) ** 2))
    return total


def jitter(seq: MotionSequence, model: SkeletonModel) -> float:
    """Per-joint RMS of the third finite difference of position, joint-averaged.

    Vanishes on motions that are affine or quadratic in time; a unit-step
    cubic t^3 gives exactly 6.
    """
    positions = seq.joint_positions(model)
    return jitter_of_positions(positions)


def jitter_of_positions(positions) -> float:
    """Jitter of a raw (T, J, 3) position array."""
    positions = np.asarray(positions, dtype=float)
    T = positions.shape[0]
    if T < 4:
        raise SequenceTooShort("jitter needs at least 4 frames")
    d3 = (positions[3:] - 3 * positions[2:-1] + 3 * positions[1:-2] - positions[:-3])
    per_joint = np.sqrt(np.sum(d3 ** 2, axis=-1).mean(axis=0))
    return float(per_joint.mean())


# -- imitation rewards -----------------------------------------------------------

@dataclass
class RewardState:
    """One timestep of simulated or reference dynamics for reward evaluation."""

    human_positions: np.ndarray       # (J, 3)
    human_rotations: np.ndarray       # (J, 4) quaternions
    human_velocities: np.ndarray      # (J, 3)
    human_ang_velocities: np.ndarray  # (J, 3)
    object_position: np.ndarray       # (3,)
    object_rotation: np.ndarray       # (4,)
    object_velocity: np.ndarray       # (3,)
    object_ang_velocity: np.ndarray   # (3,)


def _rot_errors_sq(q_ref, q_sim):
    from .rotation import geodesic_angle
    q_ref = np.atleast_2d(q_ref)
    q_sim = np.atleast_2d(q_sim)
    return sum(geodesic_angle(a, b) ** 2 for a, b in zip(q_ref, q_sim))


def tracking_reward(sim: RewardState, ref: RewardState,
                    lambda_p=100.0, lambda_r=10.0,
                    lambda_v=0.1, lambda_w=0.01) -> float:
    """exp(-(E_p^h + E_p^o + E_v^h + E_v^o)) with position/rotation and
    velocity/angular-velocity error energies; rotation differences use the
    geodesic angle. Always in (0, 1], and 1 iff all errors vanish."""
    e_p_h = (lambda_p * float(np.sum((ref.human_positions - sim.human_positions) ** 2))
             + lambda_r * _rot_errors_sq(ref.human_rotations, sim.human_rotations))
    e_p_o = (lambda_p * float(np.sum((ref.object_position - sim.object_position) ** 2))
             + lambda_r * _rot_errors_sq(ref.object_rotation, sim.object_rotation))
    e_v_h = (lambda_v * float(np.sum((ref.human_velocities - sim.human_velocities) ** 2))
             + lambda_w * float(np.sum((ref.human_ang_velocities
                                        - sim.human_ang_velocities) ** 2)))
    e_v_o = (lambda_v * float(np.sum((ref.object_velocity - sim.object_velocity) ** 2))
             + lambda_w * float(np.sum((ref.object_ang_velocity
                                        - sim.object_ang_velocity) ** 2)))
    return float(np.exp(-(e_p_h + e_p_o + e_v_h + e_v_o)))


def label_reward(ref_labels, sim_labels) -> float:
    """sum |c_ref - c_sim| masked by c_ref: counts reference contacts missed in
    simulation; entries without a reference contact never contribute."""
    ref = ref_labels.values if isinstance(ref_labels, ContactLabels) else np.asarray(ref_labels, dtype=float)
    sim = sim_labels.values if isinstance(sim_labels, ContactLabels) else np.asarray(sim_labels, dtype=float)
    if ref.shape != sim.shape:
        raise ShapeMismatch(f"{ref.shape} vs {sim.shape}")
    return float(np.sum(np.abs(ref - sim) * ref))


def kp_contact_reward(state: FrameState, pairs, model: SkeletonModel,
                      lambda_c=1.0) -> float:
    """Negative contact energy of the frame's interaction graph (<= 0)."""
    return -lambda_c * frame_contact_score(state, pairs, model)


def sequence_velocities(seq: MotionSequence, model: SkeletonModel):
    """Forward-difference velocities and angular velocities at the sequence fps.

    The last frame repeats its predecessor's estimate. Returns per-frame
    RewardState objects built from the reconstructed motion.
    """
    from . import rotation as rot
    T = len(seq)
    pos = seq.joint_positions(model)
    quats = np.array([f.skeleton_pose.joint_rotations for f in seq.frames])
    obj_q = np.array([f.object_pose.rotation for f in seq.frames])
    obj_t = np.array([f.object_pose.translation for f in seq.frames])
    dt = 1.0 / seq.fps

    def ang_vel(q0, q1):
        return rot.quat_log(rot.quat_mul(rot.quat_conj(q0), q1)) / dt

    states = []
    for t in range(T):
        t1 = min(t + 1, T - 1)
        t0 = t if t1 > t else max(t - 1, 0)
        v = (pos[t1] - pos[t0]) / dt if t1 > t0 else np.zeros_like(pos[0])
        w = (np.array([ang_vel(quats[t0, j], quats[t1, j])
                       for j in range(quats.shape[1])])
             if t1 > t0 else np.zeros((quats.shape[1], 3)))
        ov = (obj_t[t1] - obj_t[t0]) / dt if t1 > t0 else np.zeros(3)
        ow = ang_vel(obj_q[t0], obj_q[t1]) if t1 > t0 else np.zeros(3)
        states.append(RewardState(
            human_positions=pos[t], human_rotations=quats[t],
            human_velocities=v, human_ang_velocities=w,
            object_position=obj_t[t], object_rotation=obj_q[t],
            object_velocity=ov, object_ang_velocity=ow))
    return states
