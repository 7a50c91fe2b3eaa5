"""Kinematic joint tree with 74 named annotation keypoints.

The skeleton stands in for a full parametric body model: downstream losses
and solvers only ever consume keypoint world positions, never a skinned mesh.
A capsule per bone doubles as the human collision proxy.
"""

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import rotation as rot

NUM_KEYPOINTS = 74


@dataclass(frozen=True)
class Capsule:
    joint_a: int
    joint_b: int
    radius: float


class SkeletonModel:
    """Immutable joint tree plus keypoint table, loaded from a JSON document."""

    def __init__(self, joint_names, parents, offsets, keypoint_names,
                 keypoint_groups, keypoint_joints, keypoint_offsets, capsules,
                 version=1):
        self.version = version
        self.joint_names = list(joint_names)
        self.parents = np.asarray(parents, dtype=np.int64)
        self.offsets = np.asarray(offsets, dtype=float).reshape(-1, 3)
        self.keypoint_names = list(keypoint_names)
        self.keypoint_groups = list(keypoint_groups)
        self.keypoint_joints = np.asarray(keypoint_joints, dtype=np.int64)
        self.keypoint_offsets = np.asarray(keypoint_offsets, dtype=float).reshape(-1, 3)
        self.capsules = [Capsule(*c) for c in capsules]
        self._validate()

    def _validate(self):
        n = self.num_joints
        roots = np.flatnonzero(self.parents < 0)
        if len(roots) != 1:
            raise ValueError("joint tree must have exactly one root")
        for j, p in enumerate(self.parents):
            if p >= j:
                raise ValueError("parents must precede children in joint order")
        if len(self.keypoint_names) != NUM_KEYPOINTS:
            raise ValueError(f"expected {NUM_KEYPOINTS} keypoints, got {len(self.keypoint_names)}")
        if self.keypoint_joints.min() < 0 or self.keypoint_joints.max() >= n:
            raise ValueError("keypoint owning joint out of range")
        for c in self.capsules:
            if not (0 <= c.joint_a < n and 0 <= c.joint_b < n):
                raise ValueError("capsule joint out of range")

    @property
    def num_joints(self):
        return len(self.joint_names)

    @property
    def root(self):
        return int(np.flatnonzero(self.parents < 0)[0])

    def joint_index(self, name):
        return self.joint_names.index(name)

    def keypoint_id(self, name):
        """First keypoint with this name (names are near-unique, ids are unique)."""
        return self.keypoint_names.index(name)

    def ancestors(self, joint):
        out = []
        p = int(self.parents[joint])
        while p >= 0:
            out.append(p)
            p = int(self.parents[p])
        return out

    def rest_pose(self):
        return SkeletonPose(np.tile(rot.IDENTITY_QUAT, (self.num_joints, 1)),
                            np.zeros(3))

    @staticmethod
    def from_dict(doc):
        joints = doc["joints"]
        kps = doc["keypoints"]
        return SkeletonModel(
            joint_names=[j["name"] for j in joints],
            parents=[-1 if j["parent"] is None else j["parent"] for j in joints],
            offsets=[j["offset"] for j in joints],
            keypoint_names=[k["name"] for k in kps],
            keypoint_groups=[k["group"] for k in kps],
            keypoint_joints=[k["joint"] for k in kps],
            keypoint_offsets=[k["offset"] for k in kps],
            capsules=[(c["joint_a"], c["joint_b"], c["radius"]) for c in doc["capsules"]],
            version=doc.get("version", 1),
        )

    def to_dict(self):
        return {
            "version": self.version,
            "joints": [
                {"name": n,
                 "parent": None if p < 0 else int(p),
                 "offset": list(map(float, o))}
                for n, p, o in zip(self.joint_names, self.parents, self.offsets)
            ],
            "keypoints": [
                {"id": i, "name": n, "group": g, "joint": int(j),
                 "offset": list(map(float, o))}
                for i, (n, g, j, o) in enumerate(zip(
                    self.keypoint_names, self.keypoint_groups,
                    self.keypoint_joints, self.keypoint_offsets))
            ],
            "capsules": [
                {"joint_a": c.joint_a, "joint_b": c.joint_b, "radius": c.radius}
                for c in self.capsules
            ],
        }


def load_skeleton(path=None) -> SkeletonModel:
    """Load a skeleton definition file; defaults to the shipped skeleton."""
    if path is None:
        text = resources.files("hoisolver").joinpath("data/default_skeleton.json").read_text()
    else:
        text = Path(path).read_text()
    return SkeletonModel.from_dict(json.loads(text))


class SkeletonPose:
    """Per-joint local rotations (unit quaternions) plus root translation."""

    def __init__(self, joint_rotations, root_translation):
        q = np.asarray(joint_rotations, dtype=float).reshape(-1, 4)
        norms = np.linalg.norm(q, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-9):
            raise ValueError("joint rotations must be unit quaternions")
        self.joint_rotations = q
        self.root_translation = np.asarray(root_translation, dtype=float).reshape(3)

    @property
    def num_joints(self):
        return len(self.joint_rotations)

    def copy(self):
        return SkeletonPose(self.joint_rotations.copy(), self.root_translation.copy())


@dataclass(frozen=True)
class FkResult:
    joint_rotations: np.ndarray   # (J, 4) world quaternions
    joint_positions: np.ndarray   # (J, 3) world positions
    keypoints: np.ndarray         # (74, 3) world positions


def forward_kinematics(model: SkeletonModel, pose: SkeletonPose) -> FkResult:
    """World transforms of all joints and world positions of all keypoints."""
    if pose.num_joints != model.num_joints:
        raise ValueError("pose joint count does not match model")
    J = model.num_joints
    wq = np.empty((J, 4))
    wt = np.empty((J, 3))
    for j in range(J):
        p = int(model.parents[j])
        if p < 0:
            wq[j] = pose.joint_rotations[j]
            wt[j] = pose.root_translation + model.offsets[j]
        else:
            wq[j] = rot.quat_mul(wq[p], pose.joint_rotations[j])
            wt[j] = wt[p] + rot.quat_rotate(wq[p], model.offsets[j])
    kp = np.empty((NUM_KEYPOINTS, 3))
    for i in range(NUM_KEYPOINTS):
        j = int(model.keypoint_joints[i])
        kp[i] = wt[j] + rot.quat_rotate(wq[j], model.keypoint_offsets[i])
    return FkResult(wq, wt, kp)


def keypoint_positions(model: SkeletonModel, pose: SkeletonPose) -> np.ndarray:
    return forward_kinematics(model, pose).keypoints


def chain_mask(model: SkeletonModel, active_keypoints, depth: int = 3):
    """Joints allowed to move: each active keypoint's owning joint plus its
    ancestors, walking at most `depth` joints up from (and including) the owner.

    Joints outside the returned set stay frozen during optimization.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    joints = set()
    for kp in active_keypoints:
        j = int(model.keypoint_joints[int(kp)])
        joints.add(j)
        steps = 1
        p = int(model.parents[j])
        while p >= 0 and steps < depth:
            joints.add(p)
            steps += 1
            p = int(model.parents[p])
    return joints


def capsule_segments(model: SkeletonModel, fk: FkResult):
    """World-space (a, b, radius) for each collision capsule."""
    out = []
    for c in model.capsules:
        out.append((fk.joint_positions[c.joint_a], fk.joint_positions[c.joint_b], c.radius))
    return out


def keypoint_jacobian(model: SkeletonModel, fk: FkResult, keypoint_ids, joint_list):
    """d(keypoint position) / d(local exp-map increment) for the given joints.

    Local increments act by right-multiplication on each joint's rotation, so
    the instantaneous world rotation axes are the columns of the joint's world
    rotation matrix. Returns (3 * len(keypoint_ids), 3 * len(joint_list)).
    """
    chains = []
    for kp in keypoint_ids:
        owner = int(model.keypoint_joints[int(kp)])
        chains.append({owner, *model.ancestors(owner)})
    J = np.zeros((3 * len(keypoint_ids), 3 * len(joint_list)))
    for col, j in enumerate(joint_list):
        Rw = rot.quat_to_matrix(fk.joint_rotations[j])
        oj = fk.joint_positions[j]
        for row, kp in enumerate(keypoint_ids):
            if j not in chains[row]:
                continue
            lever = fk.keypoints[int(kp)] - oj
            for c in range(3):
                J[3 * row:3 * row + 3, 3 * col + c] = np.cross(Rw[:, c], lever)
    return J


def apply_joint_increments(pose: SkeletonPose, joint_list, delta) -> SkeletonPose:
    """Right-multiply exp-map increments onto the listed joints' rotations."""
    new = pose.copy()
    delta = np.asarray(delta, dtype=float).reshape(len(joint_list), 3)
    for row, j in enumerate(joint_list):
        q = rot.quat_mul(pose.joint_rotations[j], rot.quat_exp(delta[row]))
        new.joint_rotations[j] = rot.normalize(q)
    return new


def solve_limb_ik(model: SkeletonModel, pose: SkeletonPose, targets, mask,
                  max_iters: int = 30, tol: float = 1e-4,
                  damping: float = 0.1) -> SkeletonPose:
    """Damped-least-squares IK on the masked joints.

    Args:
        targets: list of (keypoint id, world 3-vector) pairs.
        mask: set of joint indices allowed to move; every target keypoint's
            chain must intersect it.
        tol: per-target position tolerance in meters.

    Returns a pose whose summed squared keypoint error is non-increasing
    versus the input; unreachable targets yield the best effort after
    max_iters. Joints outside the mask are returned bit-exact.
    """
    if not targets:
        return pose.copy()
    joint_list = sorted(mask)
    kp_ids = [int(k) for k, _ in targets]
    goal = np.asarray([t for _, t in targets], dtype=float).reshape(-1, 3)
    for kp in kp_ids:
        owner = int(model.keypoint_joints[kp])
        if not ({owner, *model.ancestors(owner)} & mask):
            raise ValueError(f"keypoint {kp} chain does not intersect the mask")

    current = pose.copy()
    fk = forward_kinematics(model, current)
    residual = goal - fk.keypoints[kp_ids]
    cost = float(np.sum(residual ** 2))
    for _ in range(max_iters):
        if np.all(np.linalg.norm(residual, axis=1) <= tol):
            break
        J = keypoint_jacobian(model, fk, kp_ids, joint_list)
        JtJ = J.T @ J + (damping ** 2) * np.eye(J.shape[1])
        step = np.linalg.solve(JtJ, J.T @ residual.reshape(-1))
        # halve the step until the objective does not increase
        scale = 1.0
        improved = False
        for _ in range(12):
            cand = apply_joint_increments(current, joint_list, scale * step)
            cand_fk = forward_kinematics(model, cand)
            cand_res = goal - cand_fk.keypoints[kp_ids]
            cand_cost = float(np.sum(cand_res ** 2))
            if cand_cost <= cost:
                current, fk, residual, cost = cand, cand_fk, cand_res, cand_cost
                improved = True
                break
            scale *= 0.5
        if not improved:
            break
    return current
