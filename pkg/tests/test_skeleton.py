import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hoisolver import rotation as rot
from hoisolver.skeleton import (NUM_KEYPOINTS, SkeletonPose, chain_mask,
                                forward_kinematics, load_skeleton)

# the two-level annotation tree: 21 parent parts and their sub-joints, in
# canonical order; note the duplicated "front" under hip is kept verbatim
JOINT_TREE = {
    "leftForeArm": ["back", "pinky", "wrist", "thumb"],
    "rightForeArm": ["back", "pinky", "wrist", "thumb"],
    "leftUpperArm": ["up", "down", "back", "front"],
    "rightUpperArm": ["up", "down", "back", "front"],
    "leftShoulder": ["front", "back"],
    "rightShoulder": ["front", "back"],
    "leftHand": ["back", "palm", "Thumb", "Index", "Middle", "Ring", "Pinky"],
    "rightHand": ["back", "palm", "Thumb", "Index", "Middle", "Ring", "Pinky"],
    "leftUpperLeg": ["inner", "outer", "front", "back"],
    "rightUpperLeg": ["inner", "outer", "front", "back"],
    "leftLowerLeg": ["front", "outer", "back", "inner"],
    "rightLowerLeg": ["front", "outer", "back", "inner"],
    "leftFoot": ["ToeBase", "instep", "sole"],
    "rightFoot": ["ToeBase", "instep", "sole"],
    "upperSpine": ["back", "right", "front", "left"],
    "middleSpine": ["front", "right", "back", "left"],
    "leftNeck": ["front", "back"],
    "rightNeck": ["back", "front"],
    "hip": ["front", "left", "front", "back"],
    "buttocks_left": ["buttocks_left"],
    "buttocks_right": ["buttocks_right"],
}


def test_default_skeleton_has_74_keypoints(skeleton):
    assert len(skeleton.keypoint_names) == NUM_KEYPOINTS == 74


def test_keypoint_names_match_joint_tree(skeleton):
    expected = [f"{group}/{sub}" for group, subs in JOINT_TREE.items() for sub in subs]
    assert skeleton.keypoint_names == expected


def test_tree_has_21_groups(skeleton):
    assert len(dict.fromkeys(skeleton.keypoint_groups)) == 21


def test_single_rooted_tree(skeleton):
    assert (skeleton.parents < 0).sum() == 1
    for j, p in enumerate(skeleton.parents):
        assert p < j


def test_rest_pose_positions_are_cumulative_offsets(skeleton):
    fk = forward_kinematics(skeleton, skeleton.rest_pose())
    for j in range(skeleton.num_joints):
        expected = np.zeros(3)
        k = j
        while k >= 0:
            expected += skeleton.offsets[k]
            k = int(skeleton.parents[k])
        assert np.allclose(fk.joint_positions[j], expected, atol=1e-12)


def test_fk_root_translation_equivariance(skeleton, rng):
    pose = random_pose(skeleton, rng)
    shifted = SkeletonPose(pose.joint_rotations.copy(),
                           pose.root_translation + np.array([1.0, 0.0, 0.0]))
    a = forward_kinematics(skeleton, pose)
    b = forward_kinematics(skeleton, shifted)
    assert np.allclose(b.keypoints, a.keypoints + np.array([1.0, 0.0, 0.0]), atol=1e-12)
    assert np.allclose(b.joint_positions,
                       a.joint_positions + np.array([1.0, 0.0, 0.0]), atol=1e-12)


def test_fk_global_rotation_equivariance(skeleton, rng):
    pose = random_pose(skeleton, rng)
    pose.root_translation[:] = 0.0
    q = rot.quat_from_axis_angle(rng.normal(size=3), 0.7)
    rotated = pose.copy()
    rotated.joint_rotations[0] = rot.normalize(
        rot.quat_mul(q, pose.joint_rotations[0]))
    a = forward_kinematics(skeleton, pose)
    b = forward_kinematics(skeleton, rotated)
    assert np.allclose(b.keypoints, rot.quat_rotate(q, a.keypoints), atol=1e-9)


def test_fk_single_joint_rotation(skeleton):
    # rotating the left forearm moves its keypoints but not the right arm's
    pose = skeleton.rest_pose()
    j = skeleton.joint_index("leftForeArm")
    pose.joint_rotations[j] = rot.quat_from_axis_angle([0, 0, 1], 0.9)
    base = forward_kinematics(skeleton, skeleton.rest_pose())
    moved = forward_kinematics(skeleton, pose)
    left = skeleton.keypoint_id("leftHand/palm")
    right = skeleton.keypoint_id("rightHand/palm")
    assert not np.allclose(moved.keypoints[left], base.keypoints[left])
    assert np.allclose(moved.keypoints[right], base.keypoints[right], atol=1e-12)


def random_pose(skeleton, rng):
    q = np.array([rot.random_quat(rng) for _ in range(skeleton.num_joints)])
    return SkeletonPose(q, rng.normal(size=3))


# -- chain mask -------------------------------------------------------------------

def test_chain_mask_walks_up_the_arm(skeleton):
    palm = skeleton.keypoint_id("leftHand/palm")
    got = chain_mask(skeleton, {palm}, depth=3)
    expected = {skeleton.joint_index("leftHand"),
                skeleton.joint_index("leftForeArm"),
                skeleton.joint_index("leftUpperArm")}
    assert got == expected


def test_chain_mask_empty():
    skeleton = load_skeleton()
    assert chain_mask(skeleton, set(), depth=3) == set()


def test_chain_mask_same_joint_idempotent(skeleton):
    a = skeleton.keypoint_id("leftHand/palm")
    b = skeleton.keypoint_id("leftHand/back")
    assert chain_mask(skeleton, {a, b}, 3) == chain_mask(skeleton, {a}, 3)


def test_chain_mask_depth_one_is_owner_only(skeleton):
    kp = skeleton.keypoint_id("leftFoot/sole")
    assert chain_mask(skeleton, {kp}, 1) == {skeleton.joint_index("leftFoot")}


def test_chain_mask_stops_at_root(skeleton):
    kp = skeleton.keypoint_id("hip/back")
    got = chain_mask(skeleton, {kp}, depth=5)
    assert got == {skeleton.joint_index("pelvis")}


@settings(max_examples=30, deadline=None)
@given(st.sets(st.integers(min_value=0, max_value=73), max_size=6),
       st.sets(st.integers(min_value=0, max_value=73), max_size=6),
       st.integers(min_value=1, max_value=6))
def test_chain_mask_union_distributes(a, b, depth):
    skeleton = load_skeleton()
    lhs = chain_mask(skeleton, a | b, depth)
    rhs = chain_mask(skeleton, a, depth) | chain_mask(skeleton, b, depth)
    assert lhs == rhs


def test_serialization_roundtrip(skeleton):
    from hoisolver.skeleton import SkeletonModel
    doc = skeleton.to_dict()
    back = SkeletonModel.from_dict(doc)
    assert back.joint_names == skeleton.joint_names
    assert np.array_equal(back.keypoint_joints, skeleton.keypoint_joints)
    assert back.to_dict() == doc
