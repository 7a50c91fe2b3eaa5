"""Regenerate src/hoisolver/data/default_skeleton.json.

The joint offsets and keypoint placements are approximate adult anthropometry
(meters, Y-up, facing +Z, left = +X). Keypoint names follow the two-level
joint-tree naming used by the annotation app, including the duplicated
"hip/front" entry kept verbatim; keypoint identity is the numeric id.
"""

import json
from pathlib import Path

JOINTS = [
    # name, parent, rest offset from parent
    ("pelvis", None, [0.0, 0.0, 0.0]),
    ("leftUpperLeg", "pelvis", [0.09, -0.06, 0.0]),
    ("rightUpperLeg", "pelvis", [-0.09, -0.06, 0.0]),
    ("spine01", "pelvis", [0.0, 0.11, 0.0]),
    ("leftLowerLeg", "leftUpperLeg", [0.0, -0.42, 0.0]),
    ("rightLowerLeg", "rightUpperLeg", [0.0, -0.42, 0.0]),
    ("spine02", "spine01", [0.0, 0.12, 0.0]),
    ("leftFoot", "leftLowerLeg", [0.0, -0.41, 0.0]),
    ("rightFoot", "rightLowerLeg", [0.0, -0.41, 0.0]),
    ("chest", "spine02", [0.0, 0.13, 0.0]),
    ("leftToeBase", "leftFoot", [0.0, -0.06, 0.13]),
    ("rightToeBase", "rightFoot", [0.0, -0.06, 0.13]),
    ("neck", "chest", [0.0, 0.14, 0.0]),
    ("leftClavicle", "chest", [0.04, 0.10, 0.0]),
    ("rightClavicle", "chest", [-0.04, 0.10, 0.0]),
    ("head", "neck", [0.0, 0.11, 0.0]),
    ("leftUpperArm", "leftClavicle", [0.13, 0.02, 0.0]),
    ("rightUpperArm", "rightClavicle", [-0.13, 0.02, 0.0]),
    ("leftForeArm", "leftUpperArm", [0.28, 0.0, 0.0]),
    ("rightForeArm", "rightUpperArm", [-0.28, 0.0, 0.0]),
    ("leftHand", "leftForeArm", [0.26, 0.0, 0.0]),
    ("rightHand", "rightForeArm", [-0.26, 0.0, 0.0]),
    ("leftFingers", "leftHand", [0.09, 0.0, 0.0]),
    ("rightFingers", "rightHand", [-0.09, 0.0, 0.0]),
]

# group -> (owning joint, [(sub name, local offset in owning joint frame)])
# Sub-joint order matches the annotation app's joint tree; the second "front"
# under hip sits at the right flank (its row lists no "right" entry).
KEYPOINT_GROUPS = [
    ("leftForeArm", "leftForeArm", [
        ("back", [0.13, 0.04, 0.0]),
        ("pinky", [0.13, -0.04, 0.0]),
        ("wrist", [0.24, 0.0, 0.0]),
        ("thumb", [0.13, 0.0, 0.04]),
    ]),
    ("rightForeArm", "rightForeArm", [
        ("back", [-0.13, 0.04, 0.0]),
        ("pinky", [-0.13, -0.04, 0.0]),
        ("wrist", [-0.24, 0.0, 0.0]),
        ("thumb", [-0.13, 0.0, 0.04]),
    ]),
    ("leftUpperArm", "leftUpperArm", [
        ("up", [0.14, 0.05, 0.0]),
        ("down", [0.14, -0.05, 0.0]),
        ("back", [0.14, 0.0, -0.05]),
        ("front", [0.14, 0.0, 0.05]),
    ]),
    ("rightUpperArm", "rightUpperArm", [
        ("up", [-0.14, 0.05, 0.0]),
        ("down", [-0.14, -0.05, 0.0]),
        ("back", [-0.14, 0.0, -0.05]),
        ("front", [-0.14, 0.0, 0.05]),
    ]),
    ("leftShoulder", "leftClavicle", [
        ("front", [0.10, 0.03, 0.06]),
        ("back", [0.10, 0.03, -0.06]),
    ]),
    ("rightShoulder", "rightClavicle", [
        ("front", [-0.10, 0.03, 0.06]),
        ("back", [-0.10, 0.03, -0.06]),
    ]),
    ("leftHand", "leftHand", [
        ("back", [0.05, 0.02, 0.0]),
        ("palm", [0.05, -0.02, 0.0]),
        ("Thumb", [0.03, -0.01, 0.05]),
        ("Index", [0.13, 0.0, 0.025]),
        ("Middle", [0.14, 0.0, 0.008]),
        ("Ring", [0.13, 0.0, -0.008]),
        ("Pinky", [0.11, 0.0, -0.025]),
    ]),
    ("rightHand", "rightHand", [
        ("back", [-0.05, 0.02, 0.0]),
        ("palm", [-0.05, -0.02, 0.0]),
        ("Thumb", [-0.03, -0.01, 0.05]),
        ("Index", [-0.13, 0.0, 0.025]),
        ("Middle", [-0.14, 0.0, 0.008]),
        ("Ring", [-0.13, 0.0, -0.008]),
        ("Pinky", [-0.11, 0.0, -0.025]),
    ]),
    ("leftUpperLeg", "leftUpperLeg", [
        ("inner", [-0.06, -0.21, 0.0]),
        ("outer", [0.06, -0.21, 0.0]),
        ("front", [0.0, -0.21, 0.06]),
        ("back", [0.0, -0.21, -0.06]),
    ]),
    ("rightUpperLeg", "rightUpperLeg", [
        ("inner", [0.06, -0.21, 0.0]),
        ("outer", [-0.06, -0.21, 0.0]),
        ("front", [0.0, -0.21, 0.06]),
        ("back", [0.0, -0.21, -0.06]),
    ]),
    ("leftLowerLeg", "leftLowerLeg", [
        ("front", [0.0, -0.20, 0.05]),
        ("outer", [0.05, -0.20, 0.0]),
        ("back", [0.0, -0.20, -0.05]),
        ("inner", [-0.05, -0.20, 0.0]),
    ]),
    ("rightLowerLeg", "rightLowerLeg", [
        ("front", [0.0, -0.20, 0.05]),
        ("outer", [-0.05, -0.20, 0.0]),
        ("back", [0.0, -0.20, -0.05]),
        ("inner", [0.05, -0.20, 0.0]),
    ]),
    ("leftFoot", "leftFoot", [
        ("ToeBase", [0.0, -0.05, 0.13]),
        ("instep", [0.0, -0.02, 0.07]),
        ("sole", [0.0, -0.07, 0.05]),
    ]),
    ("rightFoot", "rightFoot", [
        ("ToeBase", [0.0, -0.05, 0.13]),
        ("instep", [0.0, -0.02, 0.07]),
        ("sole", [0.0, -0.07, 0.05]),
    ]),
    ("upperSpine", "chest", [
        ("back", [0.0, 0.07, -0.10]),
        ("right", [-0.12, 0.07, 0.0]),
        ("front", [0.0, 0.07, 0.10]),
        ("left", [0.12, 0.07, 0.0]),
    ]),
    ("middleSpine", "spine02", [
        ("front", [0.0, 0.06, 0.10]),
        ("right", [-0.13, 0.06, 0.0]),
        ("back", [0.0, 0.06, -0.11]),
        ("left", [0.13, 0.06, 0.0]),
    ]),
    ("leftNeck", "neck", [
        ("front", [0.03, 0.05, 0.05]),
        ("back", [0.03, 0.05, -0.05]),
    ]),
    ("rightNeck", "neck", [
        ("back", [-0.03, 0.05, -0.05]),
        ("front", [-0.03, 0.05, 0.05]),
    ]),
    ("hip", "pelvis", [
        ("front", [0.0, -0.02, 0.10]),
        ("left", [0.12, -0.02, 0.0]),
        ("front", [-0.12, -0.02, 0.0]),
        ("back", [0.0, -0.02, -0.11]),
    ]),
    ("buttocks_left", "pelvis", [
        ("buttocks_left", [0.09, -0.08, -0.09]),
    ]),
    ("buttocks_right", "pelvis", [
        ("buttocks_right", [-0.09, -0.08, -0.09]),
    ]),
]

CAPSULES = [
    ("pelvis", "spine01", 0.12),
    ("spine01", "spine02", 0.12),
    ("spine02", "chest", 0.12),
    ("chest", "neck", 0.09),
    ("neck", "head", 0.07),
    ("chest", "leftClavicle", 0.06),
    ("chest", "rightClavicle", 0.06),
    ("leftClavicle", "leftUpperArm", 0.05),
    ("rightClavicle", "rightUpperArm", 0.05),
    ("leftUpperArm", "leftForeArm", 0.045),
    ("rightUpperArm", "rightForeArm", 0.045),
    ("leftForeArm", "leftHand", 0.04),
    ("rightForeArm", "rightHand", 0.04),
    ("leftHand", "leftFingers", 0.035),
    ("rightHand", "rightFingers", 0.035),
    ("pelvis", "leftUpperLeg", 0.08),
    ("pelvis", "rightUpperLeg", 0.08),
    ("leftUpperLeg", "leftLowerLeg", 0.07),
    ("rightUpperLeg", "rightLowerLeg", 0.07),
    ("leftLowerLeg", "leftFoot", 0.055),
    ("rightLowerLeg", "rightFoot", 0.055),
    ("leftFoot", "leftToeBase", 0.04),
    ("rightFoot", "rightToeBase", 0.04),
]


def build():
    joint_index = {name: i for i, (name, _, _) in enumerate(JOINTS)}
    joints = [
        {"name": name,
         "parent": None if parent is None else joint_index[parent],
         "offset": offset}
        for name, parent, offset in JOINTS
    ]
    keypoints = []
    for group, joint, subs in KEYPOINT_GROUPS:
        for sub, offset in subs:
            keypoints.append({
                "id": len(keypoints),
                "name": f"{group}/{sub}",
                "group": group,
                "joint": joint_index[joint],
                "offset": offset,
            })
    assert len(keypoints) == 74, len(keypoints)
    capsules = [
        {"joint_a": joint_index[a], "joint_b": joint_index[b], "radius": r}
        for a, b, r in CAPSULES
    ]
    return {"version": 1, "joints": joints, "keypoints": keypoints, "capsules": capsules}


if __name__ == "__main__":
    out = Path(__file__).resolve().parents[1] / "src" / "hoisolver" / "data" / "default_skeleton.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(build(), indent=1) + "\n")
    print(f"wrote {out}")
