"""Generate a synthetic annotated session for demos and manual testing.

Writes session.json, box.obj, human_poses.json (perturbed object poses), and
gt_object.json into the output directory.
"""

import argparse
from pathlib import Path

from hoisolver.synthetic import build_synthetic_session


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out_dir", type=Path)
    ap.add_argument("--frames", type=int, default=90)
    ap.add_argument("--fps", type=float, default=30.0)
    ap.add_argument("--sigma-rot-deg", type=float, default=5.0)
    ap.add_argument("--sigma-t", type=float, default=0.05)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--static", action="store_true")
    ap.add_argument("--id", default="synthetic")
    args = ap.parse_args()
    scene = build_synthetic_session(
        args.out_dir, num_frames=args.frames, fps=args.fps,
        sigma_rot_deg=args.sigma_rot_deg, sigma_t=args.sigma_t,
        seed=args.seed, static=args.static, session_id=args.id)
    print(f"wrote {scene.session_path} ({scene.num_frames} frames, "
          f"{len(scene.contact_keypoints)} contact pairs)")


if __name__ == "__main__":
    main()
