"""Command-line entry points: solve, metrics, smooth, validate, serve."""

import argparse
import json
import sys
from pathlib import Path

from .config import PipelineConfig
from .errors import HoiSolverError


def main(argv=None):
    parser = argparse.ArgumentParser(prog="hoisolver",
                                     description="Contact-annotated HOI pose solver")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run the full pipeline on a session")
    p_solve.add_argument("session", type=Path)
    p_solve.add_argument("--config", type=Path, default=None)
    p_solve.add_argument("--out", type=Path, default=None,
                         help="results directory (default: <session dir>/results)")

    p_metrics = sub.add_parser("metrics", help="compare two motion files")
    p_metrics.add_argument("sim", type=Path)
    p_metrics.add_argument("ref", type=Path)
    p_metrics.add_argument("--skeleton", type=Path, default=None)
    p_metrics.add_argument("--session", type=Path, default=None,
                           help="session supplying the contact table")
    p_metrics.add_argument("--json-out", type=Path, default=None)

    p_smooth = sub.add_parser("smooth", help="low-pass filter a motion file")
    p_smooth.add_argument("motion", type=Path)
    p_smooth.add_argument("--cutoff", type=float, required=True)
    p_smooth.add_argument("--out", type=Path, default=None)

    p_validate = sub.add_parser("validate", help="validate a session file")
    p_validate.add_argument("session", type=Path)

    p_serve = sub.add_parser("serve", help="run the annotation service")
    p_serve.add_argument("--port", type=int, default=8080)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--data", type=Path, required=True)
    p_serve.add_argument("--config", type=Path, default=None)

    args = parser.parse_args(argv)
    try:
        return {"solve": _cmd_solve, "metrics": _cmd_metrics,
                "smooth": _cmd_smooth, "validate": _cmd_validate,
                "serve": _cmd_serve}[args.command](args)
    except HoiSolverError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def _load_config(path):
    return PipelineConfig.load(path) if path else PipelineConfig()


def _cmd_solve(args):
    from .pipeline import run_pipeline, write_results
    from .session import load_session
    session = load_session(args.session)
    cfg = _load_config(args.config)
    result = run_pipeline(session, cfg)
    out_dir = args.out or (Path(args.session).parent / "results")
    motion_path, report_path = write_results(out_dir, session, result)
    solved = len(result.keyframes) - len(result.failed_frames)
    print(f"solved {solved}/{len(result.keyframes)} keyframes over "
          f"{len(result.states)} frames")
    if result.failed_frames:
        for frame, msg in sorted(result.failed_frames.items()):
            print(f"  frame {frame} failed: {msg}")
    print(f"motion:  {motion_path}")
    print(f"report:  {report_path}")
    return 0


def _cmd_metrics(args):
    from .metrics import MotionSequence, contact_score, jitter, mpjpe
    from .pipeline import contact_pairs
    from .session import frames_to_states, load_motion, load_session
    from .skeleton import load_skeleton

    model = load_skeleton(args.skeleton)
    sim_frames, sim_fps = load_motion(args.sim)
    ref_frames, ref_fps = load_motion(args.ref)
    pairs = []
    note = "no contact table supplied; contact score covers zero pairs"
    if args.session:
        session = load_session(args.session)
        pairs = contact_pairs(session)
        note = f"contact table from {args.session}"
    sim = MotionSequence(frames_to_states(sim_frames), sim_fps, pairs)
    ref = MotionSequence(frames_to_states(ref_frames), ref_fps, pairs)

    report = {
        "frames": len(sim),
        "mpjpe_m": mpjpe(sim, ref, model),
        "contact_m2": contact_score(sim, model),
        "jitter_sim": jitter(sim, model),
        "jitter_ref": jitter(ref, model),
        "note": note,
    }
    # reporting boundary: millimeters for human-readable output
    print(f"frames:        {report['frames']}")
    print(f"MPJPE:         {report['mpjpe_m'] * 1000.0:.3f} mm")
    print(f"contact score: {report['contact_m2'] * 1e6:.3f} mm^2")
    print(f"jitter (sim):  {report['jitter_sim'] * 1000.0:.4f} mm/frame^3")
    print(f"jitter (ref):  {report['jitter_ref'] * 1000.0:.4f} mm/frame^3")
    print(f"[{note}]")
    if args.json_out:
        per_frame = []
        for t in range(len(sim)):
            ps = sim.frames[t].fk(model).joint_positions
            pr = ref.frames[t].fk(model).joint_positions
            import numpy as np
            per_frame.append(float(np.mean(np.linalg.norm(ps - pr, axis=-1))))
        report["per_frame_mpjpe_m"] = per_frame
        args.json_out.write_text(json.dumps(report, indent=1) + "\n")
        print(f"wrote {args.json_out}")
    return 0


def _cmd_smooth(args):
    from .optimizer import smooth_sequence
    from .session import (frames_to_states, load_motion, motion_to_doc,
                          states_to_frames, write_canonical)
    frames, fps = load_motion(args.motion)
    states = frames_to_states(frames)
    smoothed = smooth_sequence(states, args.cutoff, fps)
    out = args.out or args.motion.with_name(args.motion.stem + "_smoothed.json")
    write_canonical(out, motion_to_doc(states_to_frames(smoothed), fps))
    print(f"wrote {out}")
    return 0


def _cmd_validate(args):
    from .session import load_session
    session = load_session(args.session)
    print(f"OK: session {session.id!r}, {session.num_frames} frames, "
          f"{len(session.annotations.pairs)} pairs, "
          f"{len(session.annotations.tracks)} tracks")
    return 0


def _cmd_serve(args):
    from .service import serve
    serve(args.data, host=args.host, port=args.port,
          config=_load_config(args.config))
    return 0


if __name__ == "__main__":
    sys.exit(main())
