import json

import numpy as np

from hoisolver.cli import main
from hoisolver.synthetic import build_synthetic_session


def test_validate_ok(tmp_path, capsys):
    scene = build_synthetic_session(tmp_path / "s", num_frames=8, seed=1)
    assert main(["validate", str(scene.session_path)]) == 0
    out = capsys.readouterr().out
    assert "OK" in out and "8 frames" in out


def test_validate_failure_exit_code(tmp_path, capsys):
    scene = build_synthetic_session(tmp_path / "s", num_frames=8, seed=1)
    doc = json.loads(scene.session_path.read_text())
    doc["object"]["mesh_path"] = "missing.obj"
    bad = scene.session_path.parent / "bad.json"
    bad.write_text(json.dumps(doc))
    assert main(["validate", str(bad)]) == 1
    assert "MissingAsset" in capsys.readouterr().err


def test_solve_then_metrics_and_smooth(tmp_path, capsys):
    scene = build_synthetic_session(tmp_path / "s", num_frames=12, seed=6)
    out_dir = tmp_path / "results"
    assert main(["solve", str(scene.session_path), "--out", str(out_dir)]) == 0
    motion = out_dir / "motion.json"
    assert motion.exists() and (out_dir / "report.json").exists()

    gt = scene.session_path.parent / "gt_object.json"
    report_path = tmp_path / "metrics.json"
    assert main(["metrics", str(motion), str(gt),
                 "--session", str(scene.session_path),
                 "--json-out", str(report_path)]) == 0
    out = capsys.readouterr().out
    assert "MPJPE" in out and "contact score" in out and "jitter" in out
    report = json.loads(report_path.read_text())
    assert report["frames"] == 12
    assert report["mpjpe_m"] >= 0.0
    assert len(report["per_frame_mpjpe_m"]) == 12

    smoothed = tmp_path / "smoothed.json"
    assert main(["smooth", str(motion), "--cutoff", "4.0",
                 "--out", str(smoothed)]) == 0
    doc = json.loads(smoothed.read_text())
    assert len(doc["frames"]) == 12


def test_solve_with_config_file(tmp_path):
    scene = build_synthetic_session(tmp_path / "s", num_frames=9, seed=8)
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({
        "keyframe_stride": 4,
        "weights": {"w_c": 2.0, "w_coll": 0.25, "w_m": 0.0,
                    "alpha": 1.0, "beta": 0.01, "lambda_h2o": 2.0, "eps": 1e-3},
    }))
    out_dir = tmp_path / "r"
    assert main(["solve", str(scene.session_path), "--config", str(cfg_path),
                 "--out", str(out_dir)]) == 0
    report = json.loads((out_dir / "report.json").read_text())
    assert report["keyframes"][:3] == [0, 4, 8]
