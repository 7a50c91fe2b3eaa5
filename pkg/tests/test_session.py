import json

import numpy as np
import pytest

from hoisolver.errors import (InvariantViolation, MissingAsset,
                              SchemaVersionMismatch)
from hoisolver.session import (AnnotationEvent, apply_event, canonical_dumps,
                               interpolate_track, load_motion, load_session,
                               replay_events, save_session,
                               synthesize_creation_events)
from hoisolver.synthetic import build_synthetic_session


@pytest.fixture
def scene(tmp_path):
    return build_synthetic_session(tmp_path / "scene", num_frames=12, seed=3)


def test_load_valid_session(scene):
    session = load_session(scene.session_path)
    assert session.num_frames == 12
    assert len(session.annotations.pairs) == 5
    assert len(session.annotations.tracks) == 4
    assert session.camera.width == 640


def test_save_load_roundtrip_is_byte_identical(scene):
    # saves land next to the assets so relative paths keep resolving
    session = load_session(scene.session_path)
    out1 = scene.session_path.parent / "a.json"
    save_session(out1, session)
    reloaded = load_session(out1)
    out2 = scene.session_path.parent / "b.json"
    save_session(out2, reloaded)
    assert out1.read_bytes() == out2.read_bytes()


def test_canonical_float_formatting():
    doc = {"x": 0.1 + 0.2, "y": [1.0, 2.5e-9], "n": 3, "b": True, "s": "ok"}
    text = canonical_dumps(doc)
    assert text == '{"x":0.3,"y":[1,2.5e-09],"n":3,"b":true,"s":"ok"}\n'


def test_missing_mesh_asset(scene):
    doc = json.loads(scene.session_path.read_text())
    doc["object"]["mesh_path"] = "nope.obj"
    bad = scene.session_path.parent / "bad.json"
    bad.write_text(json.dumps(doc))
    with pytest.raises(MissingAsset) as err:
        load_session(bad)
    assert "nope.obj" in str(err.value)


def test_annotation_frame_out_of_range(scene):
    doc = json.loads(scene.session_path.read_text())
    doc["annotations"]["pairs"][0]["end"] = 99
    bad = scene.session_path.parent / "bad2.json"
    bad.write_text(json.dumps(doc))
    with pytest.raises(InvariantViolation) as err:
        load_session(bad)
    assert "pairs[0]" in str(err.value)


def test_schema_version_mismatch(scene):
    doc = json.loads(scene.session_path.read_text())
    doc["version"] = 99
    bad = scene.session_path.parent / "bad3.json"
    bad.write_text(json.dumps(doc))
    with pytest.raises(SchemaVersionMismatch):
        load_session(bad)


def test_keypoint_out_of_range(scene):
    doc = json.loads(scene.session_path.read_text())
    doc["annotations"]["pairs"][0]["keypoint"] = 74
    bad = scene.session_path.parent / "bad4.json"
    bad.write_text(json.dumps(doc))
    with pytest.raises(InvariantViolation):
        load_session(bad)


# -- events -----------------------------------------------------------------------

def make_event(kind, frame=0, **payload):
    return AnnotationEvent(kind=kind, frame=frame, payload=payload, timestamp=1.0)


def test_event_replay_reproduces_pairs(scene):
    session = load_session(scene.session_path)
    n0 = len(session.annotations.pairs)
    synthesize_creation_events(session)  # ingested pairs become events
    assert len(session.annotations.events) == n0
    apply_event(session, make_event("add-pair", keypoint=3,
                                    object_point=[0.0, 0.1, 0.0], start=0, end=12))
    apply_event(session, make_event("add-pair", keypoint=4,
                                    object_point=[0.1, 0.0, 0.0], start=2, end=7))
    apply_event(session, make_event("remove-pair", index=0))
    replayed = replay_events(session)
    got = [p.to_dict() for p in replayed.annotations.pairs]
    assert got == [p.to_dict() for p in session.annotations.pairs]
    assert len(session.annotations.events) == n0 + 3


def test_track_point_events_interpolate(scene):
    session = load_session(scene.session_path)
    apply_event(session, make_event("add-track-point", frame=0,
                                    object_point=[0.0, 0.0, 0.06], u=100.0, v=100.0))
    apply_event(session, make_event("add-track-point", frame=4,
                                    object_point=[0.0, 0.0, 0.06], u=104.0, v=108.0))
    track = next(t for t in session.annotations.tracks if t.source == "manual")
    assert track.valid_at(2) == (102.0, 104.0)
    assert track.valid_at(5) is None
    assert track.valid_at(0) == (100.0, 100.0)


def test_set_static_and_scale_events(scene):
    session = load_session(scene.session_path)
    apply_event(session, make_event("set-static", static=True))
    apply_event(session, make_event("set-scale", scale=1.4))
    assert session.static is True
    assert session.scale == 1.4
    with pytest.raises(InvariantViolation):
        apply_event(session, make_event("set-scale", scale=-1.0))


def test_unknown_event_kind_rejected():
    with pytest.raises(InvariantViolation):
        AnnotationEvent(kind="explode", frame=0, payload={}, timestamp=0.0)


def test_event_log_validation_fails_on_tampering(scene):
    session = load_session(scene.session_path)
    synthesize_creation_events(session)
    apply_event(session, make_event("add-pair", keypoint=3,
                                    object_point=[0.0, 0.1, 0.0], start=0, end=12))
    # tamper: drop the pair but keep the event
    session.annotations.pairs = session.annotations.pairs[:-1]
    out = scene.session_path.parent / "tampered.json"
    save_session(out, session)
    with pytest.raises(InvariantViolation):
        load_session(out)


def test_interpolate_track_bounds():
    rows = interpolate_track([[2, 10.0, 20.0], [6, 18.0, 28.0]], 10)
    assert rows[1, 3] == 0  # before first anchor: invalid
    assert rows[7, 3] == 0  # after last anchor: invalid
    assert rows[4, 3] == 1
    assert np.isclose(rows[4, 1], 14.0)


# -- motion files ------------------------------------------------------------------

def test_motion_roundtrip(scene):
    frames, fps = load_motion(scene.session_path.parent / "human_poses.json")
    assert len(frames) == 12
    assert fps == 30.0
    assert frames[0].joint_quats.shape == (24, 4)


def test_motion_rejects_bad_quats(tmp_path):
    doc = {"version": 1, "fps": 30.0,
           "frames": [{"frame": 0, "root_t": [0, 0, 0],
                       "joint_quats": [[2.0, 0, 0, 0]],
                       "object_q": [1, 0, 0, 0], "object_t": [0, 0, 0]}]}
    p = tmp_path / "m.json"
    p.write_text(json.dumps(doc))
    with pytest.raises(InvariantViolation):
        load_motion(p)
