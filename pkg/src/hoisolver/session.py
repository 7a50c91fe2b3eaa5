"""Scene sessions: the persisted unit of work.

A session bundles the camera, asset references, upstream per-frame human
poses, ground-truth masks, and the annotation set (contact pairs, 2D tracks,
static flag, scale). Files are JSON with canonical field order and floats at
9 significant digits, so saving a loaded file is byte-identical.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import rotation as rot
from .errors import (InvariantViolation, MissingAsset, SchemaVersionMismatch)
from .geometry import CameraModel, RigidPose
from .mesh import load_mesh
from .skeleton import NUM_KEYPOINTS, SkeletonPose, load_skeleton

SCHEMA_VERSION = 1
MOTION_SCHEMA_VERSION = 1


# -- canonical JSON ------------------------------------------------------------

def canonical_dumps(obj) -> str:
    """Deterministic JSON: insertion-ordered keys, floats at 9 significant digits."""
    parts = []
    _dump(obj, parts)
    return "".join(parts) + "\n"


def _dump(obj, parts):
    if isinstance(obj, dict):
        parts.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                parts.append(",")
            parts.append(json.dumps(str(k)))
            parts.append(":")
            _dump(v, parts)
        parts.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        parts.append("[")
        for i, v in enumerate(obj):
            if i:
                parts.append(",")
            _dump(v, parts)
        parts.append("]")
    elif isinstance(obj, bool) or obj is None:
        parts.append(json.dumps(obj))
    elif isinstance(obj, (int, np.integer)):
        parts.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        if not np.isfinite(obj):
            raise ValueError("non-finite float in session document")
        parts.append(format(float(obj), ".9g"))
    elif isinstance(obj, str):
        parts.append(json.dumps(obj))
    else:
        raise TypeError(f"cannot serialize {type(obj)}")


def write_canonical(path, doc):
    Path(path).write_text(canonical_dumps(doc))


# -- annotation set --------------------------------------------------------------

@dataclass
class PairAnnotation:
    keypoint: int
    object_point: np.ndarray
    start: int
    end: int

    def __post_init__(self):
        self.object_point = np.asarray(self.object_point, dtype=float).reshape(3)

    def to_dict(self):
        return {"keypoint": self.keypoint,
                "object_point": [float(x) for x in self.object_point],
                "start": self.start, "end": self.end}


@dataclass
class Track2D:
    """2D track of one object-local point.

    `source` is "external" for ingested tracker output and "manual" for the
    built-in fallback that linearly interpolates between user-clicked anchor
    frames (a degraded substitute for a learned tracker).
    """

    object_point: np.ndarray
    points: np.ndarray                 # (T, 4): frame, u, v, valid
    source: str = "external"
    anchors: list = field(default_factory=list)  # [[frame, u, v]] for manual tracks

    def __post_init__(self):
        self.object_point = np.asarray(self.object_point, dtype=float).reshape(3)
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 4)

    def valid_at(self, frame):
        row = self.points[self.points[:, 0] == frame]
        if len(row) and row[0, 3] > 0:
            return row[0, 1], row[0, 2]
        return None

    def to_dict(self):
        d = {"object_point": [float(x) for x in self.object_point],
             "points": [[int(f), float(u), float(v), int(valid)]
                        for f, u, v, valid in self.points],
             "source": self.source}
        if self.source == "manual":
            d["anchors"] = [[int(f), float(u), float(v)] for f, u, v in self.anchors]
        return d


def interpolate_track(anchors, num_frames):
    """Per-frame (frame, u, v, valid) rows from sparse anchor clicks; frames
    between the first and last anchor are valid, the rest are not."""
    rows = np.zeros((num_frames, 4))
    rows[:, 0] = np.arange(num_frames)
    if not anchors:
        return rows
    anchors = sorted(anchors)
    frames = [a[0] for a in anchors]
    us = [a[1] for a in anchors]
    vs = [a[2] for a in anchors]
    lo, hi = frames[0], frames[-1]
    for t in range(lo, min(hi, num_frames - 1) + 1):
        rows[t, 1] = np.interp(t, frames, us)
        rows[t, 2] = np.interp(t, frames, vs)
        rows[t, 3] = 1
    return rows


@dataclass
class AnnotationEvent:
    kind: str
    frame: int
    payload: dict
    timestamp: float

    KINDS = ("add-pair", "remove-pair", "add-track-point", "retrack",
             "set-static", "set-scale")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise InvariantViolation("annotations.events.kind",
                                     f"unknown event kind {self.kind!r}")

    def to_dict(self):
        return {"kind": self.kind, "frame": self.frame,
                "payload": self.payload, "timestamp": float(self.timestamp)}


@dataclass
class AnnotationSet:
    pairs: list = field(default_factory=list)    # list[PairAnnotation]
    tracks: list = field(default_factory=list)   # list[Track2D]
    events: list = field(default_factory=list)   # append-only log

    def to_dict(self):
        return {"pairs": [p.to_dict() for p in self.pairs],
                "tracks": [t.to_dict() for t in self.tracks],
                "events": [e.to_dict() for e in self.events]}


def synthesize_creation_events(session):
    """Back any ingested pairs with add-pair events so the log replays exactly.

    Called when a session document enters the service; no-op when events
    already exist (the log is then assumed authoritative for pairs).
    """
    if session.annotations.pairs and not session.annotations.events:
        pairs = list(session.annotations.pairs)
        session.annotations.pairs = []
        for p in pairs:
            apply_event(session, AnnotationEvent(
                kind="add-pair", frame=p.start, payload=p.to_dict(), timestamp=0.0))
    return session


def apply_event(session, event: AnnotationEvent):
    """Apply one annotation event; replaying the log from an empty set
    reconstructs the annotation state deterministically."""
    ann = session.annotations
    p = event.payload
    if event.kind == "add-pair":
        ann.pairs.append(PairAnnotation(
            keypoint=int(p["keypoint"]),
            object_point=p["object_point"],
            start=int(p.get("start", 0)),
            end=int(p.get("end", session.num_frames))))
    elif event.kind == "remove-pair":
        idx = int(p["index"])
        if not (0 <= idx < len(ann.pairs)):
            raise InvariantViolation("annotations.pairs", f"no pair at index {idx}")
        del ann.pairs[idx]
    elif event.kind == "add-track-point":
        key = np.asarray(p["object_point"], dtype=float).reshape(3)
        track = next((t for t in ann.tracks
                      if t.source == "manual"
                      and np.array_equal(t.object_point, key)), None)
        if track is None:
            track = Track2D(object_point=key,
                            points=interpolate_track([], session.num_frames),
                            source="manual", anchors=[])
            ann.tracks.append(track)
        frame = int(event.frame)
        track.anchors = [a for a in track.anchors if a[0] != frame]
        track.anchors.append([frame, float(p["u"]), float(p["v"])])
        track.anchors.sort()
        track.points = interpolate_track(track.anchors, session.num_frames)
    elif event.kind == "retrack":
        for t in ann.tracks:
            if t.source == "manual":
                t.points = interpolate_track(t.anchors, session.num_frames)
    elif event.kind == "set-static":
        session.static = bool(p["static"])
    elif event.kind == "set-scale":
        scale = float(p["scale"])
        if scale <= 0:
            raise InvariantViolation("object.scale", "scale must be positive")
        session.scale = scale
    ann.events.append(event)


# -- motion files -----------------------------------------------------------------

@dataclass
class MotionFrame:
    frame: int
    root_t: np.ndarray
    joint_quats: np.ndarray
    object_q: np.ndarray
    object_t: np.ndarray

    def to_dict(self):
        return {"frame": self.frame,
                "root_t": [float(x) for x in self.root_t],
                "joint_quats": [[float(x) for x in q] for q in self.joint_quats],
                "object_q": [float(x) for x in self.object_q],
                "object_t": [float(x) for x in self.object_t]}


def motion_to_doc(frames, fps):
    return {"version": MOTION_SCHEMA_VERSION, "fps": float(fps),
            "frames": [f.to_dict() for f in frames]}


def load_motion(path):
    """Parse a motion file into (frames, fps)."""
    doc = json.loads(Path(path).read_text())
    if doc.get("version", 1) != MOTION_SCHEMA_VERSION:
        raise SchemaVersionMismatch(f"motion schema {doc.get('version')} unsupported")
    frames = []
    for i, rec in enumerate(doc["frames"]):
        quats = np.asarray(rec["joint_quats"], dtype=float)
        norms = np.linalg.norm(quats, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-6):
            raise InvariantViolation(f"frames[{i}].joint_quats",
                                     "quaternions must be unit norm")
        quats = quats / norms[:, None]
        frames.append(MotionFrame(
            frame=int(rec["frame"]),
            root_t=np.asarray(rec["root_t"], dtype=float),
            joint_quats=quats,
            object_q=rot.normalize(np.asarray(
                rec.get("object_q", [1.0, 0.0, 0.0, 0.0]), dtype=float)),
            object_t=np.asarray(rec.get("object_t", [0.0, 0.0, 0.0]), dtype=float)))
    return frames, float(doc.get("fps", 30.0))


def save_motion(path, frames, fps):
    write_canonical(path, motion_to_doc(frames, fps))


def frames_to_states(frames, scale=1.0):
    """MotionFrame records -> per-frame FrameState objects."""
    from .optimizer import FrameState
    states = []
    for f in frames:
        pose = SkeletonPose(f.joint_quats, f.root_t)
        obj = RigidPose(f.object_q, f.object_t, scale)
        states.append(FrameState(pose, obj))
    return states


def states_to_frames(states):
    return [MotionFrame(frame=i,
                        root_t=s.skeleton_pose.root_translation,
                        joint_quats=s.skeleton_pose.joint_rotations,
                        object_q=s.object_pose.rotation,
                        object_t=s.object_pose.translation)
            for i, s in enumerate(states)]


# -- scene session ----------------------------------------------------------------

@dataclass
class SceneSession:
    id: str
    camera: CameraModel
    fps: float
    mesh_path: str
    scale: float
    static: bool
    skeleton_path: str | None
    human_poses_path: str
    masks_dir: str | None
    frames_dir: str | None
    annotations: AnnotationSet
    revision: int = 0
    base_dir: Path = field(default_factory=Path)

    # resolved lazily
    _mesh: object = None
    _skeleton: object = None
    _human_frames: list = None

    def resolve(self, rel):
        return (self.base_dir / rel).resolve()

    @property
    def mesh(self):
        if self._mesh is None:
            self._mesh = load_mesh(self.resolve(self.mesh_path))
        return self._mesh

    @property
    def skeleton(self):
        if self._skeleton is None:
            self._skeleton = load_skeleton(
                self.resolve(self.skeleton_path) if self.skeleton_path else None)
        return self._skeleton

    @property
    def human_frames(self):
        if self._human_frames is None:
            self._human_frames, _ = load_motion(self.resolve(self.human_poses_path))
        return self._human_frames

    @property
    def num_frames(self):
        return len(self.human_frames)

    def mask_path(self, frame):
        if self.masks_dir is None:
            return None
        p = self.resolve(self.masks_dir)
        human = p / f"human_{frame:05d}.png"
        obj = p / f"object_{frame:05d}.png"
        return (human if human.exists() else None, obj if obj.exists() else None)

    def to_dict(self):
        doc = {
            "version": SCHEMA_VERSION,
            "id": self.id,
            "revision": self.revision,
            "camera": {"fx": float(self.camera.fx), "fy": float(self.camera.fy),
                       "cx": float(self.camera.cx), "cy": float(self.camera.cy),
                       "width": self.camera.width, "height": self.camera.height},
            "fps": float(self.fps),
            "object": {"mesh_path": self.mesh_path, "scale": float(self.scale),
                       "static": self.static},
            "skeleton_path": self.skeleton_path,
            "human_poses_path": self.human_poses_path,
            "masks_dir": self.masks_dir,
            "frames_dir": self.frames_dir,
            "annotations": self.annotations.to_dict(),
        }
        return doc


def session_from_dict(doc, base_dir=Path(".")) -> SceneSession:
    if doc.get("version") != SCHEMA_VERSION:
        raise SchemaVersionMismatch(
            f"session schema {doc.get('version')} unsupported (expected {SCHEMA_VERSION})")
    cam = doc["camera"]
    camera = CameraModel(fx=cam["fx"], fy=cam["fy"], cx=cam["cx"], cy=cam["cy"],
                         width=int(cam["width"]), height=int(cam["height"]))
    ann_doc = doc.get("annotations", {})
    pairs = [PairAnnotation(keypoint=int(p["keypoint"]),
                            object_point=p["object_point"],
                            start=int(p["start"]), end=int(p["end"]))
             for p in ann_doc.get("pairs", [])]
    tracks = [Track2D(object_point=t["object_point"], points=t["points"],
                      source=t.get("source", "external"),
                      anchors=[list(a) for a in t.get("anchors", [])])
              for t in ann_doc.get("tracks", [])]
    events = [AnnotationEvent(kind=e["kind"], frame=int(e["frame"]),
                              payload=e["payload"], timestamp=float(e["timestamp"]))
              for e in ann_doc.get("events", [])]
    obj = doc["object"]
    return SceneSession(
        id=str(doc["id"]),
        camera=camera,
        fps=float(doc["fps"]),
        mesh_path=obj["mesh_path"],
        scale=float(obj["scale"]),
        static=bool(obj["static"]),
        skeleton_path=doc.get("skeleton_path"),
        human_poses_path=doc["human_poses_path"],
        masks_dir=doc.get("masks_dir"),
        frames_dir=doc.get("frames_dir"),
        annotations=AnnotationSet(pairs=pairs, tracks=tracks, events=events),
        revision=int(doc.get("revision", 0)),
        base_dir=Path(base_dir),
    )


def validate_session(session: SceneSession):
    """Check asset resolution and annotation invariants; raises on violation."""
    for name, rel in (("object.mesh_path", session.mesh_path),
                      ("human_poses_path", session.human_poses_path)):
        if not session.resolve(rel).exists():
            raise MissingAsset(f"{name}: {session.resolve(rel)}")
    if session.skeleton_path and not session.resolve(session.skeleton_path).exists():
        raise MissingAsset(f"skeleton_path: {session.resolve(session.skeleton_path)}")
    if session.masks_dir and not session.resolve(session.masks_dir).is_dir():
        raise MissingAsset(f"masks_dir: {session.resolve(session.masks_dir)}")
    if session.scale <= 0:
        raise InvariantViolation("object.scale", "must be positive")
    n = session.num_frames
    if n < 1:
        raise InvariantViolation("human_poses_path", "motion file has no frames")
    nj = session.skeleton.num_joints
    for i, f in enumerate(session.human_frames):
        if len(f.joint_quats) != nj:
            raise InvariantViolation(f"human_poses.frames[{i}]",
                                     f"expected {nj} joint rotations")
    for i, p in enumerate(session.annotations.pairs):
        path = f"annotations.pairs[{i}]"
        if not (0 <= p.keypoint < NUM_KEYPOINTS):
            raise InvariantViolation(path + ".keypoint", "out of range")
        if not (0 <= p.start < p.end <= n):
            raise InvariantViolation(path, f"frame range [{p.start}, {p.end}) "
                                           f"invalid for {n} frames")
    for i, t in enumerate(session.annotations.tracks):
        path = f"annotations.tracks[{i}]"
        if len(t.points) and (t.points[:, 0].min() < 0 or t.points[:, 0].max() >= n):
            raise InvariantViolation(path, "track frame index out of range")
    # a non-empty event log must reproduce the event-derived annotation state
    # (pairs, manual tracks, flags); ingested external tracks and creation-time
    # scale/static are inputs, not events
    if session.annotations.events:
        replayed = replay_events(session)
        got = [p.to_dict() for p in replayed.annotations.pairs]
        want = [p.to_dict() for p in session.annotations.pairs]
        if got != want:
            raise InvariantViolation("annotations.events",
                                     "event log does not reproduce the pair list")
        got_t = [t.to_dict() for t in replayed.annotations.tracks
                 if t.source == "manual"]
        want_t = [t.to_dict() for t in session.annotations.tracks
                  if t.source == "manual"]
        if got_t != want_t:
            raise InvariantViolation("annotations.events",
                                     "event log does not reproduce the manual tracks")
        kinds = {e.kind for e in session.annotations.events}
        if "set-static" in kinds and replayed.static != session.static:
            raise InvariantViolation("annotations.events",
                                     "event log does not reproduce the static flag")
        if "set-scale" in kinds and replayed.scale != session.scale:
            raise InvariantViolation("annotations.events",
                                     "event log does not reproduce the object scale")
    return session


def replay_events(session: SceneSession) -> SceneSession:
    """Fresh session with the annotation state rebuilt from the event log."""
    replay = SceneSession(
        id=session.id, camera=session.camera, fps=session.fps,
        mesh_path=session.mesh_path, scale=session.scale, static=session.static,
        skeleton_path=session.skeleton_path,
        human_poses_path=session.human_poses_path,
        masks_dir=session.masks_dir, frames_dir=session.frames_dir,
        annotations=AnnotationSet(), base_dir=session.base_dir)
    replay._human_frames = session._human_frames
    for e in session.annotations.events:
        apply_event(replay, AnnotationEvent(e.kind, e.frame, dict(e.payload),
                                            e.timestamp))
    return replay


def load_session(path) -> SceneSession:
    """Load and fully validate a session file."""
    path = Path(path)
    doc = json.loads(path.read_text())
    session = session_from_dict(doc, base_dir=path.parent)
    validate_session(session)
    return session


def save_session(path, session: SceneSession):
    write_canonical(path, session.to_dict())
