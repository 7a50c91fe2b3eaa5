"""HTTP annotation service: session CRUD, annotation events with optimistic
versioning, silhouette overlays, and asynchronous solve jobs.

Session documents live under one directory per session id inside the data
root; the service never mutates input assets, only session.json and the
results directory.
"""

import io
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Header, HTTPException, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from PIL import Image

from .config import PipelineConfig
from .errors import HoiSolverError, UnderConstrained
from .pipeline import run_pipeline, write_results
from .session import (AnnotationEvent, SceneSession, apply_event,
                      load_session, save_session, session_from_dict,
                      synthesize_creation_events, validate_session)
from .silhouette import rasterize_silhouette

VERSION_HEADER = "x-session-version"


class SessionStore:
    """In-memory registry over the on-disk session directories.

    One writer per session: the per-session lock covers event application and
    the atomic save; readers get the last committed snapshot.
    """

    def __init__(self, data_root):
        self.data_root = Path(data_root)
        self.data_root.mkdir(parents=True, exist_ok=True)
        self.sessions = {}
        self.locks = {}
        self._registry_lock = threading.Lock()
        for session_file in sorted(self.data_root.glob("*/session.json")):
            session = load_session(session_file)
            # ingested pair lists become event-backed before any live edits,
            # otherwise the first posted event would break replay validation
            # on the next restart
            had_events = bool(session.annotations.events)
            synthesize_creation_events(session)
            self.sessions[session.id] = session
            self.locks[session.id] = threading.Lock()
            if not had_events and session.annotations.events:
                self.persist(session)

    def ids(self):
        return sorted(self.sessions)

    def get(self, session_id) -> SceneSession:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise HTTPException(404, f"unknown session {session_id!r}")

    def lock(self, session_id):
        return self.locks[session_id]

    def session_dir(self, session_id):
        return self.data_root / session_id

    def persist(self, session: SceneSession):
        path = self.session_dir(session.id) / "session.json"
        tmp = path.with_suffix(".json.tmp")
        save_session(tmp, session)
        tmp.replace(path)

    def create(self, session_id, doc):
        with self._registry_lock:
            if session_id in self.sessions:
                raise HTTPException(409, f"session {session_id!r} already exists")
            base = self.session_dir(session_id)
            base.mkdir(parents=True, exist_ok=True)
            doc = dict(doc)
            doc["id"] = session_id
            try:
                session = session_from_dict(doc, base_dir=base)
                validate_session(session)
            except (KeyError, HoiSolverError, ValueError, TypeError) as exc:
                raise HTTPException(400, f"invalid session document: {exc}")
            # pre-existing pairs become synthetic events so the event log
            # always reproduces the pair list
            synthesize_creation_events(session)
            self.sessions[session_id] = session
            self.locks[session_id] = threading.Lock()
            self.persist(session)
            return session


class JobRegistry:
    def __init__(self, workers=2):
        self.executor = ThreadPoolExecutor(max_workers=workers)
        self.jobs = {}
        self.lock = threading.Lock()

    def submit(self, fn):
        job_id = uuid.uuid4().hex
        with self.lock:
            self.jobs[job_id] = {"state": "queued", "error": None}

        def run():
            with self.lock:
                self.jobs[job_id]["state"] = "running"
            try:
                fn()
                state, error = "done", None
            except Exception as exc:  # job errors surface through polling
                state, error = "failed", f"{type(exc).__name__}: {exc}"
            with self.lock:
                self.jobs[job_id]["state"] = state
                self.jobs[job_id]["error"] = error

        self.executor.submit(run)
        return job_id

    def get(self, job_id):
        with self.lock:
            job = self.jobs.get(job_id)
            return dict(job) if job else None


def create_app(data_root, config: PipelineConfig = None, workers=2) -> FastAPI:
    cfg = config or PipelineConfig()
    store = SessionStore(data_root)
    jobs = JobRegistry(workers=workers)
    app = FastAPI(title="hoisolver annotation service")
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"], expose_headers=[VERSION_HEADER])
    app.state.store = store
    app.state.jobs = jobs

    @app.get("/sessions")
    def list_sessions():
        return {"sessions": store.ids()}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        session = store.get(session_id)
        with store.lock(session_id):
            doc = session.to_dict()
            frames = session.num_frames
        return {"session": doc, "revision": session.revision,
                "num_frames": frames}

    @app.post("/sessions/{session_id}", status_code=201)
    async def create_session(session_id: str, request: Request):
        try:
            doc = await request.json()
        except Exception:
            raise HTTPException(400, "body must be a JSON session document")
        session = store.create(session_id, doc)
        return {"session": session.to_dict(), "revision": session.revision}

    @app.get("/sessions/{session_id}/annotations")
    def get_annotations(session_id: str, response: Response):
        session = store.get(session_id)
        with store.lock(session_id):
            doc = session.annotations.to_dict()
            revision = session.revision
        response.headers[VERSION_HEADER] = str(revision)
        return {"annotations": doc, "revision": revision,
                "static": session.static, "scale": session.scale}

    @app.post("/sessions/{session_id}/annotations")
    async def post_annotation(session_id: str, request: Request, response: Response,
                              x_session_version: int = Header(None)):
        session = store.get(session_id)
        if x_session_version is None:
            raise HTTPException(400, f"missing {VERSION_HEADER} header")
        try:
            body = await request.json()
            event = AnnotationEvent(kind=body["kind"],
                                    frame=int(body.get("frame", 0)),
                                    payload=body.get("payload", {}),
                                    timestamp=float(body.get("timestamp", 0.0)))
        except HoiSolverError as exc:
            raise HTTPException(400, str(exc))
        except Exception as exc:
            raise HTTPException(400, f"invalid event: {exc}")
        with store.lock(session_id):
            if session.revision != x_session_version:
                raise HTTPException(
                    409, f"stale version {x_session_version}, server at {session.revision}")
            try:
                apply_event(session, event)
            except HoiSolverError as exc:
                raise HTTPException(400, str(exc))
            session.revision += 1
            store.persist(session)
            revision = session.revision
        response.headers[VERSION_HEADER] = str(revision)
        return {"revision": revision}

    @app.get("/sessions/{session_id}/frames/{frame}/overlay")
    def frame_overlay(session_id: str, frame: int):
        session = store.get(session_id)
        if not (0 <= frame < session.num_frames):
            raise HTTPException(404, f"frame {frame} out of range")
        state = _object_pose_for_frame(store, session, frame)
        mask = rasterize_silhouette(session.mesh, state, session.camera)
        img = _overlay_image(session, frame, mask)
        buf = io.BytesIO()
        img.save(buf, format="PNG")
        return Response(content=buf.getvalue(), media_type="image/png")

    @app.get("/sessions/{session_id}/mesh")
    def get_mesh(session_id: str):
        session = store.get(session_id)
        mesh = session.mesh
        return {"vertices": mesh.vertices.tolist(), "faces": mesh.faces.tolist(),
                "scale": session.scale}

    @app.get("/sessions/{session_id}/skeleton")
    def get_skeleton(session_id: str):
        return store.get(session_id).skeleton.to_dict()

    @app.post("/sessions/{session_id}/solve", status_code=202)
    def solve(session_id: str):
        session = store.get(session_id)
        out_dir = store.session_dir(session_id) / "results"

        def job():
            with store.lock(session_id):
                snapshot = session_from_dict(session.to_dict(),
                                             base_dir=session.base_dir)
            try:
                result = run_pipeline(snapshot, cfg)
            except UnderConstrained as exc:
                raise RuntimeError(f"precondition failed: {exc}")
            write_results(out_dir, snapshot, result)

        job_id = jobs.submit(job)
        return {"job_id": job_id}

    @app.get("/jobs/{job_id}")
    def job_state(job_id: str):
        job = jobs.get(job_id)
        if job is None:
            raise HTTPException(404, f"unknown job {job_id!r}")
        return {"job_id": job_id, **job}

    @app.get("/sessions/{session_id}/results")
    def results(session_id: str):
        store.get(session_id)
        out_dir = store.session_dir(session_id) / "results"
        motion = out_dir / "motion.json"
        report = out_dir / "report.json"
        if not motion.exists():
            raise HTTPException(404, "session has no results")
        import json
        return {"motion": json.loads(motion.read_text()),
                "report": json.loads(report.read_text())}

    return app


def _object_pose_for_frame(store, session, frame):
    """Latest solved object pose for the frame, else the upstream initial pose."""
    from .session import load_motion
    motion_path = store.session_dir(session.id) / "results" / "motion.json"
    if motion_path.exists():
        frames, _ = load_motion(motion_path)
        if frame < len(frames):
            from .geometry import RigidPose
            rec = frames[frame]
            return RigidPose(rec.object_q, rec.object_t, session.scale)
    from .geometry import RigidPose
    rec = session.human_frames[frame]
    return RigidPose(rec.object_q, rec.object_t, session.scale)


def _overlay_image(session, frame, mask):
    """Silhouette tinted over the frame image when available, else standalone."""
    h, w = mask.shape
    base = None
    if session.frames_dir:
        for pattern in (f"{frame:05d}.png", f"{frame:05d}.jpg", f"frame_{frame:05d}.png"):
            p = session.resolve(session.frames_dir) / pattern
            if p.exists():
                base = Image.open(p).convert("RGB").resize((w, h))
                break
    if base is None:
        base = Image.new("RGB", (w, h), (0, 0, 0))
    arr = np.asarray(base).astype(float)
    tint = np.zeros_like(arr)
    tint[..., 1] = 255.0  # green silhouette channel
    alpha = (np.clip(mask, 0.0, 1.0) * 0.6)[..., None]
    out = arr * (1 - alpha) + tint * alpha
    return Image.fromarray(out.astype(np.uint8))


def serve(data_root, host="127.0.0.1", port=8080, config=None):
    """Run the annotation service until interrupted."""
    import uvicorn
    app = create_app(data_root, config=config)
    uvicorn.run(app, host=host, port=port)
