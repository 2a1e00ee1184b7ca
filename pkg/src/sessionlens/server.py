"""HTTP service: projects, recordings, jobs with push feeds, streams,
annotations, annotlettes, export, telemetry.

Thin binding over the store/engine/report modules. Mutating endpoints
accept a client-supplied ``request_id``; retries with the same id replay
the original response instead of re-applying the mutation.
"""

from __future__ import annotations

import json
import queue
import tempfile
import threading
import zipfile
from contextlib import asynccontextmanager
from pathlib import Path
from typing import Any

from fastapi import FastAPI, File, Form, Request, UploadFile
from fastapi.responses import FileResponse, JSONResponse, Response, StreamingResponse
from fastapi.staticfiles import StaticFiles

from .annotations import create_annotation
from .config import ServiceConfig
from .engine import Engine, load_plugin_catalog, register_builtins
from .errors import InvalidInputError, NotFoundError, SessionlensError
from .model import Annotation, record_to_json
from .report import annotlette_svg, export_tabular
from .storage import ProjectStore
from .streams import slice_stream

_STATUS = {"not_found": 404, "conflict": 409}


class _IdempotencyCache:
    """request_id -> first response body, replayed on retry."""

    def __init__(self):
        self._seen: dict[str, Any] = {}
        self._lock = threading.Lock()

    def get(self, request_id: str | None) -> Any | None:
        if not request_id:
            return None
        with self._lock:
            return self._seen.get(request_id)

    def put(self, request_id: str | None, body: Any) -> None:
        if request_id:
            with self._lock:
                self._seen[request_id] = body


def create_app(config: ServiceConfig) -> FastAPI:
    store = ProjectStore(config.data_dir)
    engine = Engine(store, workers=config.workers)
    register_builtins(engine)
    load_plugin_catalog(engine, config.plugins_dir)
    engine.recover()

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        yield
        engine.shutdown()

    app = FastAPI(title="sessionlens", lifespan=lifespan)
    app.state.store = store
    app.state.engine = engine
    idem = _IdempotencyCache()

    @app.exception_handler(SessionlensError)
    async def _domain_error(_request: Request, exc: SessionlensError):
        status = _STATUS.get(exc.code, 400)
        return JSONResponse(status_code=status, content={
            "code": exc.code, "message": str(exc), "detail": exc.detail})

    # -- projects -----------------------------------------------------------

    @app.post("/projects")
    async def post_project(body: dict | None = None):
        body = body or {}
        cached = idem.get(body.get("request_id"))
        if cached is not None:
            return cached
        project = store.create_project(name=body.get("name", "untitled"))
        out = {"project_id": project.id, "name": project.name,
               "created_at": project.created_at}
        idem.put(body.get("request_id"), out)
        return out

    @app.get("/projects")
    async def get_projects():
        return {"projects": [{"project_id": p.id, "name": p.name,
                              "created_at": p.created_at}
                             for p in store.list_projects()]}

    # -- recordings ---------------------------------------------------------

    @app.post("/projects/{project_id}/recordings")
    async def post_recording(project_id: str, file: UploadFile = File(...),
                             kind: str = Form(...),
                             request_id: str | None = Form(None)):
        cached = idem.get(request_id)
        if cached is not None:
            return cached
        suffix = Path(file.filename or "upload").suffix
        with tempfile.TemporaryDirectory() as tmp:
            target = Path(tmp) / f"upload{suffix}"
            target.write_bytes(await file.read())
            if kind == "frame-sequence" and suffix == ".zip":
                unpacked = Path(tmp) / "frames"
                with zipfile.ZipFile(target) as zf:
                    zf.extractall(unpacked)
                # tolerate archives with a single top-level directory
                entries = list(unpacked.iterdir())
                if len(entries) == 1 and entries[0].is_dir():
                    unpacked = entries[0]
                target = unpacked
            recording = store.add_recording(project_id, target, kind)
        out = recording.to_json()
        idem.put(request_id, out)
        return out

    @app.get("/projects/{project_id}/recordings")
    async def get_recordings(project_id: str):
        return {"recordings": [r.to_json()
                               for r in store.get_project(project_id).recordings]}

    # -- filters and jobs ---------------------------------------------------

    @app.get("/filters")
    async def get_filters():
        return {"filters": [d.to_json() for d in engine.catalog()]}

    @app.post("/projects/{project_id}/jobs")
    async def post_jobs(project_id: str, body: dict):
        cached = idem.get(body.get("request_id"))
        if cached is not None:
            return cached
        filter_ids = body.get("filter_ids", [])
        if not filter_ids:
            raise InvalidInputError("filter_ids is required")
        overrides = body.get("params", {})
        recording_id = body.get("recording_id")
        if recording_id:
            jobs = engine.schedule(project_id, recording_id, filter_ids, overrides)
        else:
            jobs = engine.schedule_all(project_id, filter_ids, overrides)
        out = {"jobs": [j.to_json() for j in jobs]}
        idem.put(body.get("request_id"), out)
        return out

    @app.get("/jobs/{job_id}")
    async def get_job(job_id: str):
        return engine.get_job(job_id).to_json()

    @app.get("/jobs/{job_id}/events")
    def get_job_events(job_id: str):
        feed = engine.subscribe(job_id)

        def generate():
            while True:
                try:
                    event = feed.get(timeout=15.0)
                except queue.Empty:
                    yield ": keepalive\n\n"
                    continue
                yield f"data: {json.dumps(event, sort_keys=True)}\n\n"
                if event.get("type") in ("done", "failed", "cached"):
                    return

        return StreamingResponse(generate(), media_type="text/event-stream")

    # -- streams ------------------------------------------------------------

    @app.get("/projects/{project_id}/streams")
    async def get_streams(project_id: str):
        return {"streams": [s.to_json() for s in store.list_streams(project_id)]}

    @app.get("/streams/{stream_id}")
    async def get_stream_page(stream_id: str, request: Request):
        project_id = store.find_project_for_stream(stream_id)
        stream = store.get_stream(project_id, stream_id)
        q = request.query_params
        t0 = int(q.get("from", 0))
        t1 = int(q["to"]) if "to" in q else max(
            (r.end_ms for r in stream.payload), default=0)
        page = slice_stream(stream, t0, t1)
        return {"stream": {"id": stream.id, "recording_id": stream.recording_id,
                           "filter_id": stream.filter_id, "variant": stream.variant,
                           "unit": stream.unit, "project_id": project_id},
                "from": t0, "to": t1,
                "records": [record_to_json(r) for r in page.payload]}

    @app.get("/projects/{project_id}/thumbs/{stream_id}/{name}")
    async def get_thumb(project_id: str, stream_id: str, name: str):
        path = store.thumbs_dir(project_id, stream_id) / name
        if not path.exists() or ".." in name:
            raise NotFoundError(f"unknown thumbnail: {name}")
        return FileResponse(path)

    # -- annotations --------------------------------------------------------

    @app.post("/projects/{project_id}/annotations")
    async def post_annotation(project_id: str, body: dict):
        cached = idem.get(body.get("request_id"))
        if cached is not None:
            return cached
        ann = create_annotation(
            store, project_id, stream_id=body["stream_id"], kind=body["kind"],
            t0_ms=int(body["t0_ms"]), t1_ms=int(body["t1_ms"]),
            text=body.get("text", ""), author=body.get("author", "anonymous"))
        out = ann.to_json()
        idem.put(body.get("request_id"), out)
        return out

    @app.get("/projects/{project_id}/annotations")
    async def get_annotations(project_id: str):
        return {"annotations": [a.to_json() for a in store.list_annotations(project_id)]}

    @app.get("/projects/{project_id}/annotations/{annotation_id}")
    async def get_annotation(project_id: str, annotation_id: str):
        return store.get_annotation(project_id, annotation_id).to_json()

    @app.patch("/projects/{project_id}/annotations/{annotation_id}")
    async def patch_annotation(project_id: str, annotation_id: str, body: dict):
        current = store.get_annotation(project_id, annotation_id)
        merged = current.to_json()
        for field in ("kind", "t0_ms", "t1_ms", "text", "author"):
            if field in body:
                merged[field] = body[field]
        updated = Annotation.from_json(merged)
        store.update_annotation(updated)
        return updated.to_json()

    @app.delete("/projects/{project_id}/annotations/{annotation_id}")
    async def delete_annotation(project_id: str, annotation_id: str):
        store.delete_annotation(project_id, annotation_id)
        return {"deleted": annotation_id}

    @app.get("/annotations/{annotation_id}/annotlette.svg")
    async def get_annotlette(annotation_id: str):
        project_id = store.find_project_for_annotation(annotation_id)
        svg = annotlette_svg(store, project_id, annotation_id)
        return Response(content=svg, media_type="image/svg+xml")

    # -- export and telemetry -----------------------------------------------

    @app.get("/projects/{project_id}/export")
    async def get_export(project_id: str, what: str = "streams",
                         format: str = "jsonl"):
        doc = export_tabular(store, project_id, what, format)
        media = "text/csv" if format == "csv" else "application/x-ndjson"
        return Response(content=doc, media_type=media)

    @app.post("/projects/{project_id}/telemetry")
    async def post_telemetry(project_id: str, body: dict):
        cached = idem.get(body.get("request_id"))
        if cached is not None:
            return cached
        events = body.get("events")
        if events is None:
            events = [body]
        for ev in events:
            store.append_telemetry(project_id, kind=ev["kind"],
                                   t_video_ms=int(ev["t_video_ms"]),
                                   payload=ev.get("payload"))
        out = {"accepted": len(events)}
        idem.put(body.get("request_id"), out)
        return out

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok"}

    if config.static_dir and config.static_dir.exists():
        app.mount("/ui", StaticFiles(directory=config.static_dir, html=True),
                  name="ui")

    return app
