"""Project store: on-disk layout, manifests, stream files, annotations, jobs.

Layout under the data directory::

    projects/<pid>/project.json          manifest (recordings, streams, filters)
    projects/<pid>/recordings/<rid>      copied media (file or frame directory)
    projects/<pid>/streams/<sid>.jsonl   one record per line
    projects/<pid>/thumbs/<sid>/         thumbnail images for thumbnail streams
    projects/<pid>/annotations.jsonl     append-only annotation log
    projects/<pid>/jobs/<jid>.json       job rows (survive restarts)

All writes go through an atomic temp-file + rename so readers never see
partial JSON, and manifest read-modify-write is serialized per store.
"""

from __future__ import annotations

import datetime as dt
import json
import os
import shutil
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import ConflictError, InvalidInputError, NotFoundError
from .ingest import load_transcript, probe_recording
from .model import Annotation, DataStream, Recording, dump_records, load_records


def now_iso() -> str:
    return dt.datetime.now(dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def atomic_write(path: Path, data: bytes | str) -> None:
    if isinstance(data, str):
        data = data.encode("utf-8")
    tmp = path.with_name(path.name + f".tmp-{uuid.uuid4().hex[:8]}")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def dump_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


@dataclass
class StreamInfo:
    """Manifest row describing one persisted stream."""

    id: str
    recording_id: str
    filter_id: str
    variant: str
    unit: str | None = None
    file: str = ""

    def to_json(self) -> dict[str, Any]:
        return {"id": self.id, "recording_id": self.recording_id,
                "filter_id": self.filter_id, "variant": self.variant,
                "unit": self.unit, "file": self.file}

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> StreamInfo:
        return cls(id=obj["id"], recording_id=obj["recording_id"],
                   filter_id=obj["filter_id"], variant=obj["variant"],
                   unit=obj.get("unit"), file=obj.get("file", ""))


@dataclass
class Project:
    id: str
    name: str
    created_at: str
    recordings: list[Recording] = field(default_factory=list)
    streams: list[StreamInfo] = field(default_factory=list)
    filters: list[str] = field(default_factory=list)

    def to_json(self) -> dict[str, Any]:
        return {"id": self.id, "name": self.name, "created_at": self.created_at,
                "recordings": [r.to_json() for r in self.recordings],
                "streams": [s.to_json() for s in self.streams],
                "filters": self.filters}

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> Project:
        return cls(id=obj["id"], name=obj["name"], created_at=obj["created_at"],
                   recordings=[Recording.from_json(r) for r in obj["recordings"]],
                   streams=[StreamInfo.from_json(s) for s in obj["streams"]],
                   filters=list(obj.get("filters", [])))


class ProjectStore:
    """Single-writer store for projects, recordings, streams, annotations, jobs."""

    def __init__(self, data_dir: str | Path):
        self.root = Path(data_dir)
        (self.root / "projects").mkdir(parents=True, exist_ok=True)
        self._lock = threading.RLock()

    # -- projects -----------------------------------------------------------

    def _pdir(self, project_id: str) -> Path:
        return self.root / "projects" / project_id

    def _manifest_path(self, project_id: str) -> Path:
        return self._pdir(project_id) / "project.json"

    def create_project(self, name: str, project_id: str | None = None) -> Project:
        with self._lock:
            pid = project_id or f"p-{uuid.uuid4().hex[:10]}"
            pdir = self._pdir(pid)
            if pdir.exists():
                if project_id is not None:
                    return self.get_project(pid)  # idempotent explicit-id create
                raise ConflictError(f"project {pid} already exists")
            for sub in ("recordings", "streams", "jobs", "thumbs"):
                (pdir / sub).mkdir(parents=True, exist_ok=True)
            project = Project(id=pid, name=name, created_at=now_iso())
            self._save(project)
            return project

    def get_project(self, project_id: str) -> Project:
        path = self._manifest_path(project_id)
        if not path.exists():
            raise NotFoundError(f"unknown project: {project_id}")
        return Project.from_json(json.loads(path.read_text("utf-8")))

    def list_projects(self) -> list[Project]:
        out = []
        for pdir in sorted((self.root / "projects").iterdir()):
            if (pdir / "project.json").exists():
                out.append(self.get_project(pdir.name))
        return out

    def _save(self, project: Project) -> None:
        atomic_write(self._manifest_path(project.id), dump_json(project.to_json()))

    # -- recordings ---------------------------------------------------------

    def add_recording(self, project_id: str, source: str | Path, kind: str) -> Recording:
        """Ingest media into the project; identical bytes land on one copy.

        Transcript recordings also persist their parsed text stream right
        away, so dialogue is sliceable and exportable without running any
        filter.
        """
        with self._lock:
            project = self.get_project(project_id)
            probed = probe_recording(source, kind)
            for existing in project.recordings:
                if existing.content_digest == probed.content_digest:
                    return existing
            rid = f"r-{probed.content_digest[:12]}"
            dest = self._pdir(project_id) / "recordings" / rid
            src = Path(source)
            if src.is_dir():
                shutil.copytree(src, dest)
            else:
                dest = dest.with_suffix(src.suffix)
                shutil.copy2(src, dest)
            probed.id = rid
            probed.path = str(dest)
            project.recordings.append(probed)
            self._save(project)
        if kind == "transcript":
            stream = load_transcript(probed)
            stream.id = f"transcript.{probed.content_digest[:8]}"
            self.put_stream(project_id, stream)
        return probed

    def get_recording(self, project_id: str, recording_id: str) -> Recording:
        for rec in self.get_project(project_id).recordings:
            if rec.id == recording_id:
                return rec
        raise NotFoundError(f"unknown recording: {recording_id}")

    # -- streams ------------------------------------------------------------

    def stream_path(self, project_id: str, stream_id: str) -> Path:
        return self._pdir(project_id) / "streams" / f"{stream_id}.jsonl"

    def thumbs_dir(self, project_id: str, stream_id: str) -> Path:
        return self._pdir(project_id) / "thumbs" / stream_id

    def put_stream(self, project_id: str, stream: DataStream,
                   payload_bytes: bytes | None = None) -> StreamInfo:
        """Persist a stream file and its manifest row (idempotent by id).

        ``payload_bytes`` lets the cache hand over already-serialized
        bytes so cached replays stay byte-identical.
        """
        with self._lock:
            project = self.get_project(project_id)
            data = payload_bytes if payload_bytes is not None else dump_records(stream.payload)
            path = self.stream_path(project_id, stream.id)
            atomic_write(path, data)
            info = StreamInfo(id=stream.id, recording_id=stream.recording_id,
                              filter_id=stream.filter_id, variant=stream.variant,
                              unit=stream.unit, file=path.name)
            project.streams = [s for s in project.streams if s.id != info.id] + [info]
            if stream.filter_id not in project.filters:
                project.filters.append(stream.filter_id)
            self._save(project)
            return info

    def get_stream(self, project_id: str, stream_id: str) -> DataStream:
        info = self.get_stream_info(project_id, stream_id)
        text = self.stream_path(project_id, stream_id).read_text("utf-8")
        payload = load_records(text, info.variant)
        if info.filter_id == "telemetry":
            # the file keeps server-receipt order; readers get time order
            payload.sort(key=lambda r: r.start_ms)
        return DataStream(id=info.id, recording_id=info.recording_id,
                          filter_id=info.filter_id, variant=info.variant,
                          unit=info.unit, payload=payload)

    def get_stream_info(self, project_id: str, stream_id: str) -> StreamInfo:
        for info in self.get_project(project_id).streams:
            if info.id == stream_id:
                return info
        raise NotFoundError(f"unknown stream: {stream_id}")

    def list_streams(self, project_id: str) -> list[StreamInfo]:
        return self.get_project(project_id).streams

    def find_project_for_stream(self, stream_id: str) -> str:
        for project in self.list_projects():
            if any(s.id == stream_id for s in project.streams):
                return project.id
        raise NotFoundError(f"unknown stream: {stream_id}")

    # -- annotations --------------------------------------------------------

    def _ann_path(self, project_id: str) -> Path:
        return self._pdir(project_id) / "annotations.jsonl"

    def add_annotation(self, annotation: Annotation) -> Annotation:
        with self._lock:
            self.get_project(annotation.project_id)  # existence check
            path = self._ann_path(annotation.project_id)
            with path.open("a", encoding="utf-8") as fh:
                fh.write(dump_json(annotation.to_json()) + "\n")
            return annotation

    def list_annotations(self, project_id: str) -> list[Annotation]:
        """Annotations sorted by t0, ties by created_at; tombstones applied."""
        self.get_project(project_id)
        path = self._ann_path(project_id)
        rows: dict[str, Annotation | None] = {}
        if path.exists():
            for line in path.read_text("utf-8").splitlines():
                if not line.strip():
                    continue
                obj = json.loads(line)
                if obj.get("deleted"):
                    rows[obj["id"]] = None
                else:
                    rows[obj["id"]] = Annotation.from_json(obj)
        alive = [a for a in rows.values() if a is not None]
        alive.sort(key=lambda a: (a.t0_ms, a.created_at, a.id))
        return alive

    def get_annotation(self, project_id: str, annotation_id: str) -> Annotation:
        for ann in self.list_annotations(project_id):
            if ann.id == annotation_id:
                return ann
        raise NotFoundError(f"unknown annotation: {annotation_id}")

    def find_project_for_annotation(self, annotation_id: str) -> str:
        for project in self.list_projects():
            try:
                self.get_annotation(project.id, annotation_id)
                return project.id
            except NotFoundError:
                continue
        raise NotFoundError(f"unknown annotation: {annotation_id}")

    def update_annotation(self, annotation: Annotation) -> Annotation:
        with self._lock:
            self.get_annotation(annotation.project_id, annotation.id)
            path = self._ann_path(annotation.project_id)
            with path.open("a", encoding="utf-8") as fh:
                fh.write(dump_json(annotation.to_json()) + "\n")
            return annotation

    def delete_annotation(self, project_id: str, annotation_id: str) -> None:
        with self._lock:
            self.get_annotation(project_id, annotation_id)
            path = self._ann_path(project_id)
            with path.open("a", encoding="utf-8") as fh:
                fh.write(dump_json({"id": annotation_id, "deleted": True}) + "\n")

    # -- jobs ---------------------------------------------------------------

    def put_job(self, project_id: str, job_row: dict[str, Any]) -> None:
        jdir = self._pdir(project_id) / "jobs"
        jdir.mkdir(exist_ok=True)
        atomic_write(jdir / f"{job_row['job_id']}.json", dump_json(job_row))

    def get_job(self, project_id: str, job_id: str) -> dict[str, Any]:
        path = self._pdir(project_id) / "jobs" / f"{job_id}.json"
        if not path.exists():
            raise NotFoundError(f"unknown job: {job_id}")
        return json.loads(path.read_text("utf-8"))

    def list_jobs(self, project_id: str) -> list[dict[str, Any]]:
        jdir = self._pdir(project_id) / "jobs"
        if not jdir.exists():
            return []
        return [json.loads(p.read_text("utf-8")) for p in sorted(jdir.glob("*.json"))]

    # -- telemetry ----------------------------------------------------------

    TELEMETRY_STREAM = "telemetry"
    TELEMETRY_KINDS = ("play", "pause", "seek", "rate-change", "brush", "filter-toggle")

    def append_telemetry(self, project_id: str, kind: str, t_video_ms: int,
                         payload: dict[str, Any] | None = None) -> None:
        """Append one interaction event to the project's telemetry stream.

        The telemetry stream is an ordinary event stream (recording_id
        empty), so it can be sliced, exported, and visualized like any
        filter output.
        """
        if kind not in self.TELEMETRY_KINDS:
            raise InvalidInputError(f"unknown telemetry kind: {kind!r}")
        if t_video_ms < 0:
            raise InvalidInputError("t_video_ms must be >= 0")
        with self._lock:
            project = self.get_project(project_id)
            path = self.stream_path(project_id, self.TELEMETRY_STREAM)
            record = {"t0_ms": t_video_ms, "t1_ms": t_video_ms, "label": kind, "p": 1.0}
            if payload:
                record["attrs"] = payload
            with path.open("a", encoding="utf-8") as fh:
                fh.write(dump_json(record) + "\n")
            if not any(s.id == self.TELEMETRY_STREAM for s in project.streams):
                project.streams.append(StreamInfo(
                    id=self.TELEMETRY_STREAM, recording_id="", filter_id="telemetry",
                    variant="event", unit=None, file=path.name))
                self._save(project)
