"""Filter engine: registration, async job scheduling, caching, plugin hosting.

One Engine instance owns the filter catalog, a FIFO job queue drained by a
small worker pool, and the content-addressed result cache. Every
execution is identified by a CacheKey; re-scheduling the same work
resolves from cache without running anything, and concurrent identical
schedules coalesce onto a single execution. Job rows are persisted on
every state change so a restarted engine can re-queue interrupted work
idempotently (stream ids derive from the cache key, so re-runs overwrite
rather than duplicate).
"""

from __future__ import annotations

import hashlib
import json
import queue
import tempfile
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from .cache import CachedOutput, ResultCache
from .errors import (ConflictError, InvalidInputError, NotFoundError,
                     PluginError, SessionlensError)
from .filters import (DEFAULT_ANGLE_TRIPLES, e_divisive, joint_angles,
                      pitch_track, spans_to_time, speech_rate, thumbnail_track,
                      validate_window_events)
from .filters.windows import DEFAULT_HOP_MS, DEFAULT_WINDOW_MS
from .hashing import canonical_hash
from .ingest import (decode_wav, load_frame_sequence, load_transcript,
                     parse_pose_jsonl)
from .model import (CacheKey, DataStream, Record, Recording, Sample,
                    dump_records, load_records)
from .plugin_host import host_plugin, resolve_command
from .storage import ProjectStore, now_iso

CHECKPOINT_EVERY = 500
JOB_STATES = ("queued", "running", "done", "failed", "cached")


@dataclass
class FilterDescriptor:
    """Catalog entry for one filter (builtin or external plugin)."""

    filter_id: str
    display_name: str
    model_id: str
    model_version: str
    params: dict[str, Any] = field(default_factory=dict)
    input_kinds: tuple[str, ...] = ()
    output_variants: tuple[str, ...] = ("continuous",)
    execution: str = "builtin"
    command: list[str] | None = None

    def to_json(self) -> dict[str, Any]:
        return {"filter_id": self.filter_id, "display_name": self.display_name,
                "model_id": self.model_id, "model_version": self.model_version,
                "params": self.params, "input_kinds": list(self.input_kinds),
                "output_variants": list(self.output_variants),
                "execution": self.execution}


@dataclass
class Job:
    job_id: str
    project_id: str
    recording_id: str
    filter_id: str
    params: dict[str, Any] = field(default_factory=dict)
    state: str = "queued"
    progress: float = 0.0
    produced_stream_ids: list[str] = field(default_factory=list)
    error: str | None = None
    created_at: str = field(default_factory=now_iso)

    def to_json(self) -> dict[str, Any]:
        return {"job_id": self.job_id, "project_id": self.project_id,
                "recording_id": self.recording_id, "filter_id": self.filter_id,
                "params": self.params, "state": self.state,
                "progress": self.progress,
                "produced_stream_ids": self.produced_stream_ids,
                "error": self.error, "created_at": self.created_at}

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> Job:
        return cls(job_id=obj["job_id"], project_id=obj["project_id"],
                   recording_id=obj["recording_id"], filter_id=obj["filter_id"],
                   params=obj.get("params", {}), state=obj.get("state", "queued"),
                   progress=obj.get("progress", 0.0),
                   produced_stream_ids=list(obj.get("produced_stream_ids", [])),
                   error=obj.get("error"), created_at=obj.get("created_at", ""))


class RunContext:
    """What a filter runner sees: inputs, params, and streaming hooks."""

    def __init__(self, engine: Engine, job: Job, descriptor: FilterDescriptor,
                 recording: Recording, params: dict[str, Any], key: CacheKey):
        self.engine = engine
        self.job = job
        self.descriptor = descriptor
        self.recording = recording
        self.params = params
        self.key = key
        self._emitted: dict[str, list[Record]] = {}
        self._variants: dict[str, tuple[str, str | None]] = {}
        self._since_checkpoint = 0

    def stream_id(self, output_name: str) -> str:
        return self.engine.stream_id_for(self.descriptor.filter_id, output_name, self.key)

    def progress(self, fraction: float) -> None:
        self.engine._publish_progress(self.job, fraction)

    def emit(self, output_name: str, record: Record,
             variant: str = "continuous", unit: str | None = None) -> None:
        """Streaming emission with periodic partial checkpoints."""
        self._emitted.setdefault(output_name, []).append(record)
        self._variants[output_name] = (variant, unit)
        self._since_checkpoint += 1
        if self._since_checkpoint >= CHECKPOINT_EVERY:
            self._since_checkpoint = 0
            self.checkpoint()

    def checkpoint(self) -> None:
        """Persist the records so far as partial streams and notify feeds."""
        ids = []
        for name, records in self._emitted.items():
            variant, unit = self._variants[name]
            ordered = sorted(records, key=lambda r: r.start_ms)
            sid = self.stream_id(name)
            self.engine.store.put_stream(self.job.project_id, DataStream(
                id=sid, recording_id=self.recording.id,
                filter_id=self.descriptor.filter_id, variant=variant,
                unit=unit, payload=ordered))
            ids.append(sid)
        if ids:
            self.engine._publish(self.job, {"type": "partial", "stream_ids": ids})

    def emitted_outputs(self) -> list[CachedOutput]:
        outs = []
        for name, records in self._emitted.items():
            variant, unit = self._variants[name]
            ordered = sorted(records, key=lambda r: r.start_ms)
            outs.append(CachedOutput(name=name, variant=variant, unit=unit,
                                     data=dump_records(ordered).encode("utf-8")))
        return outs

    def model_output(self, stage_id: str, stage_version: str,
                     producer: Callable[[], bytes]) -> bytes:
        """Fetch a shared intermediate model artifact through the cache.

        Several filters deriving from the same expensive model stage (for
        example a skeleton estimator) share one cache entry keyed by the
        stage identity, so the stage runs at most once per recording.
        """
        key = CacheKey(recording_digest=self.recording.content_digest,
                       model_id=stage_id, model_version=stage_version,
                       params_digest=canonical_hash({}))
        outs = self.engine.cache.get_or_run(key, lambda: [
            CachedOutput(name="model", variant="blob", unit=None, data=producer())])
        return outs[0].data


Runner = Callable[[RunContext], "list[CachedOutput] | None"]


class Engine:
    """Shared service: schedule filter jobs, host plugins, serve the cache."""

    def __init__(self, store: ProjectStore, workers: int = 2):
        self.store = store
        self.cache = ResultCache(store.root / "cache")
        self._filters: dict[str, tuple[FilterDescriptor, Runner]] = {}
        self._jobs: dict[str, Job] = {}
        self._subscribers: dict[str, list[queue.Queue]] = {}
        self._lock = threading.RLock()
        self._queue: queue.Queue[str | None] = queue.Queue()
        self._workers = [threading.Thread(target=self._worker, daemon=True)
                         for _ in range(max(1, workers))]
        for w in self._workers:
            w.start()

    # -- catalog ------------------------------------------------------------

    def register_filter(self, descriptor: FilterDescriptor,
                        runner: Runner | None = None) -> None:
        with self._lock:
            if descriptor.filter_id in self._filters:
                raise ConflictError(f"already registered: {descriptor.filter_id}")
            if descriptor.execution == "plugin":
                if not descriptor.command:
                    raise PluginError("plugin not found: no command configured")
                resolve_command(descriptor.command)
                runner = runner or self._plugin_runner
            if runner is None:
                raise InvalidInputError("builtin filter needs a runner")
            self._filters[descriptor.filter_id] = (descriptor, runner)

    def catalog(self) -> list[FilterDescriptor]:
        with self._lock:
            return [d for d, _ in self._filters.values()]

    def descriptor(self, filter_id: str) -> FilterDescriptor:
        with self._lock:
            if filter_id not in self._filters:
                raise NotFoundError(f"unknown filter: {filter_id}")
            return self._filters[filter_id][0]

    # -- scheduling ---------------------------------------------------------

    def effective_params(self, filter_id: str,
                         overrides: dict[str, Any] | None = None) -> dict[str, Any]:
        base = dict(self.descriptor(filter_id).params)
        for k, v in (overrides or {}).items():
            if k in base or k in ("seed",):
                base[k] = v
        return base

    def cache_key(self, recording: Recording, filter_id: str,
                  params: dict[str, Any]) -> CacheKey:
        d = self.descriptor(filter_id)
        return CacheKey(recording_digest=recording.content_digest,
                        model_id=d.model_id, model_version=d.model_version,
                        params_digest=canonical_hash(params))

    def stream_id_for(self, filter_id: str, output_name: str, key: CacheKey) -> str:
        # deterministic per cache key: re-runs land on the same stream ids
        h = hashlib.sha256(key.token.encode("utf-8")).hexdigest()[:8]
        return f"{filter_id}.{output_name}.{h}"

    def schedule(self, project_id: str, recording_id: str, filter_ids: list[str],
                 overrides: dict[str, Any] | None = None) -> list[Job]:
        """One job per filter; cache hits settle to ``cached`` immediately."""
        recording = self.store.get_recording(project_id, recording_id)
        jobs = []
        for fid in filter_ids:
            descriptor = self.descriptor(fid)  # unknown filter raises here
            params = self.effective_params(fid, overrides)
            job = Job(job_id=f"j-{uuid.uuid4().hex[:10]}", project_id=project_id,
                      recording_id=recording_id, filter_id=fid, params=params)
            with self._lock:
                self._jobs[job.job_id] = job
            if recording.kind not in descriptor.input_kinds:
                self._finish(job, "failed",
                             error=f"missing input: {fid} needs one of "
                                   f"{list(descriptor.input_kinds)}, recording is "
                                   f"{recording.kind}")
            else:
                key = self.cache_key(recording, fid, params)
                cached = self.cache.get(key)
                if cached is not None:
                    self._materialize(job, recording, descriptor, key, cached)
                    self._finish(job, "cached")
                else:
                    self._persist_job(job)
                    self._queue.put(job.job_id)
            jobs.append(job)
        return jobs

    def schedule_all(self, project_id: str, filter_ids: list[str],
                     overrides: dict[str, Any] | None = None) -> list[Job]:
        """Pair each filter with every recording whose kind it accepts."""
        project = self.store.get_project(project_id)
        jobs: list[Job] = []
        for fid in filter_ids:
            descriptor = self.descriptor(fid)
            matched = [r for r in project.recordings if r.kind in descriptor.input_kinds]
            if not matched:
                job = Job(job_id=f"j-{uuid.uuid4().hex[:10]}", project_id=project_id,
                          recording_id="", filter_id=fid, params=self.effective_params(fid, overrides))
                with self._lock:
                    self._jobs[job.job_id] = job
                self._finish(job, "failed",
                             error=f"missing input: no recording of kind "
                                   f"{list(descriptor.input_kinds)} for {fid}")
                jobs.append(job)
                continue
            for rec in matched:
                jobs.extend(self.schedule(project_id, rec.id, [fid], overrides))
        return jobs

    # -- job state ----------------------------------------------------------

    def get_job(self, job_id: str) -> Job:
        with self._lock:
            if job_id in self._jobs:
                return self._jobs[job_id]
        # not in memory: look through persisted rows (post-restart queries)
        for project in self.store.list_projects():
            try:
                return Job.from_json(self.store.get_job(project.id, job_id))
            except NotFoundError:
                continue
        raise NotFoundError(f"unknown job: {job_id}")

    def subscribe(self, job_id: str) -> queue.Queue:
        """Event feed for one job; terminal jobs yield a single terminal event."""
        with self._lock:
            job = self.get_job(job_id)
            q: queue.Queue = queue.Queue()
            if job.state in ("done", "failed", "cached"):
                q.put(self._terminal_event(job))
            else:
                self._subscribers.setdefault(job_id, []).append(q)
            return q

    def _terminal_event(self, job: Job) -> dict[str, Any]:
        event: dict[str, Any] = {"type": job.state,
                                 "stream_ids": job.produced_stream_ids}
        if job.error:
            event["error"] = job.error
        return event

    def _publish(self, job: Job, event: dict[str, Any]) -> None:
        with self._lock:
            for q in self._subscribers.get(job.job_id, []):
                q.put(event)

    def _publish_progress(self, job: Job, fraction: float) -> None:
        with self._lock:
            fraction = min(1.0, max(job.progress, float(fraction)))  # monotone
            if fraction == job.progress:
                return
            job.progress = fraction
        self._publish(job, {"type": "progress", "progress": fraction})

    def _finish(self, job: Job, state: str, error: str | None = None) -> None:
        with self._lock:
            job.state = state
            job.error = error
            if state in ("done", "cached"):
                job.progress = 1.0
            subscribers = self._subscribers.pop(job.job_id, [])
            event = self._terminal_event(job)
        self._persist_job(job)
        for q in subscribers:
            q.put(event)

    def _persist_job(self, job: Job) -> None:
        if job.project_id:
            self.store.put_job(job.project_id, job.to_json())

    # -- execution ----------------------------------------------------------

    def _worker(self) -> None:
        while True:
            job_id = self._queue.get()
            if job_id is None:
                return
            with self._lock:
                job = self._jobs.get(job_id)
            if job is None or job.state not in ("queued",):
                continue
            try:
                self._execute(job)
            except SessionlensError as exc:
                self._finish(job, "failed", error=str(exc))
            except Exception as exc:  # defensive: a runner bug must not kill the worker
                self._finish(job, "failed", error=f"internal error: {exc}")

    def _execute(self, job: Job) -> None:
        with self._lock:
            job.state = "running"
            if job.filter_id not in self._filters:
                raise NotFoundError(f"unknown filter: {job.filter_id}")
            descriptor, runner = self._filters[job.filter_id]
        self._persist_job(job)
        self._publish(job, {"type": "progress", "progress": job.progress})
        recording = self.store.get_recording(job.project_id, job.recording_id)
        key = self.cache_key(recording, job.filter_id, job.params)
        hit_before = self.cache.get(key) is not None

        def run() -> list[CachedOutput]:
            ctx = RunContext(self, job, descriptor, recording, job.params, key)
            outputs = runner(ctx)
            return outputs if outputs is not None else ctx.emitted_outputs()

        outputs = self.cache.get_or_run(key, run)
        self._materialize(job, recording, descriptor, key, outputs)
        self._finish(job, "cached" if hit_before else "done")

    def _materialize(self, job: Job, recording: Recording,
                     descriptor: FilterDescriptor, key: CacheKey,
                     outputs: list[CachedOutput]) -> None:
        """Write cached outputs into the project as streams (idempotent)."""
        ids = []
        for out in outputs:
            if out.variant == "blob":
                continue
            if out.name.startswith("img/"):
                continue
            sid = self.stream_id_for(descriptor.filter_id, out.name, key)
            text = out.data.decode("utf-8")
            stream = DataStream(id=sid, recording_id=recording.id,
                                filter_id=descriptor.filter_id, variant=out.variant,
                                unit=out.unit, payload=load_records(text, out.variant))
            self.store.put_stream(job.project_id, stream, payload_bytes=out.data)
            ids.append(sid)
        # thumbnail images ride along as extra outputs named img/<file>
        img_outputs = [o for o in outputs if o.name.startswith("img/")]
        if img_outputs and ids:
            tdir = self.store.thumbs_dir(job.project_id, ids[0])
            tdir.mkdir(parents=True, exist_ok=True)
            for out in img_outputs:
                (tdir / out.name[4:]).write_bytes(out.data)
        with self._lock:
            job.produced_stream_ids = ids

    # -- plugin execution ---------------------------------------------------

    def _plugin_runner(self, ctx: RunContext) -> list[CachedOutput]:
        d = ctx.descriptor

        def on_record(name: str, rec: Record) -> None:
            variant = "continuous" if isinstance(rec, Sample) else "event"
            ctx.emit(name, rec, variant=variant, unit=None)

        run = host_plugin(
            list(d.command or []),
            recording_paths={ctx.recording.id: ctx.recording.path},
            params=ctx.params, duration_ms=ctx.recording.duration_ms,
            expected_identity=(d.model_id, d.model_version),
            on_progress=ctx.progress, on_record=on_record)
        outputs = []
        for decl in run.descriptor.outputs:
            records = sorted(run.records.get(decl.stream, []),
                             key=lambda r: (r.start_ms, r.end_ms))
            if decl.variant == "event" and "window_ms" in ctx.params:
                validate_window_events(
                    list(records), ctx.recording.duration_ms,
                    int(ctx.params["window_ms"]),
                    int(ctx.params.get("hop_ms", ctx.params["window_ms"])))
            outputs.append(CachedOutput(name=decl.stream, variant=decl.variant,
                                        unit=decl.unit,
                                        data=dump_records(records).encode("utf-8")))
        return outputs

    # -- lifecycle ----------------------------------------------------------

    def recover(self) -> list[Job]:
        """Re-queue persisted queued/running jobs after a restart."""
        resumed = []
        for project in self.store.list_projects():
            for row in self.store.list_jobs(project.id):
                job = Job.from_json(row)
                if job.state in ("queued", "running"):
                    job.state = "queued"
                    job.progress = 0.0
                    with self._lock:
                        self._jobs[job.job_id] = job
                    self._persist_job(job)
                    self._queue.put(job.job_id)
                    resumed.append(job)
        return resumed

    def wait(self, jobs: list[Job], timeout_s: float = 600.0) -> list[Job]:
        """Block until every job reaches a terminal state."""
        deadline = time.monotonic() + timeout_s
        for job in jobs:
            while job.state not in ("done", "failed", "cached"):
                if time.monotonic() > deadline:
                    raise TimeoutError(f"job {job.job_id} did not finish")
                time.sleep(0.01)
        return jobs

    def shutdown(self) -> None:
        for _ in self._workers:
            self._queue.put(None)
        for w in self._workers:
            w.join(timeout=5.0)


# ---------------------------------------------------------------------------
# Builtin filters. Each runner streams records through ctx.emit (getting
# checkpoints for free) and lets the engine collect the final outputs.

POSE_STAGE = ("pose-source", "1")


def _pitch_runner(ctx: RunContext) -> None:
    p = ctx.params
    buf = decode_wav(ctx.recording)
    stream = pitch_track(buf, frame_ms=int(p["frame_ms"]), hop_ms=int(p["hop_ms"]),
                         fmin_hz=float(p["fmin_hz"]), fmax_hz=float(p["fmax_hz"]),
                         voicing_threshold=float(p["voicing_threshold"]),
                         recording_id=ctx.recording.id)
    total = max(1, len(stream.payload))
    for i, rec in enumerate(stream.payload):
        ctx.emit("pitch", rec, variant="continuous", unit="Hz")
        if i % 200 == 0:
            ctx.progress(i / total)
    ctx.progress(1.0)


def _speech_rate_runner(ctx: RunContext) -> None:
    p = ctx.params
    transcript = load_transcript(ctx.recording)
    stream = speech_rate(transcript, window_ms=int(p["window_ms"]),
                         hop_ms=int(p["hop_ms"]),
                         duration_ms=ctx.recording.duration_ms,
                         recording_id=ctx.recording.id)
    for rec in stream.payload:
        ctx.emit("speech_rate", rec, variant="continuous", unit="words/s")
    ctx.progress(1.0)


def _pose_from_stage(ctx: RunContext):
    """Skeleton frames via the shared model-stage cache entry."""
    pose_file = ctx.recording.metadata.get("pose")
    if not pose_file:
        raise InvalidInputError("missing input: recording has no pose data")
    pose_path = Path(ctx.recording.path) / pose_file

    def produce() -> bytes:
        return pose_path.read_bytes()

    data = ctx.model_output(*POSE_STAGE, produce)
    return parse_pose_jsonl(data.decode("utf-8"))


def _triples_from_params(params: dict[str, Any]) -> tuple[tuple[str, str, str], ...]:
    raw = params.get("triples") or [list(t) for t in DEFAULT_ANGLE_TRIPLES]
    return tuple((str(a), str(b), str(c)) for a, b, c in raw)


def _joint_angles_runner(ctx: RunContext) -> None:
    pose = _pose_from_stage(ctx)
    result = joint_angles(pose, triples=_triples_from_params(ctx.params),
                          recording_id=ctx.recording.id)
    for stream in result.streams:
        for rec in stream.payload:
            ctx.emit(stream.id, rec, variant="continuous", unit="deg")
    ctx.progress(1.0)


def _e_divisive_runner(ctx: RunContext) -> None:
    p = ctx.params
    pose = _pose_from_stage(ctx)
    result = joint_angles(pose, triples=_triples_from_params(ctx.params),
                          recording_id=ctx.recording.id)
    # one series: mean angle across triples at timestamps all triples share
    per_time: dict[int, list[float]] = {}
    for stream in result.streams:
        for rec in stream.payload:
            per_time.setdefault(rec.t_ms, []).append(rec.value)
    k = len(result.streams)
    times = sorted(t for t, vals in per_time.items() if len(vals) == k)
    values = [sum(per_time[t]) / k for t in times]
    seg = e_divisive(values, alpha=float(p["alpha"]), min_size=int(p["min_size"]),
                     n_permutations=int(p["n_permutations"]),
                     p_threshold=float(p["p_threshold"]), seed=int(p["seed"]))
    series = DataStream(id="angles.mean", recording_id=ctx.recording.id,
                        filter_id="e_divisive", variant="continuous", unit="deg",
                        payload=[Sample(t_ms=t, value=v) for t, v in zip(times, values)])
    for span in spans_to_time(seg, series, duration_ms=ctx.recording.duration_ms):
        ctx.emit("segments", span, variant="event", unit=None)
    ctx.progress(1.0)


def _thumbnails_runner(ctx: RunContext) -> list[CachedOutput]:
    p = ctx.params
    frames = load_frame_sequence(ctx.recording)
    with tempfile.TemporaryDirectory() as tmp:
        stream = thumbnail_track(frames, count=int(p["count"]), out_dir=tmp,
                                 max_px=int(p["max_px"]),
                                 recording_id=ctx.recording.id)
        outputs = [CachedOutput(name="thumbs", variant="thumbnail", unit=None,
                                data=dump_records(stream.payload).encode("utf-8"))]
        for ref in stream.payload:
            outputs.append(CachedOutput(name=f"img/{ref.image}", variant="blob",
                                        unit=None, data=(Path(tmp) / ref.image).read_bytes()))
    ctx.progress(1.0)
    return outputs


def register_builtins(engine: Engine) -> None:
    """Install the native filter catalog on an engine."""
    engine.register_filter(FilterDescriptor(
        filter_id="pitch", display_name="Pitch (fundamental frequency)",
        model_id="acf-pitch", model_version="1",
        params={"frame_ms": 40, "hop_ms": 10, "fmin_hz": 75.0, "fmax_hz": 600.0,
                "voicing_threshold": 0.45},
        input_kinds=("audio-wav",), output_variants=("continuous",)),
        _pitch_runner)
    engine.register_filter(FilterDescriptor(
        filter_id="speech_rate", display_name="Speech rate (words per second)",
        model_id="midpoint-rate", model_version="1",
        params={"window_ms": 5000, "hop_ms": 1000},
        input_kinds=("transcript",), output_variants=("continuous",)),
        _speech_rate_runner)
    engine.register_filter(FilterDescriptor(
        filter_id="joint_angles", display_name="Joint angles from pose",
        model_id="joint-angles", model_version="1",
        params={"triples": [list(t) for t in DEFAULT_ANGLE_TRIPLES]},
        input_kinds=("frame-sequence",), output_variants=("continuous",)),
        _joint_angles_runner)
    engine.register_filter(FilterDescriptor(
        filter_id="e_divisive", display_name="Pose segmentation (E-divisive)",
        model_id="e-divisive", model_version="1",
        params={"alpha": 1.0, "min_size": 30, "n_permutations": 199,
                "p_threshold": 0.05, "seed": 0,
                "triples": [list(t) for t in DEFAULT_ANGLE_TRIPLES]},
        input_kinds=("frame-sequence",), output_variants=("event",)),
        _e_divisive_runner)
    engine.register_filter(FilterDescriptor(
        filter_id="thumbnails", display_name="Timeline thumbnails",
        model_id="midpoint-thumbs", model_version="1",
        params={"count": 12, "max_px": 160},
        input_kinds=("frame-sequence",), output_variants=("thumbnail",)),
        _thumbnails_runner)


def load_plugin_catalog(engine: Engine, plugins_dir: str | Path) -> list[str]:
    """Register plugin filters described by JSON files in a directory.

    Each ``*.json`` file holds one descriptor: ``{"filter_id", "display_name",
    "model_id", "model_version", "command": [...], "params": {...},
    "input_kinds": [...], "output_variants": [...]}``. Returns the ids
    registered; a bad file raises rather than being skipped silently.
    """
    registered = []
    pdir = Path(plugins_dir)
    if not pdir.exists():
        return registered
    for path in sorted(pdir.glob("*.json")):
        obj = json.loads(path.read_text("utf-8"))
        engine.register_filter(FilterDescriptor(
            filter_id=obj["filter_id"], display_name=obj.get("display_name", obj["filter_id"]),
            model_id=obj["model_id"], model_version=str(obj["model_version"]),
            params=obj.get("params", {}),
            input_kinds=tuple(obj.get("input_kinds", ())),
            output_variants=tuple(obj.get("output_variants", ("event",))),
            execution="plugin", command=[str(c) for c in obj["command"]]))
        registered.append(obj["filter_id"])
    return registered
