"""Acceptance suite: one test per core guarantee of the platform.

Each test prints a single ``PASS``/``FAIL`` line (outside pytest capture)
so a full run reads as a checklist. Tolerances are part of the contract;
tightening them here must not be compensated by loosening the code.
"""

from __future__ import annotations

import itertools
import json
import signal
import socket
import subprocess
import sys
import time
import xml.etree.ElementTree as ET
from contextlib import contextmanager
from pathlib import Path

import httpx
import numpy as np
import pytest
from click.testing import CliRunner

from conftest import (
    BAD_PROBABILITY_BODY,
    BAD_TIMESTAMP_BODY,
    NONZERO_EXIT_BODY,
    STUB_PLUGIN,
    make_frames,
    make_silence_wav,
    make_srt,
    make_wav,
    write_mock_plugin,
)
from sessionlens.annotations import create_annotation
from sessionlens.cli import main as cli_main
from sessionlens.engine import Engine, FilterDescriptor, register_builtins
from sessionlens.filters.pitch import pitch_track
from sessionlens.filters.pose import angle_deg
from sessionlens.filters.segments import e_divisive, sample_divergence
from sessionlens.filters.speech import speech_rate
from sessionlens.ingest import AudioBuffer
from sessionlens.model import (
    DataStream,
    TextSegment,
    dump_records,
    record_from_json,
    validate_stream,
)
from sessionlens.report import GROUP_IDS, NO_DIALOGUE_PLACEHOLDER
from sessionlens.storage import ProjectStore

SVG_NS = "{http://www.w3.org/2000/svg}"


@pytest.fixture
def announce(capfd):
    """One uncaptured PASS/FAIL line per acceptance criterion."""

    @contextmanager
    def _criterion(label: str):
        try:
            yield
        except BaseException:
            with capfd.disabled():
                print(f"FAIL {label}", flush=True)
            raise
        with capfd.disabled():
            print(f"PASS {label}", flush=True)

    return _criterion


def assert_stream_invariants(store: ProjectStore, project_id: str):
    """Every persisted stream revalidates against its recording duration."""
    durations = {r.id: r.duration_ms
                 for r in store.get_project(project_id).recordings}
    infos = store.list_streams(project_id)
    assert len({i.id for i in infos}) == len(infos), "duplicated stream ids"
    for info in infos:
        stream = store.get_stream(project_id, info.id)
        validate_stream(stream, duration_ms=durations.get(info.recording_id))
    return infos


# ---------------------------------------------------------------------------
# change-point estimation

def test_change_point_recovery(announce):
    with announce("change-point recovery: +3-sigma shifts at 100/200, "
                  "constant-series control, < 10 s"):
        t_start = time.monotonic()
        recovered = 0
        for run in range(20):
            rng = np.random.default_rng(run)
            x = rng.standard_normal(300)
            x[100:] += 3.0
            x[200:] += 3.0
            cps = sorted(e_divisive(x, seed=run).change_points)
            if (any(abs(c - 100) <= 5 for c in cps)
                    and any(abs(c - 200) <= 5 for c in cps)):
                recovered += 1
        for run in range(20):
            assert e_divisive(np.full(300, 2.5), seed=run).change_points == []
        elapsed = time.monotonic() - t_start
        assert recovered >= 19, f"recovered both shifts in only {recovered}/20 runs"
        assert elapsed < 10.0, f"took {elapsed:.1f}s"


def test_divergence_matches_brute_force(announce):
    def brute(x, y, alpha):
        m, n = len(x), len(y)
        cross = sum(abs(a - b) ** alpha for a in x for b in y)
        wx = sum(abs(a - b) ** alpha for a, b in itertools.combinations(x, 2))
        wy = sum(abs(a - b) ** alpha for a, b in itertools.combinations(y, 2))
        e = 2.0 * cross / (m * n) - wx / (m * (m - 1) / 2) - wy / (n * (n - 1) / 2)
        return e, m * n / (m + n) * e

    with announce("divergence statistic: 100 random pairs vs O(n^2) "
                  "brute force within 1e-9"):
        rng = np.random.default_rng(7)
        alphas = [0.5, 1.0, 1.5]
        for case in range(100):
            m, n = rng.integers(2, 65, size=2)
            scale = rng.uniform(0.1, 10.0)
            x = rng.standard_normal(m) * scale
            y = rng.standard_normal(n) * scale + rng.uniform(-2, 2)
            alpha = alphas[case % 3]
            e_hat, q_hat = sample_divergence(x, y, alpha=alpha)
            e_ref, q_ref = brute(x.tolist(), y.tolist(), alpha)
            assert abs(e_hat - e_ref) <= 1e-9
            assert abs(q_hat - q_ref) <= 1e-9


# ---------------------------------------------------------------------------
# audio and transcript features

def tone(freq_hz: float, seconds: float = 2.0, rate: int = 16000,
         amplitude: float = 0.6) -> AudioBuffer:
    t = np.arange(int(seconds * rate)) / rate
    return AudioBuffer(sample_rate_hz=rate,
                       samples=amplitude * np.sin(2 * np.pi * freq_hz * t))


def test_pitch_tracking(announce):
    with announce("pitch: sine medians within 1%, silence unvoiced, "
                  "amplitude-invariant"):
        for freq in (110.0, 220.0, 440.0, 880.0):
            stream = pitch_track(tone(freq), fmax_hz=1000.0)
            voiced = [s.value for s in stream.payload if s.voiced]
            assert len(voiced) > 100
            median = float(np.median(voiced))
            assert abs(median - freq) / freq <= 0.01, (freq, median)

        silence = AudioBuffer(sample_rate_hz=16000,
                              samples=np.zeros(16000, dtype=np.float64))
        assert sum(s.voiced for s in pitch_track(silence).payload) == 0

        loud = tone(440.0)
        quiet = AudioBuffer(sample_rate_hz=loud.sample_rate_hz,
                            samples=loud.samples * 0.1)
        assert dump_records(pitch_track(loud).payload) \
            == dump_records(pitch_track(quiet).payload)


def rate_oracle(segments: list[TextSegment], window_ms: int, hop_ms: int,
                duration_ms: int) -> list[tuple[int, float]]:
    """Plain-loop midpoint attribution, final window closed at the end."""
    mids = [((s.t0_ms + s.t1_ms) / 2.0, s.word_count) for s in segments]
    window_s = window_ms / 1000.0
    out = []
    start = 0
    while start < duration_ms:
        end = start + window_ms
        last = end >= duration_ms
        words = sum(wc for mid, wc in mids
                    if mid >= start and (mid <= duration_ms if last else mid < end))
        out.append((start, words / window_s))
        start += hop_ms
    return out


def random_transcript(rng: np.random.Generator) -> DataStream:
    segments = []
    t = int(rng.integers(0, 500))
    for _ in range(int(rng.integers(0, 12))):
        t0 = t + int(rng.integers(0, 2000))
        t1 = t0 + 1 + int(rng.integers(0, 3000))
        segments.append(TextSegment(t0_ms=t0, t1_ms=t1,
                                    text=" ".join(["w"] * int(rng.integers(1, 9)))))
        t = t1
    return DataStream(id="t", recording_id="r", filter_id="transcript",
                      variant="text", payload=segments)


def test_speech_rate_oracle(announce):
    with announce("speech rate: 200 random transcripts equal the midpoint "
                  "oracle; hop=window conserves word count"):
        for case in range(200):
            rng = np.random.default_rng(1000 + case)
            transcript = random_transcript(rng)
            window_ms = int(rng.choice([500, 1000, 2000, 3000, 5000]))
            hop_ms = int(rng.choice([250, 500, 1000, 2000]))
            duration_ms = max((s.t1_ms for s in transcript.payload), default=0) \
                + int(rng.integers(0, 2000))
            got = speech_rate(transcript, window_ms=window_ms, hop_ms=hop_ms,
                              duration_ms=duration_ms)
            expected = rate_oracle(transcript.payload, window_ms, hop_ms,
                                   duration_ms)
            assert [(s.t_ms, s.value) for s in got.payload] == expected

        for case in range(50):
            rng = np.random.default_rng(5000 + case)
            transcript = random_transcript(rng)
            total = sum(s.word_count for s in transcript.payload)
            window_ms = int(rng.choice([500, 1000, 2000]))
            got = speech_rate(transcript, window_ms=window_ms, hop_ms=window_ms)
            assert sum(s.value * (window_ms / 1000.0)
                       for s in got.payload) == total


# ---------------------------------------------------------------------------
# pose geometry

def test_joint_angle_geometry(announce):
    with announce("joint angles: canonical fixtures within 1e-9 deg, "
                  "similarity-invariant within 1e-6 deg"):
        assert abs(angle_deg((1, 0, 0), (0, 0, 0), (0, 1, 0)) - 90.0) <= 1e-9
        assert abs(angle_deg((-1, 0, 0), (0, 0, 0), (1, 0, 0)) - 180.0) <= 1e-9
        assert abs(angle_deg((2, 0, 0), (0, 0, 0), (3, 0, 0)) - 0.0) <= 1e-9
        equilateral = angle_deg((1, 0, 0), (0, 0, 0),
                                (0.5, np.sqrt(3.0) / 2.0, 0))
        assert abs(equilateral - 60.0) <= 1e-9

        rng = np.random.default_rng(11)
        done = 0
        while done < 50:
            pts = rng.standard_normal((3, 3))
            if min(np.linalg.norm(pts[0] - pts[1]),
                   np.linalg.norm(pts[2] - pts[1])) < 1e-3:
                continue
            base = angle_deg(tuple(pts[0]), tuple(pts[1]), tuple(pts[2]))
            if base is None or not 1.0 < base < 179.0:
                continue
            q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
            if np.linalg.det(q) < 0:
                q[:, 0] = -q[:, 0]
            scale = rng.uniform(0.2, 5.0)
            shift = rng.standard_normal(3)
            moved = [tuple(scale * (q @ p) + shift) for p in pts]
            assert abs(angle_deg(*moved) - base) <= 1e-6
            done += 1


# ---------------------------------------------------------------------------
# cache and plugins

def ingest_wav(store, project, tmp_path, **kwargs):
    return store.add_recording(project, make_wav(tmp_path / "clip.wav", **kwargs),
                               "audio-wav")


def test_cache_contract(announce, store, engine, project, tmp_path):
    with announce("cache: identical re-schedule executes nothing and "
                  "rematerializes byte-identical files; one param change "
                  "executes once; shared model stage never re-runs"):
        rec = ingest_wav(store, project, tmp_path)
        job = engine.wait(engine.schedule(project, rec.id, ["pitch"]))[0]
        assert job.state == "done"
        baseline = engine.cache.total_executions
        path = store.stream_path(project, job.produced_stream_ids[0])
        original = path.read_bytes()

        path.write_bytes(b"")
        rerun = engine.wait(engine.schedule(project, rec.id, ["pitch"]))[0]
        assert rerun.state == "cached"
        assert engine.cache.total_executions == baseline
        assert path.read_bytes() == original

        changed = engine.wait(engine.schedule(project, rec.id, ["pitch"],
                                              {"fmax_hz": 500.0}))[0]
        assert changed.state == "done"
        assert engine.cache.total_executions == baseline + 1

        frames = store.add_recording(project, make_frames(tmp_path / "frames"),
                                     "frame-sequence")
        before = engine.cache.total_executions
        engine.wait(engine.schedule(project, frames.id, ["joint_angles"],
                                    {"min_size": 10}))
        assert engine.cache.total_executions == before + 2  # stage + filter
        engine.wait(engine.schedule(project, frames.id, ["e_divisive"],
                                    {"min_size": 10}))
        assert engine.cache.total_executions == before + 3  # filter only
        stage_dirs = [d for d in (store.root / "cache").iterdir()
                      if "pose-source" in d.name]
        assert len(stage_dirs) == 1


def drain_events(feed) -> list[dict]:
    events = []
    while True:
        event = feed.get(timeout=30.0)
        events.append(event)
        if event.get("type") in ("done", "failed", "cached"):
            return events


def test_plugin_conformance(announce, store, engine, project, tmp_path):
    with announce("plugins: stub completes a 10 s fixture with validated "
                  "output; malformed plugins fail with diagnostics and "
                  "persist nothing"):
        rec = ingest_wav(store, project, tmp_path, seconds=10.0, freq_hz=220.0)
        engine.register_filter(FilterDescriptor(
            filter_id="classify_windows", display_name="Emotion windows",
            model_id="emotion-stub", model_version="1",
            params={"window_ms": 1000, "hop_ms": 1000},
            input_kinds=("audio-wav",), output_variants=("event",),
            execution="plugin", command=[sys.executable, str(STUB_PLUGIN)]))
        jobs = engine.schedule(project, rec.id, ["classify_windows"])
        feed = engine.subscribe(jobs[0].job_id)
        engine.wait(jobs)
        events = drain_events(feed)
        assert events[-1]["type"] == "done"
        fractions = [e["progress"] for e in events if e["type"] == "progress"]
        assert fractions == sorted(fractions)

        stream_id = jobs[0].produced_stream_ids[0]
        payload = store.get_stream(project, stream_id).payload
        assert len(payload) == 10
        validate_stream(store.get_stream(project, stream_id),
                        duration_ms=rec.duration_ms)
        assert all(0.0 <= r.probability <= 1.0 for r in payload)

        cases = [("bad_ts", BAD_TIMESTAMP_BODY, "plugin emitted invalid sample"),
                 ("bad_p", BAD_PROBABILITY_BODY, "invalid probability 1.2"),
                 ("bad_exit", NONZERO_EXIT_BODY, "exited with code 3")]
        for name, body, diagnostic in cases:
            engine.register_filter(FilterDescriptor(
                filter_id=name, display_name=name, model_id="mock",
                model_version="1", params={}, input_kinds=("audio-wav",),
                output_variants=("event",), execution="plugin",
                command=write_mock_plugin(tmp_path, name, body)))
            job = engine.wait(engine.schedule(project, rec.id, [name]))[0]
            assert job.state == "failed"
            assert diagnostic in job.error, (name, job.error)
            assert not [i for i in store.list_streams(project)
                        if i.filter_id == name]


# ---------------------------------------------------------------------------
# end-to-end headless run

def test_headless_pipeline(announce, tmp_path):
    with announce("headless run: ingest + full filter set exits 0, streams "
                  "valid, jsonl round-trips, annotlettes render"):
        data_dir = tmp_path / "data"
        plugins = data_dir / "plugins"
        plugins.mkdir(parents=True)
        (plugins / "classify_windows.json").write_text(json.dumps({
            "filter_id": "classify_windows", "display_name": "Emotion windows",
            "model_id": "emotion-stub", "model_version": "1",
            "command": [sys.executable, str(STUB_PLUGIN)],
            "params": {"window_ms": 1000, "hop_ms": 1000},
            "input_kinds": ["audio-wav"], "output_variants": ["event"],
        }), encoding="utf-8")

        wav = make_wav(tmp_path / "clip.wav", seconds=12.0, freq_hz=220.0)
        srt = make_srt(tmp_path / "talk.srt")
        frames = make_frames(tmp_path / "frames")

        runner = CliRunner()

        def cli(*args):
            return runner.invoke(cli_main,
                                 ["--data-dir", str(data_dir), *map(str, args)])

        result = cli("ingest", "--project", "demo", wav, srt, frames)
        assert result.exit_code == 0, result.output
        result = cli("run", "--project", "demo", "--filters",
                     "pitch,speech_rate,joint_angles,e_divisive,"
                     "classify_windows,thumbnails", "--params", "min_size=10")
        assert result.exit_code == 0, result.output + result.stderr
        assert "0 failed" in result.output

        store = ProjectStore(data_dir)
        infos = assert_stream_invariants(store, "demo")
        by_filter = {i.filter_id for i in infos}
        assert {"pitch", "speech_rate", "joint_angles", "e_divisive",
                "classify_windows", "thumbnails"} <= by_filter

        exported = cli("export", "--project", "demo", "--what", "streams",
                       "--format", "jsonl")
        assert exported.exit_code == 0
        rows: dict[str, list] = {}
        for line in exported.output.splitlines():
            row = json.loads(line)
            rows.setdefault(row["stream_id"], []).append(
                record_from_json(row["record"], row["variant"]))
        for info in infos:
            assert rows.get(info.id, []) == store.get_stream("demo", info.id).payload

        pitch_id = next(i.id for i in infos if i.filter_id == "pitch")
        point = create_annotation(store, "demo", pitch_id, "point", 600, 600,
                                  "glance here", "me")
        interval = create_annotation(store, "demo", pitch_id, "interval",
                                     500, 1500, "rising tone", "me")
        silent = create_annotation(store, "demo", pitch_id, "interval",
                                   8500, 9500, "quiet stretch", "me")

        for ann in (point, interval):
            out = tmp_path / f"{ann.id}.svg"
            rendered = cli("annotlette", "--project", "demo", "--out", out, ann.id)
            assert rendered.exit_code == 0, rendered.output
            root = ET.fromstring(out.read_text(encoding="utf-8"))
            groups = [g.get("id") for g in root.iter(f"{SVG_NS}g")]
            assert groups == list(GROUP_IDS)

        quiet_svg = cli("annotlette", "--project", "demo", silent.id)
        assert NO_DIALOGUE_PLACEHOLDER in quiet_svg.output


# ---------------------------------------------------------------------------
# crash recovery against the real server process

SLOW_WINDOWS_BODY = """\
import time
hop = int(config["params"].get("hop_ms", 500))
window = int(config["params"].get("window_ms", 500))
starts = list(range(0, t1, hop))
for k, s in enumerate(starts):
    time.sleep(0.15)
    emit({"type": "event", "t0_ms": s, "t1_ms": min(s + window, t1),
          "label": "neutral", "p": 0.5})
    emit({"type": "progress", "fraction": (k + 1) / len(starts)})
emit({"type": "done"})
"""


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def start_server(data_dir: Path, port: int, log_path: Path) -> subprocess.Popen:
    log = open(log_path, "ab")
    proc = subprocess.Popen(
        [sys.executable, "-m", "sessionlens.cli", "--data-dir", str(data_dir),
         "serve", "--host", "127.0.0.1", "--port", str(port)],
        stdout=log, stderr=log)
    base = f"http://127.0.0.1:{port}"
    deadline = time.monotonic() + 20.0
    while time.monotonic() < deadline:
        if proc.poll() is not None:
            raise RuntimeError(f"server exited early: {log_path.read_text()}")
        try:
            if httpx.get(f"{base}/healthz", timeout=1.0).status_code == 200:
                return proc
        except httpx.HTTPError:
            time.sleep(0.1)
    proc.kill()
    raise TimeoutError("server did not become healthy")


def poll_job(base: str, job_id: str) -> dict:
    return httpx.get(f"{base}/jobs/{job_id}", timeout=5.0).json()


def test_crash_recovery(announce, tmp_path):
    with announce("crash recovery: SIGKILL mid-job, restart finishes all "
                  "jobs with no duplicated streams"):
        data_dir = tmp_path / "data"
        store = ProjectStore(data_dir)
        store.create_project("test", project_id="test")
        rec = store.add_recording(
            "test", make_wav(tmp_path / "clip.wav", seconds=10.0), "audio-wav")
        plugins = data_dir / "plugins"
        plugins.mkdir(parents=True)
        (plugins / "slow.json").write_text(json.dumps({
            "filter_id": "slow_windows", "model_id": "mock", "model_version": "1",
            "command": write_mock_plugin(tmp_path, "slow_windows",
                                         SLOW_WINDOWS_BODY),
            "params": {"window_ms": 500, "hop_ms": 500},
            "input_kinds": ["audio-wav"], "output_variants": ["event"],
        }), encoding="utf-8")

        port = free_port()
        base = f"http://127.0.0.1:{port}"
        proc = start_server(data_dir, port, tmp_path / "server1.log")
        try:
            resp = httpx.post(f"{base}/projects/test/jobs", timeout=10.0, json={
                "filter_ids": ["slow_windows", "pitch"],
                "recording_id": rec.id})
            assert resp.status_code == 200, resp.text
            jobs = {j["filter_id"]: j["job_id"] for j in resp.json()["jobs"]}

            deadline = time.monotonic() + 15.0
            row = poll_job(base, jobs["slow_windows"])
            while not (row["state"] == "running" and row["progress"] >= 0.2):
                assert time.monotonic() < deadline, row
                assert row["state"] in ("queued", "running"), row
                time.sleep(0.05)
                row = poll_job(base, jobs["slow_windows"])
            assert row["progress"] < 1.0
        finally:
            proc.send_signal(signal.SIGKILL)
            proc.wait()

        port2 = free_port()
        base = f"http://127.0.0.1:{port2}"
        proc = start_server(data_dir, port2, tmp_path / "server2.log")
        try:
            deadline = time.monotonic() + 30.0
            states = {}
            while time.monotonic() < deadline:
                states = {fid: poll_job(base, jid)["state"]
                          for fid, jid in jobs.items()}
                if all(s in ("done", "failed", "cached") for s in states.values()):
                    break
                time.sleep(0.2)
            assert states.get("slow_windows") in ("done", "cached"), states
            assert states.get("pitch") in ("done", "cached"), states
        finally:
            proc.terminate()
            proc.wait(timeout=10.0)

        infos = assert_stream_invariants(store, "test")
        slow_streams = [i for i in infos if i.filter_id == "slow_windows"]
        assert len(slow_streams) == 1
        assert len(store.get_stream("test", slow_streams[0].id).payload) == 20
        assert len([i for i in infos if i.filter_id == "pitch"]) == 1
