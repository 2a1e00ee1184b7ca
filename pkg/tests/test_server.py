"""HTTP API surface: uploads, jobs, SSE, streams, annotations, telemetry."""

from __future__ import annotations

import io
import json
import time
import zipfile

import pytest
from fastapi.testclient import TestClient

from conftest import make_frames, make_srt, make_wav
from sessionlens.config import ServiceConfig
from sessionlens.server import create_app


@pytest.fixture
def client(tmp_path):
    app = create_app(ServiceConfig(data_dir=tmp_path / "data"))
    with TestClient(app, raise_server_exceptions=False) as c:
        yield c


@pytest.fixture
def project_id(client):
    return client.post("/projects", json={"name": "study-1"}).json()["project_id"]


def upload_wav(client, project_id, tmp_path, **kw):
    path = make_wav(tmp_path / "a.wav", **kw)
    with path.open("rb") as fh:
        r = client.post(f"/projects/{project_id}/recordings",
                        files={"file": ("a.wav", fh, "audio/wav")},
                        data={"kind": "audio-wav"})
    assert r.status_code == 200, r.text
    return r.json()


def wait_for_job(client, job_id, timeout_s=30.0):
    deadline = time.monotonic() + timeout_s
    while time.monotonic() < deadline:
        job = client.get(f"/jobs/{job_id}").json()
        if job["state"] in ("done", "failed", "cached"):
            return job
        time.sleep(0.05)
    raise AssertionError("job did not finish")


class TestProjects:
    def test_healthz(self, client):
        assert client.get("/healthz").json() == {"status": "ok"}

    def test_create_and_list(self, client):
        pid = client.post("/projects", json={"name": "p1"}).json()["project_id"]
        names = {p["project_id"]: p["name"]
                 for p in client.get("/projects").json()["projects"]}
        assert names[pid] == "p1"

    def test_idempotent_create(self, client):
        body = {"name": "once", "request_id": "req-1"}
        first = client.post("/projects", json=body).json()
        second = client.post("/projects", json=body).json()
        assert first == second
        assert sum(1 for p in client.get("/projects").json()["projects"]
                   if p["name"] == "once") == 1

    def test_error_shape(self, client):
        r = client.get("/jobs/j-none")
        assert r.status_code == 404
        body = r.json()
        assert body["code"] == "not_found"
        assert "unknown job" in body["message"]
        assert "detail" in body


class TestRecordings:
    def test_wav_upload_probed(self, client, project_id, tmp_path):
        rec = upload_wav(client, project_id, tmp_path, seconds=2.0)
        assert rec["kind"] == "audio-wav"
        assert rec["duration_ms"] == 2000
        listed = client.get(f"/projects/{project_id}/recordings").json()["recordings"]
        assert [r["id"] for r in listed] == [rec["id"]]

    def test_duplicate_upload_dedupes(self, client, project_id, tmp_path):
        a = upload_wav(client, project_id, tmp_path)
        b = upload_wav(client, project_id, tmp_path)
        assert a["id"] == b["id"]
        assert len(client.get(
            f"/projects/{project_id}/recordings").json()["recordings"]) == 1

    def test_zip_frame_sequence_upload(self, client, project_id, tmp_path):
        frames = make_frames(tmp_path / "frames", n_frames=30)
        buf = io.BytesIO()
        with zipfile.ZipFile(buf, "w") as zf:
            for p in frames.iterdir():
                zf.write(p, p.name)
        buf.seek(0)
        r = client.post(f"/projects/{project_id}/recordings",
                        files={"file": ("frames.zip", buf, "application/zip")},
                        data={"kind": "frame-sequence"})
        assert r.status_code == 200, r.text
        assert r.json()["duration_ms"] == 1000

    def test_transcript_upload_creates_text_stream(self, client, project_id,
                                                   tmp_path):
        path = make_srt(tmp_path / "t.srt")
        with path.open("rb") as fh:
            r = client.post(f"/projects/{project_id}/recordings",
                            files={"file": ("t.srt", fh, "text/plain")},
                            data={"kind": "transcript"})
        assert r.status_code == 200
        streams = client.get(f"/projects/{project_id}/streams").json()["streams"]
        assert any(s["variant"] == "text" for s in streams)

    def test_kind_mismatch_400(self, client, project_id, tmp_path):
        path = make_wav(tmp_path / "a.wav")
        with path.open("rb") as fh:
            r = client.post(f"/projects/{project_id}/recordings",
                            files={"file": ("a.wav", fh, "audio/wav")},
                            data={"kind": "transcript"})
        assert r.status_code == 400
        assert r.json()["code"] == "media_format"


class TestJobs:
    def test_filter_catalog(self, client):
        ids = {f["filter_id"] for f in client.get("/filters").json()["filters"]}
        assert "pitch" in ids and "e_divisive" in ids

    def test_run_pitch_to_done(self, client, project_id, tmp_path):
        rec = upload_wav(client, project_id, tmp_path)
        r = client.post(f"/projects/{project_id}/jobs",
                        json={"recording_id": rec["id"], "filter_ids": ["pitch"]})
        job = wait_for_job(client, r.json()["jobs"][0]["job_id"])
        assert job["state"] == "done"
        assert len(job["produced_stream_ids"]) == 1

    def test_rerun_reports_cached(self, client, project_id, tmp_path):
        rec = upload_wav(client, project_id, tmp_path)
        body = {"recording_id": rec["id"], "filter_ids": ["pitch"]}
        first = client.post(f"/projects/{project_id}/jobs", json=body)
        wait_for_job(client, first.json()["jobs"][0]["job_id"])
        second = client.post(f"/projects/{project_id}/jobs", json=body)
        job = wait_for_job(client, second.json()["jobs"][0]["job_id"])
        assert job["state"] == "cached"

    def test_missing_filter_ids_400(self, client, project_id):
        r = client.post(f"/projects/{project_id}/jobs", json={})
        assert r.status_code == 400

    def test_unknown_filter_404(self, client, project_id, tmp_path):
        rec = upload_wav(client, project_id, tmp_path)
        r = client.post(f"/projects/{project_id}/jobs",
                        json={"recording_id": rec["id"],
                              "filter_ids": ["sentiment"]})
        assert r.status_code == 404

    def test_sse_terminal_event(self, client, project_id, tmp_path):
        rec = upload_wav(client, project_id, tmp_path)
        r = client.post(f"/projects/{project_id}/jobs",
                        json={"recording_id": rec["id"], "filter_ids": ["pitch"]})
        jid = r.json()["jobs"][0]["job_id"]
        wait_for_job(client, jid)
        events = []
        with client.stream("GET", f"/jobs/{jid}/events") as resp:
            assert resp.headers["content-type"].startswith("text/event-stream")
            for line in resp.iter_lines():
                if line.startswith("data: "):
                    events.append(json.loads(line[6:]))
        assert len(events) == 1
        assert events[0]["type"] in ("done", "cached")
        assert events[0]["stream_ids"]


class TestStreams:
    @pytest.fixture
    def pitch_stream(self, client, project_id, tmp_path):
        rec = upload_wav(client, project_id, tmp_path)
        r = client.post(f"/projects/{project_id}/jobs",
                        json={"recording_id": rec["id"], "filter_ids": ["pitch"]})
        job = wait_for_job(client, r.json()["jobs"][0]["job_id"])
        return job["produced_stream_ids"][0]

    def test_paged_fetch(self, client, pitch_stream):
        page = client.get(f"/streams/{pitch_stream}",
                          params={"from": 500, "to": 1000}).json()
        assert page["from"] == 500 and page["to"] == 1000
        assert all(500 <= r["t_ms"] <= 1000 for r in page["records"])
        assert page["stream"]["unit"] == "Hz"

    def test_full_fetch_default_range(self, client, pitch_stream):
        page = client.get(f"/streams/{pitch_stream}").json()
        listed = client.get(f"/streams/{pitch_stream}",
                            params={"from": 0, "to": 10**9}).json()
        assert page["records"] == listed["records"]

    def test_unknown_stream_404(self, client):
        assert client.get("/streams/nope").status_code == 404


class TestAnnotationsApi:
    @pytest.fixture
    def stream_id(self, client, project_id, tmp_path):
        rec = upload_wav(client, project_id, tmp_path)
        r = client.post(f"/projects/{project_id}/jobs",
                        json={"recording_id": rec["id"], "filter_ids": ["pitch"]})
        return wait_for_job(client,
                            r.json()["jobs"][0]["job_id"])["produced_stream_ids"][0]

    def test_crud_cycle(self, client, project_id, stream_id):
        made = client.post(f"/projects/{project_id}/annotations",
                           json={"stream_id": stream_id, "kind": "point",
                                 "t0_ms": 500, "t1_ms": 500, "text": "hm",
                                 "author": "sam"}).json()
        aid = made["id"]
        got = client.get(f"/projects/{project_id}/annotations/{aid}").json()
        assert got["text"] == "hm"
        patched = client.patch(f"/projects/{project_id}/annotations/{aid}",
                               json={"text": "hm!"}).json()
        assert patched["text"] == "hm!"
        assert client.delete(
            f"/projects/{project_id}/annotations/{aid}").json()["deleted"] == aid
        assert client.get(
            f"/projects/{project_id}/annotations").json()["annotations"] == []

    def test_invalid_interval_400(self, client, project_id, stream_id):
        r = client.post(f"/projects/{project_id}/annotations",
                        json={"stream_id": stream_id, "kind": "interval",
                              "t0_ms": 900, "t1_ms": 100, "text": "x",
                              "author": "sam"})
        assert r.status_code == 400

    def test_annotlette_endpoint(self, client, project_id, stream_id):
        made = client.post(f"/projects/{project_id}/annotations",
                           json={"stream_id": stream_id, "kind": "interval",
                                 "t0_ms": 200, "t1_ms": 900, "text": "zone",
                                 "author": "sam"}).json()
        r = client.get(f"/annotations/{made['id']}/annotlette.svg")
        assert r.status_code == 200
        assert r.headers["content-type"].startswith("image/svg+xml")
        assert r.text.startswith("<svg")


class TestExportAndTelemetry:
    def test_export_csv(self, client, project_id, tmp_path):
        rec = upload_wav(client, project_id, tmp_path)
        r = client.post(f"/projects/{project_id}/jobs",
                        json={"recording_id": rec["id"], "filter_ids": ["pitch"]})
        wait_for_job(client, r.json()["jobs"][0]["job_id"])
        out = client.get(f"/projects/{project_id}/export",
                         params={"what": "streams", "format": "csv"})
        assert out.headers["content-type"].startswith("text/csv")
        assert out.text.splitlines()[0].startswith("stream_id,")

    def test_telemetry_single_and_batch(self, client, project_id):
        r = client.post(f"/projects/{project_id}/telemetry",
                        json={"kind": "seek", "t_video_ms": 61000})
        assert r.json() == {"accepted": 1}
        r = client.post(f"/projects/{project_id}/telemetry",
                        json={"events": [
                            {"kind": "play", "t_video_ms": 0},
                            {"kind": "pause", "t_video_ms": 2500}]})
        assert r.json() == {"accepted": 2}
        page = client.get("/streams/telemetry").json()
        labels = {rec["label"] for rec in page["records"]}
        assert labels == {"seek", "play", "pause"}
        times = [rec["t0_ms"] for rec in page["records"]]
        assert times == sorted(times)

    def test_unknown_telemetry_kind_400(self, client, project_id):
        r = client.post(f"/projects/{project_id}/telemetry",
                        json={"kind": "sneeze", "t_video_ms": 0})
        assert r.status_code == 400
