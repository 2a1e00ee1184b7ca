"""Build a synthetic demo session and ingest it into a data directory.

Creates a wav whose tone steps through five "utterances" matching an SRT
transcript, a frame sequence with an arm-swing pose change halfway
through, and a plugin catalog entry for the stub emotion classifier.
With ``--run`` the full filter set executes so the server starts with
populated timelines:

    python3 scripts/make_demo_session.py --data-dir data --run
    sessionlens --data-dir data serve
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import click
import numpy as np
from PIL import Image
from scipy.io import wavfile

from sessionlens.annotations import create_annotation
from sessionlens.cli import build_engine
from sessionlens.errors import SessionlensError

REPO_ROOT = Path(__file__).resolve().parent.parent
STUB = REPO_ROOT / "plugin_ref" / "emotion_stub.py"
FILTER_SET = ["pitch", "speech_rate", "joint_angles", "e_divisive",
              "classify_windows", "thumbnails"]

# (t0_ms, t1_ms, tone_hz, text) per utterance; silence in the gaps
UTTERANCES = [
    (500, 2200, 200.0, "okay let me try the search box first"),
    (2800, 4600, 230.0, "hmm that is not what I expected"),
    (5200, 7400, 260.0, "oh wait the filter panel is over here"),
    (8000, 9600, 300.0, "now it shows exactly what I wanted"),
    (10200, 11600, 330.0, "that was harder to find than it should be"),
]
DURATION_S = 12.0
RATE = 16000
FPS = 30.0
N_FRAMES = 360
POSE_CHANGE_FRAME = 180


def write_wav(path: Path) -> Path:
    x = np.zeros(int(DURATION_S * RATE))
    for t0, t1, freq, _ in UTTERANCES:
        lo, hi = int(t0 / 1000 * RATE), int(t1 / 1000 * RATE)
        t = np.arange(hi - lo) / RATE
        x[lo:hi] = 0.6 * np.sin(2 * np.pi * freq * t)
    wavfile.write(str(path), RATE, (x * 32767).astype(np.int16))
    return path


def srt_ts(t_ms: int) -> str:
    h, rem = divmod(t_ms, 3600_000)
    m, rem = divmod(rem, 60_000)
    s, ms = divmod(rem, 1000)
    return f"{h:02d}:{m:02d}:{s:02d},{ms:03d}"


def write_srt(path: Path) -> Path:
    blocks = [f"{i}\n{srt_ts(t0)} --> {srt_ts(t1)}\n{text}\n"
              for i, (t0, t1, _, text) in enumerate(UTTERANCES, start=1)]
    path.write_text("\n".join(blocks), encoding="utf-8")
    return path


def skeleton(arm_angle: float) -> dict[str, list[float]]:
    return {
        "shoulder_l": [0, 0, 0], "elbow_l": [1, 0, 0],
        "wrist_l": [1 + math.cos(arm_angle), math.sin(arm_angle), 0],
        "shoulder_r": [0, 1, 0], "elbow_r": [1, 1, 0], "wrist_r": [2, 1, 0],
        "hip_l": [0, -1, 0], "knee_l": [0, -2, 0], "ankle_l": [0, -3, 0],
        "hip_r": [0.5, -1, 0], "knee_r": [0.5, -2, 0], "ankle_r": [0.5, -3, 0],
        "head": [0, 2, 0], "neck": [0, 1.5, 0], "spine": [0, 0.5, 0],
    }


def write_frames(root: Path) -> Path:
    """Frames show a sliding bar so thumbnails are tellable apart."""
    root.mkdir(parents=True, exist_ok=True)
    names = []
    for k in range(N_FRAMES):
        img = Image.new("RGB", (160, 90), (18, 18, 28))
        x0 = int(k / N_FRAMES * 150)
        for x in range(x0, min(x0 + 10, 160)):
            for y in range(30, 60):
                img.putpixel((x, y), (240, 180, 40))
        name = f"{k:04d}.png"
        img.save(root / name)
        names.append(name)
    lines = []
    for k in range(N_FRAMES):
        angle = 0.3 if k < POSE_CHANGE_FRAME else 1.2
        lines.append(json.dumps({"t_ms": round(k * 1000.0 / FPS),
                                 "joints": skeleton(angle)}))
    (root / "pose.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")
    (root / "manifest.json").write_text(
        json.dumps({"fps": FPS, "frames": names, "pose": "pose.jsonl"}),
        encoding="utf-8")
    return root


def write_plugin_catalog(data_dir: Path) -> None:
    plugins = data_dir / "plugins"
    plugins.mkdir(parents=True, exist_ok=True)
    (plugins / "classify_windows.json").write_text(json.dumps({
        "filter_id": "classify_windows", "display_name": "Emotion windows (stub)",
        "model_id": "emotion-stub", "model_version": "1",
        "command": ["python3", str(STUB)],
        "params": {"window_ms": 1000, "hop_ms": 1000},
        "input_kinds": ["audio-wav"], "output_variants": ["event"],
    }, indent=2), encoding="utf-8")


@click.command()
@click.option("--data-dir", type=click.Path(path_type=Path), default=Path("data"))
@click.option("--media-dir", type=click.Path(path_type=Path), default=None,
              help="Where generated media lands (default: DATA_DIR/demo-media).")
@click.option("--project", default="demo")
@click.option("--run", "run_filters", is_flag=True,
              help="Execute the full filter set after ingesting.")
def main(data_dir: Path, media_dir: Path | None, project: str,
         run_filters: bool) -> None:
    media_dir = media_dir or data_dir / "demo-media"
    media_dir.mkdir(parents=True, exist_ok=True)
    write_plugin_catalog(data_dir)

    store, engine = build_engine(data_dir)
    try:
        try:
            store.get_project(project)
        except SessionlensError:
            store.create_project(name=project, project_id=project)
        recordings = [
            store.add_recording(project, write_wav(media_dir / "session.wav"),
                                "audio-wav"),
            store.add_recording(project, write_srt(media_dir / "session.srt"),
                                "transcript"),
            store.add_recording(project, write_frames(media_dir / "frames"),
                                "frame-sequence"),
        ]
        for rec in recordings:
            click.echo(f"ingested {rec.id} kind={rec.kind} "
                       f"duration_ms={rec.duration_ms}")

        if run_filters:
            jobs = engine.wait(engine.schedule_all(project, FILTER_SET,
                                                   {"min_size": 30}))
            for job in jobs:
                click.echo(f"{job.filter_id:18s} {job.state:7s} "
                           f"{job.error or ''}")
            pitch_info = next(i for i in store.list_streams(project)
                              if i.filter_id == "pitch")
            ann = create_annotation(
                store, project, pitch_info.id, "interval", 5200, 7400,
                "user recovers after finding the filter panel", "demo")
            click.echo(f"annotation {ann.id} on {pitch_info.id}")
            for info in store.list_streams(project):
                click.echo(f"stream {info.id:40s} variant={info.variant}")
    finally:
        engine.shutdown()


if __name__ == "__main__":
    main()
