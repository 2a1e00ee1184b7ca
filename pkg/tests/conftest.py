"""Shared fixtures: synthetic media builders, engine wiring, mock plugins."""

from __future__ import annotations

import json
import math
import sys
import textwrap
from pathlib import Path

import numpy as np
import pytest
from PIL import Image
from scipy.io import wavfile

from sessionlens.engine import Engine, register_builtins
from sessionlens.storage import ProjectStore

REPO_ROOT = Path(__file__).resolve().parent.parent
STUB_PLUGIN = REPO_ROOT / "plugin_ref" / "emotion_stub.py"


# ---------------------------------------------------------------------------
# media builders

def make_wav(path: Path, freq_hz: float = 440.0, seconds: float = 2.0,
             rate: int = 16000, amplitude: float = 0.6,
             encoding: str = "int16") -> Path:
    t = np.arange(int(seconds * rate)) / rate
    x = amplitude * np.sin(2 * np.pi * freq_hz * t)
    if encoding == "int16":
        wavfile.write(str(path), rate, (x * 32767).astype(np.int16))
    elif encoding == "float32":
        wavfile.write(str(path), rate, x.astype(np.float32))
    else:
        raise ValueError(encoding)
    return path


def make_silence_wav(path: Path, seconds: float = 1.0, rate: int = 16000) -> Path:
    wavfile.write(str(path), rate, np.zeros(int(seconds * rate), dtype=np.int16))
    return path


def make_srt(path: Path, cues: list[tuple[int, int, str]] | None = None) -> Path:
    if cues is None:
        cues = [(200, 1000, "okay I will try the search box"),
                (1200, 1900, "this is confusing"),
                (2500, 3300, "oh now I see it")]
    blocks = []
    for i, (t0, t1, text) in enumerate(cues, start=1):
        blocks.append(f"{i}\n{_srt_ts(t0)} --> {_srt_ts(t1)}\n{text}\n")
    path.write_text("\n".join(blocks), encoding="utf-8")
    return path


def _srt_ts(t_ms: int) -> str:
    h, rem = divmod(t_ms, 3600_000)
    m, rem = divmod(rem, 60_000)
    s, ms = divmod(rem, 1000)
    return f"{h:02d}:{m:02d}:{s:02d},{ms:03d}"


def default_joints(arm_angle: float) -> dict[str, list[float]]:
    """A 15-joint skeleton whose left wrist swings by ``arm_angle`` radians."""
    return {
        "shoulder_l": [0, 0, 0], "elbow_l": [1, 0, 0],
        "wrist_l": [1 + math.cos(arm_angle), math.sin(arm_angle), 0],
        "shoulder_r": [0, 1, 0], "elbow_r": [1, 1, 0], "wrist_r": [2, 1, 0],
        "hip_l": [0, -1, 0], "knee_l": [0, -2, 0], "ankle_l": [0, -3, 0],
        "hip_r": [0.5, -1, 0], "knee_r": [0.5, -2, 0], "ankle_r": [0.5, -3, 0],
        "head": [0, 2, 0], "neck": [0, 1.5, 0], "spine": [0, 0.5, 0],
    }


def make_frames(path: Path, n_frames: int = 90, fps: float = 30.0,
                pose: bool = True, arm_change_at: int | None = 45) -> Path:
    """Frame directory + manifest; optional pose with an arm-swing change point."""
    path.mkdir(parents=True, exist_ok=True)
    names = []
    for k in range(n_frames):
        name = f"{k:04d}.png"
        Image.new("RGB", (64, 48), ((k * 3) % 255, 100, 150)).save(path / name)
        names.append(name)
    manifest: dict = {"fps": fps, "frames": names}
    if pose:
        lines = []
        for k in range(n_frames):
            angle = 0.3 if (arm_change_at is None or k < arm_change_at) else 1.2
            lines.append(json.dumps(
                {"t_ms": round(k * 1000.0 / fps), "joints": default_joints(angle)}))
        (path / "pose.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")
        manifest["pose"] = "pose.jsonl"
    (path / "manifest.json").write_text(json.dumps(manifest), encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# engine wiring

@pytest.fixture
def store(tmp_path: Path) -> ProjectStore:
    return ProjectStore(tmp_path / "data")


@pytest.fixture
def engine(store: ProjectStore):
    eng = Engine(store, workers=2)
    register_builtins(eng)
    yield eng
    eng.shutdown()


@pytest.fixture
def project(store: ProjectStore) -> str:
    return store.create_project("test", project_id="test").id


# ---------------------------------------------------------------------------
# mock plugins (self-contained scripts written to tmp dirs)

_MOCK_HEADER = """\
import json, sys
def emit(o):
    sys.stdout.write(json.dumps(o, sort_keys=True) + "\\n"); sys.stdout.flush()
config = json.loads(sys.stdin.readline())
emit({"type": "descriptor", "name": "mock", "model_id": "mock", "model_version": "1",
      "outputs": [{"stream": "emotion", "variant": "event", "unit": None}]})
t1 = int(config.get("t1_ms", 0))
"""


def write_mock_plugin(tmp_path: Path, name: str, body: str) -> list[str]:
    """Write a mock plugin script; returns the argv to run it."""
    script = tmp_path / f"{name}.py"
    script.write_text(_MOCK_HEADER + textwrap.dedent(body), encoding="utf-8")
    return [sys.executable, str(script)]


BAD_TIMESTAMP_BODY = """\
emit({"type": "event", "t0_ms": 0, "t1_ms": 1000, "label": "neutral", "p": 0.9})
emit({"type": "event", "t0_ms": t1 + 1000, "t1_ms": t1 + 2000, "label": "neutral", "p": 0.9})
emit({"type": "done"})
"""

BAD_PROBABILITY_BODY = """\
emit({"type": "event", "t0_ms": 0, "t1_ms": 1000, "label": "neutral", "p": 1.2})
emit({"type": "done"})
"""

NONZERO_EXIT_BODY = """\
emit({"type": "event", "t0_ms": 0, "t1_ms": 1000, "label": "neutral", "p": 0.9})
sys.stderr.write("model weights corrupted\\n")
sys.exit(3)
"""

GOOD_WINDOWS_BODY = """\
hop = int(config["params"].get("hop_ms", 1000))
window = int(config["params"].get("window_ms", 1000))
starts = list(range(0, t1, hop))
for k, s in enumerate(starts):
    emit({"type": "event", "t0_ms": s, "t1_ms": min(s + window, t1),
          "label": "neutral", "p": 0.5})
    emit({"type": "progress", "fraction": (k + 1) / len(starts)})
emit({"type": "done"})
"""
