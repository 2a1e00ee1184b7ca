"""Recording ingestion: WAV audio, frame sequences, transcripts, pose files.

Everything is file based. Video enters as a directory of frames plus a
manifest (``{"fps": 30, "frames": ["0001.png", ...]}``, optional
``"pose"`` key naming a JSONL skeleton file); transcoding real containers
to frames is an external step (extract frames at N fps to a directory).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from .errors import InvalidInputError, MediaFormatError
from .hashing import digest_bytes
from .model import RECORDING_KINDS, DataStream, Recording
from .transcripts import parse_transcript

MANIFEST_NAME = "manifest.json"


@dataclass
class AudioBuffer:
    """Decoded mono audio normalized to [-1, 1]."""

    sample_rate_hz: int
    samples: np.ndarray
    channel_count: int = 1

    @property
    def duration_ms(self) -> int:
        return round(len(self.samples) / self.sample_rate_hz * 1000)


@dataclass
class FrameSequence:
    """Ordered (t_ms, image path) pairs decoded from a frame-directory manifest."""

    fps: float
    frames: list[tuple[int, str]] = field(default_factory=list)

    @property
    def duration_ms(self) -> int:
        return round(len(self.frames) / self.fps * 1000)


@dataclass
class PoseFrame:
    """One skeleton observation: joint name -> (x, y, z)."""

    t_ms: int
    joints: dict[str, tuple[float, float, float]]


@dataclass
class PoseStream:
    """Complete skeleton frames plus the count of incomplete ones dropped.

    The declared joint-name set is the union over all frames; any frame
    missing a declared joint is marked incomplete and excluded here, with
    the count surfaced so downstream quality checks can report it.
    """

    frames: list[PoseFrame]
    joint_names: tuple[str, ...]
    skipped_incomplete: int = 0


# ---------------------------------------------------------------------------
# Content sniffing. Used to tell "you declared the wrong kind" apart from
# "this file is corrupt": a mismatch only fires when the bytes identifiably
# belong to a different supported kind.

def _sniff_kind(path: Path) -> str | None:
    if path.is_dir():
        return "frame-sequence" if (path / MANIFEST_NAME).exists() else None
    try:
        head = path.open("rb").read(64)
    except OSError:
        return None
    if head[:4] == b"RIFF" and head[8:12] == b"WAVE":
        return "audio-wav"
    try:
        text = head.decode("utf-8")
    except UnicodeDecodeError:
        return None
    stripped = text.lstrip()
    if stripped.startswith("WEBVTT") or stripped.startswith("{"):
        return "transcript"
    if stripped[:1].isdigit() and ("-->" in path.read_text("utf-8", errors="ignore")[:4096]):
        return "transcript"
    return None


def _mismatch_or(path: Path, declared: str, fallback_msg: str) -> MediaFormatError:
    sniffed = _sniff_kind(path)
    if sniffed is not None and sniffed != declared:
        return MediaFormatError(
            f"kind/content mismatch: declared {declared}, content looks like {sniffed}")
    return MediaFormatError(fallback_msg)


# ---------------------------------------------------------------------------
# WAV

def _decode_wav_path(path: Path) -> AudioBuffer:
    try:
        rate, data = wavfile.read(str(path))
    except ValueError as exc:
        if "Unknown wave file format" in str(exc):
            raise MediaFormatError(
                "unsupported encoding: only PCM 16-bit and 32-bit float WAV are "
                "readable; transcode externally (e.g. ffmpeg -c:a pcm_s16le)") from exc
        raise MediaFormatError(f"unreadable media: {exc}") from exc
    except Exception as exc:  # truncated headers raise various struct errors
        raise MediaFormatError(f"unreadable media: {exc}") from exc

    channel_count = 1 if data.ndim == 1 else data.shape[1]
    x = data.astype(np.float64)
    if data.dtype == np.int16:
        x /= 32768.0
    elif data.dtype == np.int32:
        x /= 2147483648.0
    elif data.dtype == np.uint8:
        x = (x - 128.0) / 128.0
    elif data.dtype not in (np.float32, np.float64):
        raise MediaFormatError(f"unsupported encoding: sample dtype {data.dtype}")
    if x.ndim == 2:
        x = x.mean(axis=1)
    return AudioBuffer(sample_rate_hz=int(rate), samples=x, channel_count=1)


def decode_wav(recording: Recording) -> AudioBuffer:
    """Decode an ingested audio-wav recording to a normalized mono buffer."""
    if recording.kind != "audio-wav":
        raise InvalidInputError(f"decode_wav requires audio-wav, got {recording.kind}")
    return _decode_wav_path(Path(recording.path))


# ---------------------------------------------------------------------------
# Frame sequences

def load_frame_sequence(recording: Recording) -> FrameSequence:
    if recording.kind != "frame-sequence":
        raise InvalidInputError(
            f"load_frame_sequence requires frame-sequence, got {recording.kind}")
    return _decode_frames_path(Path(recording.path))


def _decode_frames_path(root: Path) -> FrameSequence:
    manifest_path = root / MANIFEST_NAME
    try:
        manifest = json.loads(manifest_path.read_text("utf-8"))
        fps = float(manifest["fps"])
        names = list(manifest["frames"])
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise MediaFormatError(f"unreadable media: bad frame manifest: {exc}") from exc
    if not (fps > 0 and math.isfinite(fps)):
        raise MediaFormatError("unreadable media: fps must be > 0")
    frames: list[tuple[int, str]] = []
    for k, name in enumerate(names):
        fpath = root / name
        if not fpath.exists():
            raise MediaFormatError(f"unreadable media: missing frame file {name}")
        frames.append((round(k * 1000.0 / fps), str(fpath)))
    return FrameSequence(fps=fps, frames=frames)


def _digest_frame_dir(root: Path, manifest: dict) -> str:
    # digest covers the manifest plus every referenced file, in manifest order
    h = hashlib.sha256()
    h.update((root / MANIFEST_NAME).read_bytes())
    for name in manifest.get("frames", []):
        h.update((root / name).read_bytes())
    if manifest.get("pose"):
        h.update((root / manifest["pose"]).read_bytes())
    return h.hexdigest()


# ---------------------------------------------------------------------------
# Pose

def load_pose_stream(path: str | Path) -> PoseStream:
    """Load a skeleton-per-frame JSONL file of ``{"t_ms": int, "joints": {...}}``.

    Joint values are ``[x, y, z]`` triples. The declared joint set is the
    union across frames; frames missing any declared joint are dropped and
    counted in ``skipped_incomplete``.
    """
    return parse_pose_jsonl(Path(path).read_text("utf-8"))


def parse_pose_jsonl(text: str) -> PoseStream:
    """Parse skeleton JSONL text; see :func:`load_pose_stream`."""
    raw: list[PoseFrame] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            t_ms = int(obj["t_ms"])
            joints = {str(k): (float(v[0]), float(v[1]), float(v[2]))
                      for k, v in obj["joints"].items()}
        except (ValueError, KeyError, TypeError, IndexError) as exc:
            raise MediaFormatError(f"unreadable media: line {line_no}: {exc}") from exc
        raw.append(PoseFrame(t_ms=t_ms, joints=joints))
    names: set[str] = set()
    for f in raw:
        names.update(f.joints)
    declared = tuple(sorted(names))
    complete = [f for f in raw if set(f.joints) >= names]
    complete.sort(key=lambda f: f.t_ms)
    return PoseStream(frames=complete, joint_names=declared,
                      skipped_incomplete=len(raw) - len(complete))


# ---------------------------------------------------------------------------
# Ingestion entry point

def probe_recording(source: str | Path, declared_kind: str) -> Recording:
    """Probe ``source`` as ``declared_kind`` and build its Recording row.

    Pure metadata extraction: the returned Recording has an empty id and
    points at the source path; persistence (copying into the project tree,
    assigning the id) is the store's job.
    """
    if declared_kind not in RECORDING_KINDS:
        raise InvalidInputError(f"unknown recording kind: {declared_kind!r}")
    path = Path(source)
    if not path.exists():
        raise MediaFormatError(f"unreadable media: no such path {path}")

    if declared_kind == "audio-wav":
        if path.is_dir() or _sniff_kind(path) != "audio-wav":
            raise _mismatch_or(path, declared_kind, "unreadable media: not a RIFF/WAVE file")
        buf = _decode_wav_path(path)
        return Recording(
            id="", kind="audio-wav", duration_ms=buf.duration_ms,
            content_digest=digest_bytes(path.read_bytes()),
            metadata={"sample_rate_hz": buf.sample_rate_hz,
                      "sample_count": len(buf.samples)},
            path=str(path))

    if declared_kind == "frame-sequence":
        if not path.is_dir():
            raise _mismatch_or(path, declared_kind,
                               "unreadable media: frame sequences are directories")
        seq = _decode_frames_path(path)
        manifest = json.loads((path / MANIFEST_NAME).read_text("utf-8"))
        if manifest.get("pose") and not (path / manifest["pose"]).exists():
            raise MediaFormatError(
                f"unreadable media: missing pose file {manifest['pose']}")
        meta = {"fps": seq.fps, "frame_count": len(seq.frames)}
        if manifest.get("pose"):
            meta["pose"] = manifest["pose"]
        return Recording(
            id="", kind="frame-sequence", duration_ms=seq.duration_ms,
            content_digest=_digest_frame_dir(path, manifest),
            metadata=meta, path=str(path))

    # transcript
    if path.is_dir():
        raise _mismatch_or(path, declared_kind, "unreadable media: transcripts are files")
    data = path.read_bytes()
    if data[:4] == b"RIFF":
        raise _mismatch_or(path, declared_kind, "kind/content mismatch")
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MediaFormatError(f"unreadable media: not UTF-8 text: {exc}") from exc
    fmt = _transcript_format(path, text)
    stream = parse_transcript(text, fmt)
    duration = max((s.t1_ms for s in stream.payload), default=0)
    return Recording(
        id="", kind="transcript", duration_ms=duration,
        content_digest=digest_bytes(data),
        metadata={"format": fmt, "segment_count": len(stream.payload)},
        path=str(path))


def _transcript_format(path: Path, text: str) -> str:
    suffix = path.suffix.lower().lstrip(".")
    if suffix in ("srt", "vtt", "jsonl"):
        return suffix
    if text.lstrip().startswith("WEBVTT"):
        return "vtt"
    if text.lstrip().startswith("{"):
        return "jsonl"
    return "srt"


def load_transcript(recording: Recording) -> DataStream:
    """Parse an ingested transcript recording into its text stream."""
    if recording.kind != "transcript":
        raise InvalidInputError(f"load_transcript requires transcript, got {recording.kind}")
    path = Path(recording.path)
    text = path.read_text("utf-8")
    fmt = recording.metadata.get("format") or _transcript_format(path, text)
    return parse_transcript(text, fmt, recording_id=recording.id)
