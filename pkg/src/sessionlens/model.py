"""Domain types: recordings, streams, payload records, annotations, cache keys.

All timestamps are integer milliseconds relative to the recording start
(clock origin 0), which survives JSON round trips losslessly and is exact
at common media clocks (e.g. 30 fps frames land on 33/34 ms boundaries).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable

from .errors import InvalidInputError, StreamInvariantError

RECORDING_KINDS = ("audio-wav", "frame-sequence", "transcript")
STREAM_VARIANTS = ("continuous", "event", "text", "thumbnail")
ANNOTATION_KINDS = ("point", "interval")


def word_count(text: str) -> int:
    """Number of whitespace-separated tokens in ``text``."""
    return len(text.split())


@dataclass
class Recording:
    """One uploaded asset (audio, frame sequence, or transcript) under a project."""

    id: str
    kind: str
    duration_ms: int
    content_digest: str
    metadata: dict[str, Any] = field(default_factory=dict)
    clock_origin: int = 0
    path: str = ""

    def __post_init__(self):
        if self.kind not in RECORDING_KINDS:
            raise InvalidInputError(f"unknown recording kind: {self.kind!r}")
        if self.duration_ms < 0:
            raise InvalidInputError("duration_ms must be >= 0")
        if self.kind == "frame-sequence" and not self.metadata.get("fps", 1) > 0:
            raise InvalidInputError("fps must be > 0 for frame sequences")
        if self.kind == "audio-wav" and not self.metadata.get("sample_rate_hz", 1) > 0:
            raise InvalidInputError("sample_rate_hz must be > 0 for audio")

    def to_json(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "kind": self.kind,
            "duration_ms": self.duration_ms,
            "content_digest": self.content_digest,
            "metadata": self.metadata,
            "clock_origin": self.clock_origin,
            "path": self.path,
        }

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> Recording:
        return cls(
            id=obj["id"],
            kind=obj["kind"],
            duration_ms=obj["duration_ms"],
            content_digest=obj["content_digest"],
            metadata=obj.get("metadata", {}),
            clock_origin=obj.get("clock_origin", 0),
            path=obj.get("path", ""),
        )


@dataclass
class Sample:
    """One continuous-stream measurement at an instant.

    ``voiced`` is only meaningful for pitch-like streams; when False the
    value carries no information and consumers must ignore it.
    """

    t_ms: int
    value: float
    voiced: bool | None = None

    @property
    def start_ms(self) -> int:
        return self.t_ms

    @property
    def end_ms(self) -> int:
        return self.t_ms


@dataclass
class EventSpan:
    """A labeled interval with a probability (used for classifier output and telemetry)."""

    t0_ms: int
    t1_ms: int
    label: str
    probability: float = 1.0
    attrs: dict[str, Any] | None = None

    @property
    def start_ms(self) -> int:
        return self.t0_ms

    @property
    def end_ms(self) -> int:
        return self.t1_ms


@dataclass
class TextSegment:
    """A transcript utterance covering ``[t0_ms, t1_ms]``."""

    t0_ms: int
    t1_ms: int
    text: str
    word_count: int = -1

    def __post_init__(self):
        if self.word_count < 0:
            self.word_count = word_count(self.text)

    @property
    def start_ms(self) -> int:
        return self.t0_ms

    @property
    def end_ms(self) -> int:
        return self.t1_ms


@dataclass
class ThumbRef:
    """Reference to one persisted thumbnail image for an instant of the recording."""

    t_ms: int
    image: str

    @property
    def start_ms(self) -> int:
        return self.t_ms

    @property
    def end_ms(self) -> int:
        return self.t_ms


Record = Sample | EventSpan | TextSegment | ThumbRef


@dataclass
class DataStream:
    """A time-ordered payload produced by one filter on one recording."""

    id: str
    recording_id: str
    filter_id: str
    variant: str
    unit: str | None = None
    payload: list[Record] = field(default_factory=list)

    def __post_init__(self):
        if self.variant not in STREAM_VARIANTS:
            raise InvalidInputError(f"unknown stream variant: {self.variant!r}")


@dataclass
class Annotation:
    """A user note bound to one stream, either a point or an interval."""

    id: str
    project_id: str
    stream_id: str
    kind: str
    t0_ms: int
    t1_ms: int
    text: str
    author: str
    created_at: str

    def __post_init__(self):
        if self.kind not in ANNOTATION_KINDS:
            raise InvalidInputError(f"unknown annotation kind: {self.kind!r}")
        if self.t0_ms > self.t1_ms:
            raise InvalidInputError("inverted annotation interval")
        if (self.kind == "point") != (self.t0_ms == self.t1_ms):
            raise InvalidInputError("point annotations require t0_ms == t1_ms")

    def to_json(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "project_id": self.project_id,
            "stream_id": self.stream_id,
            "kind": self.kind,
            "t0_ms": self.t0_ms,
            "t1_ms": self.t1_ms,
            "text": self.text,
            "author": self.author,
            "created_at": self.created_at,
        }

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> Annotation:
        return cls(**{k: obj[k] for k in (
            "id", "project_id", "stream_id", "kind", "t0_ms", "t1_ms",
            "text", "author", "created_at")})


@dataclass(frozen=True)
class CacheKey:
    """Content-addressed identity of one filter (or model-stage) execution."""

    recording_digest: str
    model_id: str
    model_version: str
    params_digest: str

    @property
    def token(self) -> str:
        return f"{self.recording_digest[:16]}-{self.model_id}-{self.model_version}-{self.params_digest[:16]}"


# ---------------------------------------------------------------------------
# Payload record (de)serialization: newline-delimited JSON, one record per
# line, canonical key order and minimal separators so identical payloads
# always produce identical bytes.

def record_to_json(rec: Record) -> dict[str, Any]:
    if isinstance(rec, Sample):
        obj: dict[str, Any] = {"t_ms": rec.t_ms, "value": rec.value}
        if rec.voiced is not None:
            obj["voiced"] = rec.voiced
        return obj
    if isinstance(rec, EventSpan):
        obj = {"t0_ms": rec.t0_ms, "t1_ms": rec.t1_ms, "label": rec.label, "p": rec.probability}
        if rec.attrs is not None:
            obj["attrs"] = rec.attrs
        return obj
    if isinstance(rec, TextSegment):
        return {"t0_ms": rec.t0_ms, "t1_ms": rec.t1_ms, "text": rec.text, "word_count": rec.word_count}
    if isinstance(rec, ThumbRef):
        return {"t_ms": rec.t_ms, "image": rec.image}
    raise InvalidInputError(f"unknown record type: {type(rec).__name__}")


def record_from_json(obj: dict[str, Any], variant: str) -> Record:
    if variant == "continuous":
        return Sample(t_ms=obj["t_ms"], value=obj["value"], voiced=obj.get("voiced"))
    if variant == "event":
        return EventSpan(t0_ms=obj["t0_ms"], t1_ms=obj["t1_ms"], label=obj["label"],
                         probability=obj["p"], attrs=obj.get("attrs"))
    if variant == "text":
        return TextSegment(t0_ms=obj["t0_ms"], t1_ms=obj["t1_ms"], text=obj["text"],
                           word_count=obj["word_count"])
    if variant == "thumbnail":
        return ThumbRef(t_ms=obj["t_ms"], image=obj["image"])
    raise InvalidInputError(f"unknown stream variant: {variant!r}")


def dump_records(records: Iterable[Record]) -> str:
    lines = [json.dumps(record_to_json(r), sort_keys=True, separators=(",", ":"),
                        ensure_ascii=False, allow_nan=False) for r in records]
    return "".join(line + "\n" for line in lines)


def load_records(text: str, variant: str) -> list[Record]:
    out: list[Record] = []
    for line in text.splitlines():
        if line.strip():
            out.append(record_from_json(json.loads(line), variant))
    return out


def validate_record(rec: Record, duration_ms: int | None = None) -> None:
    """Check a single record against the stream payload invariants."""
    if isinstance(rec, Sample):
        if not math.isfinite(rec.value):
            raise StreamInvariantError(f"non-finite sample value at t={rec.t_ms}")
    if isinstance(rec, EventSpan):
        if rec.t0_ms > rec.t1_ms:
            raise StreamInvariantError(f"event span with t0 > t1 at t0={rec.t0_ms}")
        if not rec.label:
            raise StreamInvariantError(f"empty event label at t0={rec.t0_ms}")
        if not (0.0 <= rec.probability <= 1.0) or not math.isfinite(rec.probability):
            raise StreamInvariantError(f"probability outside [0,1] at t0={rec.t0_ms}")
    if isinstance(rec, TextSegment):
        if rec.t0_ms > rec.t1_ms:
            raise StreamInvariantError(f"text segment with t0 > t1 at t0={rec.t0_ms}")
        if rec.word_count != word_count(rec.text):
            raise StreamInvariantError(f"word_count mismatch at t0={rec.t0_ms}")
    if rec.start_ms < 0:
        raise StreamInvariantError(f"negative timestamp {rec.start_ms}")
    if duration_ms is not None and rec.end_ms > duration_ms:
        raise StreamInvariantError(
            f"timestamp {rec.end_ms} beyond recording duration {duration_ms}")


def validate_stream(stream: DataStream, duration_ms: int | None = None) -> None:
    """Check payload ordering plus every per-record invariant."""
    prev = None
    for rec in stream.payload:
        validate_record(rec, duration_ms)
        if prev is not None and rec.start_ms < prev:
            raise StreamInvariantError(
                f"payload out of order: {rec.start_ms} after {prev}")
        prev = rec.start_ms
