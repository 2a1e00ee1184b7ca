"""Annotation CRUD on top of the project store."""

from __future__ import annotations

import uuid

from .errors import InvalidInputError
from .model import Annotation
from .storage import ProjectStore, now_iso


def create_annotation(store: ProjectStore, project_id: str, stream_id: str,
                      kind: str, t0_ms: int, t1_ms: int, text: str,
                      author: str, annotation_id: str | None = None) -> Annotation:
    """Validate and persist one annotation bound to an existing stream."""
    info = store.get_stream_info(project_id, stream_id)  # raises on unknown stream
    if t0_ms < 0 or t0_ms > t1_ms:
        raise InvalidInputError("inverted annotation interval")
    duration = _stream_duration(store, project_id, info.recording_id)
    if duration is not None and t1_ms > duration:
        raise InvalidInputError(
            f"timestamp {t1_ms} beyond recording duration {duration}")
    annotation = Annotation(
        id=annotation_id or f"a-{uuid.uuid4().hex[:10]}",
        project_id=project_id, stream_id=stream_id, kind=kind,
        t0_ms=t0_ms, t1_ms=t1_ms, text=text, author=author, created_at=now_iso())
    return store.add_annotation(annotation)


def _stream_duration(store: ProjectStore, project_id: str,
                     recording_id: str) -> int | None:
    # streams without a backing recording (telemetry) have no duration bound
    if not recording_id:
        return None
    return store.get_recording(project_id, recording_id).duration_ms
