"""Annotlette SVG rendering and tabular export.

An annotlette is a small standalone SVG summarizing one annotation: a
metadata header, the dialogue around the annotated moment, the note
itself, and a zoomed chunk of the annotated timeline. The four regions
are addressable ``<g>`` elements so downstream documents can restyle or
extract them.
"""

from __future__ import annotations

import csv
import io
from xml.sax.saxutils import escape

from .errors import InvalidInputError
from .model import (DataStream, EventSpan, Sample, TextSegment, ThumbRef,
                    record_to_json)
from .storage import ProjectStore, dump_json
from .streams import slice_stream

CONTEXT_PAD_MS = 2000
NO_DIALOGUE_PLACEHOLDER = "No dialogue in this interval"
GROUP_IDS = ("metadata", "transcript", "annotation-text", "timeline")

_WIDTH = 480
_PAD = 12
_LINE_H = 16
_TIMELINE_H = 80


def _fmt_time(t_ms: int) -> str:
    s, ms = divmod(t_ms, 1000)
    m, s = divmod(s, 60)
    return f"{m:02d}:{s:02d}.{ms:03d}"


def _transcript_snippet(store: ProjectStore, project_id: str,
                        t0: int, t1: int) -> list[TextSegment]:
    segments: list[TextSegment] = []
    for info in store.list_streams(project_id):
        if info.variant != "text":
            continue
        stream = store.get_stream(project_id, info.id)
        segments.extend(
            s for s in slice_stream(stream, t0, t1).payload
            if isinstance(s, TextSegment))
    segments.sort(key=lambda s: (s.t0_ms, s.t1_ms))
    return segments


def _x(t_ms: int, t0: int, t1: int) -> float:
    span = max(1, t1 - t0)
    inner = _WIDTH - 2 * _PAD
    return _PAD + (t_ms - t0) / span * inner


def _timeline_records(stream: DataStream, t0: int, t1: int, y: float) -> list[str]:
    """One ``class="record"`` element per sliced record, styled per variant."""
    parts: list[str] = []
    base = y + _TIMELINE_H - 10
    for rec in stream.payload:
        if isinstance(rec, Sample):
            h = 4 if rec.voiced is False else 40
            x = _x(rec.t_ms, t0, t1)
            parts.append(f'<rect class="record" x="{x:.2f}" y="{base - h:.2f}" '
                         f'width="1.5" height="{h}" fill="#4878a8"/>')
        elif isinstance(rec, EventSpan):
            x0 = _x(max(rec.t0_ms, t0), t0, t1)
            x1 = _x(min(rec.t1_ms, t1), t0, t1)
            h = max(4.0, 50 * rec.probability)
            parts.append(f'<rect class="record" x="{x0:.2f}" y="{base - h:.2f}" '
                         f'width="{max(1.5, x1 - x0):.2f}" height="{h:.2f}" '
                         f'fill="#d08f3e" fill-opacity="0.8"/>')
        elif isinstance(rec, TextSegment):
            x0 = _x(max(rec.t0_ms, t0), t0, t1)
            x1 = _x(min(rec.t1_ms, t1), t0, t1)
            parts.append(f'<rect class="record" x="{x0:.2f}" y="{base - 24:.2f}" '
                         f'width="{max(1.5, x1 - x0):.2f}" height="24" '
                         f'fill="#6aa84f" fill-opacity="0.6"/>')
        elif isinstance(rec, ThumbRef):
            x = _x(rec.t_ms, t0, t1)
            parts.append(f'<rect class="record" x="{x - 6:.2f}" y="{base - 32:.2f}" '
                         f'width="12" height="32" fill="#999"/>')
    return parts


def annotlette_svg(store: ProjectStore, project_id: str, annotation_id: str,
                   context_pad_ms: int = CONTEXT_PAD_MS) -> str:
    """Render one annotation as a standalone SVG document.

    The zoom window is ``[t0 - pad, t1 + pad]`` clamped at 0; the
    timeline group renders exactly the records that window slices out of
    the annotated stream.
    """
    ann = store.get_annotation(project_id, annotation_id)
    stream = store.get_stream(project_id, ann.stream_id)
    w0 = max(0, ann.t0_ms - context_pad_ms)
    w1 = ann.t1_ms + context_pad_ms
    chunk = slice_stream(stream, w0, w1)
    snippet = _transcript_snippet(store, project_id, w0, w1)

    meta_lines = [
        f"{ann.kind} annotation by {ann.author}",
        f"{_fmt_time(ann.t0_ms)} - {_fmt_time(ann.t1_ms)} on {ann.stream_id}",
        f"created {ann.created_at}",
    ]
    snippet_lines = ([f"[{_fmt_time(s.t0_ms)}] {s.text}" for s in snippet]
                     or [NO_DIALOGUE_PLACEHOLDER])
    text_lines = ann.text.splitlines() or [""]

    y = _PAD
    parts: list[str] = []

    def text_block(group_id: str, lines: list[str], cls: str) -> None:
        nonlocal y
        rows = []
        for line in lines:
            y += _LINE_H
            rows.append(f'<text class="{cls}" x="{_PAD}" y="{y}">{escape(line)}</text>')
        parts.append(f'<g id="{group_id}">' + "".join(rows) + "</g>")
        y += 6

    text_block("metadata", meta_lines, "meta")
    text_block("transcript", snippet_lines, "snippet")
    text_block("annotation-text", text_lines, "note")

    tl_top = y
    records = _timeline_records(chunk, w0, w1, tl_top)
    marker_x0 = _x(ann.t0_ms, w0, w1)
    marker_x1 = _x(ann.t1_ms, w0, w1)
    timeline = [
        f'<rect x="{_PAD}" y="{tl_top}" width="{_WIDTH - 2 * _PAD}" '
        f'height="{_TIMELINE_H}" fill="#f4f2ee" stroke="#ccc"/>',
        *records,
        f'<line x1="{marker_x0:.2f}" y1="{tl_top}" x2="{marker_x0:.2f}" '
        f'y2="{tl_top + _TIMELINE_H}" stroke="#c33" stroke-width="1.5"/>',
    ]
    if ann.kind == "interval":
        timeline.append(
            f'<line x1="{marker_x1:.2f}" y1="{tl_top}" x2="{marker_x1:.2f}" '
            f'y2="{tl_top + _TIMELINE_H}" stroke="#c33" stroke-width="1.5"/>')
    timeline.append(
        f'<text class="axis" x="{_PAD}" y="{tl_top + _TIMELINE_H + 14}">'
        f'{_fmt_time(w0)}</text>')
    timeline.append(
        f'<text class="axis" x="{_WIDTH - _PAD - 60}" y="{tl_top + _TIMELINE_H + 14}">'
        f'{_fmt_time(w1)}</text>')
    parts.append('<g id="timeline">' + "".join(timeline) + "</g>")
    y = tl_top + _TIMELINE_H + 24

    style = ("text{font:12px sans-serif;fill:#222}.meta{font-weight:600}"
             ".snippet{fill:#444}.note{font-style:italic}.axis{fill:#888;font-size:10px}")
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{y}" '
        f'viewBox="0 0 {_WIDTH} {y}">'
        f"<style>{style}</style>" + "".join(parts) + "</svg>"
    )


# ---------------------------------------------------------------------------
# Tabular export

EXPORT_WHAT = ("streams", "annotations", "transcript")
EXPORT_FORMATS = ("csv", "jsonl")


def export_tabular(store: ProjectStore, project_id: str, what: str, format: str) -> str:
    """Export project contents as CSV (flat columns) or JSONL (lossless)."""
    if what not in EXPORT_WHAT:
        raise InvalidInputError(f"unknown export target: {what!r}")
    if format not in EXPORT_FORMATS:
        raise InvalidInputError(f"unknown export format: {format!r}")
    store.get_project(project_id)  # raises on unknown project
    if what == "streams":
        return _export_streams(store, project_id, format)
    if what == "annotations":
        return _export_annotations(store, project_id, format)
    return _export_transcript(store, project_id, format)


def _record_row(stream_id: str, variant: str, unit: str | None, rec) -> dict:
    row = {"stream_id": stream_id, "variant": variant, "t0_ms": rec.start_ms,
           "t1_ms": rec.end_ms, "label": "", "value": "", "probability": "",
           "unit": unit or ""}
    if isinstance(rec, Sample):
        row["value"] = rec.value
        if rec.voiced is not None:
            row["label"] = "voiced" if rec.voiced else "unvoiced"
    elif isinstance(rec, EventSpan):
        row["label"] = rec.label
        row["probability"] = rec.probability
    elif isinstance(rec, TextSegment):
        row["label"] = rec.text
        row["value"] = rec.word_count
    elif isinstance(rec, ThumbRef):
        row["label"] = rec.image
    return row


def _export_streams(store: ProjectStore, project_id: str, format: str) -> str:
    if format == "jsonl":
        lines = []
        for info in store.list_streams(project_id):
            stream = store.get_stream(project_id, info.id)
            for rec in stream.payload:
                lines.append(dump_json({
                    "stream_id": info.id, "recording_id": info.recording_id,
                    "filter_id": info.filter_id, "variant": info.variant,
                    "unit": info.unit, "record": record_to_json(rec)}))
        return "".join(line + "\n" for line in lines)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=[
        "stream_id", "variant", "t0_ms", "t1_ms", "label", "value",
        "probability", "unit"])
    writer.writeheader()
    for info in store.list_streams(project_id):
        stream = store.get_stream(project_id, info.id)
        for rec in stream.payload:
            writer.writerow(_record_row(info.id, info.variant, info.unit, rec))
    return buf.getvalue()


def _export_annotations(store: ProjectStore, project_id: str, format: str) -> str:
    annotations = store.list_annotations(project_id)
    if format == "jsonl":
        return "".join(dump_json(a.to_json()) + "\n" for a in annotations)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=[
        "id", "project_id", "stream_id", "kind", "t0_ms", "t1_ms", "text",
        "author", "created_at"])
    writer.writeheader()
    for a in annotations:
        writer.writerow(a.to_json())
    return buf.getvalue()


def _export_transcript(store: ProjectStore, project_id: str, format: str) -> str:
    rows = []
    for info in store.list_streams(project_id):
        if info.variant != "text":
            continue
        stream = store.get_stream(project_id, info.id)
        for rec in stream.payload:
            if isinstance(rec, TextSegment):
                rows.append((info.id, rec))
    if format == "jsonl":
        return "".join(dump_json({
            "stream_id": sid, "t0_ms": r.t0_ms, "t1_ms": r.t1_ms,
            "text": r.text, "word_count": r.word_count}) + "\n"
            for sid, r in rows)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["stream_id", "t0_ms", "t1_ms", "text", "word_count"])
    for sid, r in rows:
        writer.writerow([sid, r.t0_ms, r.t1_ms, r.text, r.word_count])
    return buf.getvalue()
