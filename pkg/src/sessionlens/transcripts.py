"""Transcript parsing (SRT, WebVTT, JSONL) and serialization.

All three formats produce the same TextSegment stream. Overlapping
segments are accepted: think-aloud speech routinely overlaps the
facilitator, and collapsing overlaps would lose words.
"""

from __future__ import annotations

import json
import re

from .errors import TranscriptParseError
from .model import DataStream, TextSegment

# SRT uses a comma before milliseconds, VTT a dot; hours optional in VTT.
_TS = re.compile(r"^(?:(\d+):)?(\d{1,2}):(\d{2})[.,](\d{3})$")
_ARROW = re.compile(r"\s*-->\s*")


def _parse_timestamp(text: str, line_no: int) -> int:
    m = _TS.match(text.strip())
    if not m:
        raise TranscriptParseError(f"malformed timestamp {text.strip()!r}", line=line_no)
    hours = int(m.group(1) or 0)
    minutes, seconds, millis = int(m.group(2)), int(m.group(3)), int(m.group(4))
    if minutes > 59 or seconds > 59:
        raise TranscriptParseError(f"malformed timestamp {text.strip()!r}", line=line_no)
    return ((hours * 60 + minutes) * 60 + seconds) * 1000 + millis


def _parse_cue_line(line: str, line_no: int) -> tuple[int, int]:
    parts = _ARROW.split(line.strip(), maxsplit=1)
    if len(parts) != 2:
        raise TranscriptParseError(f"malformed cue timing {line.strip()!r}", line=line_no)
    # VTT allows settings after the end timestamp; keep the first token only
    end = parts[1].split()[0] if parts[1].split() else parts[1]
    t0 = _parse_timestamp(parts[0], line_no)
    t1 = _parse_timestamp(end, line_no)
    if t1 < t0:
        raise TranscriptParseError("cue end before start", line=line_no)
    return t0, t1


def _parse_cues(lines: list[str], start_at: int, skip_bare_index: bool) -> list[TextSegment]:
    """Shared SRT/VTT cue walker; line numbers are 1-based over the whole text."""
    segments: list[TextSegment] = []
    i = start_at
    n = len(lines)
    while i < n:
        if not lines[i].strip():
            i += 1
            continue
        # NOTE and STYLE blocks (VTT) are skipped up to the next blank line
        if lines[i].strip().startswith(("NOTE", "STYLE", "REGION")):
            while i < n and lines[i].strip():
                i += 1
            continue
        if skip_bare_index and lines[i].strip().isdigit() and "-->" not in lines[i]:
            i += 1
            if i >= n:
                break
        if "-->" not in lines[i]:
            raise TranscriptParseError(
                f"expected cue timing, got {lines[i].strip()!r}", line=i + 1)
        t0, t1 = _parse_cue_line(lines[i], i + 1)
        i += 1
        text_lines: list[str] = []
        while i < n and lines[i].strip():
            text_lines.append(lines[i].strip())
            i += 1
        segments.append(TextSegment(t0_ms=t0, t1_ms=t1, text=" ".join(text_lines)))
    return segments


def _parse_srt(text: str) -> list[TextSegment]:
    return _parse_cues(text.splitlines(), 0, skip_bare_index=True)


def _parse_vtt(text: str) -> list[TextSegment]:
    lines = text.splitlines()
    if not lines or not lines[0].strip().startswith("WEBVTT"):
        raise TranscriptParseError("missing WEBVTT header", line=1)
    # header block runs until the first blank line
    i = 1
    while i < len(lines) and lines[i].strip():
        i += 1
    # VTT cues may carry a non-numeric identifier line; treat any line
    # without an arrow that is followed by one as an identifier.
    segments: list[TextSegment] = []
    n = len(lines)
    while i < n:
        if not lines[i].strip():
            i += 1
            continue
        if lines[i].strip().startswith(("NOTE", "STYLE", "REGION")):
            while i < n and lines[i].strip():
                i += 1
            continue
        if "-->" not in lines[i]:
            if i + 1 < n and "-->" in lines[i + 1]:
                i += 1  # cue identifier
            else:
                raise TranscriptParseError(
                    f"expected cue timing, got {lines[i].strip()!r}", line=i + 1)
        t0, t1 = _parse_cue_line(lines[i], i + 1)
        i += 1
        text_lines: list[str] = []
        while i < n and lines[i].strip():
            text_lines.append(lines[i].strip())
            i += 1
        segments.append(TextSegment(t0_ms=t0, t1_ms=t1, text=" ".join(text_lines)))
    return segments


def _parse_jsonl(text: str) -> list[TextSegment]:
    segments: list[TextSegment] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TranscriptParseError(f"invalid JSON: {exc.msg}", line=line_no) from exc
        try:
            t0, t1, body = obj["t0_ms"], obj["t1_ms"], obj["text"]
        except (KeyError, TypeError) as exc:
            raise TranscriptParseError("record needs t0_ms, t1_ms, text", line=line_no) from exc
        if not isinstance(t0, int) or not isinstance(t1, int):
            raise TranscriptParseError("malformed timestamp: bounds must be integers",
                                       line=line_no)
        if t1 < t0:
            raise TranscriptParseError("cue end before start", line=line_no)
        segments.append(TextSegment(t0_ms=t0, t1_ms=t1, text=str(body)))
    return segments


_PARSERS = {"srt": _parse_srt, "vtt": _parse_vtt, "jsonl": _parse_jsonl}


def parse_transcript(text: str, format: str,
                     recording_id: str = "", stream_id: str = "transcript") -> DataStream:
    """Parse transcript ``text`` in the declared ``format`` into a text stream.

    Segments come out sorted by start time with word counts populated.
    Parse errors name the 1-based source line.
    """
    if format not in _PARSERS:
        raise TranscriptParseError(f"unknown transcript format: {format!r}")
    segments = _PARSERS[format](text)
    segments.sort(key=lambda s: (s.t0_ms, s.t1_ms))
    return DataStream(
        id=stream_id,
        recording_id=recording_id,
        filter_id="transcript",
        variant="text",
        unit=None,
        payload=segments,
    )


def serialize_transcript(stream: DataStream, format: str = "jsonl") -> str:
    """Serialize a text stream back out; jsonl is the lossless interchange form."""
    if format == "jsonl":
        lines = [json.dumps({"t0_ms": s.t0_ms, "t1_ms": s.t1_ms, "text": s.text},
                            sort_keys=True, separators=(",", ":"), ensure_ascii=False)
                 for s in stream.payload]
        return "".join(line + "\n" for line in lines)
    if format == "srt":
        blocks = []
        for idx, s in enumerate(stream.payload, start=1):
            blocks.append(f"{idx}\n{_fmt_ts(s.t0_ms, ',')} --> {_fmt_ts(s.t1_ms, ',')}\n{s.text}\n")
        return "\n".join(blocks)
    if format == "vtt":
        blocks = ["WEBVTT\n"]
        for s in stream.payload:
            blocks.append(f"{_fmt_ts(s.t0_ms, '.')} --> {_fmt_ts(s.t1_ms, '.')}\n{s.text}\n")
        return "\n".join(blocks)
    raise TranscriptParseError(f"unknown transcript format: {format!r}")


def _fmt_ts(t_ms: int, sep: str) -> str:
    hours, rem = divmod(t_ms, 3600_000)
    minutes, rem = divmod(rem, 60_000)
    seconds, millis = divmod(rem, 1000)
    return f"{hours:02d}:{minutes:02d}:{seconds:02d}{sep}{millis:03d}"
