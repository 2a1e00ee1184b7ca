"""Speech rate over rolling windows of a transcript stream."""

from __future__ import annotations

from ..errors import InvalidInputError
from ..model import DataStream, Sample, TextSegment


def speech_rate(transcript: DataStream, window_ms: int = 5000, hop_ms: int = 1000,
                duration_ms: int | None = None,
                recording_id: str = "", stream_id: str = "speech_rate") -> DataStream:
    """Words per second over rolling windows.

    Each segment's words are attributed to the window containing the
    segment midpoint (word-level timestamps are unavailable in common
    caption formats). Windows are ``[k*hop, k*hop+window)`` for window
    starts strictly before the duration; the final window is closed at the
    recording end so a midpoint exactly on the end time is still counted.
    With hop == window this makes rate*window_s sum exactly to the total
    word count.
    """
    if window_ms <= 0 or hop_ms <= 0:
        raise InvalidInputError("parameter error: window_ms and hop_ms must be > 0")
    segments = [s for s in transcript.payload if isinstance(s, TextSegment)]
    if duration_ms is None:
        duration_ms = max((s.t1_ms for s in segments), default=0)

    # midpoint in float ms so odd spans land between integer bounds
    mids = [((s.t0_ms + s.t1_ms) / 2.0, s.word_count) for s in segments]
    window_s = window_ms / 1000.0

    out: list[Sample] = []
    start = 0
    while start < duration_ms:
        end = start + window_ms
        last = end >= duration_ms
        words = 0
        for mid, wc in mids:
            if mid >= start and (mid <= duration_ms if last else mid < end):
                words += wc
        out.append(Sample(t_ms=start, value=words / window_s))
        start += hop_ms
    return DataStream(id=stream_id, recording_id=recording_id, filter_id="speech_rate",
                      variant="continuous", unit="words/s", payload=out)
