"""Pure stream operations: interval slicing and rolling-window aggregation."""

from __future__ import annotations

from .errors import InvalidInputError
from .model import DataStream, Sample


def slice_stream(stream: DataStream, t0_ms: int, t1_ms: int) -> DataStream:
    """Return a copy of ``stream`` keeping records that overlap ``[t0_ms, t1_ms]``.

    Overlap, not containment: an event straddling the boundary stays in the
    slice, matching how a brushed timeline keeps partially visible events.
    The input stream is never modified.
    """
    if t0_ms < 0:
        raise InvalidInputError("empty/inverted range: t0_ms must be >= 0")
    if t0_ms > t1_ms:
        raise InvalidInputError("empty/inverted range")
    kept = [r for r in stream.payload if r.end_ms >= t0_ms and r.start_ms <= t1_ms]
    return DataStream(
        id=stream.id,
        recording_id=stream.recording_id,
        filter_id=stream.filter_id,
        variant=stream.variant,
        unit=stream.unit,
        payload=kept,
    )


_AGGREGATORS = ("mean", "max", "count")


def window_aggregate(
    stream: DataStream,
    width_ms: int,
    hop_ms: int,
    aggregator: str,
    duration_ms: int | None = None,
) -> DataStream:
    """Aggregate a continuous stream over rolling windows ``[k*hop, k*hop+width)``.

    One output sample per window start while the start lies strictly before
    the duration; windows are clipped at the duration. ``duration_ms``
    defaults to the last payload timestamp when the caller has no recording
    at hand. Output timestamps are window starts. Empty windows aggregate to
    0.0 (count zero, mean/max of nothing treated as zero rather than an
    error so sparse streams stay plottable).
    """
    if width_ms <= 0 or hop_ms <= 0:
        raise InvalidInputError("width_ms and hop_ms must be > 0")
    if aggregator not in _AGGREGATORS:
        raise InvalidInputError(f"unknown aggregator: {aggregator!r}")
    if stream.variant != "continuous":
        raise InvalidInputError("window_aggregate requires a continuous stream")

    samples = [r for r in stream.payload if isinstance(r, Sample)]
    if duration_ms is None:
        duration_ms = samples[-1].t_ms if samples else 0

    out: list[Sample] = []
    start = 0
    i = 0  # samples are time-ordered, so each window advances a cursor
    n = len(samples)
    while start < duration_ms:
        end = min(start + width_ms, duration_ms)
        while i < n and samples[i].t_ms < start:
            i += 1
        j = i
        acc: list[float] = []
        while j < n and samples[j].t_ms < end:
            acc.append(samples[j].value)
            j += 1
        if aggregator == "count":
            value = float(len(acc))
        elif aggregator == "mean":
            value = sum(acc) / len(acc) if acc else 0.0
        else:
            value = max(acc) if acc else 0.0
        out.append(Sample(t_ms=start, value=value))
        start += hop_ms
    return DataStream(
        id=f"{stream.id}.{aggregator}{width_ms}",
        recording_id=stream.recording_id,
        filter_id=stream.filter_id,
        variant="continuous",
        unit=None if aggregator == "count" else stream.unit,
        payload=out,
    )
