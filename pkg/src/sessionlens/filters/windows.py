"""Rolling-window classification adapter: window math and event validation.

The actual classifier runs as an external plugin; this module owns the
pure parts: the window grid, and checking that plugin-emitted spans align
to it with sane probabilities before anything is persisted.
"""

from __future__ import annotations

from ..errors import InvalidInputError, PluginError
from ..model import DataStream, EventSpan

DEFAULT_WINDOW_MS = 1000
DEFAULT_HOP_MS = 500
_PROB_SUM_TOL = 1e-9


def window_grid(duration_ms: int, window_ms: int, hop_ms: int) -> list[tuple[int, int]]:
    """Rolling windows ``[k*hop, k*hop+window)`` with starts before the duration.

    Window ends are clipped at the duration, mirroring the aggregation
    windows elsewhere.
    """
    if window_ms <= 0 or hop_ms <= 0:
        raise InvalidInputError("parameter error: window_ms and hop_ms must be > 0")
    grid = []
    start = 0
    while start < duration_ms:
        grid.append((start, min(start + window_ms, duration_ms)))
        start += hop_ms
    return grid


def validate_window_events(spans: list[EventSpan], duration_ms: int,
                           window_ms: int, hop_ms: int) -> None:
    """Check classifier output against the window grid.

    Raises PluginError when a span has an invalid probability, does not
    align to a grid window, or when one window's label probabilities sum
    above 1. Full coverage of the grid is not required: a classifier may
    abstain on a window.
    """
    grid = set(window_grid(duration_ms, window_ms, hop_ms))
    sums: dict[tuple[int, int], float] = {}
    for span in spans:
        if not 0.0 <= span.probability <= 1.0:
            raise PluginError(
                f"invalid probability {span.probability} for {span.label!r} "
                f"at [{span.t0_ms},{span.t1_ms}]")
        key = (span.t0_ms, span.t1_ms)
        if key not in grid:
            raise PluginError(
                f"span [{span.t0_ms},{span.t1_ms}] does not align to the "
                f"window grid (window={window_ms}, hop={hop_ms})")
        sums[key] = sums.get(key, 0.0) + span.probability
        if sums[key] > 1.0 + _PROB_SUM_TOL:
            raise PluginError(
                f"label probabilities in window [{key[0]},{key[1]}] "
                f"sum to {sums[key]:.6f} > 1")


def classification_stream(spans: list[EventSpan], recording_id: str = "",
                          stream_id: str = "classes", filter_id: str = "classify",
                          unit: str | None = None) -> DataStream:
    """Wrap validated spans as an event stream, sorted by window then label."""
    ordered = sorted(spans, key=lambda s: (s.t0_ms, s.t1_ms, -s.probability, s.label))
    return DataStream(id=stream_id, recording_id=recording_id, filter_id=filter_id,
                      variant="event", unit=unit, payload=ordered)
