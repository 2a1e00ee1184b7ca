"""Thumbnail sampling from frame sequences."""

from __future__ import annotations

from pathlib import Path

from PIL import Image

from ..errors import InvalidInputError
from ..ingest import FrameSequence
from ..model import DataStream, ThumbRef

THUMB_MAX_PX = 160


def thumbnail_track(frames: FrameSequence, count: int, out_dir: str | Path,
                    max_px: int = THUMB_MAX_PX,
                    recording_id: str = "", stream_id: str = "thumbs") -> DataStream:
    """Sample ``count`` thumbnails at the midpoints of equal-duration bins.

    The recording is cut into ``count`` bins of duration/count each; the
    frame on screen at each bin midpoint is downscaled (longest side
    ``max_px``, aspect preserved) and written to ``out_dir``. Emitted
    timestamps are the bin midpoints. ``count`` larger than the frame
    count is clamped.
    """
    if count < 1:
        raise InvalidInputError("parameter error: count must be >= 1")
    n = len(frames.frames)
    if n == 0:
        return _stream([], recording_id, stream_id)
    count = min(count, n)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    duration = frames.duration_ms
    refs: list[ThumbRef] = []
    for k in range(count):
        mid_ms = (k + 0.5) * duration / count
        # the frame covering [t_j, t_j+1) is on screen at the midpoint
        idx = min(n - 1, int(mid_ms * frames.fps / 1000.0))
        name = f"thumb-{k:04d}.png"
        with Image.open(frames.frames[idx][1]) as im:
            im = im.convert("RGB")
            im.thumbnail((max_px, max_px))
            im.save(out / name, format="PNG")
        refs.append(ThumbRef(t_ms=round(mid_ms), image=name))
    return _stream(refs, recording_id, stream_id)


def _stream(refs: list[ThumbRef], recording_id: str, stream_id: str) -> DataStream:
    return DataStream(id=stream_id, recording_id=recording_id, filter_id="thumbnails",
                      variant="thumbnail", unit=None, payload=refs)
