"""Built-in filter algorithms (pitch, speech rate, joint angles, segmentation, thumbnails)."""

from .pitch import pitch_track
from .pose import DEFAULT_ANGLE_TRIPLES, AngleResult, angle_deg, joint_angles
from .segments import (SegmentationResult, SplitStat, e_divisive,
                       e_divisive_segments, sample_divergence, spans_to_time)
from .speech import speech_rate
from .thumbs import thumbnail_track
from .windows import (classification_stream, validate_window_events,
                      window_grid)

__all__ = [
    "AngleResult",
    "DEFAULT_ANGLE_TRIPLES",
    "SegmentationResult",
    "SplitStat",
    "angle_deg",
    "classification_stream",
    "e_divisive",
    "e_divisive_segments",
    "joint_angles",
    "pitch_track",
    "sample_divergence",
    "spans_to_time",
    "speech_rate",
    "thumbnail_track",
    "validate_window_events",
    "window_grid",
]
