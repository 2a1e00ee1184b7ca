"""Joint angles from skeleton streams.

The angle at a vertex joint is the arccos of the normalized dot product
of the two limb vectors leaving it, reported in degrees. Angles are
invariant under rigid rotation and uniform scaling of the skeleton, which
makes them a camera-independent signal for downstream segmentation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..errors import InvalidInputError
from ..ingest import PoseStream
from ..model import DataStream, Sample

# Default vertex triples: elbows, shoulders, knees, neck. A configuration
# default only; callers with a different skeleton schema pass their own.
DEFAULT_ANGLE_TRIPLES: tuple[tuple[str, str, str], ...] = (
    ("shoulder_l", "elbow_l", "wrist_l"),
    ("shoulder_r", "elbow_r", "wrist_r"),
    ("elbow_l", "shoulder_l", "hip_l"),
    ("elbow_r", "shoulder_r", "hip_r"),
    ("hip_l", "knee_l", "ankle_l"),
    ("hip_r", "knee_r", "ankle_r"),
    ("head", "neck", "spine"),
)


@dataclass
class AngleResult:
    """Streams per triple plus quality counters for dropped samples."""

    streams: list[DataStream] = field(default_factory=list)
    skipped_incomplete: int = 0
    skipped_degenerate: int = 0


def angle_deg(a: tuple[float, float, float], vertex: tuple[float, float, float],
              c: tuple[float, float, float]) -> float | None:
    """Angle at ``vertex`` between rays to ``a`` and ``c``, in degrees.

    Returns None for a zero-length limb vector (angle undefined).
    """
    ux, uy, uz = a[0] - vertex[0], a[1] - vertex[1], a[2] - vertex[2]
    vx, vy, vz = c[0] - vertex[0], c[1] - vertex[1], c[2] - vertex[2]
    nu = math.sqrt(ux * ux + uy * uy + uz * uz)
    nv = math.sqrt(vx * vx + vy * vy + vz * vz)
    if nu == 0.0 or nv == 0.0:
        return None
    cos = (ux * vx + uy * vy + uz * vz) / (nu * nv)
    return math.degrees(math.acos(max(-1.0, min(1.0, cos))))


def joint_angles(pose: PoseStream,
                 triples: tuple[tuple[str, str, str], ...] = DEFAULT_ANGLE_TRIPLES,
                 recording_id: str = "") -> AngleResult:
    """Compute one continuous angle stream (unit "deg") per joint triple.

    Parameters
    ----------
    pose : PoseStream
        Skeleton frames; incomplete frames were already dropped at load
        time and their count carries through here.
    triples : sequence of (joint_a, vertex, joint_c)
        Vertex triples to evaluate. Every named joint must exist in the
        stream's declared joint set.

    Returns
    -------
    AngleResult
        ``streams[i]`` matches ``triples[i]``; degenerate samples (a limb
        vector of zero length) are skipped and counted.
    """
    known = set(pose.joint_names)
    for triple in triples:
        missing = [j for j in triple if j not in known]
        if missing:
            raise InvalidInputError(
                f"parameter error: joints not in skeleton schema: {', '.join(missing)}")

    result = AngleResult(skipped_incomplete=pose.skipped_incomplete)
    seen: dict[str, int] = {}
    for a_name, v_name, c_name in triples:
        samples: list[Sample] = []
        for frame in pose.frames:
            value = angle_deg(frame.joints[a_name], frame.joints[v_name],
                              frame.joints[c_name])
            if value is None:
                result.skipped_degenerate += 1
                continue
            samples.append(Sample(t_ms=frame.t_ms, value=value))
        seen[v_name] = seen.get(v_name, 0) + 1
        name = v_name if seen[v_name] == 1 else f"{v_name}.{seen[v_name]}"
        result.streams.append(DataStream(
            id=f"angle.{name}", recording_id=recording_id, filter_id="joint_angles",
            variant="continuous", unit="deg", payload=samples))
    return result
