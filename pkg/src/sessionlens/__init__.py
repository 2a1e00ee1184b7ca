"""sessionlens: time-stamped behavioral feature streams from session recordings."""

from .annotations import create_annotation
from .cache import CachedOutput, ResultCache
from .engine import (Engine, FilterDescriptor, Job, load_plugin_catalog,
                     register_builtins)
from .errors import (ConflictError, InvalidInputError, MediaFormatError,
                     NotFoundError, PluginError, SessionlensError,
                     StreamInvariantError, TranscriptParseError)
from .hashing import canonical_hash, canonical_json
from .ingest import (AudioBuffer, FrameSequence, PoseFrame, PoseStream,
                     decode_wav, load_frame_sequence, load_pose_stream,
                     load_transcript, parse_pose_jsonl, probe_recording)
from .model import (Annotation, CacheKey, DataStream, EventSpan, Recording,
                    Sample, TextSegment, ThumbRef, word_count)
from .report import annotlette_svg, export_tabular
from .storage import Project, ProjectStore, StreamInfo
from .streams import slice_stream, window_aggregate
from .transcripts import parse_transcript, serialize_transcript

__version__ = "0.1.0"
