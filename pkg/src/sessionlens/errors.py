"""Exception types shared across the package."""


class SessionlensError(Exception):
    """Base class for all errors raised by this package."""

    code = "error"
    detail: str | None = None


class NotFoundError(SessionlensError):
    """A referenced project, recording, stream, job, or annotation does not exist."""

    code = "not_found"


class InvalidInputError(SessionlensError):
    """A caller-supplied value violates an operation's preconditions."""

    code = "invalid_input"


class ConflictError(SessionlensError):
    """The operation collides with existing state (e.g. duplicate registration)."""

    code = "conflict"


class MediaFormatError(SessionlensError):
    """Media bytes could not be decoded as the declared kind."""

    code = "media_format"


class TranscriptParseError(SessionlensError):
    """A transcript file failed to parse; carries the offending line number."""

    code = "transcript_parse"

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class StreamInvariantError(SessionlensError):
    """A stream payload violates ordering, bounds, or value-range invariants."""

    code = "stream_invariant"


class PluginError(SessionlensError):
    """A plugin process misbehaved: handshake, protocol, validation, or exit."""

    code = "plugin"
