"""Exception hierarchy shared across the package."""


class LyrividError(Exception):
    """Base class for everything raised intentionally by this package."""


class ValidationError(LyrividError):
    """User-supplied input violated a contract (CLI exit code 1)."""


class AudioDecodeError(LyrividError):
    """A file exists but could not be decoded as audio."""


class AudioFormatError(ValidationError):
    """Unsupported container/format."""


class ShapeError(LyrividError):
    """Tensor/array shape incompatible with the declared contract."""


class BackendError(LyrividError):
    """Illustration backend failure (after retries, for the remote client)."""


class CheckpointError(LyrividError):
    """Model checkpoint missing, corrupt, or config-mismatched."""


class EncoderMissingError(LyrividError):
    """No video encoder available for the requested output."""


class StageError(LyrividError):
    """A pipeline stage failed; carries the stage name and input digest."""

    def __init__(self, stage: str, digest: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed for input {digest[:12]}: {cause}")
        self.stage = stage
        self.digest = digest
        self.cause = cause
