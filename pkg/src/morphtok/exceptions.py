"""Exception hierarchy shared by all morphtok modules."""


class MorphtokError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(MorphtokError, ValueError):
    """Input violates a documented precondition."""


class AnnotationError(ValidationError):
    """A line in an annotation file could not be parsed."""

    def __init__(self, lineno, message):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


class ModelFormatError(MorphtokError):
    """A serialized model or table is corrupt or truncated."""


class VersionError(ModelFormatError):
    """A serialized artifact declares an unsupported format version."""


class InvariantError(MorphtokError):
    """An internal consistency check failed."""
