"""Exception types shared across the package."""


class MotifError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(MotifError, ValueError):
    """An argument violates an operation's precondition."""


class EmptyRecordingError(InvalidArgumentError):
    """Artifact rejection removed every window of a recording."""


class ResourceLimitError(MotifError, RuntimeError):
    """A search would exceed its configured enumeration budget."""


class ConfigError(MotifError, ValueError):
    """A run configuration or dataset manifest is invalid."""
