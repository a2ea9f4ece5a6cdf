"""Exception types shared across relwave."""


class RelwaveError(Exception):
    """Base class for all relwave errors."""


class DomainError(RelwaveError, ValueError):
    """An argument lies outside the domain an operation accepts."""


class StateError(RelwaveError, RuntimeError):
    """An object is in the wrong state for the requested operation."""


class ResourceError(RelwaveError, RuntimeError):
    """A configured resource cap would be exceeded."""


class ConfigError(RelwaveError, ValueError):
    """A scenario configuration failed validation."""
