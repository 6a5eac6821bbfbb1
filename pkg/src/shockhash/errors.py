"""Exception types shared across the library."""


class ShockHashError(Exception):
    """Base class for all library errors."""


class InvalidParameterError(ShockHashError, ValueError):
    """A parameter violates an operation's precondition."""


class UnsupportedLeafSizeError(InvalidParameterError):
    """Leaf size outside the single-word range 1..64."""


class ConstructionFailureError(ShockHashError):
    """Construction could not complete (seed overflow, retry cap, ...)."""


class DuplicateKeyError(ShockHashError):
    """Two input keys are byte-for-byte equal."""

    def __init__(self, message, lines=None):
        super().__init__(message)
        self.lines = lines


class HashCollisionError(ShockHashError):
    """Two distinct keys collided on the 128-bit master hash.

    Retryable with a different master-hash salt.
    """


class FormatError(ShockHashError):
    """Malformed serialized descriptor or truncated bit stream."""


class ContractViolationError(ShockHashError):
    """An operation was called on state that violates its contract."""
