"""Exception hierarchy shared by the library and the CLI exit-code mapping."""


class PotencyError(Exception):
    """Base class for all errors raised by this package."""


class MalformedInputError(PotencyError, ValueError):
    """Structurally broken input: wrong shapes, out-of-range indices."""


class CapExceededError(PotencyError):
    """A construction would exceed the configured order/vertex cap."""


class PreconditionError(PotencyError):
    """An operation was called on inputs outside its contract."""


class VerificationError(PotencyError):
    """A construction failed its independent verification."""

    def __init__(self, message, transcript=None):
        super().__init__(message)
        self.transcript = list(transcript or [])
