"""Exception types shared across the package."""


class SensingError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(SensingError, ValueError):
    """Invalid parameters, configuration, or filter/model design request."""


class DataError(SensingError, ValueError):
    """Input data violates a precondition (empty, out of band, too short)."""


class ParseError(DataError):
    """A file does not match its documented schema.

    The message names the offending line number when one is known.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class UndampedResonanceError(ParameterError):
    """Steady-state solve requested exactly at an undamped resonance."""
