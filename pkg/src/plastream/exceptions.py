"""Exception hierarchy.

Every error raised by the package derives from :class:`PLAError`. Errors that
stem from bad input data (as opposed to bad usage) also derive from
:class:`DataError`, which the CLI maps to exit code 2.
"""


class PLAError(Exception):
    """Base class for all package errors."""


class DataError(PLAError, ValueError):
    """The input data violates a precondition."""


class EqualTimestamps(DataError):
    pass


class NonContiguous(DataError):
    pass


class TimestampBeforeFirstKnot(DataError):
    pass


class MalformedKnotStream(DataError):
    pass


class NonMonotonicTime(DataError):
    def __init__(self, message="timestamps must strictly increase", line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NonFiniteValue(DataError):
    def __init__(self, message="value is not finite", line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ParseError(DataError):
    def __init__(self, message="cannot parse", line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NonPositiveTimestamp(DataError):
    pass


class DegenerateSpan(DataError):
    pass


class TooFewPoints(PLAError, ValueError):
    pass


class InternalError(PLAError, RuntimeError):
    """A condition that cannot occur for valid inputs (e.g. parallel extremes)."""


class ParallelExtremes(InternalError):
    pass


class ZeroVariance(InternalError):
    pass


class CorruptStream(DataError):
    pass


class TruncatedStream(DataError):
    pass


class UncoveredIndex(PLAError, ValueError):
    pass


class DoubleCoverage(PLAError, ValueError):
    pass


class EmptyInput(PLAError, ValueError):
    pass


class BadParams(PLAError, ValueError):
    pass


class IllegalPairing(PLAError, ValueError):
    pass
