"""Exception hierarchy for plannet.

Every concrete error is also a ValueError, so callers can treat bad input
uniformly without importing this module.
"""


class PlanNetError(Exception):
    """Base class for all plannet errors."""


class _Positioned(PlanNetError, ValueError):
    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        if line is not None:
            message = f"{line}:{column}: {message}"
        super().__init__(message)


class SexprSyntaxError(_Positioned):
    """Malformed s-expression text."""


class LibraryError(_Positioned):
    """A library or story file parsed but failed validation."""


class ConfigError(PlanNetError, ValueError):
    """Invalid inference configuration."""


class NetworkError(PlanNetError, ValueError):
    """The network could not be built or queried as requested."""


class InferenceError(PlanNetError, ValueError):
    """Exact inference failed."""


class InconsistentEvidenceError(InferenceError):
    """The evidence has (numerically) zero probability."""


class NetworkTooLargeError(InferenceError):
    """The network exceeds the joint-enumeration cap."""


class GridSpecError(PlanNetError, ValueError):
    """Malformed sweep grid specification."""
