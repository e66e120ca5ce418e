"""Exception hierarchy shared by every module.

Validation problems derive from :class:`ValueError` so callers can catch them
generically; the CLI maps them to exit code 2.
"""


class RadarLowRankError(Exception):
    """Base class for all package errors."""


class ValidationError(RadarLowRankError, ValueError):
    """Input violates a documented precondition or type invariant."""


class EmptyMatrix(ValidationError):
    pass


class NonFinite(ValidationError):
    pass


class ZeroRank(ValidationError):
    pass


class ShapeMismatch(ValidationError):
    pass


class OutOfBounds(ValidationError):
    pass


class InfeasibleFraction(ValidationError):
    pass


class ZeroWidth(ValidationError):
    pass


class TooFewSamples(ValidationError):
    pass


class NonPositiveRange(ValidationError):
    pass


class FormatError(ValidationError):
    """A data file does not follow its declared layout."""


class UnreliableEstimate(RadarLowRankError):
    """Lag-1 correlation too weak for a trustworthy spectrum width.

    The partially computed moments are kept on ``moments`` so callers can
    still use the power and velocity.
    """

    def __init__(self, message, moments=None):
        super().__init__(message)
        self.moments = moments


class Divergence(RadarLowRankError):
    """SVT residual blew up; usually the step size is too large."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history or [])


class ConfigWarning(UserWarning):
    """Parameters are valid but describe a degenerate setup."""
