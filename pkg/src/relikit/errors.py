"""Exception hierarchy shared across the toolkit."""


class RelikitError(Exception):
    """Base class for all toolkit-specific errors."""


class NotPositiveDefiniteError(RelikitError):
    """Raised when a matrix expected to be SPD fails Cholesky factorization.

    ``pivot_index`` is the 0-based index of the first non-positive pivot.
    """

    def __init__(self, message: str, pivot_index: int | None = None):
        super().__init__(message)
        self.pivot_index = pivot_index


class ExpressionSyntaxError(RelikitError):
    """Raised on malformed limit-state expression text.

    ``offset`` is the byte offset into the source where the problem starts.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class EvaluationDomainError(RelikitError):
    """Raised when an expression is evaluated outside its real domain.

    ``subexpression`` is the pretty-printed offending subtree.
    """

    def __init__(self, message: str, subexpression: str):
        super().__init__(f"{message} in '{subexpression}'")
        self.subexpression = subexpression


class ZeroGradientError(RelikitError):
    """Raised when the standardized limit-state gradient vanishes."""


class DegenerateProblemError(RelikitError):
    """Raised when a sampler cannot make progress (e.g. constant limit state)."""


class NumericalDegeneracyError(RelikitError):
    """Raised when a conditional covariance block is numerically singular."""

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message)
        self.row = row


class ConfigError(RelikitError):
    """Raised on invalid run configuration.

    ``path`` is a JSON-pointer-style location of the offending entry.
    """

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{message}" + (f" (at {path})" if path else ""))
        self.path = path
