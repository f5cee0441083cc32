"""Shared exception types."""


class ValidationError(ValueError):
    """Input violates a structural invariant (bad shape, non-stochastic row, ...)."""


class EnumerationLimitError(RuntimeError):
    """Exact enumeration would exceed the configured cap.

    Callers should fall back to a Monte Carlo or greedy mode.
    """


class ChannelFileError(ValueError):
    """Channel file could not be parsed; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
