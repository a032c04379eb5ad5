"""Exception types raised by tensormm."""


class TensorMMError(Exception):
    """Base class for all package errors."""


class ConvergenceError(TensorMMError, RuntimeError):
    """An iterative solver failed to reach its accuracy target."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class RankDeficiencyError(TensorMMError, ValueError):
    """A matrix or matricization has numerically lower rank than requested."""


class DegeneracyError(TensorMMError, RuntimeError):
    """HOOI collapsed: a projected matricization lost rank during a sweep."""

    def __init__(self, message, mode=None, iteration=None):
        super().__init__(message)
        self.mode = mode
        self.iteration = iteration


class CornerDeficiencyError(TensorMMError, RuntimeError):
    """SPA residual vanished before all corners were found."""

    def __init__(self, message, picks=()):
        super().__init__(message)
        self.picks = list(picks)


class CornerConditioningError(TensorMMError, RuntimeError):
    """The corner submatrix is too ill-conditioned to invert."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class GenerationError(TensorMMError, RuntimeError):
    """Random model generation gave up after its retry budget."""


class EstimationError(TensorMMError, RuntimeError):
    """Wraps a failure inside the estimation pipeline with the offending mode."""

    def __init__(self, message, mode=None):
        super().__init__(message)
        self.mode = mode


class TensorFormatError(TensorMMError, ValueError):
    """Malformed tensor text file."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DegenerateSpectrumWarning(UserWarning):
    """Emitted when a spectrum is degenerate and a fallback was used."""
