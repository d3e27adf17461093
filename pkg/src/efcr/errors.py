"""Exception hierarchy shared by every module of the toolkit."""


class ModelError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(ModelError, ValueError):
    """A parameter or input violates a documented invariant."""


class OutOfRangeError(ModelError, ValueError):
    """Requested point lies outside a tabulated domain."""


class UnsupportedMapError(ModelError, TypeError):
    """Operation needs an affine voltage/frequency map."""


class UndefinedTimeError(ModelError, ValueError):
    """Execution time is undefined for f <= f_k."""


class ModelViolationError(ModelError, ValueError):
    """Per-cycle time is not positive at the requested frequency."""


class SingularityError(ModelError, ValueError):
    """Derivatives requested at the f = f_k pole."""


class NoInteriorOptimumError(ModelError, ValueError):
    """No admissible stationary point exists; use boundary analysis."""


class ApproximationError(ModelError, ValueError):
    """Quadratic power approximation is not usable (k <= 0)."""


class FitError(ModelError, ValueError):
    """Parameter estimation failed (rank deficiency, invalid sign, ...)."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate
