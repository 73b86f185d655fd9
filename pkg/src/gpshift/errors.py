"""Exception types raised across the package."""


class ParameterError(ValueError):
    """A parameter lies outside its legal domain."""


class UnsupportedOperation(TypeError):
    """The operation is not defined for the given kernel family or domain."""


class ConditioningError(ArithmeticError):
    """A covariance matrix is numerically not positive definite.

    ``pivot`` is the 1-based index of the leading minor that failed.
    """

    def __init__(self, message, pivot):
        super().__init__(message)
        self.pivot = pivot


class EstimationError(RuntimeError):
    """Covariance parameter estimation produced no usable fit."""
