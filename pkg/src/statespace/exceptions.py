class StateSpaceError(ValueError):
    """Base class for errors raised by this package."""


class DimensionError(StateSpaceError):
    pass


class SingularInnovationError(StateSpaceError, ArithmeticError):
    """Innovation covariance could not be factorized at an observed period."""

    def __init__(self, t, message=None):
        self.t = t
        super().__init__(message or f"innovation covariance F_t is numerically singular at t = {t}")


class EstimationError(StateSpaceError):
    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics or []
        super().__init__(message)


class ForecastError(StateSpaceError):
    pass


class ArtifactError(StateSpaceError):
    pass
