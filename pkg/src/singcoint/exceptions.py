"""Exception and warning types raised across the package."""


class SingCointError(Exception):
    """Base class for all package errors."""


class ShapeError(SingCointError, ValueError):
    pass


class DegenerateResultant(SingCointError):
    """A leading coefficient vanishes, so the resultant is not defined."""


class NotZeroless(SingCointError):
    """The polynomial matrix loses column rank at some complex point."""

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class NoStableInverseWithinDegree(SingCointError):
    pass


class RankDeficientAtZero(SingCointError):
    pass


class GenericityViolation(SingCointError):
    """Raised when a parameter point is non-generic and the result is undefined."""


class InconsistentDraw(SingCointError):
    pass


class ExplosiveSystem(SingCointError):
    pass


class InsufficientData(SingCointError):
    pass


class EigenFailure(SingCointError):
    pass


class GenericityWarning(UserWarning):
    """A rank condition that holds generically failed numerically."""


class EstimationWarning(UserWarning):
    pass
