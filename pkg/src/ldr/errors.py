"""Exception types raised across the package."""


class LDRError(Exception):
    """Base class for all package errors."""


class InvalidShapeError(LDRError, ValueError):
    pass


class InvalidInputError(LDRError, ValueError):
    pass


class InvalidConfigError(LDRError, ValueError):
    pass


class IllPosedError(LDRError, ValueError):
    """A matrix that must be inverted is singular (or zero)."""


class DegenerateStepError(LDRError, ArithmeticError):
    """Retraction requested for a rank-deficient ``M + Z``."""


class DegenerateDataError(LDRError, ValueError):
    pass


class DegenerateSpectrumError(LDRError, ValueError):
    pass


class NumericalFailure(LDRError, ArithmeticError):
    """Objective, gradient or intermediate quantity is not finite."""


class UndefinedMetricError(LDRError, ZeroDivisionError):
    pass
