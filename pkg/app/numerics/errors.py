"""Exception hierarchy shared by the numerical core."""


class OUKitError(Exception):
    """Base class for every error raised by the toolkit."""


# System validation


class SystemValidationError(OUKitError, ValueError):
    """The (A, B, S) triple does not satisfy the structural assumptions."""


class SystemShapeError(SystemValidationError):
    pass


class NotDiagonalizable(SystemValidationError):
    pass


class NotSimultaneous(SystemValidationError):
    pass


class NonEllipticA(SystemValidationError):
    pass


class NotSkew(SystemValidationError):
    pass


class SystemNotScalar(OUKitError, ValueError):
    pass


# Special functions


class BranchCutHit(OUKitError, ValueError):
    pass


class PoleHit(OUKitError, ValueError):
    pass


class ParameterPole(OUKitError, ValueError):
    pass


class SeriesNotConverged(OUKitError, ArithmeticError):
    pass


# Quadrature and grids


class QuadratureNotConverged(OUKitError, ArithmeticError):
    pass


class EmptyGrid(OUKitError, ValueError):
    pass


class TooCloseToBoundary(OUKitError, ValueError):
    pass


# Resolvent hypotheses


class SpectralMarginTooSmall(OUKitError, ValueError):
    pass


class HypothesisViolated(OUKitError, ValueError):
    pass


class NonDecayingB(OUKitError, ValueError):
    pass


class ConfigInvalid(OUKitError, ValueError):
    pass


def describe_error(exc: BaseException) -> str:
    """Render an exception as '<ErrorName>: <message>' for reports."""
    return f"{type(exc).__name__}: {exc}"
