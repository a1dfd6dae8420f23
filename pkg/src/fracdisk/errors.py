"""Exception types raised by fracdisk."""


class FracDiskError(Exception):
    """Base class for all package errors."""


class DomainError(FracDiskError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class InvalidIndexError(FracDiskError, ValueError):
    """A basis index (l, n, mu) is malformed or not a member of the basis."""


class RepresentationError(FracDiskError, ValueError):
    """Coefficient vectors carry incompatible Jacobi parameters or weight prefactors."""


class NotSPDError(FracDiskError, ValueError):
    """A diffusivity tensor fails to be symmetric positive definite."""


class PreconditionError(FracDiskError, ValueError):
    """A documented precondition of an operator does not hold."""


class SolveError(FracDiskError, RuntimeError):
    """The linear solve failed or its residual exceeded tolerance.

    Attributes:
        condition: Condition number estimate of the assembled matrix, if computed.
    """

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class ConfigError(FracDiskError, ValueError):
    """A configuration file or CLI selector could not be parsed."""
