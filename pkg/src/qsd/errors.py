"""Exception types raised by the qsd package."""


class QsdError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(QsdError, ValueError):
    pass


class CountMismatch(QsdError, ValueError):
    pass


class NotPositiveSemidefinite(QsdError, ValueError):
    pass


class ConvergenceFailure(QsdError, ArithmeticError):
    """An eigen-solver failed to converge (pathological input)."""


class InvalidJitter(QsdError, ValueError):
    pass


class UnsupportedDimension(QsdError, ValueError):
    pass


class InvalidDistribution(QsdError, ValueError):
    pass


class AmbiguousClassification(QsdError, ValueError):
    pass


class BracketingFailure(QsdError, ValueError):
    pass


class IoFailure(QsdError, OSError):
    pass


class ProblemFormatError(QsdError, ValueError):
    """A problem/POVM document failed to parse or validate.

    ``path`` names the offending field, e.g. ``states[0].matrix``.
    """

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
