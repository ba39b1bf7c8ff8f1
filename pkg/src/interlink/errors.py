"""Exception types raised across the package."""


class InterlinkError(Exception):
    """Base class for every error raised by this package."""


# network construction / assembly
class IndexOutOfRange(InterlinkError, IndexError):
    pass


class InvalidWeight(InterlinkError, ValueError):
    pass


class EmptyPattern(InterlinkError, ValueError):
    pass


class SizeMismatch(InterlinkError, ValueError):
    pass


# eigensolver
class ConvergenceFailure(InterlinkError, ArithmeticError):
    pass


# closed-form analysis
class DegenerateCase(InterlinkError):
    """The two layers have equal specific connectivity, so no case applies.

    The partially filled report is attached as ``report``.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


# optimization
class InfeasiblePattern(InterlinkError, ValueError):
    pass


class NotRegular(InterlinkError, ValueError):
    pass


class TooManyPairs(InterlinkError, ValueError):
    pass


class NoCoalescence(InterlinkError):
    pass


class Unconverged(InterlinkError):
    """The solver stopped before certifying its answer.

    ``result`` holds the best iterate with its gap.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


# embedding
class ClusterTooLarge(InterlinkError):
    pass


class DualityGapTooLarge(InterlinkError):
    pass


class ZeroLambda(InterlinkError, ValueError):
    pass


# design tools / dynamics
class ExhaustedPairs(InterlinkError, ValueError):
    pass


class DegenerateTrajectory(InterlinkError, ValueError):
    pass


# file formats
class ParseError(InterlinkError, ValueError):
    def __init__(self, line, reason):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class ValidationError(InterlinkError, ValueError):
    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)
