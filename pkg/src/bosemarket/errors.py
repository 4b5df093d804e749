"""Exception hierarchy.

Everything raised on purpose derives from :class:`MarketError`.  The CLI maps
:class:`ValidationError` to exit code 1 and :class:`NumericalError` to exit
code 2.
"""


class MarketError(Exception):
    """Base class for all package errors."""


class ValidationError(MarketError):
    """Bad input: malformed, out of bounds, or infeasible."""


class NumericalError(MarketError):
    """A numerical procedure failed to reach its target."""


# grids and constraints
class NonMonotoneLevels(ValidationError):
    pass


class NonPositiveDegeneracy(ValidationError):
    pass


class TooFewLevels(ValidationError):
    pass


class NegativeEpsilon(ValidationError):
    pass


class Infeasible(ValidationError):
    pass


class InvalidParameter(ValidationError):
    pass


# equilibrium
class DomainViolation(ValidationError):
    pass


class NoGroundLevel(ValidationError):
    pass


class NoConvergence(NumericalError):
    """Iteration cap reached.  ``solution`` holds the best iterate."""

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


# enumeration and sampling
class NonIntegerLevels(ValidationError):
    pass


class InstanceTooLarge(ValidationError):
    pass


class InfeasibleStart(ValidationError):
    pass


class NoValidMove(MarketError):
    """The configuration admits no compensated pair move."""


# indicators
class BoundsViolation(ValidationError):
    pass


class EmptyPanel(ValidationError):
    pass


class InsufficientData(ValidationError):
    pass


class DegenerateDesign(ValidationError):
    pass


class InvalidThreshold(ValidationError):
    pass


# input / CLI
class ParseError(ValidationError):
    def __init__(self, message, path=None, line=None, column=None):
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        prefix = ":".join(where[:1]) + (" " + ", ".join(where[1:]) if len(where) > 1 else "")
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.path = path
        self.line = line
        self.column = column


class FileNotFound(ValidationError):
    pass


class UnknownCommand(ValidationError):
    pass


class BadFlag(ValidationError):
    pass
