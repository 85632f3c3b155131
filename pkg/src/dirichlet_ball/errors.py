"""Exception types shared across the package."""


class DirichletBallError(Exception):
    """Base class for all errors raised by this package."""


class ZeroConstantTerm(DirichletBallError, ZeroDivisionError):
    pass


class NotUnitary(DirichletBallError, ValueError):
    pass


class OutsideBall(DirichletBallError, ValueError):
    pass


class AlphaOutOfRange(DirichletBallError, ValueError):
    pass


class ParameterOutOfRange(DirichletBallError, ValueError):
    pass


class InteriorZero(DirichletBallError, ValueError):
    pass


class TruncationFailure(DirichletBallError, RuntimeError):
    """Series truncation did not meet its tail criterion below the order cap."""

    def __init__(self, message, order=None, norm_sq=None, tail_hint=None):
        super().__init__(message)
        self.order = order
        self.norm_sq = norm_sq
        self.tail_hint = tail_hint


class IllConditioned(DirichletBallError, RuntimeWarning):
    """Warning category for least-squares systems with condition above 1e12."""


class Inconclusive(DirichletBallError, RuntimeError):
    """A numerical classification could neither confirm nor refute its alternatives."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class MultipleBranch(DirichletBallError, ValueError):
    pass


class FitResidualTooLarge(DirichletBallError, RuntimeError):
    pass


class NonpositiveArgument(DirichletBallError, ValueError):
    pass


class DuplicateSupportPoints(DirichletBallError, ValueError):
    pass


class PolySyntaxError(DirichletBallError, SyntaxError):
    """Parse failure with the character offset and the tokens that would have been accepted."""

    def __init__(self, message, position, expected=()):
        self.position = position
        self.expected = tuple(expected)
        detail = message
        if self.expected:
            detail += " (expected " + " or ".join(self.expected) + ")"
        super().__init__(f"{detail} at position {position}")


class ExponentNotInteger(PolySyntaxError):
    pass
