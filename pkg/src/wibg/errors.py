"""Exception hierarchy for numeric failures.

Config/validation problems raise ValueError; anything that means "the number
could not be computed to tolerance" derives from NumericError so the CLI can
map it to exit code 3.
"""


class NumericError(RuntimeError):
    """A numeric routine failed to reach its advertised tolerance."""


class QuadratureError(NumericError):
    """Adaptive quadrature exhausted its budget before converging."""

    def __init__(self, message, achieved=None, target=None):
        super().__init__(message)
        self.achieved = achieved
        self.target = target


class BracketError(NumericError):
    """A root bracket or optimizer bracket could not be established."""


class ScanRangeExhausted(NumericError):
    """A scan hit the end of its range without resolving the question.

    Distinct from "the feature does not exist": the scanned range was simply
    too small to decide.
    """
