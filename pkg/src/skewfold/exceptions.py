"""Exception hierarchy shared by the library and the command line."""


class SkewfoldError(Exception):
    """Base class for every error raised by skewfold."""


class ParseError(SkewfoldError, ValueError):
    """Malformed polynomial or map-file text.

    Carries the 1-based ``line`` and ``column`` of the offending character.
    """

    def __init__(self, message, line=1, column=1):
        self.line = line
        self.column = column
        self.message = message
        super().__init__(f"line {line}, column {column}: {message}")


class InvalidMapError(SkewfoldError, ValueError):
    """The pair (p, q) violates the standing assumptions on a skew product."""


class BranchAmbiguityError(SkewfoldError, ValueError):
    """A fractional power was requested on the branch cut of the principal root."""


class HypothesisError(SkewfoldError):
    """A theorem hypothesis (degree condition, case requirement) does not hold."""


class RemainderOverflowError(SkewfoldError, OverflowError):
    """A single remainder term overflowed double precision."""


class ConvergenceError(SkewfoldError):
    """An iteration failed to converge; ``last`` holds the final iterate."""

    def __init__(self, message, last=None):
        self.last = last
        super().__init__(message)
