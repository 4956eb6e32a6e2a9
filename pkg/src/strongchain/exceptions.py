"""Exception hierarchy shared by all modules."""


class ChainError(Exception):
    """Base class for every error raised by strongchain."""


class DomainError(ChainError, ValueError):
    """An argument lies outside the domain of the operation (e.g. r <= 0)."""


class RangeError(ChainError, ValueError):
    """A value falls outside the range covered by a tabulated law."""


class NoSolutionError(ChainError):
    """No fixed point could be bracketed.

    ``bracket`` holds the last scanned ``(x2_lo, x2_hi)`` pair when known.
    """

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class ConvergenceError(ChainError):
    """An iterative method hit its iteration cap; ``last`` is the final iterate."""

    def __init__(self, message, last=None):
        super().__init__(message)
        self.last = last


class StiffnessError(ChainError):
    """Time step underflow in the adaptive integrator; ``state`` is the last accepted state."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class HypothesisViolation(ChainError, ValueError):
    """The inputs do not satisfy the assumptions of a theorem check."""
