"""Exceptions raised by ctda."""


class DataFormatError(ValueError):
    """A data file could not be parsed."""


class InsufficientData(ValueError):
    """Not enough samples or history for the requested operation."""


class NoiseLevelError(ValueError):
    """Channel noise parameter out of its admissible range."""


class InconsistentChannel(ValueError):
    """A channel cannot explain (or cannot be inverted against) a source."""


class InfeasiblePerturbation(ValueError):
    """
    A perturbation would produce negative probabilities.

    The largest feasible `delta` is available as `max_delta`.
    """

    def __init__(self, message, max_delta):
        super().__init__(message)
        self.max_delta = max_delta


class LMSDiverged(ArithmeticError):
    """An LMS step produced non-finite weights."""
