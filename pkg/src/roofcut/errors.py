"""Exception types raised across the package."""


class InputError(ValueError):
    """Invalid user input: malformed matrix, bad subsystem index, wrong dims."""


class MeasureNormalizationError(RuntimeError):
    """A pure-state measure returned a value outside its declared range."""


class InternalConsistencyError(RuntimeError):
    """A quantity that must be non-negative came out clearly negative."""


class LPError(RuntimeError):
    """The master LP solver hit a degenerate basis or could not finish.

    Attributes
    ----------
    trace : list
        Per-pivot dump ``(iteration, leaving, entering, objective)``.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])
