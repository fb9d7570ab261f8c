"""Exception hierarchy.

Every failure raised while advancing the scheme derives from
:class:`NumericalFailure`, so the CLI can map the whole family onto a
single exit code.
"""


class RSWError(Exception):
    """Base class for all package errors."""


class ConfigError(RSWError, ValueError):
    """Invalid run configuration or unknown case name."""


class UnknownCase(ConfigError, KeyError):
    pass


class GridMismatch(RSWError, ValueError):
    pass


class IndivisibleDims(RSWError, ValueError):
    pass


class NonpositiveError(RSWError, ValueError):
    pass


class EmptyEnsemble(RSWError, ValueError):
    pass


class EmptyList(RSWError, ValueError):
    pass


class NumericalFailure(RSWError, RuntimeError):
    """A time step could not be completed."""


class NonpositiveDt(NumericalFailure):
    pass


class DominanceViolation(NumericalFailure):
    pass


class NonConvergence(NumericalFailure):
    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class PositivityFailure(NumericalFailure):
    def __init__(self, message, cells=()):
        super().__init__(message)
        self.cells = list(cells)


class BracketViolation(NumericalFailure):
    pass


class MismatchBeyondTolerance(NumericalFailure):
    pass


class EnergyIncrease(NumericalFailure):
    pass
