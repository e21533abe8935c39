"""Exception hierarchy shared by all solver modules."""


class MSMCellError(Exception):
    """Base class for every error raised by msmcell."""


class GeometryError(MSMCellError, ValueError):
    pass


class OverlapError(GeometryError):
    pass


class ResolutionError(GeometryError):
    pass


class DefinitenessError(MSMCellError, ValueError):
    pass


class ConvergenceError(MSMCellError, RuntimeError):
    """CG hit its iteration cap before reaching the residual tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class SizeError(MSMCellError, ValueError):
    pass


class NoBracketError(MSMCellError, ValueError):
    """The energy difference does not change sign over the bracket."""

    def __init__(self, message, lo_difference, hi_difference):
        super().__init__(message)
        self.lo_difference = lo_difference
        self.hi_difference = hi_difference


class SchemaError(MSMCellError, ValueError):
    pass
