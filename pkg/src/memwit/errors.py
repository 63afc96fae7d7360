"""Exception types raised across the package."""


class MemwitError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(MemwitError):
    pass


class NonSquareChannel(MemwitError):
    pass


class NotAChoiState(MemwitError):
    pass


class SingularMap(MemwitError):
    pass


class NotAQubitChannel(MemwitError):
    pass


class BadDimension(MemwitError):
    pass


class ParamOutOfRange(MemwitError):
    pass


class PoleEncountered(MemwitError):
    """A closed-form rate was evaluated at (or too close to) a divergence."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class ExtractionSingular(MemwitError):
    pass


class StiffnessFailure(MemwitError):
    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class NormCollapse(MemwitError):
    pass


class NotCPT(MemwitError):
    pass


class NoSolution(MemwitError):
    pass


class NoBracket(MemwitError):
    pass


class UnknownTarget(MemwitError):
    pass
