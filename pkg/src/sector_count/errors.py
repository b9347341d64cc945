"""Exception types raised by the counting library."""


class SectorCountError(Exception):
    """Base class; the CLI maps these to exit code 3."""


class NotRepresentable(SectorCountError):
    pass


class CeilingExceeded(SectorCountError):
    pass


class PreconditionViolated(SectorCountError, ValueError):
    pass


class FallbackImpossible(SectorCountError):
    pass


class NoAdmissibleConvergent(SectorCountError):
    pass


class RationalExhausted(SectorCountError):
    """The rational slope's expansion is shorter than requested.

    ``available`` holds the complete finite list that was computed.
    """

    def __init__(self, message, available=()):
        super().__init__(message)
        self.available = list(available)


class GapRegime(SectorCountError):
    pass


class InsufficientData(SectorCountError):
    pass
