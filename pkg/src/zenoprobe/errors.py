"""Exception hierarchy shared by every zenoprobe module."""


class ZenoProbeError(Exception):
    """Base class for all package errors."""


class NonHermitianError(ZenoProbeError, ValueError):
    pass


class DimensionError(ZenoProbeError, ValueError):
    pass


class NotShiftedError(ZenoProbeError, ValueError):
    """The initial state does not sit at zero energy."""


class BranchAnnihilatedError(ZenoProbeError, ArithmeticError):
    """The post-selected branch has exactly zero probability."""


class GuardExceededError(ZenoProbeError, ValueError):
    pass


class NoSurvivorsError(ZenoProbeError, ValueError):
    pass


class DegenerateInversionError(ZenoProbeError, ValueError):
    """Every surviving readout was ``minus``; the phase sits on the pi/2 edge.

    The one-sided estimate is still available as ``result``.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class InvalidConfigError(ZenoProbeError, ValueError):
    pass


class ParseError(ZenoProbeError, ValueError):
    pass
