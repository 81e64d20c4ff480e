"""Exception types shared across the package."""


class BetaRecurError(Exception):
    pass


class DivisionByZero(BetaRecurError, ZeroDivisionError):
    pass


class PrecisionExhausted(BetaRecurError):
    pass


class Undecidable(BetaRecurError):
    """A comparison or floor could not be certified at the maximum precision.

    ``depth`` and ``partial`` are filled in by iterative engines so callers can
    report how far the computation got before it stopped.
    """

    def __init__(self, message, depth=None, partial=None):
        super().__init__(message)
        self.depth = depth
        self.partial = partial


class NotAdmissible(BetaRecurError):
    def __init__(self, message, shift=None):
        super().__init__(message)
        self.shift = shift


class PeriodicInput(BetaRecurError):
    pass


class InsufficientDepth(BetaRecurError):
    pass


class AdmissibilityFailed(BetaRecurError):
    def __init__(self, message, shift=None):
        super().__init__(message)
        self.shift = shift


class DepthTooLarge(BetaRecurError):
    pass


class ConfigError(BetaRecurError, ValueError):
    pass
