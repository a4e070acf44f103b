"""Exception types raised by the toolkit."""


class JCNoiseError(Exception):
    """Base class for all toolkit errors."""


class NotHermitian(JCNoiseError, ValueError):
    pass


class NoConvergence(JCNoiseError, ArithmeticError):
    pass


class NonFinite(JCNoiseError, ArithmeticError):
    pass


class DimensionMismatch(JCNoiseError, ValueError):
    pass


class DomainError(JCNoiseError, ValueError):
    pass


class CutoffTooSmall(JCNoiseError, ValueError):
    """The truncated Fock space would drop more probability than allowed.

    ``suggested`` carries the smallest cutoff found to satisfy the tail bound,
    when one could be determined.
    """

    def __init__(self, message, tail_mass=None, suggested=None):
        super().__init__(message)
        self.tail_mass = tail_mass
        self.suggested = suggested


class MethodDiverged(JCNoiseError, ArithmeticError):
    pass


class ResonantOnly(JCNoiseError, ValueError):
    pass


class EmptyWindow(JCNoiseError, ValueError):
    pass
