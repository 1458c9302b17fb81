"""Exception types raised across the package."""


class LinfError(Exception):
    """Base class for every error raised by linfchernoff."""


class AllZeroWeights(LinfError, ValueError):
    pass


class NegativeWeight(LinfError, ValueError):
    pass


class MaskOutOfRange(LinfError, ValueError):
    pass


class InfeasibleConditioning(LinfError):
    """The conditioning event has zero probability."""


class NotHomogeneous(LinfError, ValueError):
    pass


class GroundSetTooLarge(LinfError):
    pass


class DimensionMismatch(LinfError, ValueError):
    pass


class ThetaOutOfRange(LinfError, ValueError):
    pass


class NonPositiveD(LinfError, ValueError):
    pass


class Disconnected(LinfError, ValueError):
    pass


class KernelMismatch(LinfError, ValueError):
    pass


class TooManyTrees(LinfError):
    pass


class ParseError(LinfError, ValueError):
    pass


class PreconditionError(LinfError, ValueError):
    pass


class CTooSmall(UserWarning):
    """c is below 5 * D_inf * D_am; the trace inequality is not guaranteed."""
