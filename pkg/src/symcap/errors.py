"""Exception types raised by symcap."""


class SymcapError(ValueError):
    """Base class for all symcap validation and solver errors."""


class NotInvolutive(SymcapError):
    pass


class NotAntiSymplectic(SymcapError):
    pass


class WrongFixedDimension(SymcapError):
    pass


class NotSymmetric(SymcapError):
    pass


class DegenerateBasis(SymcapError):
    pass


class NotSPD(SymcapError):
    pass


class NotCommuting(SymcapError):
    pass


class DimensionMismatch(SymcapError):
    pass


class OriginNotInterior(SymcapError):
    pass


class UnsupportedKind(SymcapError):
    pass


class UnsupportedSum(SymcapError):
    pass


class NotInvariant(SymcapError):
    pass


class NormalizerUnavailable(SymcapError):
    pass


class NonPositiveAction(SymcapError):
    pass


class EmptyCarrier(SymcapError):
    pass


class NoBoundaryContact(SymcapError):
    pass


class TooFewPoints(SymcapError):
    pass
