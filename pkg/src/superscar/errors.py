"""Exception hierarchy shared by all modules."""


class SuperscarError(Exception):
    """Base class for every error raised by this package."""


# geometry
class PairingMismatch(SuperscarError):
    pass


class NonMatching(SuperscarError):
    pass


class DegeneratePolygon(SuperscarError):
    pass


class IrrationalAngle(SuperscarError):
    pass


class UnfoldOverflow(SuperscarError):
    pass


class PointOutsideSurface(SuperscarError):
    pass


class PointOutsidePolygon(SuperscarError):
    pass


# flow
class StartAtSingularity(SuperscarError):
    pass


class NotPeriodic(SuperscarError):
    pass


class HitSingularity(SuperscarError):
    """Raised when an orbit that must avoid cone points runs into one."""

    def __init__(self, message, cone_point=None, length=None):
        super().__init__(message)
        self.cone_point = cone_point
        self.length = length


class NonPositiveBudget(SuperscarError):
    pass


class BudgetExceeded(SuperscarError):
    pass


# numerics
class QuadratureNotConverged(SuperscarError):
    pass


class CrossCheckFailed(SuperscarError):
    pass


class OrderTooLarge(SuperscarError):
    pass


class NonRealNorm(SuperscarError):
    pass


class PreconditionNotCertified(SuperscarError):
    pass


class GridTooCoarse(SuperscarError):
    pass


class ZeroField(SuperscarError):
    pass


class NonPositiveData(SuperscarError):
    pass
