"""Exception types shared across the package."""


class MomstratError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(MomstratError):
    pass


class NonIntegralInput(MomstratError):
    pass


class RankDeficient(MomstratError):
    pass


class UnboundedPolytope(MomstratError):
    pass


class EmptyPolytope(MomstratError):
    pass


class PointOutsideSupport(MomstratError):
    pass


class PointOutsideImage(MomstratError):
    pass


class InvalidCover(MomstratError):
    pass


class NonIntegrable(MomstratError):
    """Internal soundness assertion of the stratifier; never expected on valid covers."""


class NonEffectiveAction(MomstratError):
    pass


class EmptyFiber(MomstratError):
    pass


class DegenerateFiber(MomstratError):
    pass


class NotTopDimensional(MomstratError):
    pass


class InterpolationInconsistent(MomstratError):
    """Held-out check of an interpolated density polynomial failed."""


class ParseError(MomstratError):
    pass
