"""Exception hierarchy shared by all modules."""


class LangevinIactError(Exception):
    """Base class for every error raised by this package."""


class NotPositiveDefinite(LangevinIactError, ValueError):
    pass


class NoConvergence(LangevinIactError, RuntimeError):
    pass


class Singular(LangevinIactError, ValueError):
    pass


class NonFinite(LangevinIactError, FloatingPointError):
    """A trajectory left the finite floats (usually: step size too large)."""


class CovarianceNotPSD(LangevinIactError, ValueError):
    pass


class EmptyBasis(LangevinIactError, ValueError):
    pass


class LagTooLarge(LangevinIactError, ValueError):
    pass


class TooShort(LangevinIactError, ValueError):
    pass


class DegenerateSeries(LangevinIactError, ValueError):
    """Zero sample variance; the IAcT is undefined."""


class DegenerateBasis(LangevinIactError, ValueError):
    pass


class DenominatorNonPositive(LangevinIactError, ValueError):
    pass


class DegenerateCovariance(LangevinIactError, ValueError):
    pass


class AllZero(LangevinIactError, ValueError):
    pass
