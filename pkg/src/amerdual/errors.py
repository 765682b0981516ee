"""Exception types shared across the engine."""


class AmerdualError(Exception):
    """Base class for all engine errors."""


class ModelFormatError(AmerdualError):
    """A model file or input structure does not follow the schema."""


class MalformedProblem(AmerdualError):
    """An LP (or payoff) is dimensionally inconsistent."""


class NumericalFailure(AmerdualError):
    """Float-mode pivoting produced contradictory residuals."""


class UnboundedBelow(AmerdualError):
    """A superhedging LP is unbounded below; the market admits a uniform arbitrage."""


class NoCalibratedMeasure(AmerdualError):
    """No calibrated martingale measure exists (arbitrage or inconsistent statics)."""


class NotCalibrated(AmerdualError):
    """A supplied measure fails martingale or calibration constraints."""


class SupportMismatch(AmerdualError):
    """A marginal's support is not contained in the path grid."""


class DimensionUnsupported(AmerdualError):
    """Convex-order checks are only available in dimension one."""


class NoStopFound(AmerdualError):
    """The optimal-exercise scan found no stopping date (internal inconsistency)."""


class EnumerationCapExceeded(AmerdualError):
    """The stopping-time enumeration would exceed the configured cap."""

    def __init__(self, estimate: int, cap: int):
        super().__init__(
            f"enumeration needs {estimate} stopping rules, cap is {cap}"
        )
        self.estimate = estimate
        self.cap = cap
