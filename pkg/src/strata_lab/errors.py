"""Exception types shared across the package."""


class StrataError(Exception):
    """Base class for all strata-lab errors."""


class ZeroWeight(StrataError):
    """A mixture weight is zero or negative."""


class WeightSumMismatch(StrataError):
    """Mixture weights do not sum to one."""


class OverlappingCarriers(StrataError):
    """Two same-dimension carriers intersect on a positive-measure set."""


class AmbientMismatch(StrataError):
    """Components do not share the same ambient dimension."""


class UnsupportedGeometry(StrataError):
    """Operation requires a closed-form catalog shape."""


class InfiniteScore(StrataError):
    """A Monte Carlo draw produced an off-support point (score -inf)."""


class DegenerateWeights(StrataError):
    """All importance-sampling weights vanished (no typical draw observed)."""


class TooLarge(StrataError):
    """Requested exact enumeration exceeds the configured size budget."""


class BadExponent(StrataError):
    """Schedule exponent must lie strictly between 0 and 1/2."""


class ConfigError(StrataError):
    """Experiment or measure configuration is invalid."""
