"""Exception hierarchy shared by every fracstab module."""


class FracstabError(Exception):
    """Base class for all errors raised by fracstab."""


class ParameterError(FracstabError, ValueError):
    """An argument is outside the range an operation accepts."""


class SingularParameterError(ParameterError):
    """The coefficient ``a`` equals -1, so the leading term ``a + 1`` vanishes."""


class DomainError(FracstabError, ValueError):
    """A function was evaluated where it is undefined (e.g. ``0**mu`` with ``mu <= 0``)."""


class RangeError(FracstabError, IndexError):
    """A sequence index falls outside the samples that are available."""


class NumericFailure(FracstabError, ArithmeticError):
    """An iterative method could not produce a trustworthy answer."""


class NoRootError(NumericFailure):
    """No sign change was found where one was required."""


class NoConvergenceError(NumericFailure):
    """Newton iteration hit its cap or met a singular Jacobian."""


class MarginalProximity(FracstabError):
    """The query point lies within the marginal band around the boundary curve."""

    def __init__(self, distance, band):
        super().__init__(f"point is {distance:.3e} from the curve (band {band:.3e})")
        self.distance = distance
        self.band = band
