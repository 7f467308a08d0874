"""Exception types raised across the package."""


class HypflowError(Exception):
    """Base class for all package errors."""


class DomainError(HypflowError, ValueError):
    """An index or argument lies outside the domain of a function."""


class RangeError(HypflowError, ValueError):
    """A value cannot be inverted because it lies outside a profile's range."""


class MonotonicityError(HypflowError, ValueError):
    """A profile is not strictly increasing for the requested parameters."""


class ConeViolationError(HypflowError, ValueError):
    """A curvature tuple is outside the required Garding cone.

    Attributes
    ----------
    index : int
        The first elementary function index ``i`` with ``E_i <= 0``.
    location : int or None
        Flat index of the offending grid point when evaluated on arrays.
    """

    def __init__(self, message, index, location=None):
        super().__init__(message)
        self.index = index
        self.location = location


class ConvexityError(HypflowError, ValueError):
    """Constructed surface is not h-convex; carries the minimum shifted curvature."""

    def __init__(self, message, min_shifted_curvature):
        super().__init__(message)
        self.min_shifted_curvature = min_shifted_curvature


class ResolutionError(HypflowError, ValueError):
    pass


class GeometryError(HypflowError, FloatingPointError):
    """Non-finite values appeared while computing geometry (blow-up)."""


class InsufficientDataError(HypflowError, ValueError):
    pass


class ConfigError(HypflowError, ValueError):
    pass
