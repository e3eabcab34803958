"""Exception types shared across the package."""


class AdvOverlayError(Exception):
    """Base class for errors raised by this package."""


class ConfigurationError(AdvOverlayError, ValueError):
    """A configuration value violates its contract."""


class ShapeError(AdvOverlayError, ValueError):
    """Tensor dimensions do not agree."""
