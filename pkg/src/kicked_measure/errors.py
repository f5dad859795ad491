"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, ResolutionError and
ToleranceError -> 3, LatticeOverflowError -> 4.
"""


class KickedMeasureError(Exception):
    """Base class for all package errors."""


class ConfigError(KickedMeasureError):
    """Invalid run configuration or config-file content."""


class ResolutionError(KickedMeasureError):
    """Quadrature or grid resolution is insufficient for the requested accuracy."""


class ToleranceError(KickedMeasureError):
    """A numeric tolerance contract cannot be met with the given settings."""


class BesselRangeError(KickedMeasureError):
    """Order or argument outside the supported evaluation range."""


class LatticeOverflowError(KickedMeasureError):
    """Probability or amplitude mass left the truncated momentum lattice.

    Carries the half-width that would have been needed so callers can retry.
    """

    def __init__(self, message, required_half_width=None):
        super().__init__(message)
        self.required_half_width = required_half_width
