"""Kicked quantum systems under repeated momentum measurements.

Simulation suite covering the measured quantum chain (master equation over
momentum occupations), exact moment recursions, classical deterministic and
randomized kick maps, unmeasured unitary evolution, and the quantum, classical,
and semiclassical forms of the one-step transition kernel.
"""

__version__ = "0.1.0"

from .errors import (
    BesselRangeError,
    ConfigError,
    KickedMeasureError,
    LatticeOverflowError,
    ResolutionError,
    ToleranceError,
)
from .model import (
    FreeHamiltonian,
    ModelParams,
    MomentumDistribution,
    PotentialSpec,
    angle_grid,
    force_derivative_moment,
    force_moment,
    momentum_moment,
)

__all__ = [
    "BesselRangeError",
    "ConfigError",
    "KickedMeasureError",
    "LatticeOverflowError",
    "ResolutionError",
    "ToleranceError",
    "FreeHamiltonian",
    "ModelParams",
    "MomentumDistribution",
    "PotentialSpec",
    "angle_grid",
    "force_derivative_moment",
    "force_moment",
    "momentum_moment",
    "__version__",
]
