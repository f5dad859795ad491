"""Physical parameters, periodic potentials, and the momentum lattice.

Everything here is immutable after construction. Momentum eigenvalues live on
the lattice p_n = n*hbar, n in [-M, M]; angle grids are uniform on [-pi, pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ResolutionError

TWO_PI = 2.0 * math.pi

# fractional change tolerated when the quadrature grid is doubled
QUADRATURE_TOL = 1e-10


def angle_grid(grid_points: int) -> np.ndarray:
    """Uniform half-open grid x_j = -pi + 2*pi*j/G, j = 0..G-1."""
    j = np.arange(grid_points)
    return -math.pi + TWO_PI * j / grid_points


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class FreeHamiltonian:
    """Free Hamiltonian H0(p) with its derivative (needed by the classical map)."""

    value: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray]
    label: str = "p^2/2"

    @classmethod
    def quadratic(cls) -> "FreeHamiltonian":
        """Rotor default: H0 = p^2/2, unit moment of inertia."""
        return cls(value=lambda p: 0.5 * p * p, derivative=lambda p: p, label="p^2/2")


@dataclass(frozen=True)
class ModelParams:
    """Kick strength, effective Planck constant, timing, and H0.

    lam is the kick strength (the CLI spells it --lambda; the Python keyword
    forces the short name here). tau is the measurement delay after each kick;
    it is validated but no implemented observable depends on it.
    """

    lam: float
    hbar: float
    period: float = 1.0
    tau: Optional[float] = None
    free_hamiltonian: FreeHamiltonian = field(default_factory=FreeHamiltonian.quadratic)

    def __post_init__(self):
        # lam = 0 is admitted: the identity-kick limit anchors several contracts
        if not (self.lam >= 0.0 and math.isfinite(self.lam)):
            raise ValueError(f"kick strength must be finite and >= 0, got {self.lam}")
        if not self.hbar > 0.0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        if not self.period > 0.0:
            raise ValueError(f"period must be positive, got {self.period}")
        if self.tau is None:
            object.__setattr__(self, "tau", 0.5 * self.period)
        if not (0.0 < self.tau < self.period):
            raise ValueError(
                f"tau must lie strictly inside (0, period), got {self.tau}"
            )
        if not math.isfinite(self.lam / self.hbar):
            raise ValueError("lambda/hbar is not representable")

    @property
    def kernel_argument(self) -> float:
        """Dimensionless z = lambda/hbar entering the transition kernel."""
        return self.lam / self.hbar


@dataclass(frozen=True)
class PotentialSpec:
    """Periodic potential V(x) on [-pi, pi] with force f = -V'.

    If no analytic derivative is supplied the force is evaluated through the
    trigonometric interpolant of the sampled potential, which is spectrally
    accurate for smooth V. grid_points fixes the transform resolution used by
    the kernel builder and the interpolant.
    """

    v: Callable[[np.ndarray], np.ndarray]
    dv: Optional[Callable[[np.ndarray], np.ndarray]] = None
    grid_points: int = 1024
    label: str = "custom"

    def __post_init__(self):
        if not _is_power_of_two(self.grid_points):
            raise ValueError(f"grid_points must be a power of two, got {self.grid_points}")
        if self.grid_points < 8:
            raise ValueError("grid_points must be at least 8")
        left = float(self.v(np.array([-math.pi]))[0])
        right = float(self.v(np.array([math.pi]))[0])
        scale = max(1.0, abs(left), abs(right))
        if abs(left - right) > 1e-9 * scale:
            raise ValueError(
                f"potential is not periodic: V(-pi)={left!r} differs from V(pi)={right!r}"
            )
        f = self.force_on_grid(self.grid_points)
        mean_f = float(np.mean(f))
        if abs(mean_f) > 1e-9 * max(1.0, float(np.max(np.abs(f)))):
            raise ValueError(f"mean force is not zero (got {mean_f!r}); V is not periodic")

    # -- constructors ------------------------------------------------------

    @classmethod
    def cosine(cls, grid_points: int = 1024) -> "PotentialSpec":
        """V = cos x, the kicked-rotator standard choice (force f = sin x)."""
        return cls(
            v=np.cos,
            dv=lambda x: -np.sin(x),
            grid_points=grid_points,
            label="cos",
        )

    @classmethod
    def from_fourier(
        cls,
        cos_coeffs: Sequence[float] = (),
        sin_coeffs: Sequence[float] = (),
        grid_points: int = 1024,
    ) -> "PotentialSpec":
        """V(x) = sum_k a_k cos(kx) + b_k sin(kx), k starting at 1."""
        a = np.asarray(cos_coeffs, dtype=float)
        b = np.asarray(sin_coeffs, dtype=float)
        if a.size == 0 and b.size == 0:
            raise ValueError("at least one Fourier coefficient is required")
        ka = np.arange(1, a.size + 1)
        kb = np.arange(1, b.size + 1)

        def v(x):
            x = np.asarray(x, dtype=float)
            out = np.zeros_like(x)
            if a.size:
                out = out + (a * np.cos(np.multiply.outer(x, ka))).sum(axis=-1)
            if b.size:
                out = out + (b * np.sin(np.multiply.outer(x, kb))).sum(axis=-1)
            return out

        def dv(x):
            x = np.asarray(x, dtype=float)
            out = np.zeros_like(x)
            if a.size:
                out = out - (a * ka * np.sin(np.multiply.outer(x, ka))).sum(axis=-1)
            if b.size:
                out = out + (b * kb * np.cos(np.multiply.outer(x, kb))).sum(axis=-1)
            return out

        parts = []
        if a.size:
            parts.append("cos:" + ",".join(repr(c) for c in a))
        if b.size:
            parts.append("sin:" + ",".join(repr(c) for c in b))
        return cls(v=v, dv=dv, grid_points=grid_points, label=";".join(parts))

    @classmethod
    def from_callable(
        cls,
        v: Callable[[np.ndarray], np.ndarray],
        dv: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        grid_points: int = 1024,
        label: str = "custom",
    ) -> "PotentialSpec":
        return cls(v=v, dv=dv, grid_points=grid_points, label=label)

    # -- grids and forces --------------------------------------------------

    def grid(self, grid_points: Optional[int] = None) -> np.ndarray:
        return angle_grid(grid_points or self.grid_points)

    def values_on_grid(self, grid_points: Optional[int] = None) -> np.ndarray:
        return np.asarray(self.v(self.grid(grid_points)), dtype=float)

    def force_on_grid(self, grid_points: Optional[int] = None) -> np.ndarray:
        """Force samples f = -V' on the uniform grid.

        Resamples V at the requested resolution, so doubling grid_points is a
        genuine convergence test rather than a re-evaluation of one interpolant.
        """
        n = grid_points or self.grid_points
        if self.dv is not None:
            return -np.asarray(self.dv(self.grid(n)), dtype=float)
        return _spectral_derivative(self.values_on_grid(n), order=1) * -1.0

    def force_derivative_on_grid(self, grid_points: Optional[int] = None) -> np.ndarray:
        """Samples of f' = -V'' via spectral differentiation of the force."""
        n = grid_points or self.grid_points
        return _spectral_derivative(self.force_on_grid(n), order=1)

    @cached_property
    def _force_harmonics(self):
        # interpolant coefficients for arbitrary-x force evaluation:
        # f(x) = sum_m g_m e^{imx}, retaining only numerically significant m
        f = self.force_on_grid(self.grid_points)
        g = self.grid_points
        m = np.fft.fftfreq(g, d=1.0 / g).astype(int)
        coeffs = np.fft.fft(f) * ((-1.0) ** np.abs(m)) / g
        keep = np.abs(coeffs) > 1e-13 * max(1.0, float(np.max(np.abs(coeffs))))
        keep &= np.abs(m) < g // 2
        return m[keep], coeffs[keep]

    def force(self, x) -> np.ndarray:
        """Force f = -V'(x) at arbitrary angles (vectorized)."""
        x = np.asarray(x, dtype=float)
        if self.dv is not None:
            return -np.asarray(self.dv(x), dtype=float)
        m, coeffs = self._force_harmonics
        phases = np.exp(1j * np.multiply.outer(x, m.astype(float)))
        return np.real(phases @ coeffs)


def _spectral_derivative(samples: np.ndarray, order: int = 1) -> np.ndarray:
    """Differentiate uniformly sampled periodic data by Fourier multiplier."""
    g = samples.size
    m = np.fft.fftfreq(g, d=1.0 / g)
    mult = (1j * m) ** order
    if g % 2 == 0:
        mult[g // 2] = 0.0  # unpaired Nyquist mode carries no derivative information
    return np.real(np.fft.ifft(np.fft.fft(samples) * mult))


@dataclass(frozen=True)
class MomentumDistribution:
    """Occupation probabilities P_n on the lattice n in [-M, M].

    tail_mass records probability that has been dropped off-lattice (and
    restored by renormalization) over the distribution's history.
    """

    half_width: int
    probs: np.ndarray
    tail_mass: float = 0.0

    def __post_init__(self):
        if self.half_width < 0:
            raise ValueError("half_width must be nonnegative")
        probs = np.asarray(self.probs, dtype=float)
        if probs.shape != (2 * self.half_width + 1,):
            raise ValueError(
                f"probs must have length {2 * self.half_width + 1}, got {probs.shape}"
            )
        if probs.min() < -1e-12:
            raise ValueError(f"negative probability {probs.min()!r}")
        probs = np.where(probs < 0.0, 0.0, probs)
        total = math.fsum(probs.tolist())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def delta(cls, half_width: int, n: int = 0) -> "MomentumDistribution":
        """Point distribution at lattice site n."""
        if abs(n) > half_width:
            raise ValueError(f"site {n} outside lattice of half-width {half_width}")
        probs = np.zeros(2 * half_width + 1)
        probs[half_width + n] = 1.0
        return cls(half_width=half_width, probs=probs)

    def n_values(self) -> np.ndarray:
        return np.arange(-self.half_width, self.half_width + 1)


def force_moment(potential: PotentialSpec, k: int) -> float:
    """Angle average <f^k> = (1/2pi) int f(x)^k dx over one period.

    Uniform-grid quadrature (spectrally accurate for periodic integrands);
    the grid is doubled once and disagreement beyond tolerance raises
    ResolutionError.
    """
    if k not in (1, 2, 3, 4):
        raise ValueError(f"k must be in 1..4, got {k}")
    coarse = float(np.mean(potential.force_on_grid(potential.grid_points) ** k))
    fine = float(np.mean(potential.force_on_grid(2 * potential.grid_points) ** k))
    if abs(fine - coarse) > QUADRATURE_TOL:
        raise ResolutionError(
            f"<f^{k}> changed by {abs(fine - coarse):.3e} on grid doubling; "
            f"raise grid_points above {potential.grid_points}"
        )
    return fine


def force_derivative_moment(potential: PotentialSpec) -> float:
    """Angle average <(f')^2>, the hbar^2 coefficient in the fourth moment."""
    coarse = float(np.mean(potential.force_derivative_on_grid(potential.grid_points) ** 2))
    fine = float(np.mean(potential.force_derivative_on_grid(2 * potential.grid_points) ** 2))
    if abs(fine - coarse) > QUADRATURE_TOL:
        raise ResolutionError(
            f"<(f')^2> changed by {abs(fine - coarse):.3e} on grid doubling; "
            f"raise grid_points above {potential.grid_points}"
        )
    return fine


def momentum_moment(dist: MomentumDistribution, hbar: float, k: int) -> float:
    """Lattice moment sum_n (n*hbar)^k P_n, accumulated with compensated summation."""
    if not 0 <= k <= 4:
        raise ValueError(f"k must be in 0..4, got {k}")
    if k == 0:
        return math.fsum(dist.probs.tolist())
    p = dist.n_values() * hbar
    return math.fsum((p**k * dist.probs).tolist())
