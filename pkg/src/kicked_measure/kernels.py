"""One-step momentum transition kernels.

The measured chain moves on the lattice Delta_p = hbar*nu with probabilities
W_nu = |c_nu|^2, c_nu = (1/2pi) int e^{-i nu x} e^{-i lambda V(x)/hbar} dx.
For V = cos x the row is J_nu(lambda/hbar)^2. The classical limit of the same
step is the arcsine density W_cl = [pi sqrt(lambda^2 - dp^2)]^{-1} inside
|dp| < lambda, and the two Debye regimes of the Bessel function connect them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import BesselRangeError, ToleranceError
from .model import ModelParams, PotentialSpec

# a kernel row must capture all but this much probability
DEFAULT_TAIL_TOL = 1e-10

_MAX_ORDER = 10**6
_MAX_ARGUMENT = 1e6

# Miller recurrence rescaling guards
_BIG = 1e10
_BIG_INV = 1e-10


def _miller_start(max_order: int, z: float) -> int:
    # enough orders above the turning point to wash out the arbitrary seed:
    # the Airy-region decay gains a factor > e^40 over ~14 z^(1/3) orders
    base = max(max_order, int(math.ceil(z)))
    start = base + int(math.ceil(14.0 * max(z, 1.0) ** (1.0 / 3.0))) + 26
    return start + (start % 2)  # even start keeps the normalization sum aligned


def bessel_j_sequence(max_order: int, argument: float) -> np.ndarray:
    """J_0(z) .. J_max_order(z) by downward Miller recurrence.

    Normalized with J_0 + 2*sum_k J_2k = 1; intermediate growth is rescaled to
    avoid overflow. Absolute accuracy is well below 1e-12 over the supported
    range (order, argument <= 1e6).
    """
    if max_order < 0:
        raise ValueError("max_order must be nonnegative")
    if argument < 0.0 or not math.isfinite(argument):
        raise ValueError(f"argument must be finite and >= 0, got {argument}")
    if max_order > _MAX_ORDER or argument > _MAX_ARGUMENT:
        raise BesselRangeError(
            f"order {max_order} / argument {argument} outside supported range 1e6"
        )
    z = float(argument)
    if z == 0.0:
        out = np.zeros(max_order + 1)
        out[0] = 1.0
        return out
    if z < 1e-6:
        return _bessel_small_argument(max_order, z)

    start = _miller_start(max_order, z)
    out = np.zeros(max_order + 1)
    jp = 0.0  # J at order m+1 (unnormalized)
    jc = 1.0  # J at order m (arbitrary seed)
    norm = 0.0
    for m in range(start, 0, -1):
        jm = (2.0 * m / z) * jc - jp
        jp = jc
        jc = jm
        if m - 1 <= max_order:
            out[m - 1] = jc
        if (m - 1) % 2 == 0 and m - 1 > 0:
            norm += 2.0 * jc
        if abs(jc) > _BIG:
            jc *= _BIG_INV
            jp *= _BIG_INV
            norm *= _BIG_INV
            out *= _BIG_INV
    norm += jc  # adds J_0
    return out / norm


def _bessel_small_argument(max_order: int, z: float) -> np.ndarray:
    # leading series terms; absolute truncation error < z^2/4 * (z/2)^m / m!
    out = np.zeros(max_order + 1)
    half = 0.5 * z
    log_half = math.log(half)
    for m in range(max_order + 1):
        log_term = m * log_half - math.lgamma(m + 1)
        if log_term < -745.0:
            break
        out[m] = math.exp(log_term) * (1.0 - half * half / (m + 1.0))
    return out


def bessel_j(order: int, argument: float) -> float:
    """Bessel function of integer order; negative orders via J_-m = (-1)^m J_m."""
    m = abs(int(order))
    sign = -1.0 if (order < 0 and m % 2 == 1) else 1.0
    return sign * float(bessel_j_sequence(m, argument)[m])


@dataclass(frozen=True)
class TransitionKernel:
    """Translation-invariant row W_nu of the measured chain, nu in [-K, K].

    tail_mass is the probability the truncated row missed before
    renormalization put the total back to one.
    """

    hbar: float
    row: np.ndarray
    tail_mass: float
    renormalized: bool = True

    def __post_init__(self):
        row = np.asarray(self.row, dtype=float)
        if row.ndim != 1 or row.size % 2 != 1:
            raise ValueError("kernel row must be one-dimensional with odd length")
        if row.min() < 0.0:
            raise ValueError(f"negative kernel entry {row.min()!r}")
        row = row.copy()
        row.setflags(write=False)
        object.__setattr__(self, "row", row)

    @property
    def half_order(self) -> int:
        return (self.row.size - 1) // 2

    def nu_values(self) -> np.ndarray:
        k = self.half_order
        return np.arange(-k, k + 1)

    def momentum_transfers(self) -> np.ndarray:
        return self.nu_values() * self.hbar

    def moment(self, k: int) -> float:
        """Transfer moment sum_nu (hbar*nu)^k W_nu (compensated summation)."""
        dp = self.momentum_transfers()
        return math.fsum((dp**k * self.row).tolist())


def quantum_kernel(
    params: ModelParams,
    potential: PotentialSpec,
    max_order: Optional[int] = None,
    tail_tol: float = DEFAULT_TAIL_TOL,
    renormalize: bool = True,
) -> TransitionKernel:
    """Exact one-kick transition probabilities from the unitary kick operator.

    Fourier-transforms e^{-i lambda V(x)/hbar} on the potential grid; row
    entries are |c_nu|^2. With max_order=None the support is the smallest
    symmetric window whose tail is below tail_tol, capped by the Airy-width
    ceiling and by grid_points/4 (anti-aliasing margin).
    """
    g = potential.grid_points
    z = params.kernel_argument
    cap = int(math.ceil(z + 40.0 * z ** (1.0 / 3.0) + 50.0)) if z > 0 else 1
    cap = min(cap, g // 4)
    if max_order is not None:
        if max_order < 1:
            raise ValueError("max_order must be positive")
        if max_order > g // 4:
            raise ValueError(
                f"max_order {max_order} exceeds grid_points/4 = {g // 4}; "
                "raise grid_points to keep the transform alias-free"
            )
        cap = max_order

    u = np.exp(-1j * z * potential.values_on_grid())
    spectrum = np.abs(np.fft.fft(u) / g) ** 2

    nu = np.arange(-cap, cap + 1)
    probs = spectrum[np.mod(nu, g)]
    # Parseval: the full-bin sum is exactly 1, so window tails are exact
    center = cap
    window_sums = np.cumsum(
        np.concatenate(([probs[center]], probs[center + 1 :] + probs[center - 1 :: -1][: cap]))
    )

    if max_order is None:
        k = None
        for kk in range(1, cap + 1):
            if 1.0 - window_sums[kk] < tail_tol:
                k = kk
                break
        if k is None:
            raise ToleranceError(
                f"kernel tail {1.0 - window_sums[cap]:.3e} exceeds {tail_tol:.1e} "
                f"at max_order {cap}; raise max_order or grid_points"
            )
    else:
        k = cap
        if 1.0 - window_sums[k] >= tail_tol:
            raise ToleranceError(
                f"kernel tail {1.0 - window_sums[k]:.3e} exceeds {tail_tol:.1e} "
                f"at max_order {k}; raise max_order or grid_points"
            )

    row = probs[center - k : center + k + 1].copy()
    tail = 1.0 - math.fsum(row.tolist())
    if renormalize:
        row = row / row.sum()
    return TransitionKernel(
        hbar=params.hbar, row=row, tail_mass=tail, renormalized=renormalize
    )


def classical_kernel_density(delta_p: float, lam: float) -> float:
    """Arcsine density of one classical randomized kick, V = cos x only.

    Diverges (integrably) at |delta_p| = lambda; that endpoint returns inf as
    an explicit sentinel rather than raising.
    """
    if lam <= 0.0:
        raise ValueError(f"lambda must be positive, got {lam}")
    adp = abs(delta_p)
    if adp > lam:
        return 0.0
    if adp == lam:
        return math.inf
    return 1.0 / (math.pi * math.sqrt(lam * lam - adp * adp))


class BinnedDensity(NamedTuple):
    edges: np.ndarray
    density: np.ndarray
    samples: int


def classical_kernel_histogram(
    potential: PotentialSpec,
    lam: float,
    bins: int,
    samples: int,
    seed: int,
) -> BinnedDensity:
    """Monte Carlo density of delta_p = lambda*f(xi), xi uniform on [-pi, pi).

    Oracle for potentials with no closed-form kernel; for V = cos x it
    converges to classical_kernel_density.
    """
    if bins < 1 or samples < 1:
        raise ValueError("bins and samples must be positive")
    rng = np.random.Generator(np.random.Philox(seed))
    xi = rng.uniform(-math.pi, math.pi, size=samples)
    dp = lam * potential.force(xi)
    density, edges = np.histogram(dp, bins=bins, density=True)
    return BinnedDensity(edges=edges, density=density, samples=samples)


def _check_osc_domain(adp: float, lam: float):
    if not 0.0 < adp < lam:
        raise ValueError(
            f"oscillatory form needs 0 < |delta_p| < lambda, got |dp|={adp}, lambda={lam}"
        )


def semiclassical_oscillatory(delta_p: float, params: ModelParams) -> float:
    """Leading oscillatory approximation of the quantum kernel density inside
    the classically allowed band: W_cl * [1 + sin(phase)].

    Valid for delta_p/hbar >> 1; the caller chooses sensible points.
    """
    adp = abs(delta_p)
    wcl = classical_kernel_density(adp, params.lam)
    return wcl * (1.0 + math.sin(semiclassical_phase(delta_p, params)))


def semiclassical_phase(delta_p: float, params: ModelParams) -> float:
    """Phase of the oscillatory form; its derivative sets the local period
    pi*hbar/arccos(|delta_p|/lambda)."""
    lam, hbar = params.lam, params.hbar
    adp = abs(delta_p)
    _check_osc_domain(adp, lam)
    return 2.0 * math.sqrt(lam * lam - adp * adp) / hbar - (
        2.0 * adp / hbar
    ) * math.acos(adp / lam)


def oscillation_period(delta_p: float, params: ModelParams) -> float:
    """Local period (in delta_p) of the semiclassical oscillation."""
    lam, hbar = params.lam, params.hbar
    adp = abs(delta_p)
    _check_osc_domain(adp, lam)
    return math.pi * hbar / math.acos(adp / lam)


def semiclassical_tail(delta_p: float, params: ModelParams) -> float:
    """Exponentially small kernel density outside the classical band.

    [2 pi sqrt(dp^2 - lam^2)]^{-1} exp{-(2 dp/hbar)(alpha - tanh alpha)} with
    alpha = arccosh(dp/lambda); underflow far outside the band returns 0.0.
    """
    lam, hbar = params.lam, params.hbar
    adp = abs(delta_p)
    if adp <= lam:
        raise ValueError(
            f"tail form needs |delta_p| > lambda, got |dp|={adp}, lambda={lam}"
        )
    alpha = math.acosh(adp / lam)
    tanh_alpha = math.sqrt(1.0 - (lam / adp) ** 2)
    exponent = -(2.0 * adp / hbar) * (alpha - tanh_alpha)
    prefactor = 1.0 / (2.0 * math.pi * math.sqrt(adp * adp - lam * lam))
    if exponent < -745.0:
        return 0.0
    return prefactor * math.exp(exponent)
