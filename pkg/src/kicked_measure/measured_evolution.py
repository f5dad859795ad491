"""Evolution of momentum occupations under kick-plus-measurement dynamics.

Each measurement collapses the state onto the momentum lattice, so the chain
P_n(N) = sum_m W_{n-m} P_m(N-1) is an ordinary Markov convolution. Exact
closed-form recursions for the first four moments run alongside as the
module's oracle: simulated and recursed moments must agree step by step.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import LatticeOverflowError
from .kernels import TransitionKernel
from .model import (
    ModelParams,
    MomentumDistribution,
    PotentialSpec,
    force_derivative_moment,
    force_moment,
    momentum_moment,
)

DEFAULT_TAIL_TOL = 1e-10

_PROVENANCES = ("simulated", "recursion", "ensemble")


@dataclass(frozen=True)
class MomentTrajectory:
    """Per-step momentum moments <p^k>, k = 1..4, indexed by kick number from 0.

    tail_mass tracks cumulative off-lattice loss (or unitary norm loss when
    norm_loss is also set). Ensemble trajectories carry jackknife standard
    errors and per-block means for downstream slope fits.
    """

    p1: np.ndarray
    p2: np.ndarray
    p3: np.ndarray
    p4: np.ndarray
    tail_mass: np.ndarray
    provenance: str
    p1_se: Optional[np.ndarray] = None
    p2_se: Optional[np.ndarray] = None
    p3_se: Optional[np.ndarray] = None
    p4_se: Optional[np.ndarray] = None
    norm_loss: Optional[np.ndarray] = None
    block_moments: Optional[np.ndarray] = None  # shape (4, blocks, steps+1)

    def __post_init__(self):
        arrays = [self.p1, self.p2, self.p3, self.p4, self.tail_mass]
        n = arrays[0].size
        if any(a.size != n for a in arrays):
            raise ValueError("moment series must share one length")
        if self.provenance not in _PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        var = self.p2 - self.p1**2
        floor = -1e-9 * np.maximum(1.0, np.abs(self.p2))
        if np.any(var < floor):
            raise ValueError("variance went negative; moments are inconsistent")

    def __len__(self) -> int:
        return self.p1.size

    @property
    def steps(self) -> int:
        return self.p1.size - 1

    def variance(self) -> np.ndarray:
        return self.p2 - self.p1**2

    def moment(self, k: int) -> np.ndarray:
        return {1: self.p1, 2: self.p2, 3: self.p3, 4: self.p4}[k]


class DiffusionFit(NamedTuple):
    friction: float
    diffusion: float
    residual: float


def master_step(
    dist: MomentumDistribution,
    kernel: TransitionKernel,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> MomentumDistribution:
    """One measurement-to-measurement step: discrete convolution with the row.

    Edges are absorbing: mass pushed past +-M is dropped and added to
    tail_mass (wraparound would corrupt the moments silently). The on-lattice
    remainder is renormalized. Cumulative loss above tail_tol raises.
    """
    m = dist.half_width
    k = kernel.half_order
    full = np.convolve(dist.probs, kernel.row)
    window = full[k : k + 2 * m + 1]
    lost = math.fsum(full[:k].tolist()) + math.fsum(full[k + 2 * m + 1 :].tolist())
    new_tail = dist.tail_mass + lost
    if new_tail > tail_tol:
        raise LatticeOverflowError(
            f"off-lattice mass {new_tail:.3e} exceeds {tail_tol:.1e}; "
            f"a half-width of at least {m + k} is required",
            required_half_width=m + k,
        )
    window = window / math.fsum(window.tolist())
    return MomentumDistribution(half_width=m, probs=window, tail_mass=new_tail)


def _next_pow2(n: int) -> int:
    p = 1
    while p < n:
        p *= 2
    return p


def _record(dist: MomentumDistribution, hbar: float, out: dict, i: int):
    for k in (1, 2, 3, 4):
        out[k][i] = momentum_moment(dist, hbar, k)
    out["tail"][i] = dist.tail_mass


def evolve_measured(
    dist0: MomentumDistribution,
    kernel: TransitionKernel,
    steps: int,
    tail_tol: float = DEFAULT_TAIL_TOL,
    method: str = "direct",
) -> MomentTrajectory:
    """Iterate the master equation, recording all four moments per step.

    method="spectral" runs the same absorbing-and-renormalizing step through
    padded FFTs (cheaper when half_width * kernel width is large); the two
    paths agree to 1e-10 elementwise.
    """
    if steps < 1:
        raise ValueError("steps must be positive")
    if method not in ("direct", "spectral"):
        raise ValueError(f"unknown method {method!r}")
    hbar = kernel.hbar
    m, k = dist0.half_width, kernel.half_order

    center = momentum_moment(dist0, hbar, 1) / hbar
    needed = _suggest_m(abs(center), kernel, steps)
    if m < needed:
        warnings.warn(
            f"half_width {m} is below the diffusive estimate {needed} for "
            f"{steps} steps; expect a lattice overflow",
            stacklevel=2,
        )

    out = {
        1: np.empty(steps + 1),
        2: np.empty(steps + 1),
        3: np.empty(steps + 1),
        4: np.empty(steps + 1),
        "tail": np.empty(steps + 1),
    }
    _record(dist0, hbar, out, 0)

    if method == "direct":
        dist = dist0
        for i in range(1, steps + 1):
            dist = master_step(dist, kernel, tail_tol=tail_tol)
            _record(dist, hbar, out, i)
    else:
        size = _next_pow2(2 * m + 2 * k + 2)
        w_pad = np.zeros(size)
        w_pad[np.mod(kernel.nu_values(), size)] = kernel.row
        w_hat = np.fft.fft(w_pad)
        state = np.zeros(size)
        state[np.mod(np.arange(-m, m + 1), size)] = dist0.probs
        tail = dist0.tail_mass
        idx = np.mod(np.arange(-m, m + 1), size)
        for i in range(1, steps + 1):
            state = np.real(np.fft.ifft(np.fft.fft(state) * w_hat))
            window = state[idx].copy()
            # clip FFT rounding noise, then absorb everything outside the window
            window[window < 0.0] = 0.0
            on_lattice = math.fsum(window.tolist())
            tail += max(1.0 - on_lattice, 0.0)  # rounding must not shrink the tail
            if tail > tail_tol:
                raise LatticeOverflowError(
                    f"off-lattice mass {tail:.3e} exceeds {tail_tol:.1e}; "
                    f"a half-width of at least {m + k} is required",
                    required_half_width=m + k,
                )
            window = window / on_lattice
            dist = MomentumDistribution(half_width=m, probs=window, tail_mass=tail)
            _record(dist, hbar, out, i)
            state = np.zeros(size)
            state[idx] = window

    return MomentTrajectory(
        p1=out[1], p2=out[2], p3=out[3], p4=out[4],
        tail_mass=out["tail"], provenance="simulated",
    )


def _suggest_m(center_offset: float, kernel: TransitionKernel, steps: int) -> int:
    spread = 8.0 * math.sqrt(max(steps * kernel.moment(2), 0.0)) / kernel.hbar
    return int(math.ceil(center_offset + spread)) + kernel.half_order


def suggest_half_width(
    params: ModelParams,
    potential: PotentialSpec,
    kernel: TransitionKernel,
    steps: int,
    start_n: int = 0,
) -> int:
    """Diffusive lattice-size estimate: 8 sigma of spread plus the kernel width."""
    del params, potential  # the kernel already encodes lambda, hbar and <f^2>
    return _suggest_m(abs(start_n), kernel, steps)


def moment_recursion(
    params: ModelParams,
    potential: PotentialSpec,
    steps: int,
    initial_moments: Sequence[float] = (0.0, 0.0, 0.0, 0.0),
    branch: str = "quantum",
) -> MomentTrajectory:
    """Closed-form per-kick moment updates.

    p1 is constant; p2 gains lam^2<f^2> per kick; p3 and p4 follow the exact
    cross-term recursions. branch="quantum" includes the lam^2 hbar^2 <(f')^2>
    term in p4; branch="classical" (the randomized map) omits it. Everything
    else is identical between the two.
    """
    if branch not in ("quantum", "classical"):
        raise ValueError(f"unknown branch {branch!r}")
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    p1, p2, p3, p4 = (float(v) for v in initial_moments)
    if p2 - p1 * p1 < -1e-9 * max(1.0, abs(p2)):
        raise ValueError("initial moments violate variance nonnegativity")

    lam, hbar = params.lam, params.hbar
    m2 = lam**2 * force_moment(potential, 2)
    m3 = lam**3 * force_moment(potential, 3)
    m4 = lam**4 * force_moment(potential, 4)
    quantum_corr = lam**2 * hbar**2 * force_derivative_moment(potential)
    q = 1.0 if branch == "quantum" else 0.0

    out = np.empty((4, steps + 1))
    out[:, 0] = (p1, p2, p3, p4)
    for i in range(1, steps + 1):
        p1, p2, p3, p4 = (
            p1,
            p2 + m2,
            p3 + 3.0 * m2 * p1 + m3,
            p4 + 6.0 * m2 * p2 + 4.0 * m3 * p1 + m4 + q * quantum_corr,
        )
        out[:, i] = (p1, p2, p3, p4)
    return MomentTrajectory(
        p1=out[0], p2=out[1], p3=out[2], p4=out[3],
        tail_mass=np.zeros(steps + 1), provenance="recursion",
    )


def diffusion_fit(traj: MomentTrajectory, period: float) -> DiffusionFit:
    """Least-squares rates of <p> (friction) and variance (diffusion) vs time.

    The variance convention is var = D * N * T directly, no factor of two.
    """
    n = len(traj)
    if n < 2:
        raise ValueError("trajectory too short to fit")
    t = np.arange(n) * period
    var = traj.variance()
    f_slope, f_icept = np.polyfit(t, traj.p1, 1)
    d_slope, d_icept = np.polyfit(t, var, 1)
    res_f = np.max(np.abs(traj.p1 - (f_slope * t + f_icept)))
    res_d = np.max(np.abs(var - (d_slope * t + d_icept)))
    return DiffusionFit(
        friction=float(f_slope), diffusion=float(d_slope),
        residual=float(max(res_f, res_d)),
    )
