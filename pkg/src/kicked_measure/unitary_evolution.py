"""Unmeasured unitary evolution of the kicked system on the momentum lattice.

Free propagation is diagonal in momentum; the kick is diagonal in angle, so
one period is two transforms around a phase multiplication. Without
measurements the interference between paths builds up and the classical
diffusion is suppressed (dynamical localization); with a projective momentum
measurement after each kick this module reproduces exactly the measured
chain's one-step kernel, which the collapse oracle test pins down.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import LatticeOverflowError
from .measured_evolution import MomentTrajectory
from .model import ModelParams, MomentumDistribution, PotentialSpec, angle_grid, momentum_moment

# a kick may lose at most this much norm off the lattice window
KICK_LOSS_TOL = 1e-8

_RESONANCE_EPS = 1e-6
_RESONANCE_MAX_DEN = 8


@dataclass(frozen=True)
class WaveFunction:
    """Complex amplitudes over momentum eigenstates n in [-M, M].

    norm_loss accumulates the (renormalized) amplitude mass clipped at the
    lattice window by kicks.
    """

    half_width: int
    amps: np.ndarray
    norm_loss: float = 0.0

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex)
        if amps.shape != (2 * self.half_width + 1,):
            raise ValueError(
                f"amps must have length {2 * self.half_width + 1}, got {amps.shape}"
            )
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state norm {norm!r} differs from 1 beyond 1e-12")
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def eigenstate(cls, half_width: int, n: int = 0) -> "WaveFunction":
        if abs(n) > half_width:
            raise ValueError(f"site {n} outside lattice of half-width {half_width}")
        amps = np.zeros(2 * half_width + 1, dtype=complex)
        amps[half_width + n] = 1.0
        return cls(half_width=half_width, amps=amps)

    def n_values(self) -> np.ndarray:
        return np.arange(-self.half_width, self.half_width + 1)


def free_propagate(psi: WaveFunction, params: ModelParams, t: float) -> WaveFunction:
    """Diagonal phases exp(-i H0(n hbar) t / hbar); norms are untouched."""
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    if t == 0.0:
        return psi
    energies = params.free_hamiltonian.value(psi.n_values() * params.hbar)
    amps = psi.amps * np.exp(-1j * energies * t / params.hbar)
    return WaveFunction(half_width=psi.half_width, amps=amps, norm_loss=psi.norm_loss)


def _next_pow2(n: int) -> int:
    p = 1
    while p < n:
        p *= 2
    return p


def kick(psi: WaveFunction, params: ModelParams, potential: PotentialSpec) -> WaveFunction:
    """Apply exp(-i lam V(x) / hbar) via the angle representation.

    The transform grid is the next power of two at or above twice the lattice
    size, so the kick's momentum-transfer band cannot alias back into the
    window. Amplitude pushed outside [-M, M] is clipped; losing more than
    KICK_LOSS_TOL of the norm raises, otherwise the state is renormalized and
    the loss recorded.
    """
    m = psi.half_width
    size = _next_pow2(2 * (2 * m + 1))
    n = psi.n_values()
    signs = np.where(n % 2 == 0, 1.0, -1.0)  # e^{inx_j} = (-1)^n e^{2pi i nj/L}

    padded = np.zeros(size, dtype=complex)
    padded[np.mod(n, size)] = psi.amps * signs
    u = np.fft.ifft(padded) * size
    u *= np.exp(-1j * (params.lam / params.hbar) * potential.v(angle_grid(size)))
    c = np.fft.fft(u) / size
    amps = c[np.mod(n, size)] * signs

    kept = float(np.sum(np.abs(amps) ** 2))
    loss = max(1.0 - kept, 0.0)
    if loss > KICK_LOSS_TOL:
        required = m + int(math.ceil(params.kernel_argument + 50))
        raise LatticeOverflowError(
            f"kick lost {loss:.3e} of the norm off the lattice; "
            f"a half-width of at least {required} is required",
            required_half_width=required,
        )
    amps = amps / math.sqrt(kept)
    return WaveFunction(
        half_width=m, amps=amps, norm_loss=psi.norm_loss + loss
    )


def collapse(psi: WaveFunction) -> MomentumDistribution:
    """Projective momentum measurement: P_n = |psi_n|^2."""
    probs = np.abs(psi.amps) ** 2
    probs = probs / math.fsum(probs.tolist())
    return MomentumDistribution(
        half_width=psi.half_width, probs=probs, tail_mass=psi.norm_loss
    )


def period_step(psi: WaveFunction, params: ModelParams, potential: PotentialSpec) -> WaveFunction:
    """Measurement-to-measurement propagation: free(T - tau), kick, free(tau).

    The split around the kick carries tau explicitly; both free legs are
    diagonal, so measured occupation probabilities cannot depend on tau.
    """
    psi = free_propagate(psi, params, params.period - params.tau)
    psi = kick(psi, params, potential)
    return free_propagate(psi, params, params.tau)


def resonance_fraction(params: ModelParams):
    """Return p/q (q <= 8) if hbar*T/(4 pi) sits within 1e-6 of it, else None.

    At such values the free phases are periodic in n and quadratic growth of
    <p^2> can masquerade as diffusion.
    """
    x = params.hbar * params.period / (4.0 * math.pi)
    frac = Fraction(x).limit_denominator(_RESONANCE_MAX_DEN)
    if abs(x - float(frac)) < _RESONANCE_EPS:
        return frac
    return None


def evolve_unitary(
    psi0: WaveFunction,
    params: ModelParams,
    potential: PotentialSpec,
    steps: int,
) -> MomentTrajectory:
    """Repeat the period step, recording moments of |psi_n|^2 after each one."""
    if steps < 1:
        raise ValueError("steps must be positive")
    frac = resonance_fraction(params)
    if frac is not None:
        warnings.warn(
            f"hbar*T/(4 pi) = {params.hbar * params.period / (4 * math.pi)!r} is "
            f"within {_RESONANCE_EPS:g} of {frac}; quantum resonance will distort "
            "localization results",
            stacklevel=2,
        )

    hbar = params.hbar
    out = np.empty((4, steps + 1))
    losses = np.empty(steps + 1)
    psi = psi0
    for i in range(steps + 1):
        if i > 0:
            psi = period_step(psi, params, potential)
        dist = collapse(psi)
        for k in (1, 2, 3, 4):
            out[k - 1, i] = momentum_moment(dist, hbar, k)
        losses[i] = psi.norm_loss

    return MomentTrajectory(
        p1=out[0], p2=out[1], p3=out[2], p4=out[3],
        tail_mass=losses.copy(), provenance="simulated", norm_loss=losses,
    )
