"""Deterministic radial twisting map and its measurement-mimicking
randomization, with seeded Monte Carlo ensembles.

The deterministic step is x' = wrap(x + H0'(p) T), p' = p - lam V'(x').
The randomized step replaces x' by a fresh uniform angle, which turns the
kick sequence into independent momentum increments lam*f(xi).

Reproducibility: all randomness flows from one Philox (counter-based) stream
per seed. Ensemble constructors draw from the root stream; evolution draws
from its first jump, in step-major order (one block of trajectories per
step). Runs are vectorized in-process, so the draw order is fixed and runs
with equal seeds are bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np

from .measured_evolution import DiffusionFit, MomentTrajectory, diffusion_fit
from .model import ModelParams, PotentialSpec

TWO_PI = 2.0 * math.pi

DEFAULT_BLOCKS = 20


def wrap_angle(x):
    """Centered remainder onto [-pi, pi)."""
    return (x + math.pi) % TWO_PI - math.pi


class PhasePoint(NamedTuple):
    x: float
    p: float


def twist_step(
    pt: PhasePoint, params: ModelParams, potential: PotentialSpec
) -> PhasePoint:
    """One deterministic kick: rotate by H0'(p) T, then kick at the new angle."""
    x = wrap_angle(pt.x + params.free_hamiltonian.derivative(pt.p) * params.period)
    p = pt.p + params.lam * float(potential.force(x))
    return PhasePoint(x=float(x), p=float(p))


def inverse_twist_step(
    pt: PhasePoint, params: ModelParams, potential: PotentialSpec
) -> PhasePoint:
    """Exact inverse of twist_step (the map is symplectic, hence reversible)."""
    p = pt.p - params.lam * float(potential.force(pt.x))
    x = wrap_angle(pt.x - params.free_hamiltonian.derivative(p) * params.period)
    return PhasePoint(x=float(x), p=float(p))


def randomized_step(
    pt: PhasePoint,
    params: ModelParams,
    potential: PotentialSpec,
    rng: np.random.Generator,
) -> PhasePoint:
    """Kick at a fresh uniform angle; the classical mimic of measurement."""
    x = float(rng.uniform(-math.pi, math.pi))
    p = pt.p + params.lam * float(potential.force(x))
    return PhasePoint(x=x, p=p)


@dataclass(frozen=True)
class Ensemble:
    """A seeded set of phase points. Arrays are frozen; evolution copies them."""

    x: np.ndarray
    p: np.ndarray
    seed: int

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        p = np.asarray(self.p, dtype=float)
        if x.shape != p.shape or x.ndim != 1 or x.size < 1:
            raise ValueError("x and p must be equal-length nonempty vectors")
        x = wrap_angle(x)
        x.setflags(write=False)
        p = p.copy()
        p.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p", p)

    @property
    def trajectories(self) -> int:
        return self.x.size

    @classmethod
    def delta(
        cls, trajectories: int, seed: int, x0: float = 0.0, p0: float = 0.0
    ) -> "Ensemble":
        """Every trajectory at the same phase point."""
        return cls(
            x=np.full(trajectories, x0), p=np.full(trajectories, p0), seed=seed
        )

    @classmethod
    def band(
        cls, trajectories: int, seed: int, p_low: float, p_high: float
    ) -> "Ensemble":
        """Uniform angles with momenta spread over [p_low, p_high].

        The sensible initial condition for deterministic-map statistics, where
        a single trajectory has no meaningful diffusion coefficient.
        """
        rng = np.random.Generator(np.random.Philox(seed))
        return cls(
            x=rng.uniform(-math.pi, math.pi, size=trajectories),
            p=rng.uniform(p_low, p_high, size=trajectories),
            seed=seed,
        )


def _block_stats(values: np.ndarray, blocks: int) -> Tuple[float, float, np.ndarray]:
    """Mean, delete-one-block jackknife SE, and per-block means."""
    n = values.size
    block_sums = values.reshape(blocks, n // blocks).sum(axis=1)
    total = math.fsum(block_sums.tolist())
    mean = total / n
    nb = n // blocks
    deleted = (total - block_sums) / (n - nb)
    dmean = deleted.mean()
    var = (blocks - 1) / blocks * float(((deleted - dmean) ** 2).sum())
    return mean, math.sqrt(var), block_sums / nb


def evolve_ensemble(
    ens: Ensemble,
    params: ModelParams,
    potential: PotentialSpec,
    steps: int,
    mode: str,
    blocks: int = DEFAULT_BLOCKS,
    return_final: bool = False,
):
    """Per-step ensemble moments <<p^k>>, k = 1..4, with jackknife errors.

    mode "deterministic" applies the twist map; "randomized" redraws the angle
    each step. Returns a MomentTrajectory (provenance "ensemble") whose
    block_moments feed ensemble_diffusion_fit; with return_final=True also
    returns the evolved Ensemble.
    """
    if steps < 1:
        raise ValueError("steps must be positive")
    if mode not in ("deterministic", "randomized"):
        raise ValueError(f"unknown mode {mode!r}")
    n = ens.trajectories
    if blocks < 2 or n % blocks != 0:
        raise ValueError(
            f"trajectory count {n} must split into equal blocks (asked for {blocks})"
        )

    rng = np.random.Generator(np.random.Philox(ens.seed).jumped())
    x = ens.x.copy()
    p = ens.p.copy()
    lam, period = params.lam, params.period
    dh0 = params.free_hamiltonian.derivative

    moments = np.empty((4, steps + 1))
    errors = np.empty((4, steps + 1))
    block_means = np.empty((4, blocks, steps + 1))

    def record(i):
        pk = p
        for k in range(4):
            mean, se, bm = _block_stats(pk, blocks)
            moments[k, i] = mean
            errors[k, i] = se
            block_means[k, :, i] = bm
            pk = pk * p

    record(0)
    for i in range(1, steps + 1):
        if mode == "deterministic":
            x = wrap_angle(x + dh0(p) * period)
        else:
            x = rng.uniform(-math.pi, math.pi, size=n)
        p = p + lam * potential.force(x)
        record(i)

    traj = MomentTrajectory(
        p1=moments[0], p2=moments[1], p3=moments[2], p4=moments[3],
        tail_mass=np.zeros(steps + 1), provenance="ensemble",
        p1_se=errors[0], p2_se=errors[1], p3_se=errors[2], p4_se=errors[3],
        block_moments=block_means,
    )
    if return_final:
        return traj, Ensemble(x=x, p=p, seed=ens.seed)
    return traj


class EnsembleDiffusionFit(NamedTuple):
    friction: float
    diffusion: float
    residual: float
    friction_se: float
    diffusion_se: float


def ensemble_diffusion_fit(
    traj: MomentTrajectory, period: float, start: int = 0
) -> EnsembleDiffusionFit:
    """Diffusion fit plus jackknife standard errors on both slopes.

    start discards the first `start` records before fitting (deterministic
    runs need a transient excluded).
    """
    if traj.block_moments is None:
        raise ValueError("trajectory carries no block means; rerun evolve_ensemble")
    if not 0 <= start <= len(traj) - 2:
        raise ValueError(f"start {start} leaves fewer than two points")

    def window(a):
        return a[..., start:]

    base = _fit_window(window(traj.p1), window(traj.p2), period, start)
    blocks = traj.block_moments.shape[1]
    bm1 = traj.block_moments[0]
    bm2 = traj.block_moments[1]
    f_del = np.empty(blocks)
    d_del = np.empty(blocks)
    for b in range(blocks):
        keep = [i for i in range(blocks) if i != b]
        p1 = bm1[keep].mean(axis=0)
        p2 = bm2[keep].mean(axis=0)
        fit = _fit_window(window(p1), window(p2), period, start)
        f_del[b] = fit.friction
        d_del[b] = fit.diffusion
    f_se = math.sqrt((blocks - 1) / blocks * float(((f_del - f_del.mean()) ** 2).sum()))
    d_se = math.sqrt((blocks - 1) / blocks * float(((d_del - d_del.mean()) ** 2).sum()))
    return EnsembleDiffusionFit(
        friction=base.friction, diffusion=base.diffusion, residual=base.residual,
        friction_se=f_se, diffusion_se=d_se,
    )


def _fit_window(p1: np.ndarray, p2: np.ndarray, period: float, start: int) -> DiffusionFit:
    traj = MomentTrajectory(
        p1=p1, p2=p2, p3=np.zeros_like(p1), p4=np.zeros_like(p1),
        tail_mass=np.zeros_like(p1), provenance="ensemble",
    )
    return diffusion_fit(traj, period)
