import math

import numpy as np
import pytest
from scipy import integrate

from kicked_measure import (
    FreeHamiltonian,
    ModelParams,
    MomentumDistribution,
    PotentialSpec,
    ResolutionError,
    angle_grid,
    force_derivative_moment,
    force_moment,
    momentum_moment,
)


def quad_moment(f, k):
    """Independent oracle: adaptive quadrature of f(x)^k / 2pi over a period."""
    val, err = integrate.quad(lambda x: f(x) ** k / (2 * math.pi), -math.pi, math.pi)
    assert err < 1e-9  # scipy's bound is conservative; actual error is far smaller
    return val


# ---------------------------------------------------------------- parameters


def test_params_validation():
    p = ModelParams(lam=5.0, hbar=1.0, period=1.0, tau=0.3)
    assert p.kernel_argument == 5.0
    with pytest.raises(ValueError):
        ModelParams(lam=-1.0, hbar=1.0)
    with pytest.raises(ValueError):
        ModelParams(lam=1.0, hbar=0.0)
    with pytest.raises(ValueError):
        ModelParams(lam=1.0, hbar=1.0, period=-2.0)
    with pytest.raises(ValueError):
        ModelParams(lam=1.0, hbar=1.0, period=1.0, tau=1.0)
    with pytest.raises(ValueError):
        ModelParams(lam=1.0, hbar=1.0, period=1.0, tau=0.0)


def test_params_tau_defaults_inside_period():
    p = ModelParams(lam=1.0, hbar=1.0, period=2.0)
    assert 0.0 < p.tau < 2.0


def test_free_hamiltonian_default_is_quadratic():
    h = FreeHamiltonian.quadratic()
    p = np.array([0.0, 1.0, -3.0])
    assert np.allclose(h.value(p), [0.0, 0.5, 4.5])
    assert np.allclose(h.derivative(p), p)


# ----------------------------------------------------------------- potential


def test_angle_grid_convention():
    x = angle_grid(8)
    assert x[0] == -math.pi
    assert math.pi not in x
    assert np.allclose(np.diff(x), 2 * math.pi / 8)


def test_cosine_force_is_sine():
    pot = PotentialSpec.cosine()
    x = np.linspace(-3.0, 3.0, 7)
    assert np.allclose(pot.force(x), np.sin(x), atol=1e-14)


def test_force_from_spectral_fallback_matches_analytic():
    # same V = cos x but supplied without a derivative
    pot = PotentialSpec.from_callable(np.cos, grid_points=64)
    x = np.array([-2.5, -0.3, 0.0, 0.7, 1.9])
    assert np.allclose(pot.force(x), np.sin(x), atol=1e-12)
    assert np.allclose(pot.force_on_grid(), np.sin(pot.grid()), atol=1e-12)


def test_fourier_potential_derivatives():
    pot = PotentialSpec.from_fourier(cos_coeffs=[1.0, 0.3])
    x = np.linspace(-math.pi, math.pi, 11)
    assert np.allclose(pot.v(x), np.cos(x) + 0.3 * np.cos(2 * x))
    assert np.allclose(pot.force(x), np.sin(x) + 0.6 * np.sin(2 * x))


def test_nonperiodic_potential_rejected():
    with pytest.raises(ValueError):
        PotentialSpec.from_callable(lambda x: np.asarray(x, dtype=float))
    # an analytic derivative with nonzero mean is caught at construction
    with pytest.raises(ValueError):
        PotentialSpec.from_callable(
            lambda x: np.asarray(x, dtype=float) ** 2,
            dv=lambda x: 2.0 * np.asarray(x, dtype=float),
        )


def test_kinked_periodic_extension_fails_at_moment_time():
    # V = x^2 matches at the endpoints but its periodic extension has a kink,
    # so the spectral force never converges under grid doubling
    pot = PotentialSpec.from_callable(lambda x: np.asarray(x, dtype=float) ** 2)
    with pytest.raises(ResolutionError):
        force_moment(pot, 2)


def test_grid_points_must_be_power_of_two():
    with pytest.raises(ValueError):
        PotentialSpec.cosine(grid_points=1000)


# ------------------------------------------------------------- force moments


def test_force_moments_cosine():
    pot = PotentialSpec.cosine()
    assert force_moment(pot, 1) == pytest.approx(0.0, abs=1e-14)
    assert force_moment(pot, 2) == pytest.approx(0.5, abs=1e-13)
    assert force_moment(pot, 3) == pytest.approx(0.0, abs=1e-14)
    assert force_moment(pot, 4) == pytest.approx(0.375, abs=1e-13)
    assert force_derivative_moment(pot) == pytest.approx(0.5, abs=1e-13)
    # independent adaptive-quadrature oracle agrees with the frozen values
    assert quad_moment(np.sin, 2) == pytest.approx(0.5, abs=1e-12)
    assert quad_moment(np.sin, 4) == pytest.approx(0.375, abs=1e-12)


def test_force_moments_two_harmonics_odd_force():
    # V = cos x + 0.3 sin 2x has <f^3> = 0.45, exercising the odd-moment path
    pot = PotentialSpec.from_fourier(cos_coeffs=[1.0], sin_coeffs=[0.0, 0.3])
    f = lambda x: np.sin(x) - 0.6 * np.cos(2 * x)
    assert force_moment(pot, 1) == pytest.approx(0.0, abs=1e-13)
    assert force_moment(pot, 2) == pytest.approx(0.68, abs=1e-13)
    assert force_moment(pot, 3) == pytest.approx(0.45, abs=1e-13)
    assert force_moment(pot, 4) == pytest.approx(quad_moment(f, 4), abs=1e-12)
    # f' = cos x + 1.2 sin 2x, <(f')^2> = 1/2 + 1.44/2
    assert force_derivative_moment(pot) == pytest.approx(1.22, abs=1e-12)


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_mean_force_vanishes_for_random_potentials(seed):
    rng = np.random.default_rng(seed)
    pot = PotentialSpec.from_fourier(
        cos_coeffs=rng.normal(size=3), sin_coeffs=rng.normal(size=3)
    )
    assert force_moment(pot, 1) == pytest.approx(0.0, abs=1e-12)


def test_force_moment_grid_doubling_stable():
    pot = PotentialSpec.cosine(grid_points=64)
    a = force_moment(pot, 4)
    b = force_moment(PotentialSpec.cosine(grid_points=128), 4)
    assert abs(a - b) < 1e-10


def test_force_moment_k_range():
    pot = PotentialSpec.cosine()
    with pytest.raises(ValueError):
        force_moment(pot, 5)
    with pytest.raises(ValueError):
        force_moment(pot, 0)


def test_underresolved_potential_raises_resolution_error():
    # 8-point grid cannot represent harmonic 7 faithfully; doubling exposes it
    pot = PotentialSpec.from_callable(lambda x: np.cos(7 * np.asarray(x)), grid_points=8)
    with pytest.raises(ResolutionError):
        force_moment(pot, 2)


# ------------------------------------------------------ momentum distribution


def test_delta_distribution():
    d = MomentumDistribution.delta(half_width=4, n=3)
    assert d.probs[4 + 3] == 1.0
    assert momentum_moment(d, hbar=1.0, k=2) == pytest.approx(9.0)
    assert momentum_moment(d, hbar=1.0, k=0) == pytest.approx(1.0)
    d0 = MomentumDistribution.delta(half_width=4, n=0)
    assert momentum_moment(d0, hbar=1.0, k=2) == 0.0


def test_uniform_three_site_moment():
    probs = np.zeros(9)
    probs[3:6] = 1.0 / 3.0
    d = MomentumDistribution(half_width=4, probs=probs)
    assert momentum_moment(d, hbar=2.0, k=2) == pytest.approx(8.0 / 3.0, rel=1e-15)


def test_distribution_validation():
    with pytest.raises(ValueError):
        MomentumDistribution(half_width=2, probs=np.ones(5))  # sums to 5
    with pytest.raises(ValueError):
        MomentumDistribution(half_width=2, probs=np.array([0.5, 0.5, 0.5, -0.5, 0.0]))
    with pytest.raises(ValueError):
        MomentumDistribution.delta(half_width=2, n=5)


def test_distribution_probs_read_only():
    d = MomentumDistribution.delta(half_width=2)
    with pytest.raises(ValueError):
        d.probs[0] = 1.0


def test_momentum_moment_k_bounds():
    d = MomentumDistribution.delta(half_width=2)
    with pytest.raises(ValueError):
        momentum_moment(d, 1.0, 5)
