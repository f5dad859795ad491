import math

import numpy as np
import pytest
from scipy import integrate, optimize, special

from kicked_measure import BesselRangeError, ModelParams, PotentialSpec, ToleranceError
from kicked_measure.kernels import (
    TransitionKernel,
    bessel_j,
    bessel_j_sequence,
    classical_kernel_density,
    classical_kernel_histogram,
    oscillation_period,
    quantum_kernel,
    semiclassical_oscillatory,
    semiclassical_phase,
    semiclassical_tail,
)


def bessel_series(order, z, terms=20):
    """Independent oracle: power series, adequate for small arguments."""
    total = 0.0
    for k in range(terms):
        total += (-1) ** k * (z / 2.0) ** (2 * k + order) / (
            math.factorial(k) * math.factorial(k + order)
        )
    return total


# -------------------------------------------------------------------- bessel


def test_bessel_trivial_values():
    assert bessel_j(0, 0.0) == 1.0
    assert bessel_j(1, 0.0) == 0.0
    assert bessel_j(7, 0.0) == 0.0


def test_bessel_power_series_oracle():
    assert bessel_j(0, 1.0) == pytest.approx(0.7651976866, abs=1e-10)
    for order in range(6):
        for z in (0.1, 0.5, 1.0, 2.0, 5.0):
            assert bessel_j(order, z) == pytest.approx(
                bessel_series(order, z), abs=1e-12
            )


def test_bessel_against_scipy_wide_sweep():
    for z in (1e-3, 0.1, 1.0, 5.0, 10.0, 100.0, 500.0):
        seq = bessel_j_sequence(300, z)
        ref = special.jv(np.arange(301), z)
        assert np.max(np.abs(seq - ref)) < 1e-12


def test_bessel_large_order_and_argument():
    assert bessel_j(1200, 1000.0) == pytest.approx(float(special.jv(1200, 1000.0)), abs=1e-12)
    assert bessel_j(50, 1e5) == pytest.approx(float(special.jv(50, 1e5)), abs=1e-12)


def test_bessel_negative_order_reflection():
    assert bessel_j(-3, 2.5) == pytest.approx(-bessel_j(3, 2.5), rel=1e-15)
    assert bessel_j(-2, 2.5) == pytest.approx(bessel_j(2, 2.5), rel=1e-15)


def test_bessel_sum_identity():
    # unitarity: sum of J_nu(10)^2 over |nu| <= 40 exhausts 1
    seq = bessel_j_sequence(40, 10.0)
    total = seq[0] ** 2 + 2.0 * np.sum(seq[1:] ** 2)
    assert abs(total - 1.0) < 1e-12


def test_bessel_range_errors():
    with pytest.raises(BesselRangeError):
        bessel_j(2 * 10**6, 1.0)
    with pytest.raises(BesselRangeError):
        bessel_j(2, 2e6)
    with pytest.raises(ValueError):
        bessel_j(2, -1.0)


# ------------------------------------------------------------ quantum kernel


def test_quantum_kernel_identity_at_zero_strength():
    params = ModelParams(lam=0.0, hbar=1.0)
    kern = quantum_kernel(params, PotentialSpec.cosine())
    assert kern.half_order == 1
    assert np.allclose(kern.row, [0.0, 1.0, 0.0], atol=1e-15)
    assert kern.tail_mass < 1e-15


def test_quantum_kernel_center_entry_z1():
    params = ModelParams(lam=1.0, hbar=1.0)
    # raw row: renormalization would smear the (sub-1e-10) tail over entries
    kern = quantum_kernel(params, PotentialSpec.cosine(), renormalize=False)
    k = kern.half_order
    assert kern.row[k] == pytest.approx(bessel_j(0, 1.0) ** 2, abs=1e-12)
    assert kern.row[k] == pytest.approx(0.5855286, abs=1e-5)


@pytest.mark.parametrize("z", [1.0, 5.0, 100.0])
def test_quantum_kernel_matches_bessel_squared(z):
    params = ModelParams(lam=z, hbar=1.0)
    pot = PotentialSpec.cosine(grid_points=2048)
    kern = quantum_kernel(params, pot, max_order=160 if z == 100.0 else None)
    nu = kern.nu_values()
    seq = bessel_j_sequence(kern.half_order, z)
    expected = seq[np.abs(nu)] ** 2
    assert np.max(np.abs(kern.row - expected)) < 1e-10
    assert abs(math.fsum(kern.row.tolist()) - 1.0) < 1e-10


def test_quantum_kernel_unitarity_before_renormalization():
    params = ModelParams(lam=5.0, hbar=1.0)
    kern = quantum_kernel(params, PotentialSpec.cosine(), renormalize=False)
    assert abs(math.fsum(kern.row.tolist()) - 1.0) < 1e-10
    assert kern.tail_mass < 1e-10
    assert not kern.renormalized


@pytest.mark.parametrize(
    "pot",
    [
        PotentialSpec.cosine(),
        PotentialSpec.from_fourier(cos_coeffs=[1.0, 0.3]),
    ],
)
def test_quantum_kernel_symmetric_for_even_potential(pot):
    params = ModelParams(lam=5.0, hbar=1.0)
    kern = quantum_kernel(params, pot)
    assert np.allclose(kern.row, kern.row[::-1], atol=1e-13)


def test_quantum_kernel_first_moment_vanishes_for_any_potential():
    params = ModelParams(lam=3.0, hbar=0.5)
    pot = PotentialSpec.from_fourier(cos_coeffs=[1.0], sin_coeffs=[0.0, 0.3])
    # tight tail so the symmetric truncation of this asymmetric row is harmless
    kern = quantum_kernel(params, pot, tail_tol=1e-13)
    assert abs(kern.moment(1)) < 1e-10


@pytest.mark.parametrize("z", [1.0, 5.0, 100.0])
def test_kernel_second_and_fourth_moment_identities_cosine(z):
    # sum (hbar nu)^2 W = lam^2 <f^2>; sum (hbar nu)^4 W = lam^4 <f^4> + lam^2 hbar^2 <(f')^2>
    # nu^4 amplifies edge entries, so the support must run past the default stop
    params = ModelParams(lam=z, hbar=1.0)
    kern = quantum_kernel(params, PotentialSpec.cosine(grid_points=2048), tail_tol=1e-13)
    m2_expected = params.lam**2 * 0.5
    m4_expected = params.lam**4 * 0.375 + params.lam**2 * 0.5
    assert kern.moment(2) == pytest.approx(m2_expected, rel=1e-8)
    assert kern.moment(4) == pytest.approx(m4_expected, rel=1e-8)


def test_kernel_moment_identities_two_harmonics():
    from kicked_measure import force_derivative_moment, force_moment

    params = ModelParams(lam=4.0, hbar=0.5)
    pot = PotentialSpec.from_fourier(cos_coeffs=[1.0, 0.3])
    kern = quantum_kernel(params, pot)
    lam, hbar = params.lam, params.hbar
    assert kern.moment(2) == pytest.approx(lam**2 * force_moment(pot, 2), rel=1e-8)
    assert kern.moment(3) == pytest.approx(lam**3 * force_moment(pot, 3), abs=1e-8)
    assert kern.moment(4) == pytest.approx(
        lam**4 * force_moment(pot, 4) + lam**2 * hbar**2 * force_derivative_moment(pot),
        rel=1e-8,
    )


def test_quantum_kernel_tail_failure_instructs_caller():
    params = ModelParams(lam=100.0, hbar=1.0)
    pot = PotentialSpec.cosine(grid_points=2048)
    with pytest.raises(ToleranceError, match="max_order or grid_points"):
        quantum_kernel(params, pot, max_order=50)
    # too-coarse grid caps the adaptive search below the needed support
    with pytest.raises(ToleranceError):
        quantum_kernel(params, PotentialSpec.cosine(grid_points=64))


def test_quantum_kernel_max_order_anti_aliasing_pre():
    params = ModelParams(lam=1.0, hbar=1.0)
    with pytest.raises(ValueError, match="grid_points"):
        quantum_kernel(params, PotentialSpec.cosine(grid_points=64), max_order=20)


def test_transition_kernel_validation():
    with pytest.raises(ValueError):
        TransitionKernel(hbar=1.0, row=np.array([0.5, 0.5]), tail_mass=0.0)
    with pytest.raises(ValueError):
        TransitionKernel(hbar=1.0, row=np.array([0.5, -0.1, 0.6]), tail_mass=0.0)


# ----------------------------------------------------------- classical kernel


def test_classical_density_values():
    assert classical_kernel_density(0.0, 1.0) == pytest.approx(1.0 / math.pi, rel=1e-15)
    assert classical_kernel_density(2.0, 1.0) == 0.0
    assert classical_kernel_density(1.0, 1.0) == math.inf
    assert classical_kernel_density(-0.5, 1.0) == classical_kernel_density(0.5, 1.0)
    with pytest.raises(ValueError):
        classical_kernel_density(0.0, -1.0)


def test_classical_density_normalization_and_second_moment():
    # substitute dp = lam sin(theta) to kill the endpoint singularity
    lam = 2.5
    val, _ = integrate.quad(
        lambda t: classical_kernel_density(lam * math.sin(t), lam) * lam * math.cos(t),
        -math.pi / 2,
        math.pi / 2,
    )
    assert val == pytest.approx(1.0, abs=1e-10)
    m2, _ = integrate.quad(
        lambda t: (lam * math.sin(t)) ** 2
        * classical_kernel_density(lam * math.sin(t), lam)
        * lam
        * math.cos(t),
        -math.pi / 2,
        math.pi / 2,
    )
    assert m2 == pytest.approx(lam**2 / 2.0, rel=1e-10)


def test_classical_histogram_matches_density():
    lam = 1.0
    est = classical_kernel_histogram(
        PotentialSpec.cosine(), lam, bins=50, samples=10**6, seed=7
    )
    widths = np.diff(est.edges)
    assert math.fsum((est.density * widths).tolist()) == pytest.approx(1.0, abs=1e-12)
    assert est.edges[0] >= -lam - 1e-12 and est.edges[-1] <= lam + 1e-12
    # center bin vs closed form, 3 binomial standard errors
    centers = 0.5 * (est.edges[:-1] + est.edges[1:])
    i = int(np.argmin(np.abs(centers)))
    p_bin = est.density[i] * widths[i]
    se = math.sqrt(p_bin * (1 - p_bin) / est.samples) / widths[i]
    assert abs(est.density[i] - 1.0 / math.pi) < 3.0 * se


def test_classical_histogram_seed_reproducible():
    pot = PotentialSpec.cosine()
    a = classical_kernel_histogram(pot, 2.0, bins=20, samples=1000, seed=3)
    b = classical_kernel_histogram(pot, 2.0, bins=20, samples=1000, seed=3)
    assert np.array_equal(a.density, b.density)
    assert np.array_equal(a.edges, b.edges)


# -------------------------------------------------------------- semiclassical


FIG1 = ModelParams(lam=100.0, hbar=1.0)


def test_oscillatory_equals_classical_at_phase_zeros():
    # where sin(phase) = 0 the oscillatory form reduces to W_cl exactly
    target = round(semiclassical_phase(50.0, FIG1) / math.pi) * math.pi
    root = optimize.brentq(
        lambda dp: semiclassical_phase(dp, FIG1) - target, 45.0, 55.0, xtol=1e-13
    )
    assert semiclassical_oscillatory(root, FIG1) == pytest.approx(
        classical_kernel_density(root, 100.0), rel=1e-10
    )


def test_oscillatory_against_exact_bessel():
    exact = bessel_j(50, 100.0) ** 2  # hbar = 1: probability and density coincide
    approx = semiclassical_oscillatory(50.0, FIG1)
    assert abs(approx - exact) / exact < 5.0 / 50.0


def test_oscillatory_window_average_near_classical():
    # averaging the oscillatory form over one local period leaves W_cl
    center = 50.0
    period = oscillation_period(center, FIG1)
    avg, _ = integrate.quad(
        lambda dp: semiclassical_oscillatory(dp, FIG1),
        center - period / 2,
        center + period / 2,
        limit=200,
    )
    avg /= period
    wcl = classical_kernel_density(center, 100.0)
    assert abs(avg - wcl) / wcl < 0.02


def test_oscillatory_domain_errors():
    with pytest.raises(ValueError):
        semiclassical_oscillatory(100.0, FIG1)
    with pytest.raises(ValueError):
        semiclassical_oscillatory(0.0, FIG1)
    with pytest.raises(ValueError):
        semiclassical_oscillatory(150.0, FIG1)


def test_tail_exponent_continuous_at_band_edge():
    # alpha - tanh(alpha) -> 0 as dp -> lambda+, so the decay rate starts at 0
    for dp in (100.0001, 100.001, 100.01):
        alpha = math.acosh(dp / 100.0)
        assert alpha - math.tanh(alpha) < 1e-5


def test_tail_against_exact_bessel():
    exact = bessel_j(120, 100.0) ** 2
    approx = semiclassical_tail(120.0, FIG1)
    assert abs(approx - exact) / exact < 5.0 / 120.0


def test_tail_strictly_decreasing():
    dps = np.linspace(100.5, 200.0, 400)
    vals = np.array([semiclassical_tail(dp, FIG1) for dp in dps])
    assert np.all(vals > 0.0)
    assert np.all(np.diff(vals) < 0.0)


def test_tail_domain_errors():
    with pytest.raises(ValueError):
        semiclassical_tail(99.0, FIG1)
    with pytest.raises(ValueError):
        semiclassical_tail(100.0, FIG1)


def test_tail_underflows_to_zero_gracefully():
    params = ModelParams(lam=1.0, hbar=0.001)
    assert semiclassical_tail(3.0, params) == 0.0
