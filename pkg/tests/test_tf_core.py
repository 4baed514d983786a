"""
Тесты замкнутого профиля Томаса-Ферми, квадратуры и стенда устойчивости.
"""

import math

import numpy as np
import pytest

from phaseseg import tf_core
from phaseseg.errors import DomainError, PreconditionError
from phaseseg.tf_core import Perturbation, TFParams


@pytest.fixture
def params() -> TFParams:
    return TFParams(alpha1=math.pi / 2, alpha2=math.pi / 2, g=4.0, K=2.0)


@pytest.fixture
def profile(params):
    return tf_core.tf_profile(params)


# ======================= Замкнутые формулы =======================

def test_reference_profile(profile):
    """Для alpha1 = alpha2 = pi/2, g = 4 все радиусы выражаются через sqrt(2)."""
    assert profile.r1 == pytest.approx(1.0, abs=1e-14)
    assert profile.r0 == pytest.approx(math.sqrt(math.sqrt(2.0) - 1.0), abs=1e-14)
    assert profile.r0 == pytest.approx(0.64359, abs=1e-5)
    assert profile.R1 == pytest.approx(2.0**0.25, abs=1e-14)
    assert profile.R2 == pytest.approx(math.sqrt(2.0 + math.sqrt(2.0)), abs=1e-14)
    assert profile.R2 == pytest.approx(1.55377, abs=1e-5)
    assert profile.sigma_plus == pytest.approx(1.0, abs=1e-13)
    assert profile.sigma_minus == pytest.approx(0.5, abs=1e-13)
    assert profile.E0 == pytest.approx(4.00912, abs=1e-5)


def test_gap_identity(params, profile):
    assert profile.sigma_plus / profile.sigma_minus == pytest.approx(math.sqrt(params.g), rel=1e-12)


def test_single_component_limit():
    params = TFParams(alpha1=1.0, alpha2=0.0, g=2.0, K=3.0)
    profile = tf_core.tf_profile(params)
    assert profile.r0 == profile.r1
    assert profile.R2 == pytest.approx(profile.r0, abs=1e-14)
    assert profile.sigma_minus == pytest.approx(0.0, abs=1e-14)
    assert profile.E0 == pytest.approx((2.0 / 3.0) * math.sqrt(2.0 / math.pi), rel=1e-14)
    assert tf_core.interior_argmin(params) == 1.0


def test_minimal_energy_at_g_one_is_pooled_mass():
    assert tf_core.minimal_energy(1.0, 2.0, 1.0) == pytest.approx(
        (2.0 / 3.0) * math.sqrt(2.0 / math.pi) * 3.0**1.5, rel=1e-14
    )


@pytest.mark.parametrize(
    "kwargs",
    [
        {"alpha1": 0.0, "alpha2": 1.0, "g": 2.0, "K": 2.0},
        {"alpha1": 1.0, "alpha2": -0.1, "g": 2.0, "K": 2.0},
        {"alpha1": 1.0, "alpha2": 1.0, "g": 0.5, "K": 2.0},
    ],
)
def test_invalid_parameters(kwargs):
    with pytest.raises(DomainError):
        TFParams(**kwargs)


def test_profile_needs_segregation():
    with pytest.raises(DomainError, match="g > 1"):
        tf_core.tf_profile(TFParams(alpha1=1.0, alpha2=1.0, g=1.0, K=2.0))
    with pytest.raises(DomainError, match="K >= sqrt"):
        tf_core.tf_profile(TFParams(alpha1=1.0, alpha2=1.0, g=4.0, K=1.5))


def test_interior_argmin_matches_interface_radius(params, profile):
    t0 = tf_core.interior_argmin(params)
    assert t0 == pytest.approx(math.sqrt(2.0) - 1.0, abs=1e-12)
    assert tf_core.interior_objective_derivative(t0, params) == pytest.approx(0.0, abs=1e-10)
    with pytest.raises(DomainError):
        tf_core.interior_objective(0.0, params)


def test_constrained_energy_is_minimal_at_r0(params, profile):
    at_r0 = tf_core.tf_profile_for_radius(params, profile.r0)
    assert at_r0.E0 == pytest.approx(profile.E0, rel=1e-12)
    for factor in (0.7, 0.95, 1.05, 1.4):
        assert tf_core.tf_profile_for_radius(params, factor * profile.r0).E0 > profile.E0
    with pytest.raises(DomainError):
        tf_core.tf_profile_for_radius(params, 0.0)


# ======================= Квадратура =======================

def test_quadrature_reproduces_energy_and_masses(params, profile):
    pair = tf_core.tf_density(profile, params)
    assert tf_core.tf_energy(pair, params) == pytest.approx(profile.E0, rel=1e-6)
    m1, m2 = tf_core.tf_masses(pair)
    assert m1 == pytest.approx(params.alpha1, rel=1e-6)
    assert m2 == pytest.approx(params.alpha2, rel=1e-6)


def test_densities_are_segregated(params, profile):
    rho1, rho2 = tf_core.tf_density(profile, params)(np.linspace(0.0, profile.R2 + 1.0, 401))
    assert np.all(rho1 * rho2 == 0.0)
    assert np.all(rho1 >= 0.0) and np.all(rho2 >= 0.0)


def test_energy_rejects_negative_density(params, profile):
    sampled = tf_core.sample(tf_core.tf_density(profile, params), profile.R2 / 256)
    broken = tf_core.SampledDensities(sampled.grid, -sampled.rho1, sampled.rho2)
    with pytest.raises(DomainError, match="nonnegative"):
        tf_core.tf_energy(broken, params)


def test_radial_grid_rejects_bad_step():
    with pytest.raises(DomainError):
        tf_core.RadialGrid.build([0.0, 1.0], 0.0)


# ======================= Устойчивость =======================

def test_zero_perturbation_has_zero_ratio(params, profile):
    grid = tf_core.radial_grid(profile, profile.R2 / 512)
    delta = Perturbation(grid=grid, d1=np.zeros(grid.size), d2=np.zeros(grid.size))
    assert tf_core.stability_ratio(delta, params) == 0.0


def test_mass_changing_perturbation_is_rejected(params, profile):
    grid = tf_core.radial_grid(profile, profile.R2 / 512)
    d1 = np.where(grid.r < 0.5 * profile.r0, 0.1, 0.0)
    delta = Perturbation(grid=grid, d1=d1, d2=np.zeros(grid.size))
    with pytest.raises(PreconditionError, match="changes its mass"):
        tf_core.stability_ratio(delta, params)


def test_annular_transfer_preserves_mass(params, profile):
    h = profile.R2 / 1024
    delta = tf_core.annular_transfer(profile, params, mass=0.01, distance=0.3, h=h)
    assert np.sum(delta.grid.weights * delta.d1) == pytest.approx(0.0, abs=1e-12)
    assert delta.l1_norm() == pytest.approx(0.02, rel=1e-10)
    ratio = tf_core.stability_ratio(delta, params)
    assert math.isfinite(ratio) and ratio > 0


def test_random_bumps_keep_both_masses(params, profile):
    delta = tf_core.random_bumps(profile, params, np.random.default_rng(0))
    weights = delta.grid.weights
    assert np.sum(weights * delta.d1) == pytest.approx(0.0, abs=1e-10)
    assert np.sum(weights * delta.d2) == pytest.approx(0.0, abs=1e-10)
    assert delta.family == "bumps"
    ratio = tf_core.stability_ratio(delta, params)
    assert math.isfinite(ratio) and ratio > 0


def test_swap_linear_ratio_grows_as_width_shrinks(params, profile):
    wide = tf_core.boundary_swap(profile, params, 0.2 * profile.r0)
    thin = tf_core.boundary_swap(profile, params, 0.01 * profile.r0)
    assert tf_core.linear_ratio(thin, params) > 5.0 * tf_core.linear_ratio(wide, params)


def test_stability_sweep_is_reproducible(params):
    first = tf_core.stability_sweep(params, seed=3, count=4)
    second = tf_core.stability_sweep(params, seed=3, count=4)
    assert first.sup_ratio == second.sup_ratio
    assert first.samples == 4 * 2 + 8
    assert math.isfinite(first.sup_ratio) and first.sup_ratio > 0
    assert set(first.family_sup) == {"annular", "swap", "bumps"}
    assert first.swap_linear_ratios[-1] > first.swap_linear_ratios[0]


def test_observed_exponent_of_power_law():
    norms = np.geomspace(1e-3, 1e-1, 6)
    assert tf_core.observed_exponent(norms, 3.0 * norms**2) == pytest.approx(2.0, abs=1e-10)
