"""
Тесты сеточных функционалов Гросса-Питаевского на маленьких сетках.
"""

import math

import numpy as np
import pytest

from phaseseg import gp_field
from phaseseg.errors import DomainError, PreconditionError
from phaseseg.gp_field import GPParams, Grid2D, ScalarField


@pytest.fixture
def params() -> GPParams:
    return GPParams.crossover(epsilon=0.5, xi=1.0, K=2.0, alpha1=1.0, alpha2=1.0)


@pytest.fixture
def grid() -> Grid2D:
    return Grid2D.square(3.0, 16)


def _random_pair(grid: Grid2D, seed: int = 0):
    rng = np.random.default_rng(seed)
    return (
        ScalarField(grid, rng.uniform(0.1, 1.0, grid.shape)),
        ScalarField(grid, rng.uniform(0.1, 1.0, grid.shape)),
    )


def _directional_derivative(energy, fields, direction, step=1e-6):
    plus = [ScalarField(f.grid, f.values + step * d) for f, d in zip(fields, direction)]
    minus = [ScalarField(f.grid, f.values - step * d) for f, d in zip(fields, direction)]
    return (energy(*plus) - energy(*minus)) / (2 * step)


# ======================= Параметры и сетка =======================

def test_crossover_parameters(params):
    assert params.g == pytest.approx(1.5)
    assert params.coupling_xi == pytest.approx(1.0)
    assert params.alpha_bar == 2.0


@pytest.mark.parametrize(
    "kwargs",
    [
        {"epsilon": 0.0, "g": 1.0, "K": 2.0, "alpha1": 1.0, "alpha2": 1.0},
        {"epsilon": 0.5, "g": 0.9, "K": 2.0, "alpha1": 1.0, "alpha2": 1.0},
        {"epsilon": 0.5, "g": 2.0, "K": 2.0, "alpha1": 1.0, "alpha2": 1.0, "xi": 1.0},
        {"epsilon": 0.5, "g": 1.0, "K": 2.0, "alpha1": 1.0, "alpha2": 1.0, "potential": "box"},
    ],
)
def test_invalid_gp_params(kwargs):
    with pytest.raises(DomainError):
        GPParams(**kwargs)


def test_grid_needs_enough_points():
    with pytest.raises(DomainError, match="at least 8"):
        Grid2D.square(1.0, 4)


def test_fields_on_different_grids_are_rejected(params, grid):
    other = Grid2D.square(2.0, 16)
    with pytest.raises(PreconditionError, match="different grids"):
        gp_field.gp_energy(ScalarField.zeros(grid), ScalarField.zeros(other), params)


# ======================= Градиенты =======================

def test_gp_gradient_matches_energy(params, grid):
    eta1, eta2 = _random_pair(grid)
    rng = np.random.default_rng(1)
    direction = [rng.normal(size=grid.shape), rng.normal(size=grid.shape)]
    g1, g2 = gp_field.gp_gradient(eta1, eta2, params)
    expected = grid.inner(g1.values, direction[0]) + grid.inner(g2.values, direction[1])
    numeric = _directional_derivative(
        lambda a, b: gp_field.gp_energy(a, b, params), [eta1, eta2], direction
    )
    assert numeric == pytest.approx(expected, rel=1e-6)


def test_j_gradient_matches_energy(grid):
    eta1, eta2 = _random_pair(grid, seed=2)
    rng = np.random.default_rng(3)
    direction = [rng.normal(size=grid.shape), rng.normal(size=grid.shape)]
    g1, g2 = gp_field.j_gradient(eta1, eta2, 0.7, 2.0, 0.3)
    expected = grid.inner(g1.values, direction[0]) + grid.inner(g2.values, direction[1])
    numeric = _directional_derivative(
        lambda a, b: gp_field.j_energy(a, b, 0.7, 2.0, 0.3), [eta1, eta2], direction
    )
    assert numeric == pytest.approx(expected, rel=1e-6)


def test_g_gradient_matches_energy(params, grid):
    eta, _ = _random_pair(grid, seed=4)
    direction = np.random.default_rng(5).normal(size=grid.shape)
    expected = grid.inner(gp_field.g_gradient(eta, params).values, direction)
    numeric = _directional_derivative(
        lambda a: gp_field.g_energy(a, params), [eta], [direction]
    )
    assert numeric == pytest.approx(expected, rel=1e-6)


def test_unknown_boundary(params, grid):
    eta1, eta2 = _random_pair(grid)
    with pytest.raises(DomainError, match="boundary"):
        gp_field.gp_energy(eta1, eta2, params, boundary="periodic")


def test_el_residual_is_orthogonal_to_eta_bar(params, grid):
    eta, _ = _random_pair(grid, seed=6)
    r = gp_field.el_residual_field(eta, params)
    assert grid.inner(r, eta.values) == pytest.approx(0.0, abs=1e-9 * grid.norm(r) * grid.norm(eta.values))


# ======================= Разложение энергии =======================

def _gaussian(grid: Grid2D) -> np.ndarray:
    return np.exp(-0.5 * grid.radius_squared())


def test_decomposition_is_exact_on_unit_fraction(params, grid):
    """При u1^2 + u2^2 = 1 остаток равен нулю."""
    a = _gaussian(grid)
    theta = np.random.default_rng(7).uniform(0.0, math.pi / 2, grid.shape)
    eta_bar = ScalarField(grid, a)
    dec = gp_field.lm_decomposition(
        ScalarField(grid, a * np.cos(theta)), ScalarField(grid, a * np.sin(theta)), eta_bar, params
    )
    assert dec.masked_cells == 0
    assert dec.remainder == pytest.approx(0.0, abs=1e-10)
    assert dec.residual < 1e-10
    assert dec.terms["F_tilde"] > 0


def test_decomposition_residual_equals_remainder(params, grid):
    a = _gaussian(grid)
    rng = np.random.default_rng(8)
    u1 = 0.8 + 0.1 * rng.uniform(size=grid.shape)
    u2 = 0.5 * rng.uniform(size=grid.shape)
    dec = gp_field.lm_decomposition(
        ScalarField(grid, a * u1), ScalarField(grid, a * u2), ScalarField(grid, a), params
    )
    assert dec.residual == pytest.approx(abs(dec.remainder), abs=1e-9)
    assert dec.residual > 1e-6
    assert gp_field.lm_decomposition_residual(
        ScalarField(grid, a * u1), ScalarField(grid, a * u2), ScalarField(grid, a), params
    ) == dec.residual


def test_decomposition_reports_masked_mass(params, grid):
    a = _gaussian(grid)
    a[0, 0] = 0.0
    eta1 = ScalarField(grid, np.full(grid.shape, 0.1))
    dec = gp_field.lm_decomposition(eta1, ScalarField.zeros(grid), ScalarField(grid, a), params)
    assert dec.masked_cells == 1
    assert dec.masked_mass == pytest.approx(0.01 * grid.cell_area)


# ======================= Минимизация =======================

def test_tf_seed_has_prescribed_masses(params):
    grid = gp_field.default_grid(params, 32)
    eta1, eta2 = gp_field.tf_seed(grid, params)
    assert eta1.mass == pytest.approx(params.alpha1, rel=1e-12)
    assert eta2.mass == pytest.approx(params.alpha2, rel=1e-12)


@pytest.mark.parametrize("schedule", ["bb", "armijo"])
def test_minimize_gp_preserves_mass_and_decreases_energy(params, schedule):
    eta1, eta2, report = gp_field.minimize_gp(params, schedule=schedule, n=24, tol=1e-3, max_iter=300)
    assert max(report.mass_errors) < 1e-10
    trace = report.energy_trace
    assert all(b <= a + 1e-12 * abs(a) for a, b in zip(trace, trace[1:]))
    assert report.final_energy == trace[-1]
    assert report.iterations <= 300
    assert np.all(eta1.values >= 0) and np.all(eta2.values >= 0)
    assert report.as_dict()["schedule"] == schedule


def test_minimize_g_total_mass(params):
    grid = gp_field.default_grid(params, 24)
    eta_bar, report = gp_field.minimize_g(params, grid, tol=1e-3, max_iter=300)
    assert eta_bar.mass == pytest.approx(params.alpha_bar, rel=1e-10)
    assert report.final_energy <= report.energy_trace[0]


def test_minimize_gp_rejects_unknown_init(params):
    with pytest.raises(DomainError, match="initialisation"):
        gp_field.minimize_gp(params, init="random", n=16)


def test_unknown_schedule(params, grid):
    with pytest.raises(DomainError, match="schedule"):
        gp_field.ProjectedDescent(grid, lambda x: 0.0, lambda x: x, masses=(1.0,), schedule="sgd")


def test_minimize_j_keeps_masses():
    grid = Grid2D.square(1.0, 16)
    eta1, eta2, report = gp_field.minimize_j(
        grid, lambda_=0.8, K=2.0, epsilon=0.2, alpha1=2.0, alpha2=2.0, tol=1e-3, max_iter=200
    )
    assert eta1.mass == pytest.approx(2.0, rel=1e-10)
    assert eta2.mass == pytest.approx(2.0, rel=1e-10)
    assert report.final_energy <= report.energy_trace[0]
    with pytest.raises(DomainError):
        gp_field.minimize_j(grid, lambda_=1.5, K=2.0, epsilon=0.2, alpha1=2.0, alpha2=2.0)


# ======================= Вспомогательные величины =======================

def test_rho_bar_carries_total_mass():
    profile = gp_field.rho_bar(2.0)
    assert profile.R == pytest.approx((4.0 / math.pi) ** 0.25)
    assert math.pi * profile.R**4 / 2 == pytest.approx(2.0)
    assert profile(np.array([0.0, 10.0])).tolist() == pytest.approx([profile.R**2, 0.0])
    with pytest.raises(DomainError):
        gp_field.rho_bar(0.0)


def test_tf_distance_vanishes_at_tf_densities(params):
    grid = gp_field.default_grid(params, 24)
    rho1, rho2 = gp_field.tf_densities_on(grid, params)
    eta1, eta2 = ScalarField(grid, np.sqrt(rho1)), ScalarField(grid, np.sqrt(rho2))
    assert gp_field.tf_distance(eta1, eta2, params) == 0.0
    shifted = ScalarField(grid, eta1.values + 0.1)
    expected = 0.1 * math.sqrt(grid.cell_area * grid.shape[0] * grid.shape[1])
    assert gp_field.tf_distance(shifted, eta2, params) == pytest.approx(expected, rel=1e-12)


def test_chemical_potential_is_rayleigh_quotient(params, grid):
    eta, _ = _random_pair(grid, seed=9)
    mu = gp_field.chemical_potential(eta, params)
    half_gradient = 0.5 * gp_field.g_gradient(eta, params).values
    assert mu == pytest.approx(grid.inner(half_gradient, eta.values) / grid.inner(eta.values, eta.values))
    assert gp_field.el_residual(eta, params) == pytest.approx(grid.norm(half_gradient - mu * eta.values))


def test_fit_rate_of_power_law():
    eps = [0.4, 0.2, 0.1, 0.05]
    assert gp_field.fit_rate(eps, [3.0 * e**0.25 for e in eps]) == pytest.approx(0.25)
    with pytest.raises(DomainError):
        gp_field.fit_rate([0.1], [1.0])


def test_reparametrize():
    rep = gp_field.reparametrize(alpha1=1.0, alpha2=2.0, g=16.0, K=8.0, omega_area=3.0)
    assert rep.lambda_ == pytest.approx(0.5)
    assert rep.K_tilde == pytest.approx(2.0)
    assert rep.alpha2_tilde == pytest.approx(8.0)
    assert rep.gamma == pytest.approx(9.0)
    assert rep.length_scale == pytest.approx(math.sqrt(3.0))


@pytest.mark.slow
def test_minimize_gp_on_fine_grid(params):
    eta1, eta2, report = gp_field.minimize_gp(params, n=128, tol=1e-5, max_iter=2000)
    assert eta1.mass == pytest.approx(params.alpha1, rel=1e-10)
    assert eta2.mass == pytest.approx(params.alpha2, rel=1e-10)
    trace = report.energy_trace
    assert all(b <= a + 1e-12 * abs(a) for a, b in zip(trace, trace[1:]))
