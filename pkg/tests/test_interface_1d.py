"""
Тесты одномерного переходного слоя: явные константы, конкуренты,
двусторонняя оценка и численный минимизатор.
"""

import logging
import math
from types import SimpleNamespace

import numpy as np
import pytest
from scipy.integrate import quad

from phaseseg import interface_1d
from phaseseg.errors import DomainError
from phaseseg.interface_1d import Bracket, Profile1D, TransitionParams

GAMMA1 = 2.0 * math.sqrt(2.0) / 3.0


# ======================= Явные константы =======================

def test_sigma_infinity():
    assert interface_1d.sigma_infinity(1.0) == pytest.approx(2.0 * GAMMA1)
    assert interface_1d.sigma_infinity(0.5) == pytest.approx(1.5 * GAMMA1)
    with pytest.raises(DomainError):
        interface_1d.sigma_infinity(0.0)


@pytest.mark.parametrize("lambda_, expected", [(1.0, 1.0), (0.5, 7.0 / 9.0)])
def test_weak_segregation_limit(lambda_, expected):
    assert interface_1d.weak_segregation_limit(lambda_) == pytest.approx(expected, rel=1e-14)


def test_weak_limit_tends_to_two_thirds():
    assert interface_1d.weak_segregation_limit(1e-6) == pytest.approx(2.0 / 3.0, rel=1e-6)
    with pytest.raises(DomainError):
        interface_1d.weak_segregation_limit(1.5)


@pytest.mark.parametrize("lambda_", [0.3, 0.5, 1.0])
def test_weak_profile_energy(lambda_):
    profile = interface_1d.weak_segregation_profile(lambda_)
    limit = interface_1d.weak_segregation_limit(lambda_)
    assert profile.energy_quadrature == pytest.approx(limit, rel=1e-8)
    assert profile.energy == pytest.approx(limit, rel=1e-4)
    assert profile.phi[0] == pytest.approx(math.pi / 2, abs=1e-6)
    assert profile.phi[-1] == pytest.approx(0.0, abs=1e-6)


def test_potential_wK_is_minimum_over_t():
    K = 3.0
    t_values = np.linspace(0.0, 1.2, 200001)
    for s in (0.0, 0.2, 0.5, K**-0.5, 0.8, 1.0):
        brute = float(np.min(interface_1d.potential_WK(s, t_values, K)))
        assert interface_1d.potential_wK(s, K) == pytest.approx(brute, abs=1e-8)


def test_hard_wall_profile():
    assert interface_1d.hard_wall_profile(0.5, 0.0) == 0.0
    assert interface_1d.hard_wall_profile(0.5, 30.0) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        interface_1d.hard_wall_profile(0.5, -1.0)


@pytest.mark.parametrize("lambda_", [1.0, 0.4])
def test_half_line_tension(lambda_):
    assert interface_1d.half_line_tension(lambda_) == pytest.approx(lambda_ * GAMMA1, abs=2e-4)


def test_split_sigma_matches_sigma_infinity():
    assert interface_1d.split_sigma(0.5) == pytest.approx(interface_1d.sigma_infinity(0.5), abs=5e-4)


# ======================= Конкуренты и оценки =======================

def test_overlap_competitor_expansion():
    lambda_, K = 1.0, 1e4
    delta = interface_1d.optimal_overlap(lambda_, K)
    exact = interface_1d.overlap_competitor_energy(lambda_, K, delta)
    estimate = interface_1d.overlap_estimate(lambda_, K, delta)
    assert exact < interface_1d.sigma_infinity(lambda_)
    assert exact == pytest.approx(estimate, abs=0.01 * delta)
    assert interface_1d.overlap_competitor_energy(lambda_, K, 0.0) == interface_1d.sigma_infinity(lambda_)
    with pytest.raises(DomainError):
        interface_1d.overlap_competitor_energy(lambda_, K, -0.1)


def test_small_lambda_interior_estimate():
    K = 50.0
    width = K**-0.5
    value, _ = quad(lambda x: 0.5 * K**2 * x**4 - K * x**2, 0.0, width)
    assert interface_1d.small_lambda_interior_estimate(K) == pytest.approx(value, rel=1e-12)


@pytest.mark.parametrize("K", [10.0, 100.0, 1000.0])
def test_small_lambda_competitor_below_bound(K):
    energy = interface_1d.small_lambda_competitor_energy(K, 0.1)
    assert energy <= interface_1d.small_lambda_bound(0.1, K) + 1e-12
    assert energy < interface_1d.sigma_infinity(0.1) + 0.01 * math.sqrt(K)


def test_bracket_upper_is_best_competitor():
    b = interface_1d.bracket(0.5, 20.0)
    assert b.upper == min(b.overlap, b.small_lambda)
    assert b.lower < b.upper
    assert interface_1d.upper_bound(0.5, 20.0) == b.upper
    assert b.contains(b.upper) and not b.contains(b.upper + 1.0)
    assert Bracket(lower=1.0, overlap=2.0, small_lambda=3.0).contains(0.9, slack=0.2)


def test_lower_bound_approaches_sigma_infinity():
    lower = [interface_1d.lower_bound(0.5, K) for K in (4.0, 64.0, 1024.0)]
    assert lower == sorted(lower)
    assert all(value < interface_1d.sigma_infinity(0.5) for value in lower)
    assert interface_1d.bracket(0.5, 64.0).lower == lower[1]


def test_extrapolate_weak_limit_of_linear_data():
    Ks = [1.1, 1.2, 1.4]
    assert interface_1d.extrapolate_weak_limit(Ks, [0.9 + 0.5 * (K - 1) for K in Ks]) == pytest.approx(0.9)
    with pytest.raises(DomainError):
        interface_1d.extrapolate_weak_limit([1.1], [1.0])


# ======================= Минимизатор =======================

def test_transition_params_validation():
    with pytest.raises(DomainError):
        TransitionParams(lambda_=0.5, K=1.0)
    with pytest.raises(DomainError):
        TransitionParams(lambda_=0.0, K=2.0)


def test_profile_shape_validation():
    with pytest.raises(DomainError, match="expected"):
        Profile1D(L=1.0, n=5, eta1=np.zeros(4), eta2=np.zeros(5))


def test_glued_profile_energy_is_sigma_infinity():
    params = TransitionParams(lambda_=0.5, K=4.0)
    profile = interface_1d.glued_profile(0.5, 20.0, 20001)
    assert interface_1d.transition_energy(profile, params) == pytest.approx(
        interface_1d.sigma_infinity(0.5), abs=1e-4
    )


@pytest.mark.parametrize("lambda_, K", [(1.0, 5.0), (0.5, 20.0)])
def test_minimize_sigma_lies_in_bracket(lambda_, K):
    params = TransitionParams(lambda_=lambda_, K=K)
    profile, report = interface_1d.minimize_sigma(params, n=4001)
    b = interface_1d.bracket(lambda_, K)
    assert b.contains(report.sigma, slack=1e-3)
    assert report.sigma < interface_1d.sigma_infinity(lambda_)
    assert report.equipartition_sup < 1e-2
    assert profile.eta1[0] == 0.0 and profile.eta1[-1] == 1.0
    assert profile.eta2[0] == 1.0 and profile.eta2[-1] == 0.0
    assert report.energy_trace[-1] <= report.energy_trace[0]
    assert report.as_dict()["polished"] is False


def test_polished_sigma_stays_in_bracket():
    params = TransitionParams(lambda_=1.0, K=5.0)
    _, report = interface_1d.minimize_sigma(params, n=2001, polish=True)
    assert interface_1d.bracket(1.0, 5.0).contains(report.sigma, slack=1e-3)


def test_failed_polish_keeps_discrete_minimiser(monkeypatch, caplog):
    def failed(*args, **kwargs):
        return SimpleNamespace(success=False, message="singular Jacobian")

    monkeypatch.setattr(interface_1d, "solve_bvp", failed)
    params = TransitionParams(lambda_=1.0, K=5.0)
    _, plain = interface_1d.minimize_sigma(params, n=1001)
    with caplog.at_level(logging.WARNING, logger="phaseseg.interface_1d"):
        _, report = interface_1d.minimize_sigma(params, n=1001, polish=True)
    assert report.polished is False
    assert report.sigma == plain.sigma
    assert "singular Jacobian" in caplog.text


def test_sigma_increases_with_K():
    sigmas = [interface_1d.minimize_sigma(TransitionParams(1.0, K), n=1001)[1].sigma for K in (2.0, 8.0)]
    assert sigmas[0] < sigmas[1]


def test_rescaled_sigma_near_weak_limit():
    params = TransitionParams(lambda_=1.0, K=1.01, rescaled=True)
    _, report = interface_1d.minimize_sigma(params)
    assert report.sigma == pytest.approx(interface_1d.weak_segregation_limit(1.0), rel=0.05)


@pytest.mark.slow
@pytest.mark.parametrize("lambda_, K", [(1.0, 20.0), (0.5, 5.0)])
def test_minimize_sigma_bracket_grid(lambda_, K):
    _, report = interface_1d.minimize_sigma(TransitionParams(lambda_=lambda_, K=K), n=8001)
    assert interface_1d.bracket(lambda_, K).contains(report.sigma, slack=1e-3)
