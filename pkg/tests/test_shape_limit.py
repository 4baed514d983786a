"""
Тесты весовой изопериметрической задачи: геометрия конкурентов,
разложение Фугледе, константы устойчивости и детектор режима.
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from phaseseg import shape_limit
from phaseseg.errors import DomainError
from phaseseg.shapes import (
    CapShape,
    DiskShape,
    RadialShape,
    StarShape,
    WeightParams,
    ball_perimeter,
    ball_volume,
)


@pytest.fixture
def w() -> WeightParams:
    return WeightParams(R=1.5)


# ======================= Геометрия =======================

def test_weight_params(w):
    assert w.alpha_bar == pytest.approx(math.pi * 1.5**4 / 2)
    assert ball_volume(w, w.R) == pytest.approx(w.alpha_bar)
    assert WeightParams.from_mass(w.alpha_bar).R == pytest.approx(1.5)
    with pytest.raises(DomainError):
        WeightParams(R=1.0)
    with pytest.raises(DomainError):
        WeightParams(R=1.5, alpha1=w.alpha_bar)


def test_centred_shapes_agree_with_ball(w):
    r = 0.8
    for shape in (RadialShape.ball(r), StarShape.ball(r), DiskShape(s=r, c=0.0)):
        assert shape.radial
        assert shape.volume(w) == pytest.approx(ball_volume(w, r), rel=1e-10)
        assert shape.perimeter(w) == pytest.approx(ball_perimeter(w, r), rel=1e-10)
        assert shape.squared_weight(w) == pytest.approx(
            RadialShape.ball(r).squared_weight(w), rel=1e-10
        )


def test_half_plane_cap(w):
    cap = CapShape(d=0.0)
    assert not cap.radial
    assert cap.volume(w) == pytest.approx(w.alpha_bar / 2, rel=1e-10)
    assert cap.squared_weight(w) == pytest.approx(w.total_squared / 2, rel=1e-10)
    chord, _ = quad(lambda y: (w.R**2 - y**2) ** 1.5, -w.R, w.R)
    assert cap.perimeter(w) == pytest.approx(chord, rel=1e-10)
    with pytest.raises(DomainError):
        CapShape(d=2.0).volume(w)


def test_ball_radius_for_volume(w):
    for alpha in (1e-8, 0.3, 0.5 * w.alpha_bar, 0.99 * w.alpha_bar):
        r = shape_limit.ball_radius_for_volume(alpha, w)
        assert ball_volume(w, r) == pytest.approx(alpha, rel=1e-10)
    with pytest.raises(DomainError):
        shape_limit.ball_radius_for_volume(w.alpha_bar, w)


@pytest.mark.parametrize(
    "shape",
    [
        DiskShape(s=0.5, c=0.4),
        DiskShape.tangent_ball(0.5, WeightParams(R=1.5)),
        CapShape(d=0.3),
        DiskShape(s=1.5, c=2.0, family="lens"),
        StarShape.with_modes(0.8, {3: (0.05, 0.02)}),
    ],
)
def test_match_volume(w, shape):
    alpha = 0.25 * w.alpha_bar
    matched = shape_limit.match_volume(shape, alpha, w)
    assert matched.family == shape.family
    assert matched.volume(w) == pytest.approx(alpha, rel=1e-9)


def test_match_volume_rejects_impossible_volume(w):
    with pytest.raises(DomainError, match="must lie"):
        shape_limit.match_volume(CapShape(d=0.0), 2.0 * w.alpha_bar, w)


def test_radial_transfer_keeps_volume(w):
    moved = RadialShape.transfer(w, r=0.8, inner=0.1, outer=0.2)
    assert moved.volume(w) == pytest.approx(ball_volume(w, 0.8), rel=1e-12)
    assert moved.perimeter(w) > ball_perimeter(w, 0.8)
    with pytest.raises(DomainError, match="disjoint"):
        RadialShape(intervals=((0.0, 0.5), (0.4, 0.9)))


def test_star_shape_leaving_support_is_rejected(w):
    with pytest.raises(DomainError, match="support"):
        StarShape.with_modes(1.4, {2: (0.2, 0.0)}).perimeter(w)


def test_symmetric_difference_and_volume_gap(w):
    r = 0.7
    assert shape_limit.symmetric_difference(RadialShape.ball(r), w, r) == pytest.approx(0.0, abs=1e-12)
    disk = shape_limit.match_volume(DiskShape(s=r, c=0.3), ball_volume(w, r), w)
    gap, symdiff = shape_limit.volume_stability_gap(disk, w)
    assert gap > 0
    assert symdiff > 0


# ======================= Функционал G_xi =======================

def test_g_xi_conventions(w):
    cap = CapShape(d=0.0)
    half = shape_limit.g_xi(cap, w, xi=2.0, sigma_K=1.5)
    full = shape_limit.g_xi(cap, w, xi=2.0, sigma_K=1.5, convention="full")
    assert half.complement_term == pytest.approx(w.total_squared / 2, rel=1e-10)
    assert half.G_value == pytest.approx(1.5 * half.F_value + half.complement_term)
    assert full.G_value - half.G_value == pytest.approx(half.complement_term)
    with pytest.raises(DomainError, match="convention"):
        shape_limit.g_xi(cap, w, xi=1.0, sigma_K=1.0, convention="double")


# ======================= Разложение Фугледе =======================

def test_instability_thresholds():
    lower, upper = shape_limit.instability_thresholds()
    assert upper == pytest.approx(1.69367, abs=1e-5)
    assert lower < 1 < upper
    assert shape_limit.mode_coefficient(upper, 2) == pytest.approx(0.0, abs=1e-12)
    assert shape_limit.mode_coefficient(1.5, 2) < 0 < shape_limit.mode_coefficient(2.0, 2)
    assert shape_limit.mode_coefficient(WeightParams(R=2.0), 3) == shape_limit.mode_coefficient(2.0, 3)
    with pytest.raises(DomainError):
        shape_limit.mode_coefficient(1.0, 2)


@pytest.mark.parametrize("R", [1.2, 2.2])
@pytest.mark.parametrize("k", [2, 3, 4])
def test_fuglede_form_predicts_perimeter_change(R, k):
    w = WeightParams(R=R)
    shape = shape_limit.single_mode(w, k, 1e-3)
    assert shape.volume(w) == pytest.approx(ball_volume(w, 1.0), rel=1e-12)
    change = shape.perimeter(w) - ball_perimeter(w, 1.0)
    form = shape_limit.fuglede_form(w, shape)
    assert change == pytest.approx(form, rel=0.1)
    assert np.sign(form) == np.sign(shape_limit.mode_coefficient(R, k))


def test_fuglede_form_needs_unit_ball(w):
    with pytest.raises(DomainError, match="unit ball"):
        shape_limit.fuglede_form(w, StarShape.with_modes(0.5, {2: (0.01, 0.0)}))


def test_volume_correction_changes_sign_at_sqrt3():
    shape = StarShape.with_modes(1.0, {2: (0.01, 0.0)})
    assert shape_limit.volume_correction(1.5, shape) > 0
    assert shape_limit.volume_correction(math.sqrt(3.0), shape) == pytest.approx(0.0, abs=1e-15)
    assert shape_limit.volume_correction(2.0, shape) < 0


def test_weighted_functionals_delegate_to_shape(w):
    disk = DiskShape(s=0.6, c=0.3)
    assert shape_limit.weighted_volume(disk, w) == disk.volume(w)
    assert shape_limit.weighted_perimeter(disk, w) == disk.perimeter(w)


def test_poincare_constant_of_single_mode():
    shape = StarShape.with_modes(1.0, {1: (0.02, 0.0)})
    assert shape_limit.poincare_constant([shape], 0.1) == pytest.approx(math.pi * 0.9 / 16, rel=1e-5)
    with pytest.raises(DomainError):
        shape_limit.poincare_constant([shape], 0.0)


def test_poincare_extremals_cover_bandwidth():
    shapes = shape_limit.poincare_extremals(0.01)
    modes = [s for s in shapes if s.fourier_u.shape[0] > 1]
    assert max(s.fourier_u.shape[0] for s in modes) - 1 >= 20
    assert all(s.base_radius == 1.0 for s in shapes)
    with pytest.raises(DomainError):
        shape_limit.poincare_extremals(0.0)


@pytest.mark.parametrize("delta", [0.1, 0.01])
def test_poincare_sweep_dominates_single_modes(delta):
    """Экстремальное семейство дает константу не меньше, чем любая отдельная мода."""
    smooth = [StarShape.with_modes(1.0, {k: (0.02, 0.0)}) for k in (1, 2, 3)]
    swept = shape_limit.poincare_sweep(smooth, delta)
    assert swept >= shape_limit.poincare_constant(smooth, delta)
    assert swept >= math.pi * (1 - delta) / 16 * (1 - 1e-6)
    assert math.isfinite(swept)


def test_isoperimetric_ratio(w):
    tangent = shape_limit.match_volume(DiskShape.tangent_ball(0.5, w), 0.1 * w.alpha_bar, w)
    ratio = shape_limit.isoperimetric_ratio(tangent, w)
    assert ratio == pytest.approx(tangent.perimeter(w) / tangent.volume(w) ** (5 / 6))
    with pytest.raises(DomainError, match="half"):
        shape_limit.isoperimetric_ratio(CapShape(d=-1.0), w)


# ======================= Случайные семейства и константы =======================

def test_random_matched_shapes_are_reproducible(w):
    alpha = w.alpha_bar / 4
    first = shape_limit.random_matched_shapes(w, alpha, 5, seed=11)
    second = shape_limit.random_matched_shapes(w, alpha, 5, seed=11)
    assert len(first) == 5
    for a, b in zip(first, second):
        np.testing.assert_array_equal(a.fourier_u, b.fourier_u)
        assert a.volume(w) == pytest.approx(alpha, rel=1e-9)


def test_stability_constants(w):
    shapes = shape_limit.random_matched_shapes(w, w.alpha_bar / 4, 10, seed=1)
    constants = shape_limit.stability_constants(shapes, w)
    assert constants.samples == 10
    assert 0 < constants.volume_gap_min < math.inf
    assert math.isfinite(constants.instability_max)
    assert constants.capped_samples == constants.samples


def test_symdiff_cap_excludes_large_perturbations(w):
    """Форма с большой симметрической разностью не входит в константу неустойчивости."""
    small = shape_limit.single_mode(w, 2, 1e-2)
    large = shape_limit.single_mode(w, 2, 5e-2)
    _, small_symdiff = shape_limit.volume_stability_gap(small, w)
    _, large_symdiff = shape_limit.volume_stability_gap(large, w)
    assert 0 < small_symdiff < large_symdiff

    cap = math.sqrt(small_symdiff * large_symdiff)
    constants = shape_limit.stability_constants([small, large], w, symdiff_cap=cap)
    assert constants.samples == 2
    assert constants.capped_samples == 1

    r = shape_limit.ball_radius_for_volume(small.volume(w), w)
    expected = (ball_perimeter(w, r) - small.perimeter(w)) / small_symdiff**2
    assert constants.instability_max == pytest.approx(max(expected, 0.0), rel=1e-9, abs=1e-12)

    none = shape_limit.stability_constants([large], w, symdiff_cap=cap)
    assert none.capped_samples == 0
    assert none.instability_max == 0.0


    assert math.isfinite(constants.instability_max)


def test_default_families_are_volume_matched(w):
    alpha1 = w.alpha_bar / 2
    families = shape_limit.default_families(alpha1, w, count=3)
    assert {"ball", "annulus", "disk", "tangent", "cap", "lens", "fourier"} <= set(families)
    for name, shapes in families.items():
        for shape in shapes:
            assert shape.volume(w) == pytest.approx(alpha1, rel=1e-8), name


# ======================= Детектор режима =======================

def test_regime_detector_and_crossover(w):
    alpha1 = w.alpha_bar / 2
    families = shape_limit.default_families(alpha1, w, count=3)

    at_zero = shape_limit.regime_detector(alpha1, w, 0.0, 1.0, families=families)
    assert at_zero.verdict == shape_limit.SYMMETRY_BROKEN
    assert at_zero.margin > 0
    assert at_zero.best_nonradial is not None and not at_zero.best_nonradial.radial

    crossover = shape_limit.crossover_xi(alpha1, w, 1.0, families=families)
    assert 0 < crossover.xi_hat < math.inf
    assert crossover.family in families

    above = shape_limit.regime_detector(alpha1, w, 1.1 * crossover.xi_hat, 1.0, families=families)
    assert above.verdict == shape_limit.BALL_OPTIMAL
    assert above.best_radial.family == "ball"

    below = shape_limit.regime_detector(alpha1, w, 0.5 * crossover.xi_hat, 1.0, families=families)
    assert below.verdict == shape_limit.SYMMETRY_BROKEN
    assert {row["xi"] for row in below.rows()} == {0.5 * crossover.xi_hat}


def test_regime_detector_needs_radial_competitor(w):
    with pytest.raises(DomainError, match="radially"):
        shape_limit.regime_detector(w.alpha_bar / 2, w, 1.0, 1.0, families={"cap": [CapShape(d=0.0)]})


@pytest.mark.slow
def test_stability_constants_on_full_sample(w):
    shapes = shape_limit.random_matched_shapes(w, w.alpha_bar / 4, 200, seed=0)
    constants = shape_limit.stability_constants(shapes, w)
    assert constants.samples == 200
    assert constants.volume_gap_min > 0
    assert math.isfinite(constants.instability_max)
