"""
Thomas-Fermi profiles of the segregated two-component condensate.

Модуль содержит замкнутые формулы для минимизатора энергии Томаса-Ферми,
радиальную квадратуру и стенд проверки неравенства устойчивости:
семейства возмущений с сохранением массы и эмпирическую оценку константы.
"""

import math
import typing as t
from dataclasses import dataclass
from logging import getLogger

import numpy as np
from scipy.optimize import brentq

from phaseseg.errors import DomainError, PreconditionError, QuadratureError

logger = getLogger(__name__)

FloatArray = np.ndarray

# Относительный допуск проверки сохранения массы возмущением.
MASS_TOLERANCE = 1e-9


@dataclass(frozen=True)
class TFParams:
    alpha1: float
    alpha2: float
    g: float
    K: float

    def __post_init__(self) -> None:
        if not self.alpha1 > 0:
            raise DomainError(f"alpha1 must be positive, got {self.alpha1}")
        if self.alpha2 < 0:
            raise DomainError(f"alpha2 must be nonnegative, got {self.alpha2}")
        if self.g < 1:
            raise DomainError(f"g must be >= 1, got {self.g}")


@dataclass(frozen=True)
class TFProfile:
    """Closed-form data of the radial minimiser.

    For the optimal profile `r0` is the interface radius; profiles built by
    `tf_profile_for_radius` reuse the same carrier with `r0` set to the
    imposed radius and `E0` to the constrained minimum.
    """

    r0: float
    r1: float
    R1: float
    R2: float
    E0: float
    sigma_plus: float
    sigma_minus: float


@dataclass(frozen=True)
class RadialPair:
    """Evaluation rule r -> (rho1(r), rho2(r)) of a radial profile."""

    profile: TFProfile
    g: float

    def __call__(self, r: t.Union[float, FloatArray]) -> t.Tuple[FloatArray, FloatArray]:
        r = np.asarray(r, dtype=float)
        p = self.profile
        rho1 = np.where(r < p.r0, np.maximum(p.R1**2 - r**2, 0.0), 0.0)
        rho2 = np.where(r > p.r0, np.maximum(p.R2**2 - r**2, 0.0) / self.g, 0.0)
        return rho1, rho2


@dataclass(frozen=True)
class RadialGrid:
    """Composite midpoint rule in r with breakpoints at the profile kinks."""

    r: FloatArray
    weights: FloatArray
    edges: FloatArray

    @property
    def size(self) -> int:
        return int(self.r.size)

    @classmethod
    def build(cls, breakpoints: t.Sequence[float], h: float) -> "RadialGrid":
        if not h > 0:
            raise DomainError(f"radial step must be positive, got {h}")
        pieces = []
        for a, b in zip(breakpoints[:-1], breakpoints[1:]):
            if b <= a:
                continue
            n = max(1, int(math.ceil((b - a) / h)))
            pieces.append(np.linspace(a, b, n + 1)[:-1])
        edges = np.concatenate(pieces + [np.array([breakpoints[-1]])])
        mid = 0.5 * (edges[1:] + edges[:-1])
        widths = np.diff(edges)
        return cls(r=mid, weights=2.0 * np.pi * mid * widths, edges=edges)


@dataclass(frozen=True)
class SampledDensities:
    grid: RadialGrid
    rho1: FloatArray
    rho2: FloatArray


@dataclass(frozen=True)
class Perturbation:
    """Sampled perturbation pair (delta rho1, delta rho2) on a radial grid."""

    grid: RadialGrid
    d1: FloatArray
    d2: FloatArray
    family: str = "custom"

    def l1_norm(self) -> float:
        return float(np.sum(self.grid.weights * (np.abs(self.d1) + np.abs(self.d2))))


# ======================= Замкнутые формулы =======================


def _check_segregation(params: TFParams) -> None:
    sqrt_g = math.sqrt(params.g)
    if not sqrt_g > 1:
        raise DomainError(f"segregated profile needs g > 1, got g={params.g}")
    if params.K < sqrt_g:
        raise DomainError(
            f"segregated profile needs K >= sqrt(g), got K={params.K}, sqrt(g)={sqrt_g}"
        )


def minimal_energy(alpha1: float, alpha2: float, g: float) -> float:
    """Minimal Thomas-Fermi energy; the formula is also meaningful at g = 1."""
    return (2.0 / 3.0) * math.sqrt(2.0 / math.pi) * (
        (alpha1 + alpha2) ** 1.5 + (math.sqrt(g) - 1.0) * alpha2**1.5
    )


def tf_profile(params: TFParams) -> TFProfile:
    _check_segregation(params)
    a1, a2, g = params.alpha1, params.alpha2, params.g
    r1 = (2.0 * a1 / math.pi) ** 0.25
    if a2 == 0:
        r0 = r1
    else:
        q = a2 / a1
        r0 = r1 * math.sqrt(math.sqrt(1.0 + q) - math.sqrt(q))
    R1_sq = r0**2 / 2.0 + r1**4 / (2.0 * r0**2)
    R2_sq = r0**2 + math.sqrt(2.0 * g * a2 / math.pi)
    profile = TFProfile(
        r0=r0,
        r1=r1,
        R1=math.sqrt(R1_sq),
        R2=math.sqrt(R2_sq),
        E0=minimal_energy(a1, a2, g),
        sigma_plus=R1_sq - r0**2,
        sigma_minus=(R2_sq - r0**2) / g,
    )
    logger.debug("TF profile for %s: %s", params, profile)
    return profile


def tf_profile_for_radius(params: TFParams, r: float) -> TFProfile:
    """Minimiser among pairs segregated by the circle of radius r."""
    _check_segregation(params)
    if not r > 0:
        raise DomainError(f"interface radius must be positive, got {r}")
    a1, a2, g = params.alpha1, params.alpha2, params.g
    r1 = (2.0 * a1 / math.pi) ** 0.25
    r_bar = min(r, r1)
    R1_sq = r_bar**2 / 2.0 + r1**4 / (2.0 * r_bar**2)
    R2_sq = r**2 + math.sqrt(2.0 * g * a2 / math.pi)
    energy = interior_objective((r / r1) ** 2, params) + (2.0 / 3.0) * math.sqrt(
        2.0 * g * a2**3 / math.pi
    )
    return TFProfile(
        r0=r,
        r1=r1,
        R1=math.sqrt(R1_sq),
        R2=math.sqrt(R2_sq),
        E0=energy,
        sigma_plus=R1_sq - r**2,
        sigma_minus=(R2_sq - r**2) / g,
    )


def interior_objective(t_: float, params: TFParams) -> float:
    if not t_ > 0:
        raise DomainError(f"interior objective is defined for t > 0, got {t_}")
    r1 = (2.0 * params.alpha1 / math.pi) ** 0.25
    if t_ < 1:
        cubic = math.pi / 24.0 * r1**6 * (6.0 * t_ + 3.0 / t_ - t_**3)
    else:
        cubic = math.pi / 3.0 * r1**6
    return cubic + params.alpha2 * r1**2 * t_


def interior_objective_derivative(t_: float, params: TFParams) -> float:
    if not t_ > 0:
        raise DomainError(f"interior objective is defined for t > 0, got {t_}")
    r1 = (2.0 * params.alpha1 / math.pi) ** 0.25
    slope = params.alpha2 * r1**2
    if t_ < 1:
        slope += math.pi / 24.0 * r1**6 * (6.0 - 3.0 / t_**2 - 3.0 * t_**2)
    return slope


def interior_argmin(params: TFParams) -> float:
    """Unique minimiser of the interior objective, via the root of f'."""
    if params.alpha2 == 0:
        return 1.0
    # f' < 0 у нуля и f'(1) = alpha2 * r1^2 > 0
    return float(
        brentq(
            interior_objective_derivative,
            1e-12,
            1.0,
            args=(params,),
            xtol=1e-15,
            rtol=4 * np.finfo(float).eps,
        )
    )


def tf_density(profile: TFProfile, params: TFParams) -> RadialPair:
    return RadialPair(profile=profile, g=params.g)


# ======================= Квадратура =======================


def default_step(profile: TFProfile) -> float:
    return profile.R2 / 4096.0


def radial_grid(profile: TFProfile, h: t.Optional[float] = None) -> RadialGrid:
    h = default_step(profile) if h is None else h
    return RadialGrid.build([0.0, profile.r0, profile.R2, profile.R2 + 1.0], h)


def sample(pair: RadialPair, h: t.Optional[float] = None) -> SampledDensities:
    grid = radial_grid(pair.profile, h)
    rho1, rho2 = pair(grid.r)
    return SampledDensities(grid=grid, rho1=rho1, rho2=rho2)


def _energy_density(
    rho1: FloatArray, rho2: FloatArray, r: FloatArray, params: TFParams
) -> FloatArray:
    return (
        0.5 * rho1**2
        + 0.5 * params.g * rho2**2
        + params.K * rho1 * rho2
        + (rho1 + rho2) * r**2
    )


def tf_energy(
    densities: t.Union[RadialPair, SampledDensities],
    params: TFParams,
    h: t.Optional[float] = None,
) -> float:
    if isinstance(densities, RadialPair):
        densities = sample(densities, h)
    if np.any(densities.rho1 < 0) or np.any(densities.rho2 < 0):
        raise DomainError("densities must be nonnegative")
    grid = densities.grid
    return float(
        np.sum(grid.weights * _energy_density(densities.rho1, densities.rho2, grid.r, params))
    )


def tf_masses(
    densities: t.Union[RadialPair, SampledDensities], h: t.Optional[float] = None
) -> t.Tuple[float, float]:
    if isinstance(densities, RadialPair):
        densities = sample(densities, h)
    w = densities.grid.weights
    return float(np.sum(w * densities.rho1)), float(np.sum(w * densities.rho2))


# ======================= Устойчивость =======================


def _energy_gap(delta: Perturbation, params: TFParams) -> float:
    profile = tf_profile(params)
    rho1, rho2 = tf_density(profile, params)(delta.grid.r)
    scale = max(float(np.max(rho1)), 1.0)
    if np.any(rho1 + delta.d1 < -1e-12 * scale) or np.any(rho2 + delta.d2 < -1e-12 * scale):
        raise DomainError("perturbed densities must stay nonnegative")
    w = delta.grid.weights
    for name, d, alpha in (("rho1", delta.d1, params.alpha1), ("rho2", delta.d2, params.alpha2)):
        drift = float(np.sum(w * d))
        if abs(drift) > MASS_TOLERANCE * max(alpha, 1.0):
            raise PreconditionError(f"perturbation of {name} changes its mass by {drift:.3e}")
    r = delta.grid.r
    base = _energy_density(rho1, rho2, r, params)
    moved = _energy_density(rho1 + delta.d1, rho2 + delta.d2, r, params)
    gap = float(np.sum(w * (moved - base)))
    if gap <= 0:
        raise QuadratureError(
            f"energy gap {gap:.3e} is not positive for a nonzero perturbation"
        )
    return gap


def stability_ratio(delta: Perturbation, params: TFParams) -> float:
    """||delta rho||_1^2 / (E(rho0 + delta rho) - E0); zero perturbation gives 0."""
    if not (np.any(delta.d1) or np.any(delta.d2)):
        return 0.0
    return delta.l1_norm() ** 2 / _energy_gap(delta, params)


def linear_ratio(delta: Perturbation, params: TFParams) -> float:
    """||delta rho||_1 / (E(rho0 + delta rho) - E0); unbounded on boundary swaps."""
    if not (np.any(delta.d1) or np.any(delta.d2)):
        return 0.0
    return delta.l1_norm() / _energy_gap(delta, params)


def _cells_between(grid: RadialGrid, a: float, b: float) -> FloatArray:
    return (grid.r > a) & (grid.r < b)


def annular_transfer(
    profile: TFProfile,
    params: TFParams,
    mass: float,
    distance: float,
    width: t.Optional[float] = None,
    h: t.Optional[float] = None,
) -> Perturbation:
    """Moves `mass` of rho1 from just inside r0 to an annulus at r0 + distance."""
    grid = radial_grid(profile, h)
    width = 0.05 * profile.r0 if width is None else width
    source = _cells_between(grid, profile.r0 - width, profile.r0)
    target = _cells_between(grid, profile.r0 + distance, profile.r0 + distance + width)
    if not source.any() or not target.any():
        raise DomainError("annuli of the transfer are not resolved by the grid")
    w = grid.weights
    d1 = np.zeros(grid.size)
    d1[source] = -mass / np.sum(w[source])
    d1[target] = mass / np.sum(w[target])
    if -d1[source].min() > profile.sigma_plus:
        raise DomainError(f"transfer of mass {mass} empties the source annulus")
    return Perturbation(grid=grid, d1=d1, d2=np.zeros(grid.size), family="annular")


def boundary_swap(
    profile: TFProfile,
    params: TFParams,
    width: float,
    h: t.Optional[float] = None,
) -> Perturbation:
    """Exchanges the two components on thin annuli on both sides of r0."""
    grid = radial_grid(profile, h)
    inner_area = math.pi * (profile.r0**2 - (profile.r0 - width) ** 2)
    outer_radius = math.sqrt(profile.r0**2 + inner_area / math.pi)
    inner = _cells_between(grid, profile.r0 - width, profile.r0)
    outer = _cells_between(grid, profile.r0, outer_radius)
    if not inner.any() or not outer.any():
        raise DomainError(f"swap width {width} is not resolved by the grid")
    rho1, rho2 = tf_density(profile, params)(grid.r)
    w = grid.weights
    d1 = np.zeros(grid.size)
    d2 = np.zeros(grid.size)
    m1 = np.sum(w[inner] * rho1[inner])
    m2 = np.sum(w[outer] * rho2[outer])
    d1[inner] = -rho1[inner]
    d1[outer] = m1 / np.sum(w[outer])
    d2[outer] = -rho2[outer]
    d2[inner] = m2 / np.sum(w[inner])
    return Perturbation(grid=grid, d1=d1, d2=d2, family="swap")


def _zero_mean_bump(
    rng: np.random.Generator, grid: RadialGrid, support: FloatArray, count: int = 3
) -> FloatArray:
    r = grid.r[support]
    lo, hi = float(r.min()), float(r.max())
    bump = np.zeros(r.size)
    for _ in range(count):
        centre = rng.uniform(lo, hi)
        spread = rng.uniform(0.05, 0.3) * (hi - lo)
        bump += rng.normal() * np.exp(-0.5 * ((r - centre) / spread) ** 2)
    w = grid.weights[support]
    bump -= np.sum(w * bump) / np.sum(w)
    out = np.zeros(grid.size)
    out[support] = bump
    return out


def random_bumps(
    profile: TFProfile,
    params: TFParams,
    rng: np.random.Generator,
    amplitude: float = 0.5,
    h: t.Optional[float] = None,
) -> Perturbation:
    """Smooth radial bumps with zero mass inside each component's support."""
    grid = radial_grid(profile, h)
    rho1, rho2 = tf_density(profile, params)(grid.r)
    inner = grid.r < 0.95 * profile.r0
    outer = _cells_between(grid, profile.r0, profile.r0 + 0.9 * (profile.R2 - profile.r0))
    d1 = _zero_mean_bump(rng, grid, inner)
    d2 = _zero_mean_bump(rng, grid, outer)
    # масштаб так, чтобы плотности остались неотрицательными
    d1 *= amplitude * rho1[inner].min() / max(np.abs(d1).max(), 1e-300)
    d2 *= amplitude * rho2[outer].min() / max(np.abs(d2).max(), 1e-300)
    return Perturbation(grid=grid, d1=d1, d2=d2, family="bumps")


@dataclass(frozen=True)
class StabilityReport:
    sup_ratio: float
    family_sup: t.Dict[str, float]
    swap_exponent: float
    swap_linear_ratios: t.List[float]
    samples: int


def observed_exponent(norms: t.Sequence[float], gaps: t.Sequence[float]) -> float:
    """Slope of log(E - E0) against log ||delta rho||_1."""
    slope, _ = np.polyfit(np.log(norms), np.log(gaps), 1)
    return float(slope)


def stability_sweep(
    params: TFParams,
    seed: int = 0,
    count: int = 20,
    h: t.Optional[float] = None,
) -> StabilityReport:
    """Empirical supremum of the stability ratio over the perturbation families."""
    profile = tf_profile(params)
    rng = np.random.default_rng(seed)
    family_sup: t.Dict[str, float] = {"annular": 0.0, "swap": 0.0, "bumps": 0.0}
    samples = 0

    source_mass = 2.0 * math.pi * profile.r0 * (0.05 * profile.r0) * profile.sigma_plus
    for _ in range(count):
        fraction = rng.uniform(0.01, 0.9)
        distance = rng.uniform(0.0, profile.R2 + 0.5 - profile.r0)
        delta = annular_transfer(profile, params, fraction * source_mass, distance, h=h)
        family_sup["annular"] = max(family_sup["annular"], stability_ratio(delta, params))
        samples += 1

        delta = random_bumps(profile, params, rng, amplitude=rng.uniform(0.05, 0.9), h=h)
        family_sup["bumps"] = max(family_sup["bumps"], stability_ratio(delta, params))
        samples += 1

    norms, gaps, linear = [], [], []
    for width in profile.r0 * np.geomspace(0.2, 0.01, 8):
        delta = boundary_swap(profile, params, float(width), h=h)
        ratio = stability_ratio(delta, params)
        family_sup["swap"] = max(family_sup["swap"], ratio)
        norms.append(delta.l1_norm())
        gaps.append(delta.l1_norm() ** 2 / ratio)
        linear.append(linear_ratio(delta, params))
        samples += 1

    report = StabilityReport(
        sup_ratio=max(family_sup.values()),
        family_sup=family_sup,
        swap_exponent=observed_exponent(norms, gaps),
        swap_linear_ratios=linear,
        samples=samples,
    )
    logger.info(
        "stability sweep: sup ratio %.4g over %d samples, swap exponent %.3f",
        report.sup_ratio,
        samples,
        report.swap_exponent,
    )
    return report
