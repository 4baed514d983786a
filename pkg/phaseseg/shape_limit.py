"""
Предельные функционалы взвешенной изопериметрической задачи.

G_xi(E) = sigma_K F(E) + coef * xi * int_{E^c} rho^2, где coef = 1/2
(соглашение ``half``, по умолчанию) или 1 (``full``). Здесь же разложение
Фугледе для почти круговых множеств, спектр устойчивости и детектор
режима (нарушение симметрии против жесткости шара).
"""

import math
import typing as t
from dataclasses import dataclass, field
from logging import getLogger

import numpy as np
from scipy.optimize import brentq

from phaseseg.errors import DomainError
from phaseseg.shapes import (
    CapShape,
    DiskShape,
    RadialShape,
    Shape,
    StarShape,
    WeightParams,
    ball_perimeter,
    ball_volume,
)

logger = getLogger(__name__)

XI_CONVENTIONS = {"half": 0.5, "full": 1.0}
# Относительный допуск строгого сравнения в детекторе режима.
VERDICT_RTOL = 1e-9

SYMMETRY_BROKEN = "symmetry broken"
BALL_OPTIMAL = "ball optimal among tested"


@dataclass(frozen=True)
class ShapeReport:
    F_value: float
    V_value: float
    complement_term: float
    G_value: float


# ======================= Функционалы =======================


def weighted_perimeter(shape: Shape, w: WeightParams) -> float:
    return shape.perimeter(w)


def weighted_volume(shape: Shape, w: WeightParams) -> float:
    return shape.volume(w)


def xi_coefficient(convention: str) -> float:
    try:
        return XI_CONVENTIONS[convention]
    except KeyError:
        raise DomainError(f"unknown xi convention {convention!r}") from None


def g_xi(
    shape: Shape, w: WeightParams, xi: float, sigma_K: float, convention: str = "half"
) -> ShapeReport:
    F = shape.perimeter(w)
    V = shape.volume(w)
    complement = max(w.total_squared - shape.squared_weight(w), 0.0)
    return ShapeReport(
        F_value=F,
        V_value=V,
        complement_term=complement,
        G_value=sigma_K * F + xi_coefficient(convention) * xi * complement,
    )


def ball_radius_for_volume(alpha: float, w: WeightParams) -> float:
    if not 0 < alpha < w.alpha_bar:
        raise DomainError(f"volume must lie in (0, {w.alpha_bar:.6g}), got {alpha}")
    root = math.sqrt(w.R**4 - 2.0 * alpha / math.pi)
    # r^2 = R^2 - root, записанное без потери точности при малых alpha
    return math.sqrt((2.0 * alpha / math.pi) / (w.R**2 + root))


def symmetric_difference(shape: Shape, w: WeightParams, r: float) -> float:
    """int over E symmetric-difference B_r of rho."""
    value = shape.volume(w) + ball_volume(w, r) - 2.0 * shape.ball_overlap(w, r)
    return max(value, 0.0)


def volume_stability_gap(shape: Shape, w: WeightParams) -> t.Tuple[float, float]:
    V = shape.volume(w)
    r = ball_radius_for_volume(V, w)
    ball = RadialShape.ball(r)
    gap = ball.squared_weight(w) - shape.squared_weight(w)
    return gap, symmetric_difference(shape, w, r)


def match_volume(shape: Shape, alpha: float, w: WeightParams, xtol: float = 1e-14) -> Shape:
    """Adjusts the family parameter of `shape` so that V equals alpha."""
    if not 0 < alpha < w.alpha_bar:
        raise DomainError(f"volume must lie in (0, {w.alpha_bar:.6g}), got {alpha}")
    lo, hi = shape.parameter_bounds(w)
    margin = 1e-9 * (hi - lo)
    lo, hi = lo + margin, hi - margin

    def mismatch(p: float) -> float:
        return shape.with_parameter(p).volume(w) - alpha

    f_lo, f_hi = mismatch(lo), mismatch(hi)
    if f_lo * f_hi > 0:
        raise DomainError(
            f"volume {alpha:.6g} is not reachable within the {shape.family} family"
        )
    p = brentq(mismatch, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)
    return shape.with_parameter(p)


# ======================= Разложение Фугледе =======================


def mode_coefficient(R: t.Union[float, WeightParams], k: int) -> float:
    """k^2 - R^2 (2 + R^2) / (R^2 - 1)^2; the formula is evaluated for any R != 1."""
    if isinstance(R, WeightParams):
        R = R.R
    if k < 0:
        raise DomainError(f"mode index must be nonnegative, got {k}")
    if R == 1:
        raise DomainError("mode coefficient is singular at R = 1")
    return k * k - R**2 * (2.0 + R**2) / (R**2 - 1.0) ** 2


def instability_thresholds() -> t.Tuple[float, float]:
    """Radii where the k = 2 coefficient changes sign."""
    root = math.sqrt(13.0)
    return math.sqrt((5.0 - root) / 3.0), math.sqrt((5.0 + root) / 3.0)


def _fourier_squares(shape: StarShape) -> t.Tuple[float, float]:
    """(int u^2, int |u'|^2) over the unit circle from the Fourier rows."""
    coeffs = shape.fourier_u
    k = np.arange(coeffs.shape[0])
    power = coeffs[:, 0] ** 2 + coeffs[:, 1] ** 2
    u2 = 2.0 * math.pi * coeffs[0, 0] ** 2 + math.pi * float(np.sum(power[1:]))
    du2 = math.pi * float(np.sum(k[1:] ** 2 * power[1:]))
    return u2, du2


def fuglede_form(w: WeightParams, shape: StarShape) -> float:
    """Second order prediction of F(E) - F(B) for E = {(1 + u(x)) x}."""
    if not math.isclose(shape.base_radius, 1.0):
        raise DomainError("the expansion is taken around the unit ball")
    u2, du2 = _fourier_squares(shape)
    D = w.R**2 - 1.0
    return D**1.5 * 0.5 * (du2 - w.R**2 * (2.0 + w.R**2) / D**2 * u2)


def volume_correction(R: float, shape: StarShape) -> float:
    """Leading order of int u on the unit circle under the volume constraint."""
    u2, _ = _fourier_squares(shape)
    return 0.5 * (3.0 - R**2) / (R**2 - 1.0) * u2


def single_mode(w: WeightParams, k: int, amplitude: float, match: bool = True) -> StarShape:
    """Unit ball perturbed by amplitude * cos(k theta), volume matched through a0."""
    shape = StarShape.with_modes(1.0, {0: (0.0, 0.0), k: (amplitude, 0.0)})
    if not match:
        return shape
    seed = StarShape.with_modes(1.0, {k: (amplitude, 0.0)})
    a0 = volume_correction(w.R, seed) / (2.0 * math.pi)
    shape = shape.with_parameter(a0)
    return match_volume(shape, ball_volume(w, 1.0), w)  # type: ignore[return-value]


def poincare_constant(samples: t.Sequence[StarShape], delta: float, n: int = 4096) -> float:
    """Smallest Lambda with int u^2 <= delta int |u'|^2 + Lambda (int |u|)^2 over the samples."""
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta}")
    theta = StarShape.angles(n)
    best = 0.0
    for shape in samples:
        u2, du2 = _fourier_squares(shape)
        l1 = 2.0 * math.pi * float(np.mean(np.abs(shape.u(theta))))
        if l1 == 0:
            continue
        best = max(best, (u2 - delta * du2) / l1**2)
    return best


def poincare_extremals(delta: float, amplitude: float = 0.01) -> t.List[StarShape]:
    """Single modes and Fejer spikes up to bandwidth 2/sqrt(delta).

    Spikes concentrate u, so they drive the L1 term down much faster than
    smooth random boundaries do.
    """
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta}")
    top = max(1, math.ceil(2.0 / math.sqrt(delta)))
    shapes = [StarShape.with_modes(1.0, {k: (amplitude, 0.0)}) for k in range(1, top + 1)]
    for m in range(1, top + 1):
        coeffs = np.zeros((m + 1, 2))
        coeffs[0, 0] = 1.0
        coeffs[1:, 0] = 2.0 * (1.0 - np.arange(1, m + 1) / (m + 1))
        shapes.append(StarShape(base_radius=1.0, fourier_u=amplitude * coeffs / (m + 1)))
    return shapes


def poincare_sweep(samples: t.Sequence[StarShape], delta: float) -> float:
    """Lambda_delta over the samples together with the extremal family."""
    return poincare_constant(list(samples) + poincare_extremals(delta), delta)


# ======================= Изопериметрическое неравенство =======================


def isoperimetric_ratio(shape: Shape, w: WeightParams) -> float:
    V = shape.volume(w)
    if V > w.alpha_bar / 2.0:
        raise DomainError(f"volume {V:.6g} exceeds half of the total mass")
    if not V > 0:
        raise DomainError("shape has zero weighted volume")
    return shape.perimeter(w) / V ** (5.0 / 6.0)


# ======================= Семейства конкурентов =======================


def random_matched_shapes(
    w: WeightParams,
    alpha: float,
    count: int,
    seed: int = 0,
    amplitude: float = 0.05,
    k_max: int = 16,
) -> t.List[StarShape]:
    """Fourier-perturbed balls with random modes 1..k_max and volume alpha."""
    rng = np.random.default_rng(seed)
    r = ball_radius_for_volume(alpha, w)
    out: t.List[StarShape] = []
    attempts = 0
    while len(out) < count and attempts < 50 * count:
        attempts += 1
        coeffs = np.zeros((k_max + 1, 2))
        k = np.arange(1, k_max + 1)
        coeffs[1:] = rng.normal(size=(k_max, 2)) / k[:, None] ** 2
        scale = amplitude * rng.uniform(0.05, 1.0) / np.abs(coeffs).sum()
        shape = StarShape(base_radius=r, fourier_u=coeffs * scale)
        try:
            out.append(match_volume(shape, alpha, w))  # type: ignore[arg-type]
        except DomainError:
            logger.debug("skipping a random shape that leaves the support")
    return out


@dataclass(frozen=True)
class FamilyMember:
    family: str
    shape: Shape
    report: ShapeReport
    radial: bool


def default_families(
    alpha1: float, w: WeightParams, count: int = 8, seed: int = 0
) -> t.Dict[str, t.List[Shape]]:
    """Volume-matched competitors: radial sets, off-centre disks, tangent balls, caps, lenses, Fourier balls."""
    r = ball_radius_for_volume(alpha1, w)
    families: t.Dict[str, t.List[Shape]] = {
        "ball": [RadialShape.ball(r)],
        "annulus": [RadialShape.annulus(0.5 * w.R, w)],
        "disk": [DiskShape(s=r, c=c) for c in np.linspace(0.05, 0.95, count) * (w.R - r)],
        "tangent": [DiskShape.tangent_ball(r, w)],
        "cap": [CapShape(d=0.0)],
        "lens": [DiskShape(s=w.R, c=c, family="lens") for c in np.linspace(1.05, 2.5, count) * w.R],
        "fourier": list(random_matched_shapes(w, alpha1, count, seed=seed)),
    }
    matched: t.Dict[str, t.List[Shape]] = {}
    for name, shapes in families.items():
        matched[name] = []
        for shape in shapes:
            try:
                matched[name].append(match_volume(shape, alpha1, w))
            except DomainError as exc:
                logger.debug("dropping %s competitor: %s", name, exc)
    return matched


@dataclass(frozen=True)
class RegimeVerdict:
    verdict: str
    best: t.Dict[str, FamilyMember]
    best_radial: FamilyMember
    best_nonradial: t.Optional[FamilyMember]
    margin: float
    xi: float

    def rows(self) -> t.List[t.Dict[str, t.Any]]:
        return [
            {
                "xi": self.xi,
                "best_family": member.family,
                "best_energy": member.report.G_value,
                "ball_energy": self.best_radial.report.G_value,
                "verdict": self.verdict,
            }
            for member in self.best.values()
        ]


def _evaluate(
    families: t.Mapping[str, t.Sequence[Shape]],
    w: WeightParams,
    xi: float,
    sigma_K: float,
    convention: str,
) -> t.Dict[str, FamilyMember]:
    best: t.Dict[str, FamilyMember] = {}
    for name, shapes in families.items():
        for shape in shapes:
            member = FamilyMember(
                family=name,
                shape=shape,
                report=g_xi(shape, w, xi, sigma_K, convention),
                radial=shape.radial,
            )
            if name not in best or member.report.G_value < best[name].report.G_value:
                best[name] = member
    return best


def regime_detector(
    alpha1: float,
    w: WeightParams,
    xi: float,
    sigma_K: float,
    families: t.Optional[t.Mapping[str, t.Sequence[Shape]]] = None,
    convention: str = "half",
) -> RegimeVerdict:
    """Compares the best radially symmetric competitor with the best non-radial one."""
    families = families if families is not None else default_families(alpha1, w)
    best = _evaluate(families, w, xi, sigma_K, convention)
    radial = [m for m in best.values() if m.radial]
    nonradial = [m for m in best.values() if not m.radial]
    if not radial:
        raise DomainError("no radially symmetric competitor was supplied")
    best_radial = min(radial, key=lambda m: m.report.G_value)
    best_nonradial = min(nonradial, key=lambda m: m.report.G_value) if nonradial else None
    margin = math.inf
    verdict = BALL_OPTIMAL
    if best_nonradial is not None:
        margin = best_radial.report.G_value - best_nonradial.report.G_value
        if margin > VERDICT_RTOL * abs(best_radial.report.G_value):
            verdict = SYMMETRY_BROKEN
    logger.info("regime at xi=%g: %s (margin %.4g)", xi, verdict, margin)
    return RegimeVerdict(
        verdict=verdict,
        best=best,
        best_radial=best_radial,
        best_nonradial=best_nonradial,
        margin=margin,
        xi=xi,
    )


@dataclass(frozen=True)
class CrossoverReport:
    xi_hat: float
    family: t.Optional[str]
    per_member: t.List[t.Tuple[str, float]] = field(default_factory=list)


def crossover_xi(
    alpha1: float,
    w: WeightParams,
    sigma_K: float,
    families: t.Optional[t.Mapping[str, t.Sequence[Shape]]] = None,
    convention: str = "half",
) -> CrossoverReport:
    """Smallest xi beyond which the V-matched centred ball beats every tested competitor."""
    families = families if families is not None else default_families(alpha1, w)
    coef = xi_coefficient(convention)
    ball = RadialShape.ball(ball_radius_for_volume(alpha1, w))
    F_ball = ball.perimeter(w)
    comp_ball = w.total_squared - ball.squared_weight(w)
    xi_hat, winner = 0.0, None
    per_member: t.List[t.Tuple[str, float]] = []
    for name, shapes in families.items():
        for shape in shapes:
            if name == "ball":
                continue
            F = shape.perimeter(w)
            comp = w.total_squared - shape.squared_weight(w)
            if F >= F_ball:
                continue
            if comp <= comp_ball:
                # конкурент не хуже шара при любом xi
                per_member.append((name, math.inf))
                xi_hat, winner = math.inf, name
                continue
            value = sigma_K * (F_ball - F) / (coef * (comp - comp_ball))
            per_member.append((name, value))
            if value > xi_hat:
                xi_hat, winner = value, name
    return CrossoverReport(xi_hat=xi_hat, family=winner, per_member=per_member)


# ======================= Константы устойчивости =======================


@dataclass(frozen=True)
class StabilityConstants:
    volume_gap_min: float
    instability_max: float
    samples: int
    capped_samples: int = 0


def stability_constants(
    shapes: t.Iterable[Shape], w: WeightParams, symdiff_cap: float = math.inf
) -> StabilityConstants:
    """Empirical c of gap >= c symdiff^2 and C of F(B) - F(E) <= C symdiff^2."""
    gap_min, loss_max, count, capped = math.inf, 0.0, 0, 0
    for shape in shapes:
        gap, symdiff = volume_stability_gap(shape, w)
        if symdiff <= 0:
            continue
        count += 1
        gap_min = min(gap_min, gap / symdiff**2)
        if symdiff <= symdiff_cap:
            capped += 1
            r = ball_radius_for_volume(shape.volume(w), w)
            loss = ball_perimeter(w, r) - shape.perimeter(w)
            loss_max = max(loss_max, loss / symdiff**2)
    return StabilityConstants(
        volume_gap_min=gap_min, instability_max=loss_max, samples=count, capped_samples=capped
    )
