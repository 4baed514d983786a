"""
Одномерная задача о переходном слое и поверхностное натяжение sigma_{lambda,K}.

Профиль задается узловыми значениями на равномерной сетке [-L, L];
кинетическая энергия считается по разностям на ячейках, потенциальная
по формуле трапеций. Минимизация идет через L-BFGS-B с ограничениями
[0, 1.1] и закрепленными концами.
"""

import math
import typing as t
from dataclasses import dataclass, field, replace
from logging import getLogger

import numpy as np
from scipy.integrate import quad, solve_bvp, solve_ivp, trapezoid
from scipy.optimize import minimize

from phaseseg.errors import DomainError, SolverError

logger = getLogger(__name__)

# Верхняя граница значений профиля.
PROFILE_CAP = 1.1

SQRT2 = math.sqrt(2.0)
# Константы двусторонней оценки sigma_{lambda,K}.
LOWER_LAMBDA_CONSTANT = 32.0 * 2.0**0.75 / 3.0**1.5
LOWER_K_CONSTANT = 2.0 * SQRT2
OVERLAP_CONSTANT = 4.0 * 12.0**0.25 / 5.0


@dataclass(frozen=True)
class TransitionParams:
    """Coefficients of the transition energy; `rescaled` selects the weak-segregation form."""

    lambda_: float
    K: float
    rescaled: bool = False

    def __post_init__(self) -> None:
        if not self.lambda_ > 0:
            raise DomainError(f"lambda must be positive, got {self.lambda_}")
        if not self.K > 1:
            raise DomainError(f"K must exceed 1, got {self.K}")


@dataclass(frozen=True)
class Profile1D:
    L: float
    n: int
    eta1: np.ndarray
    eta2: np.ndarray

    def __post_init__(self) -> None:
        if not self.L > 0:
            raise DomainError(f"half-width must be positive, got {self.L}")
        if self.n < 3:
            raise DomainError(f"profile needs at least 3 nodes, got {self.n}")
        for name in ("eta1", "eta2"):
            values = np.asarray(getattr(self, name), dtype=float)
            if values.shape != (self.n,):
                raise DomainError(f"{name} has shape {values.shape}, expected ({self.n},)")
            object.__setattr__(self, name, values)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(-self.L, self.L, self.n)

    @property
    def dx(self) -> float:
        return 2.0 * self.L / (self.n - 1)


@dataclass
class SigmaReport:
    sigma: float
    equipartition_sup: float
    tail_mass: float
    iterations: int
    energy_trace: t.List[float] = field(default_factory=list)
    polished: bool = False

    def as_dict(self) -> t.Dict[str, t.Any]:
        return {
            "sigma": self.sigma,
            "equipartition_sup": self.equipartition_sup,
            "tail_mass": self.tail_mass,
            "iterations": self.iterations,
            "polished": self.polished,
        }


# ======================= Потенциалы =======================


def potential_WK(s: t.Any, t_: t.Any, K: float) -> t.Any:
    return 0.5 * (1.0 - s**2 - t_**2) ** 2 + (K - 1.0) * s**2 * t_**2


def potential_wK(s: t.Any, K: float) -> t.Any:
    """Minimum over t of W_K(s, t)."""
    s = np.asarray(s, dtype=float)
    outer = 0.5 * (1.0 - s**2) ** 2
    value = np.where(s < K**-0.5, outer - 0.5 * (1.0 - K * s**2) ** 2, outer)
    return value if value.ndim else float(value)


def _potential(a: np.ndarray, b: np.ndarray, params: TransitionParams) -> np.ndarray:
    if params.rescaled:
        return a**2 * b**2 + (a**2 + b**2 - 1.0) ** 2 / (2.0 * (params.K - 1.0))
    return potential_WK(a, b, params.K)


def _potential_gradient(
    a: np.ndarray, b: np.ndarray, params: TransitionParams
) -> t.Tuple[np.ndarray, np.ndarray]:
    s = a**2 + b**2 - 1.0
    if params.rescaled:
        c = 1.0 / (params.K - 1.0)
        return 2 * a * b**2 + 2 * c * a * s, 2 * b * a**2 + 2 * c * b * s
    k = params.K - 1.0
    return 2 * a * s + 2 * k * a * b**2, 2 * b * s + 2 * k * b * a**2


# ======================= Энергия профиля =======================


def _trapezoid_weights(n: int, dx: float) -> np.ndarray:
    w = np.full(n, dx)
    w[0] = w[-1] = 0.5 * dx
    return w


def transition_energy(profile: Profile1D, params: TransitionParams) -> float:
    dx = profile.dx
    a, b = profile.eta1, profile.eta2
    kinetic = float(np.sum(np.diff(a) ** 2) + params.lambda_**2 * np.sum(np.diff(b) ** 2)) / dx
    bulk = float(np.sum(_trapezoid_weights(profile.n, dx) * _potential(a, b, params)))
    return kinetic + bulk


def densities(profile: Profile1D, params: TransitionParams) -> t.Tuple[np.ndarray, np.ndarray]:
    """Kinetic and potential energy densities at the cell midpoints."""
    dx = profile.dx
    a, b = profile.eta1, profile.eta2
    kinetic = (np.diff(a) ** 2 + params.lambda_**2 * np.diff(b) ** 2) / dx**2
    am, bm = 0.5 * (a[1:] + a[:-1]), 0.5 * (b[1:] + b[:-1])
    return kinetic, _potential(am, bm, params)


def equipartition_residual(profile: Profile1D, params: TransitionParams) -> float:
    kinetic, potential = densities(profile, params)
    return float(np.max(np.abs(kinetic - potential)))


def tail_mass(profile: Profile1D, params: TransitionParams) -> float:
    kinetic, potential = densities(profile, params)
    total = kinetic + potential
    return float(max(total[0], total[-1]))


# ======================= Явные профили =======================


def hard_wall_profile(lambda_: float, x: t.Any) -> t.Any:
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 0):
        raise DomainError("hard-wall profile is defined for x >= 0")
    value = np.tanh(x_arr / (SQRT2 * lambda_))
    return value if value.ndim else float(value)


def glued_profile(lambda_: float, L: float, n: int, delta: float = 0.0) -> Profile1D:
    """Hard-wall pair glued at 0; delta > 0 shifts eta2 right to overlap eta1 on [0, delta]."""
    x = np.linspace(-L, L, n)
    eta1 = np.where(x > 0, np.tanh(np.maximum(x, 0.0) / SQRT2), 0.0)
    eta2 = np.where(x < delta, np.tanh(np.maximum(delta - x, 0.0) / (SQRT2 * lambda_)), 0.0)
    return Profile1D(L=L, n=n, eta1=eta1, eta2=eta2)


def default_half_width(params: TransitionParams) -> float:
    if params.rescaled:
        return 20.0 * max(1.0, params.lambda_)
    return 20.0 * max(1.0, params.lambda_) / min(1.0, math.sqrt(params.K - 1.0))


# ======================= Минимизация =======================


class _Trace:
    def __init__(self, energy: t.Callable[[np.ndarray], float]):
        self.energy = energy
        self.values: t.List[float] = []

    def __call__(self, z: np.ndarray) -> None:
        self.values.append(self.energy(z))


def _solve_clamped(
    energy_and_gradient: t.Callable[[np.ndarray], t.Tuple[float, np.ndarray]],
    z0: np.ndarray,
    tol: float,
    max_iter: int,
) -> t.Tuple[np.ndarray, _Trace, int]:
    trace = _Trace(lambda z: energy_and_gradient(z)[0])
    trace.values.append(energy_and_gradient(z0)[0])
    result = minimize(
        energy_and_gradient,
        z0,
        jac=True,
        method="L-BFGS-B",
        bounds=[(0.0, PROFILE_CAP)] * z0.size,
        callback=trace,
        options={"maxiter": max_iter, "maxfun": 4 * max_iter, "ftol": tol, "gtol": tol},
    )
    if not result.success:
        if result.status == 1:
            raise SolverError(
                f"transition solve did not converge in {result.nit} iterations",
                trace=trace.values,
            )
        logger.warning("transition solve stopped early: %s", result.message)
    return result.x, trace, int(result.nit)


def minimize_sigma(
    params: TransitionParams,
    L: t.Optional[float] = None,
    n: int = 2001,
    tol: float = 1e-12,
    max_iter: int = 50000,
    init: t.Optional[Profile1D] = None,
    polish: bool = False,
) -> t.Tuple[Profile1D, SigmaReport]:
    L = default_half_width(params) if L is None else L
    start = init if init is not None else glued_profile(params.lambda_, L, n)
    L, n = start.L, start.n
    dx = start.dx
    lam2 = params.lambda_**2
    a0 = np.clip(start.eta1, 0.0, PROFILE_CAP)
    b0 = np.clip(start.eta2, 0.0, PROFILE_CAP)
    a0[0], a0[-1], b0[0], b0[-1] = 0.0, 1.0, 1.0, 0.0
    m = n - 2

    def unpack(z: np.ndarray) -> t.Tuple[np.ndarray, np.ndarray]:
        a = np.concatenate(([0.0], z[:m], [1.0]))
        b = np.concatenate(([1.0], z[m:], [0.0]))
        return a, b

    def energy_and_gradient(z: np.ndarray) -> t.Tuple[float, np.ndarray]:
        a, b = unpack(z)
        da, db = np.diff(a), np.diff(b)
        pot = _potential(a, b, params)
        w = _trapezoid_weights(n, dx)
        value = float(np.sum(da**2) + lam2 * np.sum(db**2)) / dx + float(np.sum(w * pot))
        pa, pb = _potential_gradient(a, b, params)
        ga = 2.0 * (da[:-1] - da[1:]) / dx + dx * pa[1:-1]
        gb = 2.0 * lam2 * (db[:-1] - db[1:]) / dx + dx * pb[1:-1]
        return value, np.concatenate((ga, gb))

    z0 = np.concatenate((a0[1:-1], b0[1:-1]))
    z, trace, iterations = _solve_clamped(energy_and_gradient, z0, tol, max_iter)
    a, b = unpack(z)
    profile = Profile1D(L=L, n=n, eta1=a, eta2=b)
    report = SigmaReport(
        sigma=transition_energy(profile, params),
        equipartition_sup=equipartition_residual(profile, params),
        tail_mass=tail_mass(profile, params),
        iterations=iterations,
        energy_trace=trace.values,
    )
    if polish:
        profile, report = polish_profile(profile, params, report)
    logger.info(
        "sigma(lambda=%g, K=%g%s) = %.10g after %d iterations, equipartition %.3e",
        params.lambda_,
        params.K,
        ", rescaled" if params.rescaled else "",
        report.sigma,
        report.iterations,
        report.equipartition_sup,
    )
    return profile, report


def polish_profile(
    profile: Profile1D, params: TransitionParams, report: SigmaReport, tol: float = 1e-8
) -> t.Tuple[Profile1D, SigmaReport]:
    """Refines the discrete minimiser with the boundary value solver of the Euler-Lagrange system."""
    lam2 = params.lambda_**2
    x = profile.x
    y0 = np.vstack(
        (
            profile.eta1,
            np.gradient(profile.eta1, x),
            profile.eta2,
            np.gradient(profile.eta2, x),
        )
    )

    def rhs(_x: np.ndarray, y: np.ndarray) -> np.ndarray:
        pa, pb = _potential_gradient(y[0], y[2], params)
        return np.vstack((y[1], 0.5 * pa, y[3], 0.5 * pb / lam2))

    def bc(ya: np.ndarray, yb: np.ndarray) -> np.ndarray:
        return np.array([ya[0], ya[2] - 1.0, yb[0] - 1.0, yb[2]])

    solution = solve_bvp(rhs, bc, x, y0, tol=tol, max_nodes=max(100000, 4 * profile.n))
    if not solution.success:
        logger.warning("profile polish failed, keeping the discrete minimiser: %s", solution.message)
        return profile, report
    y = solution.sol(x)
    polished = replace(profile, eta1=y[0], eta2=y[2])
    kinetic = y[1] ** 2 + lam2 * y[3] ** 2
    potential = _potential(y[0], y[2], params)
    sigma = float(np.sum(_trapezoid_weights(profile.n, profile.dx) * (kinetic + potential)))
    return polished, SigmaReport(
        sigma=sigma,
        equipartition_sup=float(np.max(np.abs(kinetic - potential))),
        tail_mass=float(max(kinetic[0] + potential[0], kinetic[-1] + potential[-1])),
        iterations=report.iterations,
        energy_trace=report.energy_trace,
        polished=True,
    )


def half_line_tension(lambda_: float, L: float = 20.0, n: int = 4001, tol: float = 1e-12) -> float:
    """Numeric min of int_0^L lambda^2 |eta'|^2 + (eta^2 - 1)^2 / 2 with eta(0) = 0, eta(L) = 1."""
    if not lambda_ > 0:
        raise DomainError(f"lambda must be positive, got {lambda_}")
    L = L * max(1.0, lambda_)
    x = np.linspace(0.0, L, n)
    dx = x[1] - x[0]
    lam2 = lambda_**2
    w = _trapezoid_weights(n, dx)

    def full(z: np.ndarray) -> np.ndarray:
        return np.concatenate(([0.0], z, [1.0]))

    def energy_and_gradient(z: np.ndarray) -> t.Tuple[float, np.ndarray]:
        e = full(z)
        de = np.diff(e)
        value = lam2 * float(np.sum(de**2)) / dx + float(np.sum(w * 0.5 * (e**2 - 1.0) ** 2))
        grad = 2.0 * lam2 * (de[:-1] - de[1:]) / dx + dx * 2.0 * e[1:-1] * (e[1:-1] ** 2 - 1.0)
        return value, grad

    z0 = np.tanh(x[1:-1] / (SQRT2 * lambda_))
    z, _, _ = _solve_clamped(energy_and_gradient, z0, tol, 20000)
    return energy_and_gradient(z)[0]


def split_sigma(lambda_: float, **kwargs: t.Any) -> float:
    """sigma_{lambda,infinity} from two independent half-line problems."""
    return half_line_tension(1.0, **kwargs) + half_line_tension(lambda_, **kwargs)


# ======================= Асимптотики =======================


def sigma_infinity(lambda_: float) -> float:
    if not lambda_ > 0:
        raise DomainError(f"lambda must be positive, got {lambda_}")
    return (1.0 + lambda_) * 2.0 * SQRT2 / 3.0


def weak_segregation_limit(lambda_: float) -> float:
    """Limit of sigma_{lambda,K} / sqrt(K - 1) as K -> 1."""
    if not 0 < lambda_ <= 1:
        raise DomainError(f"lambda must lie in (0, 1], got {lambda_}")
    if lambda_ == 1:
        return 1.0
    return (2.0 / 3.0) * (1.0 - lambda_**3) / (1.0 - lambda_**2)


@dataclass(frozen=True)
class WeakProfile:
    x: np.ndarray
    phi: np.ndarray
    energy: float
    energy_quadrature: float


def weak_segregation_profile(lambda_: float, half_width: float = 20.0, n: int = 4001) -> WeakProfile:
    """
    Angle profile of the K -> 1 problem, eta = (cos phi, sin phi).

    phi solves phi' sqrt(1 - cos^2 phi (1 - lambda^2)) = -cos phi sin phi with
    phi(0) = pi/4; the energy is returned both from the profile and by
    quadrature in phi.
    """
    if not 0 < lambda_ <= 1:
        raise DomainError(f"lambda must lie in (0, 1], got {lambda_}")
    mu = 1.0 - lambda_**2

    def rhs(_x: float, y: np.ndarray) -> np.ndarray:
        c, s = math.cos(y[0]), math.sin(y[0])
        return np.array([-c * s / math.sqrt(1.0 - c * c * mu)])

    xs = np.linspace(0.0, half_width, n // 2 + 1)
    right = solve_ivp(rhs, (0.0, half_width), [math.pi / 4], t_eval=xs, rtol=1e-11, atol=1e-13)
    left = solve_ivp(rhs, (0.0, -half_width), [math.pi / 4], t_eval=-xs, rtol=1e-11, atol=1e-13)
    x = np.concatenate((-xs[:0:-1], xs))
    phi = np.concatenate((left.y[0][:0:-1], right.y[0]))
    density = 2.0 * (np.cos(phi) * np.sin(phi)) ** 2
    energy = float(trapezoid(density, x))
    energy_quadrature, _ = quad(
        lambda p: 2.0 * math.sqrt(1.0 - mu * math.cos(p) ** 2) * math.cos(p) * math.sin(p),
        0.0,
        math.pi / 2,
        epsabs=1e-13,
    )
    return WeakProfile(x=x, phi=phi, energy=energy, energy_quadrature=float(energy_quadrature))


def optimal_overlap(lambda_: float, K: float) -> float:
    return (12.0 * lambda_**2 / K) ** 0.25


def overlap_competitor_energy(lambda_: float, K: float, delta: float) -> float:
    """Energy of the tanh pair with overlap [0, delta], evaluated by quadrature."""
    if delta < 0:
        raise DomainError(f"overlap width must be nonnegative, got {delta}")
    if delta == 0:
        return sigma_infinity(lambda_)

    def integrand(x: float) -> float:
        e1 = math.tanh(x / SQRT2)
        e2 = math.tanh((delta - x) / (SQRT2 * lambda_))
        return K * e1 * e1 * e2 * e2 - 0.5

    value, _ = quad(integrand, 0.0, delta, epsabs=1e-13, epsrel=1e-12)
    return sigma_infinity(lambda_) + value


def overlap_estimate(lambda_: float, K: float, delta: float) -> float:
    return sigma_infinity(lambda_) - delta / 2.0 + K * delta**5 / (120.0 * lambda_**2)


def small_lambda_interior_estimate(K: float) -> float:
    """int_0^{K^{-1/2}} K^2 x^4 / 2 - K x^2 dx = -(7/30) K^{-1/2}."""
    return -(7.0 / 30.0) * K**-0.5


def small_lambda_bound(lambda_: float, K: float) -> float:
    """gamma_1 + lambda^2 sqrt(K) - (13/60) K^{-1/2}, an upper bound of the competitor energy."""
    return 2.0 * SQRT2 / 3.0 + lambda_**2 * math.sqrt(K) - (13.0 / 60.0) * K**-0.5


def small_lambda_competitor_energy(K: float, lambda_: float = 0.0) -> float:
    """Energy of tanh eta1 against the linear ramp eta2 of width K^{-1/2}."""
    if not K > 1:
        raise DomainError(f"K must exceed 1, got {K}")
    width = K**-0.5

    def integrand(x: float) -> float:
        e1 = math.tanh(x / SQRT2)
        e2 = 1.0 - x / width
        return 0.5 * (1.0 - e2 * e2) ** 2 - 0.5 + K * e1 * e1 * e2 * e2

    value, _ = quad(integrand, 0.0, width, epsabs=1e-14, epsrel=1e-12)
    return 2.0 * SQRT2 / 3.0 + lambda_**2 * math.sqrt(K) + value


def lower_bound(lambda_: float, K: float) -> float:
    return (
        sigma_infinity(lambda_)
        - LOWER_LAMBDA_CONSTANT * lambda_**0.5 * (K - 1.0) ** -0.25
        - LOWER_K_CONSTANT * K**-0.5
    )


def upper_bound(lambda_: float, K: float) -> float:
    return min(
        overlap_competitor_energy(lambda_, K, optimal_overlap(lambda_, K)),
        small_lambda_competitor_energy(K, lambda_),
    )


@dataclass(frozen=True)
class Bracket:
    lower: float
    overlap: float
    small_lambda: float

    @property
    def upper(self) -> float:
        return min(self.overlap, self.small_lambda)

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lower - slack <= value <= self.upper + slack


def bracket(lambda_: float, K: float) -> Bracket:
    return Bracket(
        lower=lower_bound(lambda_, K),
        overlap=overlap_competitor_energy(lambda_, K, optimal_overlap(lambda_, K)),
        small_lambda=small_lambda_competitor_energy(K, lambda_),
    )


def extrapolate_weak_limit(K_values: t.Sequence[float], scaled_sigmas: t.Sequence[float]) -> float:
    """Intercept at K = 1 of a linear fit of sigma / sqrt(K - 1) against K - 1."""
    if len(K_values) < 2:
        raise DomainError("extrapolation needs at least two K values")
    slope, intercept = np.polyfit(np.asarray(K_values) - 1.0, scaled_sigmas, 1)
    return float(intercept)
