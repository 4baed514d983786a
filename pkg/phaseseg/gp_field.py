"""
Сеточная дискретизация функционалов Гросса-Питаевского.

Кинетическая энергия считается по разностям на ребрах сетки (значения в
центрах ячеек), поэтому ее градиент является 5-точечным лапласианом и
энергия точно согласована с градиентом. Граница бывает двух видов:
``dirichlet`` (нулевые значения за краем, для F и G) и ``neumann``
(только внутренние разности, для J).
"""

import math
import typing as t
from dataclasses import dataclass, field
from logging import getLogger

import numpy as np
from scipy.ndimage import gaussian_filter

from phaseseg.errors import DomainError, PreconditionError, SolverError
from phaseseg.tf_core import TFParams, tf_density, tf_profile

logger = getLogger(__name__)

BOUNDARIES = ("dirichlet", "neumann")
SCHEDULES = ("armijo", "bb")
POTENTIALS = ("harmonic", "none")

# Порог маскирования для u = eta / eta_bar.
MASK_THRESHOLD = 1e-8


@dataclass(frozen=True)
class Grid2D:
    """Cell-centred uniform grid; point (i, j) sits at origin + (i + 1/2, j + 1/2) h."""

    nx: int
    ny: int
    h: float
    origin: t.Tuple[float, float]

    def __post_init__(self) -> None:
        if self.nx < 8 or self.ny < 8:
            raise DomainError(f"grid needs at least 8 points per axis, got {self.nx}x{self.ny}")
        if not self.h > 0:
            raise DomainError(f"grid spacing must be positive, got {self.h}")

    @classmethod
    def square(cls, half_width: float, n: int) -> "Grid2D":
        return cls(nx=n, ny=n, h=2.0 * half_width / n, origin=(-half_width, -half_width))

    @property
    def shape(self) -> t.Tuple[int, int]:
        return self.ny, self.nx

    @property
    def cell_area(self) -> float:
        return self.h * self.h

    @property
    def area(self) -> float:
        return self.nx * self.ny * self.cell_area

    def coordinates(self) -> t.Tuple[np.ndarray, np.ndarray]:
        x = self.origin[0] + (np.arange(self.nx) + 0.5) * self.h
        y = self.origin[1] + (np.arange(self.ny) + 0.5) * self.h
        return np.meshgrid(x, y)

    def radius_squared(self) -> np.ndarray:
        x, y = self.coordinates()
        return x**2 + y**2

    def inner(self, a: np.ndarray, b: np.ndarray) -> float:
        return float(self.cell_area * np.sum(a * b))

    def norm(self, a: np.ndarray) -> float:
        return math.sqrt(self.inner(a, a))


@dataclass(frozen=True)
class ScalarField:
    grid: Grid2D
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float).reshape(self.grid.shape)
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid: Grid2D) -> "ScalarField":
        return cls(grid=grid, values=np.zeros(grid.shape))

    @property
    def mass(self) -> float:
        """L2 mass of the field viewed as a wave function."""
        return self.grid.inner(self.values, self.values)


@dataclass(frozen=True)
class GPParams:
    """Parameters of F_eps; with `crossover` the asymmetry is g = 1 + eps * xi."""

    epsilon: float
    g: float
    K: float
    alpha1: float
    alpha2: float
    potential: str = "harmonic"
    xi: float = 0.0

    def __post_init__(self) -> None:
        if not 0 < self.epsilon <= 1:
            raise DomainError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if self.g < 1:
            raise DomainError(f"g must be >= 1, got {self.g}")
        if not self.K > 0:
            raise DomainError(f"K must be positive, got {self.K}")
        if self.alpha1 < 0 or self.alpha2 < 0:
            raise DomainError("masses must be nonnegative")
        if self.potential not in POTENTIALS:
            raise DomainError(f"unknown potential {self.potential!r}")
        if self.xi < 0:
            raise DomainError(f"xi must be nonnegative, got {self.xi}")
        if self.xi and not math.isclose(self.g, 1.0 + self.epsilon * self.xi, rel_tol=1e-12):
            raise DomainError(f"g={self.g} does not match 1 + eps * xi for xi={self.xi}")

    @classmethod
    def crossover(
        cls, epsilon: float, xi: float, K: float, alpha1: float, alpha2: float
    ) -> "GPParams":
        return cls(
            epsilon=epsilon,
            g=1.0 + epsilon * xi,
            K=K,
            alpha1=alpha1,
            alpha2=alpha2,
            xi=xi,
        )

    @property
    def coupling_xi(self) -> float:
        return (self.g - 1.0) / self.epsilon

    @property
    def alpha_bar(self) -> float:
        return self.alpha1 + self.alpha2

    def tf_params(self) -> TFParams:
        return TFParams(alpha1=self.alpha1, alpha2=self.alpha2, g=self.g, K=self.K)


@dataclass
class MinimizeReport:
    iterations: int
    energy_trace: t.List[float]
    final_energy: float
    mass_errors: t.Tuple[float, ...]
    gradient_norm: float
    converged: bool
    schedule: str = "bb"

    def as_dict(self) -> t.Dict[str, t.Any]:
        return {
            "iterations": self.iterations,
            "final_energy": self.final_energy,
            "mass_errors": list(self.mass_errors),
            "gradient_norm": self.gradient_norm,
            "converged": self.converged,
            "schedule": self.schedule,
            "trace_length": len(self.energy_trace),
        }


@dataclass(frozen=True)
class DecompositionReport:
    """Result of splitting F_eps(eta) through eta = eta_bar * u."""

    residual: float
    remainder: float
    chemical_potential: float
    el_residual: float
    masked_cells: int
    masked_mass: float
    terms: t.Dict[str, float] = field(default_factory=dict)


# ======================= Разностные операторы =======================


def _check_grid(*fields: ScalarField) -> Grid2D:
    grid = fields[0].grid
    for other in fields[1:]:
        if other.grid != grid:
            raise PreconditionError("fields live on different grids")
    return grid


def _check_boundary(boundary: str) -> None:
    if boundary not in BOUNDARIES:
        raise DomainError(f"unknown boundary {boundary!r}")


def _pad_axis(v: np.ndarray, axis: int) -> np.ndarray:
    width = [(0, 0), (0, 0)]
    width[axis] = (1, 1)
    return np.pad(v, width)


def edge_differences(v: np.ndarray, axis: int, boundary: str) -> np.ndarray:
    if boundary == "dirichlet":
        return np.diff(_pad_axis(v, axis), axis=axis)
    return np.diff(v, axis=axis)


def edge_energy(v: np.ndarray, boundary: str) -> float:
    """Sum of squared differences over all edges; equals the integral of |grad v|^2."""
    return float(sum(np.sum(edge_differences(v, axis, boundary) ** 2) for axis in (0, 1)))


def graph_laplacian(v: np.ndarray, boundary: str) -> np.ndarray:
    """Half the gradient of `edge_energy`: degree * v minus the neighbour sum."""
    out = np.zeros_like(v)
    for axis in (0, 1):
        d = edge_differences(v, axis, boundary)
        if boundary == "neumann":
            d = _pad_axis(d, axis)
        out -= np.diff(d, axis=axis)
    return out


def potential_values(grid: Grid2D, potential: str) -> np.ndarray:
    if potential == "harmonic":
        return grid.radius_squared()
    return np.zeros(grid.shape)


# ======================= Функционалы =======================


def gp_energy(
    eta1: ScalarField, eta2: ScalarField, params: GPParams, boundary: str = "dirichlet"
) -> float:
    grid = _check_grid(eta1, eta2)
    _check_boundary(boundary)
    a, b = eta1.values, eta2.values
    V = potential_values(grid, params.potential)
    kinetic = edge_energy(a, boundary) + edge_energy(b, boundary)
    bulk = (
        0.5 * a**4
        + 0.5 * params.g * b**4
        + params.K * a**2 * b**2
        + (a**2 + b**2) * V
    )
    return params.epsilon * kinetic + grid.cell_area / params.epsilon * float(np.sum(bulk))


def gp_gradient(
    eta1: ScalarField, eta2: ScalarField, params: GPParams, boundary: str = "dirichlet"
) -> t.Tuple[ScalarField, ScalarField]:
    grid = _check_grid(eta1, eta2)
    _check_boundary(boundary)
    a, b = eta1.values, eta2.values
    V = potential_values(grid, params.potential)
    eps, h2 = params.epsilon, grid.cell_area
    ga = 2 * eps * graph_laplacian(a, boundary) / h2 + 2 / eps * (
        a**3 + params.K * a * b**2 + V * a
    )
    gb = 2 * eps * graph_laplacian(b, boundary) / h2 + 2 / eps * (
        params.g * b**3 + params.K * b * a**2 + V * b
    )
    return ScalarField(grid, ga), ScalarField(grid, gb)


def g_energy(eta: ScalarField, params: GPParams, boundary: str = "dirichlet") -> float:
    """One-component functional G_eps."""
    _check_boundary(boundary)
    grid = eta.grid
    a = eta.values
    V = potential_values(grid, params.potential)
    bulk = 0.5 * a**4 + a**2 * V
    return params.epsilon * edge_energy(a, boundary) + grid.cell_area / params.epsilon * float(
        np.sum(bulk)
    )


def g_gradient(eta: ScalarField, params: GPParams, boundary: str = "dirichlet") -> ScalarField:
    grid = eta.grid
    a = eta.values
    V = potential_values(grid, params.potential)
    eps = params.epsilon
    return ScalarField(
        grid, 2 * eps * graph_laplacian(a, boundary) / grid.cell_area + 2 / eps * (a**3 + V * a)
    )


def j_energy(
    eta1: ScalarField,
    eta2: ScalarField,
    lambda_: float,
    K: float,
    epsilon: float,
    boundary: str = "neumann",
) -> float:
    grid = _check_grid(eta1, eta2)
    _check_boundary(boundary)
    a, b = eta1.values, eta2.values
    kinetic = edge_energy(a, boundary) + lambda_**2 * edge_energy(b, boundary)
    bulk = 0.5 * (a**2 + b**2 - 1.0) ** 2 + (K - 1.0) * a**2 * b**2
    return epsilon * kinetic + grid.cell_area / epsilon * float(np.sum(bulk))


def j_gradient(
    eta1: ScalarField,
    eta2: ScalarField,
    lambda_: float,
    K: float,
    epsilon: float,
    boundary: str = "neumann",
) -> t.Tuple[ScalarField, ScalarField]:
    grid = _check_grid(eta1, eta2)
    _check_boundary(boundary)
    a, b = eta1.values, eta2.values
    h2 = grid.cell_area
    s = a**2 + b**2 - 1.0
    ga = 2 * epsilon * graph_laplacian(a, boundary) / h2 + 2 / epsilon * (
        s * a + (K - 1.0) * a * b**2
    )
    gb = 2 * epsilon * lambda_**2 * graph_laplacian(b, boundary) / h2 + 2 / epsilon * (
        s * b + (K - 1.0) * b * a**2
    )
    return ScalarField(grid, ga), ScalarField(grid, gb)


@dataclass(frozen=True)
class RhoBar:
    """Radial rule r -> (R^2 - r^2)_+ ."""

    R: float

    def __call__(self, r: t.Union[float, np.ndarray]) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return np.maximum(self.R**2 - r**2, 0.0)


def rho_bar(alpha_bar: float) -> RhoBar:
    if not alpha_bar > 0:
        raise DomainError(f"alpha_bar must be positive, got {alpha_bar}")
    return RhoBar(R=(2.0 * alpha_bar / math.pi) ** 0.25)


def chemical_potential(eta_bar: ScalarField, params: GPParams) -> float:
    """Rayleigh quotient of the one-component Euler-Lagrange equation."""
    grid = eta_bar.grid
    a = eta_bar.values
    half_gradient = 0.5 * g_gradient(eta_bar, params).values
    return grid.inner(half_gradient, a) / grid.inner(a, a)


def el_residual_field(eta_bar: ScalarField, params: GPParams) -> np.ndarray:
    a = eta_bar.values
    return 0.5 * g_gradient(eta_bar, params).values - chemical_potential(eta_bar, params) * a


def el_residual(eta_bar: ScalarField, params: GPParams) -> float:
    return eta_bar.grid.norm(el_residual_field(eta_bar, params))


# ======================= Разложение энергии =======================


def lm_decomposition(
    eta1: ScalarField, eta2: ScalarField, eta_bar: ScalarField, params: GPParams
) -> DecompositionReport:
    """
    F_eps(eta) against G_eps(eta_bar) + F~_eps(u) + (xi/2) int eta_bar^4 u2^4.

    На сетке разность сторон равна h^2 sum a r (s - 1) + lambda (mass_s - mass),
    где r - невязка уравнения Эйлера-Лагранжа для eta_bar; это значение
    возвращается как `remainder`.
    """
    grid = _check_grid(eta1, eta2, eta_bar)
    a = eta_bar.values
    support = a >= MASK_THRESHOLD
    u1 = np.where(support, eta1.values / np.where(support, a, 1.0), 0.0)
    u2 = np.where(support, eta2.values / np.where(support, a, 1.0), 0.0)
    masked = ~support & ((eta1.values != 0) | (eta2.values != 0))
    masked_mass = float(grid.cell_area * np.sum((eta1.values**2 + eta2.values**2)[masked]))
    if masked.any():
        logger.warning(
            "decomposition masked %d cells carrying mass %.3e", int(masked.sum()), masked_mass
        )

    eps, h2, xi = params.epsilon, grid.cell_area, params.coupling_xi
    s = u1**2 + u2**2

    weighted_kinetic = 0.0
    for axis in (0, 1):
        weights = _edge_products(a, axis)
        weighted_kinetic += float(
            np.sum(weights * edge_differences(u1, axis, "dirichlet") ** 2)
            + np.sum(weights * edge_differences(u2, axis, "dirichlet") ** 2)
        )
    penalty = float(np.sum(a**4 * (0.5 * (1.0 - s) ** 2 + (params.K - 1.0) * u1**2 * u2**2)))
    f_tilde = eps * weighted_kinetic + h2 / eps * penalty
    asym = 0.5 * xi * h2 * float(np.sum(a**4 * u2**4))

    full = gp_energy(eta1, eta2, params)
    single = g_energy(eta_bar, params)
    residual = abs(full - (single + f_tilde + asym))

    mu = chemical_potential(eta_bar, params)
    r = el_residual_field(eta_bar, params)
    mass = grid.inner(a, a)
    mass_s = h2 * float(np.sum(a**2 * s))
    remainder = h2 * float(np.sum(a * r * (s - 1.0))) + mu * (mass_s - mass)
    return DecompositionReport(
        residual=residual,
        remainder=remainder,
        chemical_potential=mu,
        el_residual=grid.norm(r),
        masked_cells=int(masked.sum()),
        masked_mass=masked_mass,
        terms={"F": full, "G": single, "F_tilde": f_tilde, "xi_term": asym},
    )


def _edge_products(a: np.ndarray, axis: int) -> np.ndarray:
    """a_i * a_j on every edge, ghost neighbours being zero."""
    p = _pad_axis(a, axis)
    lo = [slice(None), slice(None)]
    hi = [slice(None), slice(None)]
    lo[axis] = slice(None, -1)
    hi[axis] = slice(1, None)
    return p[tuple(lo)] * p[tuple(hi)]


def lm_decomposition_residual(
    eta1: ScalarField, eta2: ScalarField, eta_bar: ScalarField, params: GPParams
) -> float:
    return lm_decomposition(eta1, eta2, eta_bar, params).residual


# ======================= Спуск с проекцией =======================


Objective = t.Callable[[t.List[np.ndarray]], float]
Gradient = t.Callable[[t.List[np.ndarray]], t.List[np.ndarray]]


class ProjectedDescent:
    """
    Gradient descent on the product of L2 spheres {int eta_i^2 = alpha_i}.

    Each step moves along the tangent part of the gradient, takes absolute
    values and rescales every component back to its mass. Step sizes come
    from the schedule and are safeguarded by Armijo backtracking.
    """

    def __init__(
        self,
        grid: Grid2D,
        objective: Objective,
        gradient: Gradient,
        masses: t.Sequence[float],
        schedule: str = "bb",
        initial_step: float = 1e-3,
        tol: float = 1e-6,
        max_iter: int = 5000,
        armijo: float = 1e-4,
        max_backtracks: int = 40,
        log_every: int = 200,
    ):
        if schedule not in SCHEDULES:
            raise DomainError(f"unknown schedule {schedule!r}")
        self.grid = grid
        self.objective = objective
        self.gradient = gradient
        self.masses = list(masses)
        self.schedule = schedule
        self.initial_step = initial_step
        self.tol = tol
        self.max_iter = max_iter
        self.armijo = armijo
        self.max_backtracks = max_backtracks
        self.log_every = log_every

    def normalize(self, fields: t.List[np.ndarray]) -> t.List[np.ndarray]:
        out = []
        for f, alpha in zip(fields, self.masses):
            f = np.abs(f)
            if alpha == 0:
                out.append(np.zeros_like(f))
                continue
            mass = self.grid.inner(f, f)
            if not mass > 0:
                raise SolverError("iterate lost all mass of a component")
            out.append(f * math.sqrt(alpha / mass))
        return out

    def tangent(self, fields: t.List[np.ndarray], grads: t.List[np.ndarray]) -> t.List[np.ndarray]:
        out = []
        for f, gr, alpha in zip(fields, grads, self.masses):
            if alpha == 0:
                out.append(np.zeros_like(f))
                continue
            out.append(gr - self.grid.inner(gr, f) / self.grid.inner(f, f) * f)
        return out

    def _norm(self, parts: t.List[np.ndarray]) -> float:
        return math.sqrt(sum(self.grid.inner(p, p) for p in parts))

    def run(self, fields: t.Sequence[np.ndarray]) -> t.Tuple[t.List[np.ndarray], MinimizeReport]:
        x = self.normalize([np.asarray(f, dtype=float) for f in fields])
        energy = self.objective(x)
        trace = [energy]
        step = self.initial_step
        prev_x: t.Optional[t.List[np.ndarray]] = None
        prev_p: t.Optional[t.List[np.ndarray]] = None
        converged = False
        iteration = 0
        p = self.tangent(x, self.gradient(x))
        pnorm = self._norm(p)

        while iteration < self.max_iter:
            if pnorm < self.tol:
                converged = True
                break
            step = self._trial_step(step, x, p, prev_x, prev_p)
            slack = 1e-13 * max(1.0, abs(energy))
            for _ in range(self.max_backtracks):
                candidate = self.normalize([f - step * d for f, d in zip(x, p)])
                new_energy = self.objective(candidate)
                if new_energy <= energy - self.armijo * step * pnorm**2 + slack:
                    break
                step *= 0.5
            else:
                raise SolverError(
                    f"backtracking exhausted at iteration {iteration}, energy {energy:.6g}",
                    trace=trace,
                )
            prev_x, prev_p = x, p
            x, energy = candidate, new_energy
            trace.append(energy)
            p = self.tangent(x, self.gradient(x))
            pnorm = self._norm(p)
            iteration += 1
            if iteration % self.log_every == 0:
                logger.debug(
                    "iteration %d: energy %.10g, projected gradient %.3e", iteration, energy, pnorm
                )
        else:
            converged = pnorm < self.tol

        mass_errors = tuple(
            abs(self.grid.inner(f, f) - alpha) for f, alpha in zip(x, self.masses)
        )
        report = MinimizeReport(
            iterations=iteration,
            energy_trace=trace,
            final_energy=energy,
            mass_errors=mass_errors,
            gradient_norm=pnorm,
            converged=converged,
            schedule=self.schedule,
        )
        logger.info(
            "descent (%s) finished after %d iterations: energy %.10g, gradient %.3e, converged=%s",
            self.schedule,
            iteration,
            energy,
            pnorm,
            converged,
        )
        return x, report

    def _trial_step(
        self,
        step: float,
        x: t.List[np.ndarray],
        p: t.List[np.ndarray],
        prev_x: t.Optional[t.List[np.ndarray]],
        prev_p: t.Optional[t.List[np.ndarray]],
    ) -> float:
        if prev_x is None or prev_p is None:
            return self.initial_step
        if self.schedule == "armijo":
            # после успешного шага пробуем чуть больший
            return step * 1.5
        sy = sum(self.grid.inner(a - b, c - d) for a, b, c, d in zip(x, prev_x, p, prev_p))
        ss = sum(self.grid.inner(a - b, a - b) for a, b in zip(x, prev_x))
        if sy <= 0:
            return self.initial_step
        return min(ss / sy, 1e6 * self.initial_step)


# ======================= Инициализация и минимизация =======================


def support_radius(params: GPParams) -> float:
    if params.alpha2 == 0 or params.g == 1:
        return rho_bar(params.alpha_bar).R
    return tf_profile(params.tf_params()).R2


def default_grid(params: GPParams, n: int = 128) -> Grid2D:
    return Grid2D.square(support_radius(params) + 1.0, n)


def tf_densities_on(grid: Grid2D, params: GPParams) -> t.Tuple[np.ndarray, np.ndarray]:
    r = np.sqrt(grid.radius_squared())
    if params.alpha2 == 0:
        return rho_bar(params.alpha1)(r), np.zeros(grid.shape)
    rho1, rho2 = tf_density(tf_profile(params.tf_params()), params.tf_params())(r)
    return rho1, rho2


def tf_seed(grid: Grid2D, params: GPParams, sigma: float = 2.0) -> t.Tuple[ScalarField, ScalarField]:
    """Square roots of the Thomas-Fermi densities mollified over `sigma` cells."""
    if params.potential != "harmonic":
        raise DomainError("tf-seed needs the harmonic potential")
    rho1, rho2 = tf_densities_on(grid, params)
    fields = []
    for rho, alpha in ((rho1, params.alpha1), (rho2, params.alpha2)):
        eta = gaussian_filter(np.sqrt(rho), sigma=sigma, mode="constant")
        mass = grid.inner(eta, eta)
        if alpha > 0 and mass > 0:
            eta *= math.sqrt(alpha / mass)
        fields.append(ScalarField(grid, eta))
    return fields[0], fields[1]


def default_step(grid: Grid2D, epsilon: float) -> float:
    return epsilon * grid.cell_area / 4.0


def minimize_gp(
    params: GPParams,
    init: t.Union[str, t.Tuple[ScalarField, ScalarField]] = "tf-seed",
    schedule: str = "bb",
    grid: t.Optional[Grid2D] = None,
    n: int = 128,
    tol: float = 1e-6,
    max_iter: int = 5000,
) -> t.Tuple[ScalarField, ScalarField, MinimizeReport]:
    if isinstance(init, str):
        if init != "tf-seed":
            raise DomainError(f"unknown initialisation {init!r}")
        grid = grid or default_grid(params, n)
        eta1, eta2 = tf_seed(grid, params)
    else:
        eta1, eta2 = init
        grid = _check_grid(eta1, eta2)

    def objective(x: t.List[np.ndarray]) -> float:
        return gp_energy(ScalarField(grid, x[0]), ScalarField(grid, x[1]), params)

    def gradient(x: t.List[np.ndarray]) -> t.List[np.ndarray]:
        g1, g2 = gp_gradient(ScalarField(grid, x[0]), ScalarField(grid, x[1]), params)
        return [g1.values, g2.values]

    descent = ProjectedDescent(
        grid,
        objective,
        gradient,
        masses=(params.alpha1, params.alpha2),
        schedule=schedule,
        initial_step=default_step(grid, params.epsilon),
        tol=tol,
        max_iter=max_iter,
    )
    x, report = descent.run([eta1.values, eta2.values])
    return ScalarField(grid, x[0]), ScalarField(grid, x[1]), report


def minimize_g(
    params: GPParams,
    grid: Grid2D,
    schedule: str = "bb",
    tol: float = 1e-6,
    max_iter: int = 5000,
) -> t.Tuple[ScalarField, MinimizeReport]:
    """Minimiser of G_eps with total mass alpha1 + alpha2."""
    r = np.sqrt(grid.radius_squared())
    seed = gaussian_filter(np.sqrt(rho_bar(params.alpha_bar)(r)), sigma=2.0, mode="constant")

    def objective(x: t.List[np.ndarray]) -> float:
        return g_energy(ScalarField(grid, x[0]), params)

    def gradient(x: t.List[np.ndarray]) -> t.List[np.ndarray]:
        return [g_gradient(ScalarField(grid, x[0]), params).values]

    descent = ProjectedDescent(
        grid,
        objective,
        gradient,
        masses=(params.alpha_bar,),
        schedule=schedule,
        initial_step=default_step(grid, params.epsilon),
        tol=tol,
        max_iter=max_iter,
    )
    x, report = descent.run([seed])
    return ScalarField(grid, x[0]), report


def split_init(grid: Grid2D, alpha1: float) -> t.Tuple[ScalarField, ScalarField]:
    """eta1 = 1 on the left strip of area alpha1, eta2 = 1 on the rest, smoothed."""
    x, _ = grid.coordinates()
    cut = grid.origin[0] + alpha1 / (grid.ny * grid.h)
    left = (x < cut).astype(float)
    eta1 = gaussian_filter(left, sigma=1.0, mode="nearest")
    eta2 = gaussian_filter(1.0 - left, sigma=1.0, mode="nearest")
    return ScalarField(grid, eta1), ScalarField(grid, eta2)


def minimize_j(
    grid: Grid2D,
    lambda_: float,
    K: float,
    epsilon: float,
    alpha1: float,
    alpha2: float,
    init: t.Union[str, t.Tuple[ScalarField, ScalarField]] = "split",
    schedule: str = "bb",
    tol: float = 1e-6,
    max_iter: int = 5000,
) -> t.Tuple[ScalarField, ScalarField, MinimizeReport]:
    """Projected descent for J_eps on the box with natural boundary conditions."""
    if not 0 < lambda_ <= 1:
        raise DomainError(f"lambda must lie in (0, 1], got {lambda_}")
    if not K > 1:
        raise DomainError(f"K must exceed 1, got {K}")
    if isinstance(init, str):
        if init != "split":
            raise DomainError(f"unknown initialisation {init!r}")
        eta1, eta2 = split_init(grid, alpha1)
    else:
        eta1, eta2 = init
        _check_grid(eta1, eta2)

    def objective(x: t.List[np.ndarray]) -> float:
        return j_energy(ScalarField(grid, x[0]), ScalarField(grid, x[1]), lambda_, K, epsilon)

    def gradient(x: t.List[np.ndarray]) -> t.List[np.ndarray]:
        g1, g2 = j_gradient(ScalarField(grid, x[0]), ScalarField(grid, x[1]), lambda_, K, epsilon)
        return [g1.values, g2.values]

    descent = ProjectedDescent(
        grid,
        objective,
        gradient,
        masses=(alpha1, alpha2),
        schedule=schedule,
        initial_step=default_step(grid, epsilon),
        tol=tol,
        max_iter=max_iter,
    )
    x, report = descent.run([eta1.values, eta2.values])
    return ScalarField(grid, x[0]), ScalarField(grid, x[1]), report


# ======================= Сравнение с Томасом-Ферми =======================


def tf_distance(eta1: ScalarField, eta2: ScalarField, params: GPParams) -> float:
    """L2 distance between (eta1, eta2) and the square roots of the TF densities."""
    grid = _check_grid(eta1, eta2)
    rho1, rho2 = tf_densities_on(grid, params)
    return math.sqrt(
        grid.inner(eta1.values - np.sqrt(rho1), eta1.values - np.sqrt(rho1))
        + grid.inner(eta2.values - np.sqrt(rho2), eta2.values - np.sqrt(rho2))
    )


def density_l1_distance(eta1: ScalarField, eta2: ScalarField, params: GPParams) -> float:
    grid = _check_grid(eta1, eta2)
    rho1, rho2 = tf_densities_on(grid, params)
    return float(
        grid.cell_area
        * (np.sum(np.abs(eta1.values**2 - rho1)) + np.sum(np.abs(eta2.values**2 - rho2)))
    )


def fit_rate(epsilons: t.Sequence[float], distances: t.Sequence[float]) -> float:
    """Slope of the log-log fit of distance against epsilon."""
    if len(epsilons) < 2 or len(epsilons) != len(distances):
        raise DomainError("rate fit needs at least two matching samples")
    slope, _ = np.polyfit(np.log(epsilons), np.log(distances), 1)
    return float(slope)


@dataclass(frozen=True)
class Reparametrization:
    lambda_: float
    K_tilde: float
    alpha1_tilde: float
    alpha2_tilde: float
    gamma: float
    length_scale: float


def reparametrize(
    alpha1: float, alpha2: float, g: float, K: float, omega_area: float
) -> Reparametrization:
    """Change of variables to equal intracomponent couplings with unit density."""
    if g < 1:
        raise DomainError(f"g must be >= 1, got {g}")
    if not (alpha1 > 0 and alpha2 > 0 and omega_area > 0):
        raise DomainError("masses and area must be positive")
    root_g = math.sqrt(g)
    gamma = alpha1 + alpha2 * root_g
    return Reparametrization(
        lambda_=g**-0.25,
        K_tilde=K / root_g,
        alpha1_tilde=alpha1,
        alpha2_tilde=root_g * alpha2,
        gamma=gamma,
        length_scale=math.sqrt(gamma / omega_area),
    )
