"""
Geometry of competitor sets for the weighted isoperimetric problem.

The weight is rho(x) = (R^2 - |x|^2)_+. Every shape knows its weighted
perimeter int_{dE} rho^{3/2}, its weighted volume int_E rho, the integral
int_E rho^2 and its weighted overlap with a centred ball.
"""

import math
import typing as t
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad

from phaseseg.errors import DomainError

# Узлы квадратуры по углу для звездных множеств.
STAR_NODES = 4096
ARC_NODES = 1024


@dataclass(frozen=True)
class WeightParams:
    R: float
    alpha1: t.Optional[float] = None

    def __post_init__(self) -> None:
        if not self.R > 1:
            raise DomainError(f"support radius must exceed 1, got {self.R}")
        if self.alpha1 is not None and not 0 < self.alpha1 < self.alpha_bar:
            raise DomainError(
                f"alpha1 must lie in (0, {self.alpha_bar:.6g}), got {self.alpha1}"
            )

    @classmethod
    def from_mass(cls, alpha_bar: float, alpha1: t.Optional[float] = None) -> "WeightParams":
        return cls(R=(2.0 * alpha_bar / math.pi) ** 0.25, alpha1=alpha1)

    @property
    def alpha_bar(self) -> float:
        return math.pi * self.R**4 / 2.0

    @property
    def total_squared(self) -> float:
        """int rho^2 over the plane."""
        return math.pi * self.R**6 / 3.0

    def rho(self, r2: t.Any) -> t.Any:
        return np.maximum(self.R**2 - r2, 0.0)

    def radial_volume(self, s: t.Any) -> t.Any:
        """int_0^s rho(r) r dr."""
        return self.R**2 * s**2 / 2.0 - s**4 / 4.0

    def radial_squared(self, s: t.Any) -> t.Any:
        """int_0^s rho(r)^2 r dr."""
        return (self.R**6 - (self.R**2 - s**2) ** 3) / 6.0


def ball_volume(w: WeightParams, r: float) -> float:
    return 2.0 * math.pi * float(w.radial_volume(min(r, w.R)))


def ball_perimeter(w: WeightParams, r: float) -> float:
    return 2.0 * math.pi * r * max(w.R**2 - r**2, 0.0) ** 1.5


class Shape(ABC):
    """Competitor set E inside the support of the weight."""

    family: str = "shape"
    radial: t.ClassVar[bool] = False

    @abstractmethod
    def validate(self, w: WeightParams) -> None:
        ...

    @abstractmethod
    def perimeter(self, w: WeightParams) -> float:
        ...

    @abstractmethod
    def volume(self, w: WeightParams) -> float:
        ...

    @abstractmethod
    def squared_weight(self, w: WeightParams) -> float:
        """int_E rho^2."""

    @abstractmethod
    def ball_overlap(self, w: WeightParams, r: float) -> float:
        """int_{E cap B_r} rho."""

    @property
    @abstractmethod
    def parameter(self) -> float:
        """Scalar used to match the volume."""

    @abstractmethod
    def with_parameter(self, value: float) -> "Shape":
        ...

    @abstractmethod
    def parameter_bounds(self, w: WeightParams) -> t.Tuple[float, float]:
        ...

    @abstractmethod
    def boundary(self, w: WeightParams, n: int = 256) -> t.Tuple[np.ndarray, np.ndarray]:
        """Boundary points (x, y) for dumps."""

    def describe(self) -> t.Dict[str, t.Any]:
        return {"family": self.family, "parameter": self.parameter}


# ======================= Звездные множества =======================


@dataclass(frozen=True, eq=False)
class StarShape(Shape):
    """Boundary r(theta) = base_radius * (1 + u(theta)), u given by rows (a_k, b_k)."""

    base_radius: float
    fourier_u: np.ndarray = field(default_factory=lambda: np.zeros((1, 2)))
    family: str = "fourier"

    def __post_init__(self) -> None:
        coeffs = np.atleast_2d(np.asarray(self.fourier_u, dtype=float))
        if coeffs.shape[1] != 2:
            raise DomainError(f"fourier_u must have rows (a_k, b_k), got shape {coeffs.shape}")
        object.__setattr__(self, "fourier_u", coeffs)
        if not self.base_radius > 0:
            raise DomainError(f"base radius must be positive, got {self.base_radius}")

    @classmethod
    def ball(cls, r: float) -> "StarShape":
        return cls(base_radius=r, family="ball")

    @classmethod
    def with_modes(cls, base_radius: float, modes: t.Mapping[int, t.Tuple[float, float]]) -> "StarShape":
        k_max = max(modes) if modes else 0
        coeffs = np.zeros((k_max + 1, 2))
        for k, (a, b) in modes.items():
            coeffs[k] = (a, b)
        return cls(base_radius=base_radius, fourier_u=coeffs)

    @property
    def radial(self) -> bool:  # type: ignore[override]
        return not np.any(self.fourier_u[1:])

    @property
    def k_max(self) -> int:
        return self.fourier_u.shape[0] - 1

    @staticmethod
    def angles(n: int = STAR_NODES) -> np.ndarray:
        return 2.0 * np.pi * np.arange(n) / n

    def u(self, theta: np.ndarray) -> np.ndarray:
        k = np.arange(self.k_max + 1)[:, None]
        return np.sum(
            self.fourier_u[:, :1] * np.cos(k * theta) + self.fourier_u[:, 1:] * np.sin(k * theta),
            axis=0,
        )

    def du(self, theta: np.ndarray) -> np.ndarray:
        k = np.arange(self.k_max + 1)[:, None]
        return np.sum(
            k * (-self.fourier_u[:, :1] * np.sin(k * theta) + self.fourier_u[:, 1:] * np.cos(k * theta)),
            axis=0,
        )

    def radius(self, theta: np.ndarray) -> np.ndarray:
        return self.base_radius * (1.0 + self.u(theta))

    def validate(self, w: WeightParams) -> None:
        theta = self.angles()
        u = self.u(theta)
        if np.any(1.0 + u <= 0):
            raise DomainError("boundary is not star-shaped: 1 + u vanishes")
        if np.any(self.base_radius * (1.0 + u) >= w.R):
            raise DomainError("boundary leaves the support of the weight")

    def _mean(self, values: np.ndarray) -> float:
        return 2.0 * math.pi * float(np.mean(values))

    def perimeter(self, w: WeightParams) -> float:
        self.validate(w)
        theta = self.angles()
        r = self.radius(theta)
        dr = self.base_radius * self.du(theta)
        return self._mean(w.rho(r**2) ** 1.5 * np.sqrt(r**2 + dr**2))

    def volume(self, w: WeightParams) -> float:
        self.validate(w)
        return self._mean(w.radial_volume(self.radius(self.angles())))

    def squared_weight(self, w: WeightParams) -> float:
        self.validate(w)
        return self._mean(w.radial_squared(self.radius(self.angles())))

    def ball_overlap(self, w: WeightParams, r: float) -> float:
        return self._mean(w.radial_volume(np.minimum(self.radius(self.angles()), r)))

    @property
    def parameter(self) -> float:
        return float(self.fourier_u[0, 0])

    def with_parameter(self, value: float) -> "StarShape":
        coeffs = self.fourier_u.copy()
        coeffs[0, 0] = value
        return replace(self, fourier_u=coeffs)

    def parameter_bounds(self, w: WeightParams) -> t.Tuple[float, float]:
        theta = self.angles()
        rest = self.u(theta) - self.parameter
        lo = -1.0 - float(rest.min())
        hi = w.R / self.base_radius - 1.0 - float(rest.max())
        return lo, hi

    def boundary(self, w: WeightParams, n: int = 256) -> t.Tuple[np.ndarray, np.ndarray]:
        theta = self.angles(n)
        r = self.radius(theta)
        return r * np.cos(theta), r * np.sin(theta)

    def describe(self) -> t.Dict[str, t.Any]:
        modes = {
            int(k): [float(a), float(b)]
            for k, (a, b) in enumerate(self.fourier_u)
            if a or b
        }
        return {"family": self.family, "base_radius": self.base_radius, "modes": modes}


# ======================= Диски и линзы =======================


def _gauss_arc(a: float, b: float, n: int = ARC_NODES) -> t.Tuple[np.ndarray, np.ndarray]:
    nodes, weights = leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (nodes + 1.0), half * weights


def _green_potential(w: WeightParams, squared: bool) -> t.Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """P with dP/dx = rho (or rho^2) inside the support, for int_E = contour int P dy."""
    R2 = w.R**2
    if squared:
        return lambda x, y: (R2 - y**2) ** 2 * x - (2.0 / 3.0) * (R2 - y**2) * x**3 + x**5 / 5.0
    return lambda x, y: R2 * x - x**3 / 3.0 - x * y**2


def _circle_integral(
    P: t.Callable[[np.ndarray, np.ndarray], np.ndarray],
    centre: float,
    radius: float,
    a: float,
    b: float,
) -> float:
    """int P dy along the circle |x - centre e1| = radius, angle from a to b."""
    phi, wts = _gauss_arc(a, b)
    x = centre + radius * np.cos(phi)
    y = radius * np.sin(phi)
    return float(np.sum(wts * P(x, y) * radius * np.cos(phi)))


def disk_ball_integral(
    w: WeightParams, s: float, c: float, rho: float, squared: bool = False
) -> float:
    """int of rho (or rho^2) over B_s(c e1) cap B_rho, with rho <= R."""
    P = _green_potential(w, squared)
    if c >= s + rho:
        return 0.0
    if c + s <= rho:
        return _circle_integral(P, c, s, 0.0, 2.0 * math.pi)
    if s >= c + rho:
        return _circle_integral(P, 0.0, rho, 0.0, 2.0 * math.pi)
    phi_plus = math.acos((rho**2 - c**2 - s**2) / (2.0 * c * s))
    theta_star = math.acos((rho**2 + c**2 - s**2) / (2.0 * c * rho))
    return _circle_integral(P, c, s, phi_plus, 2.0 * math.pi - phi_plus) + _circle_integral(
        P, 0.0, rho, -theta_star, theta_star
    )


@dataclass(frozen=True)
class DiskShape(Shape):
    """B_s(c e1) cap B_R: off-centre disks, boundary-tangent balls and lenses."""

    s: float
    c: float
    tangent: bool = False
    family: str = "disk"

    def __post_init__(self) -> None:
        if not self.s > 0 or self.c < 0:
            raise DomainError(f"disk needs s > 0 and c >= 0, got s={self.s}, c={self.c}")

    @classmethod
    def tangent_ball(cls, s: float, w: WeightParams) -> "DiskShape":
        return cls(s=s, c=w.R - s, tangent=True, family="tangent")

    def validate(self, w: WeightParams) -> None:
        if self.c >= self.s + w.R:
            raise DomainError("disk does not meet the support of the weight")
        if self.s >= self.c + w.R:
            raise DomainError("disk covers the whole support")

    def _arc(self, w: WeightParams) -> t.Tuple[float, float]:
        if self.c + self.s <= w.R:
            return 0.0, 2.0 * math.pi
        phi_plus = math.acos((w.R**2 - self.c**2 - self.s**2) / (2.0 * self.c * self.s))
        return phi_plus, 2.0 * math.pi - phi_plus

    def perimeter(self, w: WeightParams) -> float:
        # дуга большой окружности лежит на границе носителя, вес там нулевой
        self.validate(w)
        a, b = self._arc(w)
        phi, wts = _gauss_arc(a, b)
        r2 = self.c**2 + self.s**2 + 2.0 * self.c * self.s * np.cos(phi)
        return float(np.sum(wts * w.rho(r2) ** 1.5) * self.s)

    def volume(self, w: WeightParams) -> float:
        self.validate(w)
        return disk_ball_integral(w, self.s, self.c, w.R)

    def squared_weight(self, w: WeightParams) -> float:
        self.validate(w)
        return disk_ball_integral(w, self.s, self.c, w.R, squared=True)

    def ball_overlap(self, w: WeightParams, r: float) -> float:
        return disk_ball_integral(w, self.s, self.c, min(r, w.R))

    @property
    def parameter(self) -> float:
        return self.s

    def with_parameter(self, value: float) -> "DiskShape":
        if self.tangent:
            return replace(self, s=value, c=self.c + self.s - value)
        return replace(self, s=value)

    def parameter_bounds(self, w: WeightParams) -> t.Tuple[float, float]:
        if self.tangent:
            return 0.0, w.R
        return max(0.0, self.c - w.R), self.c + w.R

    @property
    def radial(self) -> bool:  # type: ignore[override]
        return self.c == 0

    def boundary(self, w: WeightParams, n: int = 256) -> t.Tuple[np.ndarray, np.ndarray]:
        a, b = self._arc(w)
        phi = np.linspace(a, b, n)
        x, y = self.c + self.s * np.cos(phi), self.s * np.sin(phi)
        if self.c + self.s <= w.R:
            return x, y
        theta_star = math.atan2(y[-1], x[-1])
        theta = np.linspace(theta_star, -theta_star, n)
        return np.concatenate((x, w.R * np.cos(theta))), np.concatenate((y, w.R * np.sin(theta)))

    def describe(self) -> t.Dict[str, t.Any]:
        return {"family": self.family, "s": self.s, "c": self.c}


# ======================= Сегменты =======================


@dataclass(frozen=True)
class CapShape(Shape):
    """{x1 > d} cap B_R."""

    d: float
    family: str = "cap"

    def validate(self, w: WeightParams) -> None:
        if not -w.R < self.d < w.R:
            raise DomainError(f"cap offset must lie in (-R, R), got {self.d}")

    def perimeter(self, w: WeightParams) -> float:
        self.validate(w)
        return 3.0 * math.pi / 8.0 * (w.R**2 - self.d**2) ** 2

    def _strip_integral(self, w: WeightParams, upper: float, squared: bool) -> float:
        R2 = w.R**2

        def column(x: float) -> float:
            half = math.sqrt(max(upper**2 - x * x, 0.0))
            a = R2 - x * x
            if squared:
                return 2.0 * (a * a * half - 2.0 * a * half**3 / 3.0 + half**5 / 5.0)
            return 2.0 * (a * half - half**3 / 3.0)

        if self.d >= upper:
            return 0.0
        value, _ = quad(column, self.d, upper, epsabs=1e-14, epsrel=1e-13, limit=200)
        return float(value)

    def volume(self, w: WeightParams) -> float:
        self.validate(w)
        return self._strip_integral(w, w.R, squared=False)

    def squared_weight(self, w: WeightParams) -> float:
        self.validate(w)
        return self._strip_integral(w, w.R, squared=True)

    def ball_overlap(self, w: WeightParams, r: float) -> float:
        return self._strip_integral(w, min(r, w.R), squared=False)

    @property
    def parameter(self) -> float:
        return self.d

    def with_parameter(self, value: float) -> "CapShape":
        return replace(self, d=value)

    def parameter_bounds(self, w: WeightParams) -> t.Tuple[float, float]:
        return -w.R, w.R

    def boundary(self, w: WeightParams, n: int = 256) -> t.Tuple[np.ndarray, np.ndarray]:
        half = math.sqrt(w.R**2 - self.d**2)
        limit = math.acos(self.d / w.R)
        theta = np.linspace(-limit, limit, n)
        x = np.concatenate((np.full(n, self.d), w.R * np.cos(theta)))
        y = np.concatenate((np.linspace(half, -half, n), w.R * np.sin(theta)))
        return x, y

    def describe(self) -> t.Dict[str, t.Any]:
        return {"family": self.family, "d": self.d}


# ======================= Радиальные множества =======================


@dataclass(frozen=True)
class RadialShape(Shape):
    """Union of centred annuli a_i < |x| < b_i."""

    intervals: t.Tuple[t.Tuple[float, float], ...]
    family: str = "radial"
    radial: t.ClassVar[bool] = True

    def __post_init__(self) -> None:
        items = tuple(sorted((float(a), float(b)) for a, b in self.intervals))
        if not items:
            raise DomainError("radial shape needs at least one interval")
        for (a, b), nxt in zip(items, items[1:] + ((math.inf, math.inf),)):
            if not 0 <= a < b or b > nxt[0]:
                raise DomainError(f"radial intervals must be disjoint and ordered, got {items}")
        object.__setattr__(self, "intervals", items)

    @classmethod
    def ball(cls, r: float) -> "RadialShape":
        return cls(intervals=((0.0, r),), family="ball")

    @classmethod
    def annulus(cls, a: float, w: WeightParams) -> "RadialShape":
        return cls(intervals=((a, w.R),), family="annulus")

    @classmethod
    def transfer(
        cls, w: WeightParams, r: float, inner: float, outer: float
    ) -> "RadialShape":
        """B_r with the annulus (r - inner, r) moved outside to (r, r_out), same volume."""
        if not 0 < inner < r:
            raise DomainError(f"inner width must lie in (0, {r}), got {inner}")
        moved = ball_volume(w, r) - ball_volume(w, r - inner)
        start = r + outer
        target = w.radial_volume(start) + moved / (2.0 * math.pi)
        disc = w.R**4 - 4.0 * target
        if disc < 0:
            raise DomainError("transferred annulus does not fit inside the support")
        end = math.sqrt(w.R**2 - math.sqrt(disc))
        return cls(intervals=((0.0, r - inner), (start, end)), family="transfer")

    def validate(self, w: WeightParams) -> None:
        if self.intervals[-1][1] > w.R:
            raise DomainError("radial shape leaves the support of the weight")

    def perimeter(self, w: WeightParams) -> float:
        self.validate(w)
        return sum(ball_perimeter(w, a) + ball_perimeter(w, b) for a, b in self.intervals)

    def volume(self, w: WeightParams) -> float:
        self.validate(w)
        return sum(2.0 * math.pi * (w.radial_volume(b) - w.radial_volume(a)) for a, b in self.intervals)

    def squared_weight(self, w: WeightParams) -> float:
        self.validate(w)
        return sum(
            2.0 * math.pi * (w.radial_squared(b) - w.radial_squared(a)) for a, b in self.intervals
        )

    def ball_overlap(self, w: WeightParams, r: float) -> float:
        total = 0.0
        for a, b in self.intervals:
            hi = min(b, r)
            if hi > a:
                total += 2.0 * math.pi * (w.radial_volume(hi) - w.radial_volume(a))
        return total

    @property
    def parameter(self) -> float:
        return self.intervals[0][0] if self.family == "annulus" else self.intervals[-1][1]

    def with_parameter(self, value: float) -> "RadialShape":
        items = list(self.intervals)
        if self.family == "annulus":
            items[0] = (value, items[0][1])
        else:
            items[-1] = (items[-1][0], value)
        return replace(self, intervals=tuple(items))

    def parameter_bounds(self, w: WeightParams) -> t.Tuple[float, float]:
        if self.family == "annulus":
            return 0.0, w.R
        return self.intervals[-1][0], w.R

    def boundary(self, w: WeightParams, n: int = 256) -> t.Tuple[np.ndarray, np.ndarray]:
        phi = 2.0 * np.pi * np.arange(n) / n
        radii = [edge for pair in self.intervals for edge in pair if edge > 0]
        x = np.concatenate([r * np.cos(phi) for r in radii])
        y = np.concatenate([r * np.sin(phi) for r in radii])
        return x, y

    def describe(self) -> t.Dict[str, t.Any]:
        return {"family": self.family, "intervals": [list(p) for p in self.intervals]}
