"""
Модуль для работы с замкнутыми кривыми и эллипсами
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Tuple, Union

import numpy as np
from scipy import fft
from scipy.spatial import cKDTree

from constants import BOUNDARY, INSIDE, MIN_NODES, OUTSIDE, TOLERANCES, WINDING_REFINE
from errors import DegenerateGeometryError, GeometryError

logger = logging.getLogger(__name__)

ComplexLike = Union[complex, float, np.ndarray]


def _as_complex_array(values, name: str) -> np.ndarray:
    """Привести вход к одномерному массиву complex128 с проверкой конечности"""
    arr = np.array(values, dtype=np.complex128).ravel()
    if not np.isfinite(arr).all():
        raise GeometryError(f"{name} contains non-finite values")
    return arr


def _check_node_count(n: int) -> None:
    """Проверить число узлов"""
    if n < MIN_NODES or n % 2:
        raise GeometryError(f"number of nodes must be even and >= {MIN_NODES}, got {n}")


def _wavenumbers(n: int) -> np.ndarray:
    """Волновые числа дискретного преобразования Фурье"""
    return fft.fftfreq(n, d=1.0 / n)


def spectral_derivative(values: np.ndarray) -> np.ndarray:
    """Спектральная производная периодических отсчётов по параметру s ∈ [0, 2π)"""
    n = len(values)
    k = _wavenumbers(n)
    # Мода Найквиста не дифференцируется
    k[n // 2] = 0.0
    return fft.ifft(1j * k * fft.fft(values))


@dataclass(frozen=True, eq=False)
class Contour:
    """Замкнутая жорданова кривая: N равноотстоящих по параметру узлов и dz/ds в них"""
    samples: np.ndarray
    derivs: np.ndarray
    ccw: bool = True

    def __post_init__(self):
        samples = _as_complex_array(self.samples, "samples")
        derivs = _as_complex_array(self.derivs, "derivs")
        if samples.shape != derivs.shape:
            raise GeometryError("samples and derivs must have the same length")
        _check_node_count(len(samples))

        scale = max(1.0, float(np.max(np.abs(samples - samples.mean()))))
        if np.min(np.abs(derivs)) <= 1e-14 * scale:
            raise GeometryError("parameterization is degenerate: dz/ds vanishes at a node")

        tree = cKDTree(np.column_stack([samples.real, samples.imag]))
        if tree.query_pairs(TOLERANCES["node_coincidence"] * scale):
            raise GeometryError("curve is not simple: two distinct nodes coincide")

        signed = float(np.sum(np.conj(samples) * derivs).imag) * np.pi / len(samples)
        if (signed > 0) != bool(self.ccw):
            raise GeometryError("orientation flag does not match the sign of the enclosed area")

        samples.setflags(write=False)
        derivs.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "derivs", derivs)
        object.__setattr__(self, "ccw", bool(self.ccw))

    @classmethod
    def from_samples(cls, points, derivs=None, orient: bool = True) -> "Contour":
        """Собрать контур из отсчётов; производные спектральные, если не заданы"""
        z = _as_complex_array(points, "points")
        _check_node_count(len(z))
        dz = spectral_derivative(z) if derivs is None else _as_complex_array(derivs, "derivs")
        signed = float(np.sum(np.conj(z) * dz).imag)
        contour = cls(z, dz, ccw=signed > 0)
        if orient and not contour.ccw:
            logger.warning(f"Clockwise contour with {len(z)} nodes reversed to counterclockwise")
            contour = contour.reversed()
        return contour

    @property
    def n(self) -> int:
        return len(self.samples)

    @property
    def step(self) -> float:
        return 2.0 * np.pi / self.n

    @property
    def params(self) -> np.ndarray:
        return self.step * np.arange(self.n)

    @cached_property
    def length(self) -> float:
        return float(np.sum(np.abs(self.derivs)) * self.step)

    @cached_property
    def diameter(self) -> float:
        z = self.samples
        return float(np.max(np.abs(z[:, None] - z[None, :])))

    @cached_property
    def _tree(self) -> cKDTree:
        return cKDTree(np.column_stack([self.samples.real, self.samples.imag]))

    def reversed(self) -> "Contour":
        """Та же кривая с противоположной ориентацией (узел 0 остаётся на месте)"""
        idx = (-np.arange(self.n)) % self.n
        return Contour(self.samples[idx], -self.derivs[idx], ccw=not self.ccw)

    def shifted(self, w: complex) -> "Contour":
        return Contour(self.samples + w, self.derivs, ccw=self.ccw)

    def scaled(self, k: float, about: complex = 0j) -> "Contour":
        if k <= 0:
            raise GeometryError("scale factor must be positive")
        return Contour(about + k * (self.samples - about), k * self.derivs, ccw=self.ccw)

    def rotated(self, phi: float, about: complex = 0j) -> "Contour":
        rot = np.exp(1j * phi)
        return Contour(about + rot * (self.samples - about), rot * self.derivs, ccw=self.ccw)

    def evaluate(self, s, order: int = 0) -> np.ndarray:
        """Тригонометрическая интерполяция кривой (или её производной порядка order) в точках s"""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        n = self.n
        coeffs = fft.fft(self.samples) / n
        k = _wavenumbers(n)
        phase = np.exp(1j * np.outer(s, k)) * (1j * k) ** order
        # Мода Найквиста делится поровну между ±n/2
        half = n // 2
        phase[:, half] = (np.cos(half * s + order * np.pi / 2)) * half ** order
        return phase @ coeffs

    def nearest_node(self, z: ComplexLike) -> Tuple[np.ndarray, np.ndarray]:
        """Расстояние до ближайшего узла и его индекс"""
        z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
        dist, idx = self._tree.query(np.column_stack([z.real, z.imag]))
        return np.asarray(dist), np.asarray(idx)


@dataclass(frozen=True)
class EllipseSpec:
    """Эллипс: полуоси a, b, центр z0 и наклон theta"""
    a: float
    b: float
    center: complex = 0j
    tilt: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)) or self.a <= 0 or self.b <= 0:
            raise GeometryError(f"semi-axes must be positive and finite, got a={self.a}, b={self.b}")
        center = complex(self.center)
        if not (np.isfinite(center.real) and np.isfinite(center.imag) and np.isfinite(self.tilt)):
            raise GeometryError("center and tilt must be finite")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "tilt", float(self.tilt))

    @property
    def q(self) -> float:
        return (self.a - self.b) / (self.a + self.b)

    @property
    def c2(self) -> float:
        return self.a ** 2 - self.b ** 2

    @property
    def focal(self) -> complex:
        """Полуфокусное расстояние в локальной системе (мнимое при b > a)"""
        return complex(np.sqrt(complex(self.c2)))

    @property
    def foci(self) -> Tuple[complex, complex]:
        rot = np.exp(1j * self.tilt)
        return (self.center + rot * self.focal, self.center - rot * self.focal)

    @property
    def tangent_a(self) -> float:
        q = self.q
        return (1 + q * q) / (1 - q * q)

    @property
    def tangent_b(self) -> float:
        q = self.q
        return -2 * q / (1 - q * q)

    @property
    def area(self) -> float:
        return float(np.pi * self.a * self.b)

    def canonical(self) -> "EllipseSpec":
        """Та же кривая с a >= b (оси меняются, наклон поворачивается на π/2)"""
        if self.a >= self.b:
            return self
        return EllipseSpec(self.b, self.a, self.center, self.tilt + np.pi / 2)

    def to_local(self, z: ComplexLike) -> ComplexLike:
        return np.exp(-1j * self.tilt) * (z - self.center)

    def to_global(self, w: ComplexLike) -> ComplexLike:
        return self.center + np.exp(1j * self.tilt) * w

    def level(self, z: ComplexLike) -> ComplexLike:
        """Значение (x/a)² + (y/b)² в локальных координатах"""
        w = self.to_local(z)
        return (np.real(w) / self.a) ** 2 + (np.imag(w) / self.b) ** 2

    def contains(self, z: ComplexLike) -> ComplexLike:
        """Строго внутри эллипса"""
        return self.level(z) < 1.0

    def scaled(self, k: float) -> "EllipseSpec":
        return EllipseSpec(k * self.a, k * self.b, k * self.center, self.tilt)


def sample_ellipse(spec: EllipseSpec, n: int) -> Contour:
    """Равноотстоящие по параметру узлы эллипса с аналитическими производными"""
    _check_node_count(n)
    s = 2.0 * np.pi * np.arange(n) / n
    rot = np.exp(1j * spec.tilt)
    z = spec.center + rot * (spec.a * np.cos(s) + 1j * spec.b * np.sin(s))
    dz = rot * (-spec.a * np.sin(s) + 1j * spec.b * np.cos(s))
    return Contour(z, dz, ccw=True)


def area(c: Contour) -> float:
    """Площадь по формуле (1/2i)∮ z̄ dz; отрицательна для обхода по часовой стрелке"""
    return float(np.sum(np.conj(c.samples) * c.derivs).imag * c.step / 2.0)


def centroid(c: Contour) -> complex:
    """Центр масс области через (1/2i)∮ |z|² dz"""
    a = area(c)
    if abs(a) <= TOLERANCES["degenerate_area"] * max(c.diameter, 1.0) ** 2:
        raise DegenerateGeometryError("centroid of a contour with near-zero area")
    first = np.sum(np.abs(c.samples) ** 2 * c.derivs) * c.step / 2j
    return complex(first / a)


def moment(c: Contour, n: int) -> complex:
    """Геометрический момент m_n = (1/π)∫_D z^n dA = (1/2πi)∮ z^n z̄ dz"""
    if n < 0:
        raise GeometryError(f"moment order must be non-negative, got {n}")
    z = c.samples
    return complex(np.sum(z ** n * np.conj(z) * c.derivs) * c.step / (2j * np.pi))


def _winding_numbers(c: Contour, z: np.ndarray) -> np.ndarray:
    """Индекс точек: квадратура (1/2πi)∮ dξ/(ξ−z); вблизи контура или при сомнении
    сумма углов ломаной по спектрально уплотнённым узлам"""
    diff = c.samples[None, :] - z[:, None]
    quad = (np.sum(c.derivs[None, :] / diff, axis=1) * c.step / (2j * np.pi)).real
    rounded = np.rint(quad)
    spacing = float(np.max(np.abs(c.derivs))) * c.step
    near = np.min(np.abs(diff), axis=1) < 2 * spacing
    unsure = (np.abs(quad - rounded) > 0.25) | near
    if np.any(unsure):
        fine_n = WINDING_REFINE * c.n
        fine = c.evaluate(2.0 * np.pi * np.arange(fine_n) / fine_n)
        fine_diff = fine[None, :] - z[unsure][:, None]
        ratio = np.roll(fine_diff, -1, axis=1) / fine_diff
        rounded[unsure] = np.rint(np.sum(np.angle(ratio), axis=1) / (2 * np.pi))
    return rounded


def classify_points(zs, c: Contour, tol: Optional[float] = None) -> np.ndarray:
    """Положение набора точек относительно контура"""
    z = _as_complex_array(zs, "points")
    if tol is None:
        tol = TOLERANCES["boundary_relative"] * c.diameter
    dist, _ = c.nearest_node(z)
    labels = np.full(len(z), OUTSIDE, dtype=object)
    on_boundary = dist < tol
    labels[on_boundary] = BOUNDARY
    rest = ~on_boundary
    if np.any(rest):
        winding = _winding_numbers(c, z[rest])
        labels[np.flatnonzero(rest)[winding != 0]] = INSIDE
    return labels


def classify(z: complex, c: Contour, tol: Optional[float] = None) -> str:
    """inside / outside / boundary"""
    return str(classify_points([z], c, tol)[0])


def distance_to_curve(points, c: Contour, refine: int = 4) -> np.ndarray:
    """Расстояние от точек до кривой: плотная интерполяция + уточнение Ньютоном"""
    p = _as_complex_array(points, "points")
    fine = 8 * c.n
    s_fine = 2.0 * np.pi * np.arange(fine) / fine
    z_fine = c.evaluate(s_fine)
    tree = cKDTree(np.column_stack([z_fine.real, z_fine.imag]))
    _, idx = tree.query(np.column_stack([p.real, p.imag]))
    s = s_fine[idx]
    for _ in range(refine):
        z0 = c.evaluate(s)
        z1 = c.evaluate(s, 1)
        z2 = c.evaluate(s, 2)
        g = np.real(np.conj(z0 - p) * z1)
        dg = np.abs(z1) ** 2 + np.real(np.conj(z0 - p) * z2)
        s = s - g / dg
    return np.abs(c.evaluate(s) - p)


def hausdorff_distance(c1: Contour, c2: Contour) -> float:
    """Расстояние Хаусдорфа между двумя кривыми"""
    return float(max(np.max(distance_to_curve(c1.samples, c2)),
                     np.max(distance_to_curve(c2.samples, c1))))
