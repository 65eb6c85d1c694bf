"""
Модуль для обратных задач: восстановление области по данным Коши и проверки рядов Лорана
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from cauchy import _root_factor, boundary_values
from constants import INSIDE
from contours import ComplexLike, Contour, EllipseSpec, classify
from errors import (
    DegenerateConfigurationError, GeometryError, InadmissibleParametersError,
)

logger = logging.getLogger(__name__)

EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class AffineGammaPlus:
    """γ⁺(z) = q(z − z0) + z̄0"""
    q: complex
    anchor: complex = 0j
    fit_residual: float = 0.0

    def __post_init__(self):
        if abs(self.q) >= 1:
            raise InadmissibleParametersError(f"|q| = {abs(self.q)} >= 1: no Jordan curve has this Cauchy data")
        object.__setattr__(self, "q", complex(self.q))
        object.__setattr__(self, "anchor", complex(self.anchor))

    def __call__(self, z: ComplexLike) -> ComplexLike:
        return self.q * (z - self.anchor) + np.conj(self.anchor)


@dataclass(frozen=True)
class QuarticCurve:
    """Линия уровня |w|⁴ + a|w|² + 2b Re w = c, w = z − z1"""
    a: float
    b: float
    c: float
    center: complex = 0j

    def form(self, z: ComplexLike) -> ComplexLike:
        w = np.asarray(z) - self.center
        r2 = np.abs(w) ** 2
        return r2 * r2 + self.a * r2 + 2 * self.b * np.real(w) - self.c


@dataclass(frozen=True)
class QuarticTrace:
    """Точки линии уровня по лучам; uniform: одинаковое число корней на каждом луче"""
    branches: List[np.ndarray]
    uniform: bool


@dataclass(frozen=True)
class SeriesCheck:
    c1sq: float
    c2sq: float
    d: float

    @property
    def q(self) -> float:
        """Отношение c1²/c2²"""
        if self.c2sq == 0:
            raise DegenerateConfigurationError("ratio undefined for c2 = 0")
        return self.c1sq / self.c2sq


# -----------------------------
# Аффинные данные Коши → эллипс
# -----------------------------

def ellipse_from_affine(g: AffineGammaPlus, domain_area: float) -> EllipseSpec:
    """Эллипс с Q = |q|, наклоном −arg(q)/2, центром z0 и площадью domain_area"""
    if domain_area <= 0:
        raise GeometryError(f"area must be positive, got {domain_area}")
    Q = abs(g.q)
    tilt = -np.angle(g.q) / 2 if Q > 0 else 0.0
    ab = domain_area / np.pi
    a = np.sqrt(ab * (1 + Q) / (1 - Q))
    return EllipseSpec(a, ab / a, g.anchor, tilt)


def fit_affine_gamma_plus(c: Contour) -> AffineGammaPlus:
    """Подгонка γ⁺ в узлах аффинной функцией qz + K методом наименьших квадратов"""
    plus, _ = boundary_values(c)
    z = c.samples if c.ccw else c.reversed().samples
    design = np.column_stack([z, np.ones_like(z)])
    (q, k), *_ = np.linalg.lstsq(design, plus, rcond=None)
    residual = float(np.max(np.abs(design @ np.array([q, k]) - plus)))
    if abs(q) >= 1:
        raise InadmissibleParametersError(f"fitted coefficient |q| = {abs(q)} >= 1")
    anchor = (np.conj(k) + np.conj(q) * k) / (1 - abs(q) ** 2)
    logger.debug(f"Affine fit of gamma_plus: q={q}, anchor={anchor}, residual={residual:.3e}")
    return AffineGammaPlus(complex(q), complex(anchor), residual)


# -----------------------------
# Рациональные внешние данные → квартика
# -----------------------------

def quartic_from_rational(a: float, b: float, z1: complex, calibration_point: complex) -> QuarticCurve:
    """Квартика для γ⁻ = a/(z − z1) + b/(z − z1)², постоянная c из точки калибровки"""
    w = complex(calibration_point) - complex(z1)
    r2 = abs(w) ** 2
    c = r2 * r2 + a * r2 + 2 * b * w.real
    # ноль, потерянный при вычитании, восстанавливается
    if abs(c) <= 8 * EPS * max(r2 * r2, abs(a) * r2, abs(2 * b * w.real)):
        c = 0.0
    curve = QuarticCurve(float(a), float(b), float(c), complex(z1))
    trace_quartic(curve, 64)
    return curve


def trace_quartic(curve: QuarticCurve, n: int = 256) -> QuarticTrace:
    """Положительные корни ρ⁴ + aρ² + 2bρ cos φ − c = 0 на n лучах"""
    angles = 2 * np.pi * np.arange(n) / n
    per_ray: List[np.ndarray] = []
    for phi in angles:
        roots = np.roots([1.0, 0.0, curve.a, 2 * curve.b * np.cos(phi), -curve.c])
        scale = max(1.0, float(np.max(np.abs(roots))))
        real = (np.abs(roots.imag) <= 1e-9 * scale) & (roots.real > 1e-6 * scale)
        rho = np.sort(roots[real].real)
        for _ in range(2):
            f = rho ** 4 + curve.a * rho ** 2 + 2 * curve.b * np.cos(phi) * rho - curve.c
            df = 4 * rho ** 3 + 2 * curve.a * rho + 2 * curve.b * np.cos(phi)
            safe = np.abs(df) > 0
            rho[safe] = rho[safe] - f[safe] / df[safe]
        per_ray.append(rho)

    counts = np.array([len(r) for r in per_ray])
    if counts.max() == 0:
        raise GeometryError("quartic level set is empty")
    branches = []
    for j in range(int(counts.max())):
        points = [curve.center + r[j] * np.exp(1j * phi) for phi, r in zip(angles, per_ray) if len(r) > j]
        branches.append(np.array(points))
    uniform = bool(np.all(counts == counts[0]))
    if not uniform:
        logger.warning(f"Quartic level set is not star-shaped about its center: {counts.min()}..{counts.max()} roots per ray")
    return QuarticTrace(branches, uniform)


# -----------------------------
# Ряды Лорана
# -----------------------------

def laurent_moments(c: Contour, z1: complex, n_max: int) -> List[complex]:
    """a_n = (1/π)∫_D (ξ − z1)^n dA, n = 0..n_max; γ⁻(z) = −Σ a_n/(z − z1)^(n+1)"""
    if classify(z1, c) != INSIDE:
        raise GeometryError(f"expansion center {z1} is not inside the contour")
    w = c.samples - z1
    sign = 1.0 if c.ccw else -1.0
    weights = np.conj(c.samples) * c.derivs * c.step / (2j * np.pi) * sign
    return [complex(np.sum(w ** k * weights)) for k in range(n_max + 1)]


def laurent_series(coeffs: List[complex], z1: complex, z: ComplexLike) -> ComplexLike:
    """Усечённый ряд γ⁻(z) = −Σ a_n/(z − z1)^(n+1)"""
    w = np.asarray(z, dtype=np.complex128) - z1
    total = np.zeros_like(w)
    power = 1 / w
    for a in coeffs:
        total = total - a * power
        power = power / w
    return complex(total) if np.ndim(total) == 0 else total


def series_coefficients(s: SeriesCheck) -> Tuple[float, float, float]:
    """Коэффициенты при 1/w³, 1/w⁵, 1/w⁷ в замкнутом виде"""
    c1, c2, d = s.c1sq, s.c2sq, s.d
    d2 = d * d
    c3 = d * (0.75 * c1 - 0.75 * c2 - d2)
    c5 = d / 8 * (2 * c1 ** 2 - 20 * c2 * d2 - 5 * c2 ** 2 - 8 * d2 ** 2 + 4 * c1 * d2 + 3 * c1 * c2)
    c7 = d / 64 * (
        -64 * d2 ** 3 - 336 * c2 * d2 ** 2 - 280 * c2 ** 2 * d2 - 35 * c2 ** 3
        + 32 * c1 * d2 ** 2 + 80 * c1 * c2 * d2 + 20 * c1 * c2 ** 2
        + 8 * c1 ** 2 * d2 + 6 * c1 ** 2 * c2 + 9 * c1 ** 3
    )
    return float(c3), float(c5), float(c7)


def _half_focal(c_sq: float) -> complex:
    return complex(np.sqrt(complex(c_sq)))


def _branch_function(w: np.ndarray, c_sq: float) -> np.ndarray:
    """F(w) = 1/(w(1 + √(1 − c²/w²)))"""
    return 1 / (w * (1 + _root_factor(w, _half_focal(c_sq))))


def series_function(s: SeriesCheck, w: ComplexLike) -> ComplexLike:
    """S(w) = 2d F1(w) + (F2(w + d) + F2(−w + d))(w − c1² F1(w))"""
    w = np.asarray(w, dtype=np.complex128)
    f1 = _branch_function(w, s.c1sq)
    pair = _branch_function(w + s.d, s.c2sq) + _branch_function(-w + s.d, s.c2sq)
    return 2 * s.d * f1 + pair * (w - s.c1sq * f1)


def series_expansion_numeric(s: SeriesCheck, radius: float, k_max: int = 8, n: int = 1024) -> Dict[int, complex]:
    """Коэффициенты при 1/w^k, k = 1..k_max, как среднее S(w)w^k по окружности |w| = radius"""
    enclosing = abs(s.d) + max(np.sqrt(abs(s.c1sq)), np.sqrt(abs(s.c2sq)))
    if radius <= enclosing:
        raise InadmissibleParametersError(f"radius {radius} does not enclose all branch cuts (needs > {enclosing})")
    w = radius * np.exp(2j * np.pi * np.arange(n) / n)
    values = series_function(s, w)
    return {k: complex(np.mean(values * w ** k)) for k in range(1, k_max + 1)}


def series_coefficients_numeric(s: SeriesCheck, radius: float, n: int = 1024) -> Tuple[float, float, float]:
    """Коэффициенты при 1/w³, 1/w⁵, 1/w⁷ квадратурой; чётные степени и 1/w должны исчезать"""
    coeffs = series_expansion_numeric(s, radius, 8, n)
    size = float(np.max(np.abs(series_function(s, radius * np.exp(2j * np.pi * np.arange(n) / n)))))
    for k in (1, 2, 4, 6, 8):
        if abs(coeffs[k]) > 1e-11 * max(1.0, size) * radius ** k:
            raise InadmissibleParametersError(
                f"coefficient of 1/w^{k} does not vanish ({abs(coeffs[k]):.3e}); increase radius or n")
    return float(coeffs[3].real), float(coeffs[5].real), float(coeffs[7].real)
