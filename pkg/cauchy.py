"""
Модуль для преобразований Коши областей и односторонних интегралов γ±
"""
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from constants import BOUNDARY, CLOSED_FORM, INSIDE, OUTSIDE, QUADRATURE, TOLERANCES
from contours import ComplexLike, Contour, EllipseSpec, classify_points
from errors import BranchCutError, SideError

logger = logging.getLogger(__name__)

# Квадратура: прямое правило трапеций или барицентрическая формула Коши
DIRECT = "direct"
BARYCENTRIC = "barycentric"


@dataclass(frozen=True)
class TransformValue:
    """Значение C(χ_D)(z) со стороной точки и способом вычисления"""
    value: complex
    side: str
    method: str


# -----------------------------
# Замкнутые формулы: круг и эллипс
# -----------------------------

def cauchy_disc(center: complex, r: float, z: complex) -> TransformValue:
    """C(χ_D) круга: z̄ − z̄0 в замкнутом круге, r²/(z − z0) снаружи"""
    if r <= 0:
        raise ValueError(f"radius must be positive, got {r}")
    dz = complex(z) - complex(center)
    dist = abs(dz)
    if abs(dist - r) <= TOLERANCES["boundary_relative"] * r:
        return TransformValue(dz.conjugate(), BOUNDARY, CLOSED_FORM)
    if dist < r:
        return TransformValue(dz.conjugate(), INSIDE, CLOSED_FORM)
    return TransformValue(r * r / dz, OUTSIDE, CLOSED_FORM)


def _root_factor(w: np.ndarray, focal: complex) -> np.ndarray:
    """√(1 − c²/w²) в виде √(1 − c/w)·√(1 + c/w): разрез только на фокальном отрезке, → 1 на бесконечности"""
    return np.sqrt(1 - focal / w) * np.sqrt(1 + focal / w)


def _focal_distance(spec: EllipseSpec, z: np.ndarray) -> np.ndarray:
    """Расстояние от точек до фокального отрезка [−c, c] в локальной системе"""
    w = spec.to_local(z)
    c = spec.focal
    t = np.clip(np.real(w * np.conj(c)) / abs(c) ** 2, -1.0, 1.0)
    return np.abs(w - t * c)


def ellipse_exterior(spec: EllipseSpec, z: ComplexLike) -> ComplexLike:
    """Внешнее значение C(χ_D)(z) = e^{−iθ}·2ab/(w(1 + √(1 − c²/w²))), w = e^{−iθ}(z − z0)"""
    w = spec.to_local(np.asarray(z, dtype=np.complex128))
    value = 2 * spec.a * spec.b / (w * (1 + _root_factor(w, spec.focal)))
    return np.exp(-1j * spec.tilt) * value


def ellipse_exterior_derivative(spec: EllipseSpec, z: ComplexLike) -> ComplexLike:
    """Производная внешнего значения по z: F′(w) = −F(w)/(w·R(w))"""
    w = spec.to_local(np.asarray(z, dtype=np.complex128))
    root = _root_factor(w, spec.focal)
    value = 2 * spec.a * spec.b / (w * (1 + root))
    return np.exp(-2j * spec.tilt) * (-value / (w * root))


def ellipse_interior(spec: EllipseSpec, z: ComplexLike) -> ComplexLike:
    """Внутреннее значение C(χ_D)(z) = (z̄ − z̄0) − Q e^{−2iθ}(z − z0)"""
    dz = np.asarray(z, dtype=np.complex128) - spec.center
    return np.conj(dz) - spec.q * np.exp(-2j * spec.tilt) * dz


def ellipse_gamma_plus(spec: EllipseSpec, z: ComplexLike) -> ComplexLike:
    """γ⁺(z) = Q e^{−2iθ}(z − z0) + z̄0"""
    dz = np.asarray(z, dtype=np.complex128) - spec.center
    return spec.q * np.exp(-2j * spec.tilt) * dz + np.conj(spec.center)


def ellipse_gamma_minus(spec: EllipseSpec, z: ComplexLike) -> ComplexLike:
    """γ⁻(z) = −C(χ_D)(z) снаружи эллипса"""
    return -ellipse_exterior(spec, z)


def ellipse_sides(spec: EllipseSpec, z: ComplexLike) -> np.ndarray:
    """Сторона точек относительно эллипса по уравнению кривой"""
    level = np.atleast_1d(spec.level(np.asarray(z, dtype=np.complex128)))
    labels = np.full(level.shape, OUTSIDE, dtype=object)
    labels[level < 1] = INSIDE
    labels[np.abs(level - 1) <= TOLERANCES["boundary_relative"]] = BOUNDARY
    return labels


def ellipse_transform_values(spec: EllipseSpec, z: ComplexLike) -> np.ndarray:
    """Векторное C(χ_D) эллипса: внутренняя формула в замкнутой области, внешняя снаружи"""
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    labels = ellipse_sides(spec, z)
    out = np.empty(z.shape, dtype=np.complex128)
    outside = labels == OUTSIDE
    out[~outside] = ellipse_interior(spec, z[~outside])
    if np.any(outside):
        out[outside] = ellipse_exterior(spec, z[outside])
    return out


def cauchy_ellipse(spec: EllipseSpec, z: complex) -> TransformValue:
    """C(χ_D)(z) эллипса в замкнутой форме"""
    z = complex(z)
    if spec.c2 != 0 and _focal_distance(spec, np.array([z]))[0] < TOLERANCES["focal_segment"]:
        raise BranchCutError(f"evaluation point {z} lies on the focal segment of the ellipse")
    side = str(ellipse_sides(spec, z)[0])
    value = complex(ellipse_transform_values(spec, z)[0])
    return TransformValue(value, side, CLOSED_FORM)


def schwarz_quadratic_residual(spec: EllipseSpec, z: complex) -> complex:
    """Невязка квадратного уравнения c²γ⁻² + 4ab·w·γ⁻ + 4a²b² = 0 в локальной системе эллипса"""
    z = complex(z)
    if spec.c2 != 0 and _focal_distance(spec, np.array([z]))[0] < TOLERANCES["focal_segment"]:
        raise BranchCutError(f"evaluation point {z} lies on the focal segment of the ellipse")
    if spec.level(z) <= 1:
        raise SideError(f"point {z} is not outside the ellipse")
    w = spec.to_local(z)
    local = EllipseSpec(spec.a, spec.b)
    g = complex(-ellipse_exterior(local, w))
    ab = spec.a * spec.b
    return spec.c2 * g * g + 4 * ab * w * g + 4 * ab * ab


# -----------------------------
# Квадратуры для произвольного контура
# -----------------------------

def _positive(c: Contour) -> Contour:
    return c if c.ccw else c.reversed()


def self_kernel(c: Contour) -> np.ndarray:
    """Матрица (ξ̄_k − ξ̄_j)/(ξ_k − ξ_j), на диагонали предел conj(ξ′_j)/ξ′_j"""
    z = c.samples
    diff = z[None, :] - z[:, None]
    np.fill_diagonal(diff, 1.0)
    kernel = np.conj(diff) / diff
    np.fill_diagonal(kernel, np.conj(c.derivs) / c.derivs)
    return kernel


def boundary_integral(c: Contour) -> np.ndarray:
    """I(ξ_j) = (1/2πi)∮ (ξ̄ − ξ̄_j)/(ξ − ξ_j) dξ во всех узлах"""
    c = _positive(c)
    return self_kernel(c) @ c.derivs * c.step / (2j * np.pi)


def principal_value(c: Contour) -> np.ndarray:
    """Главное значение (1/2πi)⨍ ξ̄/(ξ − ξ_j) dξ по узлам с нечётным сдвигом и шагом 2h"""
    c = _positive(c)
    n = c.n
    z = c.samples
    offsets = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
    diff = z[None, :] - z[:, None]
    np.fill_diagonal(diff, 1.0)
    terms = np.where(offsets % 2 == 1, np.conj(z)[None, :] * c.derivs[None, :] / diff, 0.0)
    return terms.sum(axis=1) * 2 * c.step / (2j * np.pi)


def boundary_values(c: Contour) -> Tuple[np.ndarray, np.ndarray]:
    """γ⁺ и γ⁻ во всех узлах контура"""
    c = _positive(c)
    integral = boundary_integral(c)
    return integral + np.conj(c.samples), integral


def _direct_integral(c: Contour, z: np.ndarray) -> np.ndarray:
    """Правило трапеций для (1/2πi)∮ (ξ̄ − z̄)/(ξ − z) dξ в точках вне узлов"""
    diff = c.samples[None, :] - z[:, None]
    return (np.conj(diff) / diff) @ c.derivs * c.step / (2j * np.pi)


def _node_integral(c: Contour, z: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """То же для точек у узла idx: диагональный член заменён пределом"""
    diff = c.samples[None, :] - z[:, None]
    rows = np.arange(len(z))
    diff[rows, idx] = 1.0
    kernel = np.conj(diff) / diff
    kernel[rows, idx] = np.conj(c.derivs[idx]) / c.derivs[idx]
    return kernel @ c.derivs * c.step / (2j * np.pi)


def _barycentric_interior(c: Contour, z: np.ndarray, gamma_plus_nodes: np.ndarray) -> np.ndarray:
    """γ⁺ внутри: Σ g_k u_k / Σ u_k, u_k = ξ′_k/(ξ_k − z)"""
    weights = c.derivs[None, :] / (c.samples[None, :] - z[:, None])
    return (weights @ gamma_plus_nodes) / weights.sum(axis=1)


def _barycentric_exterior(c: Contour, z: np.ndarray, gamma_minus_nodes: np.ndarray) -> np.ndarray:
    """γ⁻ снаружи: Σ g_k u_k / (Σ u_k − 2πi/h)"""
    weights = c.derivs[None, :] / (c.samples[None, :] - z[:, None])
    return (weights @ gamma_minus_nodes) / (weights.sum(axis=1) - 2j * np.pi / c.step)


def cauchy_integral(c: Contour, z: ComplexLike, method: str = DIRECT) -> Tuple[np.ndarray, np.ndarray]:
    """I(z) = (1/2πi)∮ (ξ̄ − z̄)/(ξ − z) dξ и стороны точек; C(χ_D)(z) = −I(z) везде"""
    c = _positive(c)
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    labels = classify_points(z, c)
    out = np.empty(z.shape, dtype=np.complex128)

    on_boundary = labels == BOUNDARY
    if np.any(on_boundary):
        _, idx = c.nearest_node(z[on_boundary])
        out[on_boundary] = _node_integral(c, z[on_boundary], idx)

    off = ~on_boundary
    if not np.any(off):
        return out, labels
    if method == DIRECT:
        out[off] = _direct_integral(c, z[off])
    elif method == BARYCENTRIC:
        plus, minus = boundary_values(c)
        inside = labels == INSIDE
        outside = labels == OUTSIDE
        if np.any(inside):
            out[inside] = _barycentric_interior(c, z[inside], plus) - np.conj(z[inside])
        if np.any(outside):
            out[outside] = _barycentric_exterior(c, z[outside], minus)
    else:
        raise ValueError(f"unknown quadrature method: {method}")
    return out, labels


def cauchy_transform(c: Contour, z: complex, method: str = DIRECT) -> TransformValue:
    """C(χ_D)(z) произвольной области квадратурой по границе"""
    values, labels = cauchy_integral(c, z, method)
    return TransformValue(complex(-values[0]), str(labels[0]), QUADRATURE)


def gamma_plus(c: Contour, z: complex, method: str = DIRECT) -> complex:
    """γ⁺(z) = (1/2πi)∮ (ξ̄ − z̄)/(ξ − z) dξ + z̄ для z внутри или в узле"""
    values, labels = cauchy_integral(c, z, method)
    if labels[0] == OUTSIDE:
        raise SideError(f"gamma_plus requested at exterior point {z}")
    return complex(values[0] + np.conj(complex(z)))


def gamma_minus(c: Contour, z: complex, method: str = DIRECT) -> complex:
    """γ⁻(z) = (1/2πi)∮ (ξ̄ − z̄)/(ξ − z) dξ для z снаружи или в узле"""
    values, labels = cauchy_integral(c, z, method)
    if labels[0] == INSIDE:
        raise SideError(f"gamma_minus requested at interior point {z}")
    return complex(values[0])


def jump_residual(c: Contour) -> float:
    """sup |γ⁺ − γ⁻ − z̄| по узлам: γ⁺ из регуляризованной квадратуры, γ⁻ из главного значения"""
    c = _positive(c)
    plus, _ = boundary_values(c)
    minus = principal_value(c) - np.conj(c.samples) / 2
    return float(np.max(np.abs(plus - minus - np.conj(c.samples))))
