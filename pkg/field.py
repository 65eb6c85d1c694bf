"""
Модуль для поля скоростей и производной функции тока слоистого вихревого пятна
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np

from cauchy import (
    BARYCENTRIC, _barycentric_exterior, _barycentric_interior, boundary_integral,
    boundary_values, cauchy_integral, ellipse_transform_values,
)
from constants import CLOSED_FORM, INNER, INSIDE, OUTER, QUADRATURE, TOLERANCES
from contours import (
    ComplexLike, Contour, EllipseSpec, area, centroid, classify_points,
    sample_ellipse,
)
from errors import GeometryError

logger = logging.getLogger(__name__)

AUTO = "auto"
CLOSED = CLOSED_FORM
QUAD = QUADRATURE


@dataclass(frozen=True, eq=False)
class PatchPair:
    """Завихренность 1 на D1 \\ D2 и alpha на D2; без внутреннего контура одиночное пятно"""
    outer: Optional[Contour]
    inner: Optional[Contour] = None
    alpha: float = 1.0
    outer_spec: Optional[EllipseSpec] = None
    inner_spec: Optional[EllipseSpec] = None

    def __post_init__(self):
        if self.outer is None:
            if self.inner is not None:
                raise GeometryError("an inner interface requires an outer one")
            return
        if not self.outer.ccw or (self.inner is not None and not self.inner.ccw):
            raise GeometryError("interfaces must be positively oriented")
        if self.inner is None:
            if self.alpha != 1:
                raise GeometryError("single-patch mode is represented by alpha = 1 without inner interface")
            return
        if self.alpha == 1:
            raise GeometryError("alpha = 1 leaves no vorticity jump across the inner interface")
        labels = classify_points(self.inner.samples, self.outer)
        if np.any(labels != INSIDE):
            raise GeometryError("inner interface is not strictly contained in the outer one")
        gap = float(np.min(self.outer.nearest_node(self.inner.samples)[0]))
        if gap <= TOLERANCES["containment_gap_relative"] * self.outer.diameter:
            raise GeometryError(f"interfaces nearly touch: minimal gap {gap:.3e}")

    @classmethod
    def from_ellipses(cls, outer: EllipseSpec, inner: Optional[EllipseSpec], alpha: float, n: int) -> "PatchPair":
        """Пара эллиптических интерфейсов с аналитическими метками"""
        if inner is None:
            return cls(sample_ellipse(outer, n), None, 1.0, outer, None)
        return cls(sample_ellipse(outer, n), sample_ellipse(inner, n), alpha, outer, inner)

    @classmethod
    def single(cls, shape: Union[Contour, EllipseSpec], n: Optional[int] = None) -> "PatchPair":
        """Одиночное пятно единичной завихренности"""
        if isinstance(shape, EllipseSpec):
            if n is None:
                raise GeometryError("number of nodes is required for an analytic shape")
            return cls(sample_ellipse(shape, n), None, 1.0, shape, None)
        return cls(shape)

    @classmethod
    def empty(cls) -> "PatchPair":
        """Нулевая завихренность (D1 пусто)"""
        return cls(None)

    @property
    def is_empty(self) -> bool:
        return self.outer is None

    @property
    def analytic(self) -> bool:
        if self.outer is None or self.outer_spec is None:
            return False
        return self.inner is None or self.inner_spec is not None

    def interfaces(self) -> List[Tuple[str, Contour, Optional[EllipseSpec]]]:
        """Интерфейсы в порядке (внешний, внутренний)"""
        items = []
        if self.outer is not None:
            items.append((OUTER, self.outer, self.outer_spec))
        if self.inner is not None:
            items.append((INNER, self.inner, self.inner_spec))
        return items

    def with_contours(self, outer: Contour, inner: Optional[Contour]) -> "PatchPair":
        """Та же пара с новыми контурами (аналитические метки сбрасываются)"""
        return PatchPair(outer, inner, self.alpha)

    def shifted(self, w: complex) -> "PatchPair":
        move = lambda spec: None if spec is None else EllipseSpec(spec.a, spec.b, spec.center + w, spec.tilt)
        return PatchPair(
            self.outer.shifted(w) if self.outer is not None else None,
            self.inner.shifted(w) if self.inner is not None else None,
            self.alpha, move(self.outer_spec), move(self.inner_spec),
        )

    def scaled(self, k: float) -> "PatchPair":
        grow = lambda spec: None if spec is None else spec.scaled(k)
        return PatchPair(
            self.outer.scaled(k) if self.outer is not None else None,
            self.inner.scaled(k) if self.inner is not None else None,
            self.alpha, grow(self.outer_spec), grow(self.inner_spec),
        )


@dataclass(frozen=True)
class NodeTransforms:
    """C(χ_D1) и C(χ_D2) в узлах обоих интерфейсов"""
    c1_outer: np.ndarray
    c2_outer: Optional[np.ndarray]
    c1_inner: Optional[np.ndarray]
    c2_inner: Optional[np.ndarray]


def _resolve_method(p: PatchPair, method: str) -> str:
    if method == AUTO:
        return CLOSED if p.analytic else QUAD
    if method == CLOSED and not p.analytic:
        raise GeometryError("closed forms requested for a pair without analytic tags")
    if method not in (CLOSED, QUAD):
        raise ValueError(f"unknown evaluation method: {method}")
    return method


def _transform(contour: Contour, spec: Optional[EllipseSpec], z: np.ndarray, method: str) -> np.ndarray:
    """C(χ_D)(z) одного интерфейса"""
    if method == CLOSED:
        return ellipse_transform_values(spec, z)
    values, _ = cauchy_integral(contour, z, BARYCENTRIC)
    return -values


def node_transforms(p: PatchPair, method: str = AUTO) -> NodeTransforms:
    """Преобразования Коши в узлах; квадратура использует граничные значения и барицентрическую формулу"""
    if p.is_empty:
        raise GeometryError("empty patch has no interfaces")
    method = _resolve_method(p, method)
    outer, inner = p.outer, p.inner
    if method == CLOSED:
        c1_outer = ellipse_transform_values(p.outer_spec, outer.samples)
        if inner is None:
            return NodeTransforms(c1_outer, None, None, None)
        return NodeTransforms(
            c1_outer,
            ellipse_transform_values(p.inner_spec, outer.samples),
            ellipse_transform_values(p.outer_spec, inner.samples),
            ellipse_transform_values(p.inner_spec, inner.samples),
        )

    plus1, minus1 = boundary_values(outer)
    c1_outer = -minus1
    if inner is None:
        return NodeTransforms(c1_outer, None, None, None)
    plus2, minus2 = boundary_values(inner)
    c1_inner = np.conj(inner.samples) - _barycentric_interior(outer, inner.samples, plus1)
    c2_outer = -_barycentric_exterior(inner, outer.samples, minus2)
    return NodeTransforms(c1_outer, c2_outer, c1_inner, -minus2)


def node_dz_stream(p: PatchPair, method: str = AUTO) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """∂zΨ в узлах внешнего и внутреннего интерфейсов"""
    t = node_transforms(p, method)
    if p.inner is None:
        return t.c1_outer / 4, None
    shift = p.alpha - 1
    return (t.c1_outer + shift * t.c2_outer) / 4, (t.c1_inner + shift * t.c2_inner) / 4


def node_velocities(p: PatchPair, method: str = AUTO) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """Скорость v = 2i·conj(∂zΨ) в узлах"""
    outer, inner = node_dz_stream(p, method)
    return 2j * np.conj(outer), None if inner is None else 2j * np.conj(inner)


def _scalar_or_array(z: ComplexLike, values: np.ndarray):
    return complex(values[0]) if np.ndim(z) == 0 else values


def dz_stream(p: PatchPair, z: ComplexLike, method: str = AUTO):
    """∂zΨ(z) = ¼[C(χ_D1)(z) + (alpha − 1)C(χ_D2)(z)]"""
    zs = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    if p.is_empty:
        return _scalar_or_array(z, np.zeros(zs.shape, dtype=np.complex128))
    method = _resolve_method(p, method)
    total = _transform(p.outer, p.outer_spec, zs, method)
    if p.inner is not None:
        total = total + (p.alpha - 1) * _transform(p.inner, p.inner_spec, zs, method)
    return _scalar_or_array(z, total / 4)


def velocity(p: PatchPair, z: ComplexLike, method: str = AUTO):
    """Комплексная скорость u1 + i·u2 = 2i·conj(∂zΨ)"""
    dz = dz_stream(p, z, method)
    return 2j * np.conj(dz)


def total_vorticity(p: PatchPair) -> float:
    """Полная завихренность |D1| + (alpha − 1)|D2|"""
    if p.is_empty:
        return 0.0
    total = area(p.outer)
    if p.inner is not None:
        total += (p.alpha - 1) * area(p.inner)
    return float(total)


def vorticity_centroid(p: PatchPair) -> complex:
    """Центр масс завихренности X = ∫ω z dA / ∫ω dA"""
    first = area(p.outer) * centroid(p.outer)
    if p.inner is not None:
        first += (p.alpha - 1) * area(p.inner) * centroid(p.inner)
    total = total_vorticity(p)
    if abs(total) <= TOLERANCES["degenerate_area"]:
        raise GeometryError("total vorticity vanishes; centroid undefined")
    return complex(first / total)


def _log_potential(c: Contour, z: np.ndarray) -> np.ndarray:
    """∫_D log|ξ − z| dA = Re (1/2i)∮ (ξ̄ − z̄)(log|ξ − z| − ½) dξ"""
    diff = c.samples[None, :] - z[:, None]
    dist = np.abs(diff)
    with np.errstate(divide="ignore", invalid="ignore"):
        integrand = np.where(dist > 0, np.conj(diff) * (np.log(dist) - 0.5), 0.0)
    return np.real(integrand @ c.derivs * c.step / 2j)


def _grid_potential(p: PatchPair, z: np.ndarray, grid_n: int) -> np.ndarray:
    """Двумерная квадратура средних точек по охватывающему прямоугольнику с маской"""
    nodes = p.outer.samples
    lo = complex(nodes.real.min(), nodes.imag.min())
    hi = complex(nodes.real.max(), nodes.imag.max())
    xs = np.linspace(lo.real, hi.real, grid_n + 1)
    ys = np.linspace(lo.imag, hi.imag, grid_n + 1)
    xm = (xs[:-1] + xs[1:]) / 2
    ym = (ys[:-1] + ys[1:]) / 2
    cells = (xm[None, :] + 1j * ym[:, None]).ravel()
    cell_area = (xs[1] - xs[0]) * (ys[1] - ys[0])
    omega = np.where(classify_points(cells, p.outer) == INSIDE, 1.0, 0.0)
    if p.inner is not None:
        omega[classify_points(cells, p.inner) == INSIDE] = p.alpha
    keep = omega != 0
    cells, omega = cells[keep], omega[keep]
    out = np.empty(z.shape)
    for i, target in enumerate(z):
        dist = np.abs(cells - target)
        dist[dist == 0] = np.sqrt(cell_area) / 4
        out[i] = np.sum(omega * np.log(dist)) * cell_area
    return out


def stream_value(p: PatchPair, z: ComplexLike, method: str = "boundary", grid_n: int = 400):
    """Логарифмический потенциал Ψ(z) = (1/2π)∫ ω(ξ) log|z − ξ| dA(ξ)"""
    zs = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    if p.is_empty:
        values = np.zeros(zs.shape)
    elif method == "boundary":
        values = _log_potential(p.outer, zs)
        if p.inner is not None:
            values = values + (p.alpha - 1) * _log_potential(p.inner, zs)
    elif method == "grid":
        values = _grid_potential(p, zs, grid_n)
    else:
        raise ValueError(f"unknown potential method: {method}")
    values = values / (2 * np.pi)
    return float(values[0]) if np.ndim(z) == 0 else values


def circulation(p: PatchPair, path: Contour) -> float:
    """Циркуляция ∮ v·dl = Re ∮ conj(v) dz по пробному контуру"""
    v = velocity(p, path.samples)
    return float(np.real(np.sum(np.conj(v) * path.derivs)) * path.step)


def flux(p: PatchPair, path: Contour) -> float:
    """Поток ∮ v·n dl = Im ∮ conj(v) dz через пробный контур"""
    v = velocity(p, path.samples)
    return float(np.imag(np.sum(np.conj(v) * path.derivs)) * path.step)
