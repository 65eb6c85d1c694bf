"""
Модуль для невязок твёрдого вращения и алгебры конфокальных эллиптических пар
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from constants import INNER, INSIDE, OUTER, PER_ARC_LENGTH, RAW, TOLERANCES
from contours import Contour, EllipseSpec, classify_points, sample_ellipse
from errors import (
    DegenerateConfigurationError, GeometryError, InadmissibleParametersError,
    NoRotationError,
)
from field import AUTO, PatchPair, dz_stream, node_transforms, vorticity_centroid

logger = logging.getLogger(__name__)

MINUS = "minus"
PLUS = "plus"


@dataclass(frozen=True)
class RotationCandidate:
    """Угловая скорость Ω и центр вращения; λ = 1 − 2Ω"""
    omega: float
    center: complex = 0j
    lambda_: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "omega", float(self.omega))
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "lambda_", 1.0 - 2.0 * self.omega)


@dataclass(frozen=True)
class FlierlPolvaniParams:
    """Параметры конфокальной пары: обе ветви Ω± и коэффициенты Q1"""
    Q2: float
    alpha: float
    omega_minus: float
    omega_plus: float
    Q1: float
    Q1_plus: float
    rho: float
    M: float

    def omega(self, branch: str = MINUS) -> float:
        return self.omega_minus if branch == MINUS else self.omega_plus

    def q1(self, branch: str = MINUS) -> float:
        return self.Q1 if branch == MINUS else self.Q1_plus

    def as_dict(self) -> Dict[str, float]:
        return {
            "q2": self.Q2, "alpha": self.alpha, "omega_minus": self.omega_minus,
            "omega_plus": self.omega_plus, "q1": self.Q1, "q1_plus": self.Q1_plus,
            "rho": self.rho, "M": self.M,
        }


@dataclass(frozen=True)
class ResidualReport:
    """Невязки по узлам интерфейсов; нормы вычисляются из значений"""
    values: np.ndarray
    normalization: str = PER_ARC_LENGTH
    interfaces: Tuple[str, ...] = ()
    nodes: Optional[np.ndarray] = None
    meta: Dict[str, object] = field(default_factory=dict)

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if len(self.values) else 0.0

    @property
    def l2_norm(self) -> float:
        """Дискретная L2-норма, нормированная на число узлов: sqrt(Σ v² / n), то есть RMS

        Не зависит от плотности узлов, поэтому сравнима между расчётами с разным N.
        """
        return float(np.sqrt(np.mean(self.values ** 2))) if len(self.values) else 0.0

    def passed(self, tol: float) -> bool:
        return self.sup_norm < tol

    def part(self, label: str) -> "ResidualReport":
        """Часть отчёта для одного интерфейса"""
        mask = np.array([name == label for name in self.interfaces], dtype=bool)
        nodes = None if self.nodes is None else self.nodes[mask]
        return ResidualReport(self.values[mask], self.normalization, tuple([label] * int(mask.sum())), nodes, dict(self.meta))

    @classmethod
    def combine(cls, reports: Iterable["ResidualReport"]) -> "ResidualReport":
        reports = list(reports)
        if not reports:
            return cls(np.zeros(0))
        norms = {r.normalization for r in reports}
        if len(norms) != 1:
            raise ValueError("cannot combine reports with different normalizations")
        nodes = None
        if all(r.nodes is not None for r in reports):
            nodes = np.concatenate([r.nodes for r in reports])
        return cls(
            np.concatenate([r.values for r in reports]),
            norms.pop(),
            tuple(label for r in reports for label in r.interfaces),
            nodes,
        )


# -----------------------------
# Операторы невязки
# -----------------------------

def _normalize(values: np.ndarray, c: Contour, normalization: str) -> np.ndarray:
    """per_arc_length: деление на |z′| и на эквивалентный радиус L/2π"""
    if normalization == RAW:
        return values
    if normalization == PER_ARC_LENGTH:
        return values / np.abs(c.derivs) / (c.length / (2 * np.pi))
    raise ValueError(f"unknown normalization: {normalization}")


def _check_center(p: PatchPair, omega: RotationCandidate) -> None:
    if omega.omega == 0 or p.is_empty:
        return
    try:
        center = vorticity_centroid(p)
    except GeometryError:
        return
    if abs(center - omega.center) > TOLERANCES["center_mismatch"] * p.outer.diameter:
        logger.warning(f"Rotation center {omega.center} differs from vorticity centroid {center}")


def _report(raw: np.ndarray, c: Contour, label: str, normalization: str) -> ResidualReport:
    values = _normalize(raw, c, normalization)
    return ResidualReport(np.asarray(values, dtype=float), normalization, tuple([label] * c.n), c.samples.copy())


def _interface_dz(p: PatchPair, method: str) -> List[Tuple[str, Contour, np.ndarray]]:
    """∂zΨ в узлах каждого интерфейса"""
    t = node_transforms(p, method)
    if p.inner is None:
        return [(OUTER, p.outer, t.c1_outer / 4)]
    shift = p.alpha - 1
    return [
        (OUTER, p.outer, (t.c1_outer + shift * t.c2_outer) / 4),
        (INNER, p.inner, (t.c1_inner + shift * t.c2_inner) / 4),
    ]


def _rotation_terms(c: Contour, dz: np.ndarray, center: complex) -> Tuple[np.ndarray, np.ndarray]:
    """Части невязки Re(4∂zΨ z′) и Re(2 w̄ z′), w = z − центр; невязка = первая − Ω·вторая"""
    base = np.real(4 * dz * c.derivs)
    slope = np.real(2 * np.conj(c.samples - center) * c.derivs)
    return base, slope


def residual_single(c: Contour, omega: RotationCandidate, p: PatchPair,
                    normalization: str = PER_ARC_LENGTH, method: str = AUTO) -> ResidualReport:
    """2Re(∂zΨ z′) − Ω Re(w̄ z′) в узлах интерфейса c"""
    _check_center(p, omega)
    for label, contour, dz in _interface_dz(p, method):
        if contour is c:
            base, slope = _rotation_terms(c, dz, omega.center)
            return _report((base - omega.omega * slope) / 2, c, label, normalization)
    dz = dz_stream(p, c.samples, method)
    base, slope = _rotation_terms(c, dz, omega.center)
    return _report((base - omega.omega * slope) / 2, c, "contour", normalization)


def residual_outer(p: PatchPair, omega: RotationCandidate,
                   normalization: str = PER_ARC_LENGTH, method: str = AUTO) -> ResidualReport:
    """Re((λw̄ + z̄c + (1−α)γ₂⁻ − γ₁⁺) z′) на Γ1"""
    _check_center(p, omega)
    t = node_transforms(p, method)
    z = p.outer.samples
    gamma1_plus = np.conj(z) - t.c1_outer
    gamma2_minus = np.zeros_like(z) if t.c2_outer is None else -t.c2_outer
    w = z - omega.center
    expr = omega.lambda_ * np.conj(w) + np.conj(omega.center) + (1 - p.alpha) * gamma2_minus - gamma1_plus
    return _report(np.real(expr * p.outer.derivs), p.outer, OUTER, normalization)


def residual_inner(p: PatchPair, omega: RotationCandidate,
                   normalization: str = PER_ARC_LENGTH, method: str = AUTO) -> ResidualReport:
    """Re(((α − 2Ω)w̄ + α z̄c + (1−α)γ₂⁺ − γ₁⁺) z′) на Γ2"""
    if p.inner is None:
        raise GeometryError("pair has no inner interface")
    _check_center(p, omega)
    t = node_transforms(p, method)
    z = p.inner.samples
    gamma1_plus = np.conj(z) - t.c1_inner
    gamma2_plus = np.conj(z) - t.c2_inner
    w = z - omega.center
    expr = ((p.alpha - 2 * omega.omega) * np.conj(w) + p.alpha * np.conj(omega.center)
            + (1 - p.alpha) * gamma2_plus - gamma1_plus)
    return _report(np.real(expr * p.inner.derivs), p.inner, INNER, normalization)


def residual_joint(p: PatchPair, omega: RotationCandidate,
                   normalization: str = PER_ARC_LENGTH, method: str = AUTO) -> ResidualReport:
    """Невязки обоих интерфейсов в одном отчёте"""
    reports = [residual_outer(p, omega, normalization, method)]
    if p.inner is not None:
        reports.append(residual_inner(p, omega, normalization, method))
    report = ResidualReport.combine(reports)
    report.meta["omega"] = omega.omega
    return report


def scan_omega(p: PatchPair, omegas: Iterable[float], center: complex = 0j,
               normalization: str = PER_ARC_LENGTH, method: str = AUTO) -> Tuple[float, float, np.ndarray]:
    """Минимум sup-невязки по сетке Ω: (лучшее Ω, минимум, все значения)"""
    omegas = np.asarray(list(omegas), dtype=float)
    if omegas.size == 0:
        raise ValueError("omega grid is empty")
    rows = []
    for _, c, dz in _interface_dz(p, method):
        base, slope = _rotation_terms(c, dz, center)
        scale = _normalize(np.ones(c.n), c, normalization)
        rows.append(np.abs(base[None, :] - omegas[:, None] * slope[None, :]) * scale[None, :])
    sups = np.max(np.concatenate(rows, axis=1), axis=1) / 2
    best = int(np.argmin(sups))
    logger.info(f"Omega scan over {omegas.size} values: min sup {sups[best]:.3e} at {omegas[best]:.6f}")
    return float(omegas[best]), float(sups[best]), sups


# -----------------------------
# Алгебра конфокальных пар
# -----------------------------

def kirchhoff_omega(a: float, b: float) -> float:
    """Ω = ab/(a + b)²"""
    if a <= 0 or b <= 0:
        raise GeometryError(f"semi-axes must be positive, got a={a}, b={b}")
    return a * b / (a + b) ** 2


def kirchhoff_pair(a: float, b: float, n: int, center: complex = 0j, tilt: float = 0.0) -> Tuple[PatchPair, RotationCandidate]:
    """Эллипс Кирхгофа с его угловой скоростью"""
    spec = EllipseSpec(a, b, center, tilt)
    return PatchPair.single(spec, n), RotationCandidate(kirchhoff_omega(a, b), spec.center)


def flierl_polvani(q2: float, alpha: float) -> FlierlPolvaniParams:
    """Ω± и Q1 для внутреннего эллипса с Q2 и уровнем alpha"""
    if q2 == 0:
        raise DegenerateConfigurationError("circular inner ellipse: annulus family, any omega")
    if not 0 < q2 < 1:
        raise InadmissibleParametersError(f"q2 must lie in (0, 1), got {q2}")
    if alpha == 0:
        raise NoRotationError("alpha = 0 with a non-circular ellipse admits no rotation")
    lower = -q2 ** 2 / (1 - q2 ** 2)
    if not lower < alpha < 0:
        raise InadmissibleParametersError(f"alpha={alpha} outside admissible interval ({lower}, 0)")

    omega_minus = alpha * (q2 ** 2 - 1) / (4 * q2 ** 2)
    omega_plus = alpha * (1 - q2 ** 2) / 4
    q1 = q2 * (alpha / q2 ** 2 + 1 - alpha)
    a1 = (1 + q1 ** 2) / (1 - q1 ** 2)
    b1 = -2 * q1 / (1 - q1 ** 2)
    lam = 1 - 2 * omega_minus
    return FlierlPolvaniParams(
        Q2=q2, alpha=alpha, omega_minus=omega_minus, omega_plus=omega_plus,
        Q1=q1, Q1_plus=q2, rho=4 * q2 ** 2 / (1 + q2 ** 2) ** 2, M=lam * b1 + q1 * a1,
    )


def confocal_outer(inner: EllipseSpec, q1: float) -> EllipseSpec:
    """Внешний эллипс с теми же фокусами, центром и наклоном и заданным Q1"""
    inner = inner.canonical()
    if inner.c2 <= TOLERANCES["circular_axis"] * inner.a ** 2:
        raise DegenerateConfigurationError("confocal construction needs a non-circular inner ellipse")
    if not 0 < q1 < inner.q:
        raise InadmissibleParametersError(f"q1={q1} outside (0, {inner.q})")
    s = np.sqrt(inner.c2 / q1)
    outer = EllipseSpec(s * (1 + q1) / 2, s * (1 - q1) / 2, inner.center, inner.tilt)
    inner_nodes = sample_ellipse(inner, 64).samples
    if np.any(~outer.contains(inner_nodes)) or np.any(classify_points(inner_nodes, sample_ellipse(outer, 64)) != INSIDE):
        raise GeometryError("confocal outer ellipse does not contain the inner one")
    return outer


def flierl_polvani_pair(inner: EllipseSpec, alpha: float, n: int) -> Tuple[PatchPair, FlierlPolvaniParams]:
    """Конфокальная пара, вращающаяся с Ω₋"""
    inner = inner.canonical()
    params = flierl_polvani(inner.q, alpha)
    outer = confocal_outer(inner, params.Q1)
    logger.info(f"Confocal pair: a1={outer.a:.6f}, b1={outer.b:.6f}, omega={params.omega_minus:.6f}")
    return PatchPair.from_ellipses(outer, inner, alpha, n), params


def q1_via_dirichlet(inner: EllipseSpec, alpha: float, omega: float) -> float:
    """Q1 = (2Ω − α)·2A/B + (1 − α)Q2, A = ¼(1/a² − 1/b²), B = ½(1/a² + 1/b²)"""
    inner = inner.canonical()
    if inner.c2 <= TOLERANCES["circular_axis"] * inner.a ** 2:
        raise DegenerateConfigurationError("Dirichlet route needs a non-circular inner ellipse")
    A = (1 / inner.a ** 2 - 1 / inner.b ** 2) / 4
    B = (1 / inner.a ** 2 + 1 / inner.b ** 2) / 2
    return (2 * omega - alpha) * 2 * A / B + (1 - alpha) * inner.q


def ss12_residuals(params: FlierlPolvaniParams, branch: str = MINUS) -> Tuple[float, float]:
    """Невязки двух уравнений системы на Q1, Q2, λ"""
    q1, q2, alpha = params.q1(branch), params.Q2, params.alpha
    lam = 1 - 2 * params.omega(branch)
    common = q1 + (alpha - 1) * q2
    r1 = (1 + q2 ** 2) * common - 2 * (lam + alpha - 1) * q2
    r2 = ((1 - alpha) + q1 * q2) * common - (2 * lam - 1 - (1 - alpha) ** 2) * q2
    return float(r1), float(r2)


def inner_balance_residual(params: FlierlPolvaniParams) -> float:
    """[(α − 1)Q2 + Q1](1 + Q2²) − 2(α − 2Ω₋)Q2"""
    q1, q2, alpha = params.Q1, params.Q2, params.alpha
    return float(((alpha - 1) * q2 + q1) * (1 + q2 ** 2) - 2 * (alpha - 2 * params.omega_minus) * q2)
