"""
Модуль для эволюции интерфейсов во времени и диагностики вращения
"""
import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from constants import TOLERANCES
from contours import Contour, area, centroid, hausdorff_distance, moment
from errors import DegenerateGeometryError, GeometryError, IntegrationAbortedError, ScenarioError
from field import QUAD, PatchPair, node_velocities, vorticity_centroid

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimulationState:
    time: float
    pair: PatchPair


@dataclass(frozen=True)
class StateDiagnostics:
    """Диагностика одного состояния"""
    time: float
    area_outer: float
    area_inner: Optional[float]
    centroid: complex
    axis_angle: Optional[float]


@dataclass(frozen=True)
class Diagnostics:
    """Временные ряды площадей, центра завихренности и угла главной оси"""
    times: np.ndarray
    areas_outer: np.ndarray
    areas_inner: Optional[np.ndarray]
    centroids: np.ndarray
    fitted_angles: np.ndarray
    measured_omega: float
    angle_fit_residual: float

    @property
    def area_drift(self) -> float:
        """Максимальный относительный дрейф площадей"""
        drift = np.max(np.abs(self.areas_outer / self.areas_outer[0] - 1))
        if self.areas_inner is not None:
            drift = max(drift, np.max(np.abs(self.areas_inner / self.areas_inner[0] - 1)))
        return float(drift)

    @property
    def centroid_drift(self) -> float:
        return float(np.max(np.abs(self.centroids - self.centroids[0])))


def _nodes(p: PatchPair) -> np.ndarray:
    if p.inner is None:
        return np.array(p.outer.samples)
    return np.concatenate([p.outer.samples, p.inner.samples])


def _rebuild(p: PatchPair, nodes: np.ndarray, time: float) -> PatchPair:
    """Пара по новым положениям узлов; нарушение геометрии прерывает интегрирование"""
    n = p.outer.n
    try:
        outer = Contour.from_samples(nodes[:n], orient=False)
        inner = None if p.inner is None else Contour.from_samples(nodes[n:], orient=False)
        pair = p.with_contours(outer, inner)
    except GeometryError as e:
        raise IntegrationAbortedError(f"t={time:.6f}: {e}") from e
    for label, contour, _ in pair.interfaces():
        speed = np.abs(contour.derivs)
        ratio = speed.max() / speed.min()
        if ratio > TOLERANCES["spacing_ratio"]:
            raise IntegrationAbortedError(f"t={time:.6f}: node spacing ratio {ratio:.1f} on {label} interface")
    return pair


def _rhs(p: PatchPair, nodes: np.ndarray, time: float) -> np.ndarray:
    pair = _rebuild(p, nodes, time)
    v_outer, v_inner = node_velocities(pair, QUAD)
    return v_outer if v_inner is None else np.concatenate([v_outer, v_inner])


def step(s: SimulationState, dt: float) -> SimulationState:
    """Один шаг классического метода Рунге–Кутты 4-го порядка для всех узлов"""
    if dt <= 0:
        raise ScenarioError(f"time step must be positive, got {dt}")
    if s.pair.is_empty:
        return SimulationState(s.time + dt, s.pair)

    x0 = _nodes(s.pair)
    t = s.time
    k1 = _rhs(s.pair, x0, t)
    k2 = _rhs(s.pair, x0 + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = _rhs(s.pair, x0 + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = _rhs(s.pair, x0 + dt * k3, t + dt)
    x1 = x0 + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return SimulationState(t + dt, _rebuild(s.pair, x1, t + dt))


def simulate(initial: SimulationState, dt: float, t_end: float, stride: int = 1) -> List[SimulationState]:
    """Интегрирование до t_end; сохраняется каждое stride-е состояние, начальное и конечное"""
    if dt <= 0 or t_end <= 0:
        raise ScenarioError(f"dt and t_end must be positive, got dt={dt}, t_end={t_end}")
    if stride < 1:
        raise ScenarioError(f"save stride must be >= 1, got {stride}")
    n_steps = int(round(t_end / dt))
    if n_steps < 1 or abs(n_steps * dt - t_end) > 1e-9 * t_end:
        raise ScenarioError(f"dt={dt} does not divide t_end={t_end}")

    logger.info(f"🔄 Simulating {n_steps} steps of dt={dt:.6g} up to t={t_end:.6g}")
    states = [initial]
    state = initial
    report_every = max(1, n_steps // 10)
    for i in range(1, n_steps + 1):
        try:
            state = step(state, dt)
        except IntegrationAbortedError as e:
            logger.error(f"Integration aborted after {i - 1} steps: {e}")
            raise
        if i % stride == 0 or i == n_steps:
            states.append(state)
        if i % report_every == 0:
            logger.debug(f"Step {i}/{n_steps}, t={state.time:.6f}")
    logger.info(f"✅ Simulation finished: {len(states)} states saved")
    return states


def _axis_angle(p: PatchPair) -> float:
    """Аргумент второго центрального момента внешней области (удвоенный угол главной оси)"""
    c = p.outer
    a = area(c)
    x = centroid(c)
    mu = np.pi * moment(c, 2) - a * x * x
    radius = c.length / (2 * np.pi)
    if abs(mu) <= TOLERANCES["circular_axis"] * abs(a) * radius ** 2:
        raise DegenerateGeometryError("outer interface is circular: principal axis undefined")
    return float(np.angle(mu))


def diagnostics(state: SimulationState) -> StateDiagnostics:
    """Площади, центр завихренности и угол главной оси одного состояния"""
    p = state.pair
    try:
        angle = _axis_angle(p) / 2
    except DegenerateGeometryError:
        angle = None
    return StateDiagnostics(
        time=state.time,
        area_outer=area(p.outer),
        area_inner=None if p.inner is None else area(p.inner),
        centroid=vorticity_centroid(p),
        axis_angle=angle,
    )


def measure_rotation(states: List[SimulationState], omega_hint: Optional[float] = None) -> Diagnostics:
    """Угловая скорость как наклон МНК развёрнутого угла главной оси

    Удвоенный угол между сохранёнными состояниями должен меняться меньше чем на π/2,
    иначе развёртка неоднозначна и возникает ValueError. При заданном omega_hint
    то же проверяется заранее по 2|Ω|Δt.
    """
    if len(states) < 3:
        raise ValueError(f"need at least 3 states, got {len(states)}")
    if states[0].pair.is_empty:
        raise DegenerateGeometryError("empty patch has no rotation")
    times = np.array([s.time for s in states])
    gap = float(np.max(np.diff(times)))
    if omega_hint is not None and 2 * abs(omega_hint) * gap >= np.pi / 2:
        raise ValueError(f"saves every {gap:.4g} are too sparse to resolve rotation at omega={omega_hint:.4g}")
    raw = np.array([_axis_angle(s.pair) for s in states])
    increments = np.angle(np.exp(1j * np.diff(raw)))
    if np.max(np.abs(increments)) >= np.pi / 2:
        raise ValueError(f"principal axis turns by up to {np.max(np.abs(increments)) / 2:.3f} rad between saves; "
                         "reduce the save stride")
    doubled = np.unwrap(raw)
    angles = doubled / 2
    slope, intercept = np.polyfit(times, angles, 1)
    residual = float(np.max(np.abs(angles - (slope * times + intercept))))
    has_inner = states[0].pair.inner is not None
    diag = Diagnostics(
        times=times,
        areas_outer=np.array([area(s.pair.outer) for s in states]),
        areas_inner=np.array([area(s.pair.inner) for s in states]) if has_inner else None,
        centroids=np.array([vorticity_centroid(s.pair) for s in states]),
        fitted_angles=angles,
        measured_omega=float(slope),
        angle_fit_residual=residual,
    )
    logger.info(f"Measured omega {diag.measured_omega:.10f}, area drift {diag.area_drift:.2e}, "
                f"centroid drift {diag.centroid_drift:.2e}")
    return diag


def period_return_error(states: List[SimulationState]) -> float:
    """Хаусдорфово расстояние между начальными и конечными интерфейсами"""
    first, last = states[0].pair, states[-1].pair
    if first.is_empty:
        return 0.0
    errors = [hausdorff_distance(first.outer, last.outer)]
    if first.inner is not None:
        errors.append(hausdorff_distance(first.inner, last.inner))
    return float(max(errors))
