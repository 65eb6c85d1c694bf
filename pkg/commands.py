"""
Модуль для команд CLI: проверка, моделирование, решение, преобразование Коши и обход сетки параметров
"""
import logging
from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from cauchy import TransformValue, cauchy_disc, cauchy_ellipse
from constants import EXIT_CODES, INNER, OUTER, PER_ARC_LENGTH, TOLERANCES
from contours import EllipseSpec
from errors import (
    ConvergenceError, DegenerateGeometryError, GeometryError, ScenarioError, VStateError,
)
from evolve import SimulationState, diagnostics, measure_rotation, period_return_error, simulate
from field import PatchPair, vorticity_centroid
from outputs import (
    dump_scenario, frame_bounds, report_summary, write_csv, write_json, write_residuals, write_svg,
)
from rotation import (
    FlierlPolvaniParams, RotationCandidate, flierl_polvani, flierl_polvani_pair,
    kirchhoff_omega, residual_joint,
)
from scenario import Scenario
from solver import DEFAULT_K_MAX, OuterAnsatz, continuation, default_ansatz, solve_outer

logger = logging.getLogger(__name__)


def _out_dir(scenario: Optional[Scenario], out_dir: Optional[str]) -> Path:
    if out_dir is not None:
        return Path(out_dir)
    return Path(scenario.outputs.dir)


def _is_circle(spec: EllipseSpec) -> bool:
    return abs(spec.a - spec.b) <= TOLERANCES["circular_axis"] * max(spec.a, spec.b)


def build_pair(scenario: Scenario) -> Tuple[PatchPair, Optional[FlierlPolvaniParams]]:
    """Пара из сценария; без внешней геометрии строится конфокальная пара по внутреннему эллипсу"""
    if scenario.outer is None:
        inner = scenario.inner_spec()
        if inner is None:
            raise ScenarioError("outer geometry is required unless an inner ellipse defines a confocal pair")
        return flierl_polvani_pair(inner, scenario.alpha, scenario.numerics.n)
    return scenario.to_pair(), None


def resolve_rotation(scenario: Scenario, pair: PatchPair,
                     params: Optional[FlierlPolvaniParams] = None) -> RotationCandidate:
    """Ω из сценария; "auto": по формулам Кирхгофа или конфокальной пары"""
    center = vorticity_centroid(pair)
    if scenario.omega != "auto":
        return RotationCandidate(float(scenario.omega), center)
    if params is not None:
        return RotationCandidate(params.omega_minus, center)

    outer, inner = scenario.outer_spec(), scenario.inner_spec()
    if outer is None or (scenario.inner is not None and inner is None):
        raise ScenarioError("omega 'auto' needs ellipse geometry")
    if inner is None:
        return RotationCandidate(kirchhoff_omega(outer.a, outer.b), center)
    if _is_circle(inner):
        if _is_circle(outer):
            logger.info("Concentric circles rotate with any omega; using 0")
            return RotationCandidate(0.0, center)
        raise ScenarioError("omega 'auto' is undefined for a circle inside a non-circular ellipse")
    inner = inner.canonical()
    return RotationCandidate(flierl_polvani(inner.q, scenario.alpha).omega_minus, center)


def cmd_verify(scenario: Scenario, out_dir: Optional[str] = None) -> int:
    """Невязки вращения на всех интерфейсах; код 0, если sup < tol"""
    pair, params = build_pair(scenario)
    omega = resolve_rotation(scenario, pair, params)
    report = residual_joint(pair, omega, PER_ARC_LENGTH, scenario.numerics.method)
    tol = scenario.numerics.tol
    passed = report.passed(tol)

    out = _out_dir(scenario, out_dir)
    formats = scenario.outputs.formats
    if "csv" in formats:
        write_residuals(out / "residuals.csv", report)
    if "json" in formats:
        summary = report_summary(report)
        summary.update(name=scenario.name, omega=omega.omega, center=omega.center, tol=tol, passed=passed)
        if params is not None:
            summary["params"] = params.as_dict()
        write_json(out / "verify.json", summary)
    if "svg" in formats:
        write_svg(out / "pair.svg", [c for _, c, _ in pair.interfaces()], scenario.name or "")

    if passed:
        logger.info(f"✅ Rotation verified: omega={omega.omega:.12g}, sup {report.sup_norm:.3e} < {tol:g}")
        return EXIT_CODES["ok"]
    logger.warning(f"Residual check failed: omega={omega.omega:.12g}, sup {report.sup_norm:.3e} >= {tol:g}")
    return EXIT_CODES["residual_failed"]


def cmd_simulate(scenario: Scenario, out_dir: Optional[str] = None) -> int:
    """Эволюция, снимки состояний и временные ряды диагностики"""
    numerics = scenario.numerics
    if numerics.dt is None or numerics.t_end is None:
        raise ScenarioError("simulation needs numerics.dt and numerics.t_end")
    pair, params = build_pair(scenario)
    try:
        omega_hint: Optional[float] = resolve_rotation(scenario, pair, params).omega
    except VStateError:
        omega_hint = None
    states = simulate(SimulationState(0.0, pair), numerics.dt, numerics.t_end, scenario.outputs.stride)

    measured = None
    angles: List[Optional[float]] = [diagnostics(s).axis_angle for s in states]
    try:
        diag = measure_rotation(states, omega_hint)
        measured = diag.measured_omega
        angles = list(diag.fitted_angles)
    except (DegenerateGeometryError, ValueError) as e:
        logger.info(f"Rotation not measured: {e}")

    rows = []
    for state, angle in zip(states, angles):
        d = diagnostics(state)
        rows.append((d.time, d.area_outer, d.area_inner, d.centroid.real, d.centroid.imag, angle, measured))

    out = _out_dir(scenario, out_dir)
    formats = scenario.outputs.formats
    if "csv" in formats:
        write_csv(out / "diagnostics.csv", "diagnostics", rows)
    if "json" in formats:
        write_json(out / "simulation.json", {
            "name": scenario.name,
            "measured_omega": measured,
            "period_return_error": period_return_error(states),
            "states": [
                {
                    "time": s.time,
                    OUTER: [[z.real, z.imag] for z in s.pair.outer.samples],
                    INNER: None if s.pair.inner is None else [[z.real, z.imag] for z in s.pair.inner.samples],
                }
                for s in states
            ],
        })
    if "svg" in formats:
        frames = [[c for _, c, _ in s.pair.interfaces()] for s in states]
        bounds = frame_bounds(frames)
        for i, (s, contours) in enumerate(zip(states, frames)):
            write_svg(out / f"frame_{i:05d}.svg", contours, f"t = {s.time:.6f}", bounds)
    logger.info(f"✅ Simulation written to {out}")
    return EXIT_CODES["ok"]


def _initial_ansatz(scenario: Scenario, inner: EllipseSpec, k_max: int) -> OuterAnsatz:
    outer = scenario.outer_spec()
    if outer is not None:
        omega0 = 0.0 if scenario.omega == "auto" else float(scenario.omega)
        init = OuterAnsatz.from_ellipse(outer, k_max, omega0, center=inner.center, tilt=inner.tilt)
    elif scenario.outer is not None:
        raise ScenarioError("solver initial guess must be an ellipse")
    else:
        alpha = scenario.alphas[0] if scenario.alphas else scenario.alpha
        init = default_ansatz(inner, alpha, k_max)
        if scenario.omega != "auto":
            init = replace(init, omega=float(scenario.omega))
    if scenario.numerics.perturbation > 0:
        rng = np.random.default_rng(scenario.numerics.seed)
        init = init.perturbed(rng, scenario.numerics.perturbation)
    return init


def cmd_solve(scenario: Scenario, out_dir: Optional[str] = None) -> int:
    """Решение для внешнего интерфейса и Ω; без сходимости ConvergenceError"""
    inner = scenario.inner_spec()
    if inner is None:
        raise ScenarioError("solver needs an inner ellipse")
    inner = inner.canonical()
    if scenario.alpha == 0 and not scenario.alphas and not _is_circle(inner):
        raise ConvergenceError("no rotating solution exists for alpha = 0 with a non-circular inner ellipse")
    numerics = scenario.numerics
    k_max = numerics.k_max or DEFAULT_K_MAX
    init = _initial_ansatz(scenario, inner, k_max)
    out = _out_dir(scenario, out_dir)
    formats = scenario.outputs.formats

    if scenario.alphas:
        result = continuation(inner, scenario.alphas, init, k_max, numerics.n, numerics.max_iter)
        rows = [
            (alpha, ansatz.omega, report.meta.get("q1"), report.sup_norm, report.meta.get("iterations"))
            for alpha, (ansatz, report) in zip(result.alphas, result.solutions)
        ]
        if "csv" in formats:
            write_csv(out / "continuation.csv", "continuation", rows)
        if "json" in formats:
            write_json(out / "continuation.json", {
                "alphas": result.alphas, "omegas": result.omegas, "q1s": result.q1s,
                "aborted_alpha": result.aborted_alpha,
            })
        if result.aborted_alpha is not None:
            raise ConvergenceError(f"continuation aborted at alpha={result.aborted_alpha}")
        return EXIT_CODES["ok"]

    ansatz, report = solve_outer(inner, scenario.alpha, init, k_max, numerics.n, numerics.max_iter)
    if "csv" in formats:
        write_residuals(out / "residuals.csv", report)
    if "json" in formats:
        write_json(out / "solution.json", {
            "name": scenario.name,
            "alpha": scenario.alpha,
            "omega": ansatz.omega,
            "r0": ansatz.r0,
            "betas": list(ansatz.betas),
            "center": ansatz.center,
            "tilt": ansatz.tilt,
            "report": report_summary(report),
        })
    if "svg" in formats:
        write_svg(out / "solution.svg", [ansatz.to_contour(numerics.n)], scenario.name or "")
    if not report.meta.get("converged"):
        raise ConvergenceError(f"solver did not converge in {report.meta.get('iterations')} iterations")
    return EXIT_CODES["ok"]


def parse_complex(text: str) -> complex:
    """Комплексное число из строки: "3", "1+2j", "0.5-1i" """
    try:
        return complex(text.strip().replace(" ", "").replace("i", "j"))
    except ValueError as e:
        raise ScenarioError(f"cannot parse complex number '{text}'") from e


def cmd_transform(shape: str, points: Sequence[str], a: Optional[float] = None, b: Optional[float] = None,
                  r: Optional[float] = None, center: str = "0", tilt: float = 0.0,
                  csv_path: Optional[str] = None) -> int:
    """C(χ_D) круга или эллипса в заданных точках"""
    if not points:
        raise ScenarioError("at least one evaluation point is required")
    z0 = parse_complex(center)
    targets = [parse_complex(p) for p in points]
    if shape == "disc":
        if r is None or r <= 0:
            raise ScenarioError("disc needs a positive --r")
        values: List[TransformValue] = [cauchy_disc(z0, r, z) for z in targets]
    elif shape == "ellipse":
        if a is None or b is None:
            raise ScenarioError("ellipse needs --a and --b")
        try:
            spec = EllipseSpec(a, b, z0, tilt)
        except GeometryError as e:
            raise ScenarioError(str(e)) from e
        values = [cauchy_ellipse(spec, z) for z in targets]
    else:
        raise ScenarioError(f"unknown shape '{shape}'")

    for z, v in zip(targets, values):
        print(f"{z.real:.17g}{z.imag:+.17g}j\t{v.value.real:.17g}{v.value.imag:+.17g}j\t{v.side}\t{v.method}")
    if csv_path is not None:
        write_csv(csv_path, "transform", [
            (z.real, z.imag, v.value.real, v.value.imag, v.side, v.method) for z, v in zip(targets, values)
        ])
    return EXIT_CODES["ok"]


def sweep_grid(q2_count: int, alpha_count: int) -> List[Tuple[float, float]]:
    """Допустимая сетка (Q2, α): Q2 в (0, 1), α внутри (−Q2²/(1 − Q2²), 0)"""
    if q2_count < 1 or alpha_count < 1:
        raise ScenarioError("grid sizes must be positive")
    grid = []
    for q2 in np.linspace(0.05, 0.9, q2_count):
        lower = -q2 ** 2 / (1 - q2 ** 2)
        for k in range(1, alpha_count + 1):
            grid.append((float(q2), float(lower * k / (alpha_count + 1))))
    return grid


def cmd_sweep(q2_count: int, alpha_count: int, n: int, tol: float, method: str = "auto",
              out_dir: str = ".") -> int:
    """Проверка конфокальных пар на сетке (Q2, α)"""
    rows = []
    failures = 0
    for q2, alpha in sweep_grid(q2_count, alpha_count):
        inner = EllipseSpec(1.0, (1 - q2) / (1 + q2))
        pair, params = flierl_polvani_pair(inner, alpha, n)
        report = residual_joint(pair, RotationCandidate(params.omega_minus), PER_ARC_LENGTH, method)
        sup_outer, sup_inner = report.part(OUTER).sup_norm, report.part(INNER).sup_norm
        passed = max(sup_outer, sup_inner) < tol
        failures += not passed
        rows.append((q2, alpha, params.omega_minus, params.Q1, sup_outer, sup_inner, passed))
    write_csv(Path(out_dir) / "sweep.csv", "sweep", rows)
    if failures:
        logger.warning(f"{failures} of {len(rows)} grid points failed at tol={tol:g}")
        return EXIT_CODES["residual_failed"]
    logger.info(f"✅ All {len(rows)} grid points passed at tol={tol:g}")
    return EXIT_CODES["ok"]


def export_scenario(scenario: Scenario, path: str) -> Dict:
    """Записать проверенный сценарий обратно в JSON"""
    return dump_scenario(scenario, path)
