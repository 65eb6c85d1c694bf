"""
Точка входа CLI: разбор аргументов, настройка логирования и коды выхода
"""
import argparse
import logging
import sys
from functools import wraps
from typing import List, Optional

from commands import cmd_simulate, cmd_solve, cmd_sweep, cmd_transform, cmd_verify, export_scenario
from config import DEFAULT_N, DEFAULT_TOL, LOG_LEVEL, OUTPUT_DIR
from constants import EXIT_CODES
from errors import (
    BranchCutError, ConvergenceError, GeometryError, IntegrationAbortedError, ScenarioError, VStateError,
)
from presets import load_preset, preset_names
from scenario import load_scenario

logger = logging.getLogger(__name__)


# -----------------------------
# Коды выхода
# -----------------------------

def safe_command(func):
    """Декоратор: исключения библиотеки превращаются в коды выхода"""
    @wraps(func)
    def wrapper(*args, **kwargs) -> int:
        try:
            return func(*args, **kwargs)
        except ScenarioError as e:
            logger.error(f"Invalid input: {e}")
            return EXIT_CODES["invalid_input"]
        except ConvergenceError as e:
            logger.error(f"Solver did not converge: {e}")
            return EXIT_CODES["not_converged"]
        except BranchCutError as e:
            logger.error(f"Branch cut: {e}")
            return EXIT_CODES["numerical_failure"]
        except (GeometryError, IntegrationAbortedError) as e:
            logger.error(f"Numerical failure in {func.__name__}: {e}")
            return EXIT_CODES["numerical_failure"]
        except VStateError as e:
            logger.error(f"{type(e).__name__} in {func.__name__}: {e}")
            return EXIT_CODES["numerical_failure"]
        except Exception as e:
            logger.exception(f"Critical error in {func.__name__}: {e}")
            return EXIT_CODES["numerical_failure"]
    return wrapper


def _scenario(args):
    if args.preset:
        return load_preset(args.preset)
    if not args.scenario:
        raise ScenarioError("either a scenario file or --preset is required")
    return load_scenario(args.scenario)


@safe_command
def run(args) -> int:
    if args.command == "transform":
        return cmd_transform(args.shape, args.at, a=args.a, b=args.b, r=args.r, center=args.center,
                             tilt=args.tilt, csv_path=args.csv)
    if args.command == "sweep":
        return cmd_sweep(args.q2_count, args.alpha_count, args.n, args.tol, args.method, args.out or OUTPUT_DIR)

    scenario = _scenario(args)
    if args.dump:
        export_scenario(scenario, args.dump)
    handlers = {"verify": cmd_verify, "simulate": cmd_simulate, "solve": cmd_solve}
    return handlers[args.command](scenario, args.out)


# -----------------------------
# Аргументы
# -----------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vstates", description="Rotating vortex patches: verification, evolution and solving")
    parser.add_argument("--log-level", default=LOG_LEVEL, help="logging level (DEBUG, INFO, WARNING, ...)")
    parser.add_argument("--out", default=None, help="output directory, overrides the scenario")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, text in (("verify", "check rotation residuals"),
                       ("simulate", "evolve the interfaces in time"),
                       ("solve", "solve for the outer interface and omega")):
        p = sub.add_parser(name, help=text)
        p.add_argument("scenario", nargs="?", help="path to a scenario JSON file")
        p.add_argument("--preset", choices=preset_names(), help="built-in scenario")
        p.add_argument("--dump", default=None, help="write the validated scenario to this JSON file")

    t = sub.add_parser("transform", help="Cauchy transform of a disc or an ellipse")
    t.add_argument("--shape", choices=("disc", "ellipse"), required=True)
    t.add_argument("--a", type=float)
    t.add_argument("--b", type=float)
    t.add_argument("--r", type=float)
    t.add_argument("--center", default="0")
    t.add_argument("--tilt", type=float, default=0.0)
    t.add_argument("--at", action="append", default=[], help="evaluation point, repeatable")
    t.add_argument("--csv", default=None, help="write values to this CSV file")

    s = sub.add_parser("sweep", help="verify confocal pairs on a (Q2, alpha) grid")
    s.add_argument("--q2-count", type=int, default=5)
    s.add_argument("--alpha-count", type=int, default=5)
    s.add_argument("--n", type=int, default=DEFAULT_N)
    s.add_argument("--tol", type=float, default=DEFAULT_TOL)
    s.add_argument("--method", choices=("auto", "closed_form", "quadrature"), default="auto")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CODES["ok"] if e.code == 0 else EXIT_CODES["invalid_input"]

    # Настройка логирования
    logging.basicConfig(
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        level=getattr(logging, str(args.log_level).upper(), logging.INFO)
    )
    logger.info(f"🔄 Running {args.command}")
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
