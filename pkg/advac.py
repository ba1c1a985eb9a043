#!/usr/bin/env python3
"""
Command-line entry point of the adaptive SIPG solver for the advective Allen-Cahn equation

Usage:
    python advac.py run --problem expanding --mode adaptive --scale desk --out DIR
    python advac.py run --config experiment.yaml --set spec.tau=0.002
    python advac.py convergence --problem manufactured-linear --levels 4
    python advac.py config --problem sheer --out sheer.yaml
    python advac.py verify

Exit codes: 0 success, 2 configuration error or missing core packages,
3 solver failure or failed verification checks.
"""
import config  # noqa: F401  (exports thread limits before numpy is imported)

import argparse
import logging
import sys
from datetime import datetime
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from logging_config import LoggingConfig
from model.experiment import ExperimentConfig
from service.config_service import ConfigService
from service.convergence_service import ConvergenceService
from service.experiment_service import ExperimentService
from service.output_service import OutputService
from service.verification_service import VerificationService
from utils.dependency_checker import DependencyChecker
from utils.errors import CoercivityError, ConfigError, MissingDependencyError, StepFailureError

logger = logging.getLogger("advac")

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_SOLVER_FAILURE = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="advac", description=__doc__.splitlines()[1])
    parser.add_argument("--log-level", default=None, help="Override ADVAC_LOG_LEVEL")
    parser.add_argument("--log-dir", default=None, help="Override ADVAC_LOG_DIR")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run one experiment")
    run.add_argument("--problem", default="expanding", help=f"One of {', '.join(ExperimentService.problem_names())}")
    run.add_argument("--mode", choices=["adaptive", "uniform"], default=None)
    run.add_argument("--scale", choices=["desk", "paper"], default="desk")
    run.add_argument("--config", type=Path, default=None, help="Experiment YAML file")
    run.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    run.add_argument("--out", type=Path, default=None, help="Output directory")

    convergence = commands.add_parser("convergence", help="Uniform refinement study")
    convergence.add_argument("--problem", default="manufactured-linear")
    convergence.add_argument("--levels", type=int, default=4, help="Number of levels n = 4, 8, 16, ...")
    convergence.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    convergence.add_argument("--out", type=Path, default=None)

    dump = commands.add_parser("config", help="Write a built-in experiment as YAML")
    dump.add_argument("--problem", default="expanding")
    dump.add_argument("--scale", choices=["desk", "paper"], default="desk")
    dump.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    dump.add_argument("--out", type=Path, required=True)

    commands.add_parser("verify", help="Run the invariant checks")
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """Built-in or file configuration with --mode/--out/--set applied"""
    overrides = list(args.overrides)
    if getattr(args, "mode", None):
        overrides.insert(0, f"mode={args.mode}")
    if getattr(args, "out", None) and args.command == "run":
        overrides.insert(0, f"output_dir={args.out}")
    if getattr(args, "config", None):
        return ConfigService.load(args.config, overrides)
    base = ExperimentService.builtin(args.problem, getattr(args, "scale", "desk"))
    return ConfigService.apply_overrides(base, overrides)


def command_run(args: argparse.Namespace) -> int:
    experiment = resolve_config(args)
    result = ExperimentService.run(experiment)
    _, missing_features = DependencyChecker.verify_all_dependencies()
    if "vtk" in missing_features:
        logger.warning(f"Skipping VTK snapshots. {DependencyChecker.get_installation_help_message('vtk')}")
    OutputService.write_outputs(experiment, result, Path(experiment.output_dir), vtk="vtk" not in missing_features)
    last = result.records[-1]
    logger.info(f"{experiment.run_name}: {len(result.records)} steps, final DoFs {last.dofs}, "
                f"max eta {last.max_element_indicator:.3e}")
    return EXIT_OK


def command_convergence(args: argparse.Namespace) -> int:
    experiment = resolve_config(args)
    levels = [4 * 2 ** i for i in range(max(1, args.levels))]
    report = ConvergenceService.run(experiment, levels)
    for level in report.levels:
        logger.info(f"n={level.n:4d} L2 {level.l2_error:.4e} dG {level.dg_error:.4e} "
                    f"eta {level.eta:.4e} effectivity {level.effectivity:.3f}")
    logger.info(f"Observed orders: L2 {report.l2_order:.3f}, dG {report.dg_order:.3f}")
    if args.out:
        OutputService.write_convergence(report, Path(args.out) / "convergence.csv")
    return EXIT_OK


def command_config(args: argparse.Namespace) -> int:
    experiment = resolve_config(args)
    ConfigService.dump(experiment, args.out)
    return EXIT_OK


def command_verify(args: argparse.Namespace) -> int:
    all_core_installed, _ = DependencyChecker.verify_all_dependencies()
    if not all_core_installed:
        logger.error(DependencyChecker.get_installation_help_message())
        return EXIT_CONFIG_ERROR
    results = VerificationService.run_all()
    failed = [r.name for r in results if not r.passed]
    if failed:
        logger.error(f"Failed checks: {', '.join(failed)}")
        return EXIT_SOLVER_FAILURE
    logger.info(f"All {len(results)} checks passed")
    return EXIT_OK


COMMANDS = {
    "run": command_run,
    "convergence": command_convergence,
    "config": command_config,
    "verify": command_verify,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    LoggingConfig.setup_logging(args.log_dir or config.ADVAC_LOG_DIR, args.log_level or config.ADVAC_LOG_LEVEL)
    LoggingConfig.setup_sentry(config.SENTRY_DSN, config.SENTRY_ENVIRONMENT, config.SENTRY_TRACES_SAMPLE_RATE)

    start_time = datetime.now()
    try:
        code = COMMANDS[args.command](args)
    except (ConfigError, ValidationError) as e:
        logger.error(f"Configuration error: {e}", exc_info=True)
        return EXIT_CONFIG_ERROR
    except MissingDependencyError as e:
        logger.error(f"Missing dependency: {e}")
        return EXIT_CONFIG_ERROR
    except StepFailureError as e:
        logger.error(f"Solver failure: {e}", exc_info=True)
        LoggingConfig.capture_exception(e, {"step": e.step, "history": {"residuals": e.history}})
        return EXIT_SOLVER_FAILURE
    except CoercivityError as e:
        logger.error(f"Solver failure: {e}", exc_info=True)
        LoggingConfig.capture_exception(e, {"min_divergence": e.min_divergence, "smallest_value": e.smallest_value})
        return EXIT_SOLVER_FAILURE
    duration = (datetime.now() - start_time).total_seconds()
    logger.info(f"Command '{args.command}' finished in {duration:.2f} seconds with exit code {code}")
    return code


if __name__ == "__main__":
    sys.exit(main())
