"""
Experiment service: registry of built-in problems and run orchestration
"""
import logging
from typing import Callable, Dict, List

from model.adaptation import AdaptDriver
from model.experiment import ExperimentConfig
from model.fields import ManufacturedSolution, ScalarField, VelocityField
from model.problem_spec import ProblemSpec
from model.run_result import RunResult
from service.adapt_service import AdaptService
from service.mesh_service import MeshService
from service.stepper_service import StepperService
from utils.errors import ConfigError

logger = logging.getLogger(__name__)


class ExperimentService:
    """Builds experiment configurations and runs them"""

    @staticmethod
    def builtin_expanding(scale: str = "desk") -> ExperimentConfig:
        """Expanding flow V = (10x, 10y) acting on the disk x^2 + y^2 <= 0.3"""
        final_time = 0.06 if scale == "paper" else 0.02
        spec = ProblemSpec(
            epsilon=0.001,
            velocity=VelocityField(kind="expanding", v0=10.0),
            initial_condition=ScalarField(kind="disk", value=1.0, radius_squared=0.3),
            tau=0.001,
            final_time=final_time,
            sigma=10.0,
            degree=1,
            stol_r=1e-2,
            stol_c=1e-5,
        )
        return ExperimentConfig(
            problem="expanding",
            scale=scale,
            initial_n=4,
            uniform_n=64 if scale == "paper" else 16,
            snapshot_times=[0.0, final_time / 2, final_time],
            spec=spec,
        )

    @staticmethod
    def builtin_sheer(scale: str = "desk") -> ExperimentConfig:
        """Sheer flow V = (0, -100y) acting on the square |x|, |y| <= 0.1"""
        final_time = 0.06 if scale == "paper" else 0.02
        spec = ProblemSpec(
            epsilon=0.01,
            velocity=VelocityField(kind="sheer", v0=100.0),
            initial_condition=ScalarField(kind="square", value=1.0, half_width=0.1),
            tau=0.001,
            final_time=final_time,
            sigma=10.0,
            degree=1,
            stol_r=1e-2,
            stol_c=1e-5,
        )
        return ExperimentConfig(
            problem="sheer",
            scale=scale,
            initial_n=4,
            uniform_n=32 if scale == "paper" else 16,
            snapshot_times=[0.0, 0.01, final_time],
            spec=spec,
        )

    @staticmethod
    def builtin_manufactured(kind: str = "linear", scale: str = "desk") -> ExperimentConfig:
        """
        One-step problem with exact solution cos(pi x) cos(pi y)

        eps = 1, V = (1, 0.5), tau = T = 1 so alpha = 1; "linear" switches the
        Allen-Cahn reaction off, "nonlinear" keeps it.
        """
        if kind not in ("linear", "nonlinear"):
            raise ConfigError(f"Unknown manufactured problem kind '{kind}'")
        spec = ProblemSpec(
            epsilon=1.0,
            velocity=VelocityField(kind="affine", b=1.0, d=0.5),
            initial_condition=ScalarField(kind="zero"),
            tau=1.0,
            final_time=1.0,
            degree=1,
            reaction="none" if kind == "linear" else "allen_cahn",
            manufactured=ManufacturedSolution(kind="cosine"),
        )
        return ExperimentConfig(
            problem=f"manufactured-{kind}",
            mode="uniform",
            scale=scale,
            initial_n=4,
            uniform_n=4,
            projection_subdivisions=0,
            snapshot_times=[1.0],
            spec=spec,
        )

    @classmethod
    def registry(cls) -> Dict[str, Callable[[str], ExperimentConfig]]:
        return {
            "expanding": cls.builtin_expanding,
            "sheer": cls.builtin_sheer,
            "manufactured-linear": lambda scale: cls.builtin_manufactured("linear", scale),
            "manufactured-nonlinear": lambda scale: cls.builtin_manufactured("nonlinear", scale),
        }

    @classmethod
    def problem_names(cls) -> List[str]:
        return list(cls.registry())

    @classmethod
    def builtin(cls, problem: str, scale: str = "desk") -> ExperimentConfig:
        factories = cls.registry()
        if problem not in factories:
            raise ConfigError(f"Unknown problem '{problem}', expected one of {', '.join(factories)}")
        if scale not in ("desk", "paper"):
            raise ConfigError(f"Unknown scale '{scale}', expected desk or paper")
        return factories[problem](scale)

    @staticmethod
    def build_driver(config: ExperimentConfig) -> AdaptDriver:
        """Initial mesh and adaptation settings of a configuration"""
        if config.adaptive:
            mesh0 = MeshService.uniform_initial_mesh(config.initial_n)
            mesh = AdaptService.prerefine_initial(config.spec, mesh0, subdivisions=config.projection_subdivisions)
            return AdaptDriver(
                initial_mesh=mesh,
                enabled=config.max_adapt_cycles > 0,
                max_cycles=config.max_adapt_cycles,
                projection_subdivisions=config.projection_subdivisions,
            )
        return AdaptDriver(
            initial_mesh=MeshService.uniform_initial_mesh(config.uniform_n),
            enabled=False,
            max_cycles=0,
            projection_subdivisions=config.projection_subdivisions,
        )

    @classmethod
    def run(cls, config: ExperimentConfig) -> RunResult:
        logger.info(
            f"Running {config.run_name} ({config.scale} scale), bulk plateau u = {config.spec.plateau_value():.4f}"
        )
        driver = cls.build_driver(config)
        return StepperService.run(config.spec, driver, newton=config.newton, snapshot_times=config.snapshot_times)
