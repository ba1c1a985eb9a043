"""
Convergence service: uniform refinement studies against manufactured solutions
"""
import logging
from typing import List, Optional, Sequence

import numpy as np

from model.adaptation import AdaptDriver
from model.convergence import ConvergenceLevel, ConvergenceReport
from model.dg_space import DGFunction
from model.experiment import ExperimentConfig
from model.fields import ManufacturedSolution
from service.estimator_service import EstimatorService
from service.mesh_service import MeshService
from service.space_service import SpaceService
from service.stepper_service import StepperService
from utils.errors import ConfigError

logger = logging.getLogger(__name__)


class ConvergenceService:
    """Observed orders of the L2 error, the computable dG error and the indicator"""

    DEFAULT_LEVELS = (4, 8, 16, 32)

    @staticmethod
    def l2_error(u: DGFunction, exact: ManufacturedSolution) -> float:
        space = u.space
        points = space.quad_points
        difference = exact.value(points[..., 0], points[..., 1]) - u.values
        return float(np.sqrt(np.sum(space.quad_weights * difference ** 2)))

    @staticmethod
    def observed_rates(h: Sequence[float], errors: Sequence[float]) -> List[float]:
        """log(e_i / e_{i+1}) / log(h_i / h_{i+1}) for successive levels"""
        return [
            float(np.log(errors[i] / errors[i + 1]) / np.log(h[i] / h[i + 1]))
            for i in range(len(errors) - 1)
        ]

    @staticmethod
    def fitted_order(h: Sequence[float], errors: Sequence[float]) -> float:
        """Least-squares slope of log e against log h"""
        slope, _ = np.polyfit(np.log(h), np.log(errors), 1)
        return float(slope)

    @classmethod
    def run(cls, config: ExperimentConfig, levels: Optional[Sequence[int]] = None) -> ConvergenceReport:
        """
        Solve the configured problem on successively refined uniform meshes

        Args:
            config: Experiment with a manufactured solution
            levels: Subdivisions n per unit length (mesh size 1/n)

        Returns:
            ConvergenceReport
        """
        spec = config.spec
        if spec.manufactured is None:
            raise ConfigError(f"Problem '{config.problem}' has no manufactured solution")
        levels = list(levels or cls.DEFAULT_LEVELS)
        results: List[ConvergenceLevel] = []
        for n in levels:
            mesh = MeshService.uniform_initial_mesh(n)
            driver = AdaptDriver(initial_mesh=mesh, enabled=False, max_cycles=0,
                                 projection_subdivisions=config.projection_subdivisions)
            run = StepperService.run(spec, driver, newton=config.newton)
            u = run.solution
            space = u.space
            u_prev = SpaceService.project_l2(space, spec.initial_condition,
                                             subdivisions=config.projection_subdivisions)
            constants = EstimatorService.stability_constants(space, spec)
            table = EstimatorService.estimate(u, u_prev, spec, constants)
            level = ConvergenceLevel(
                n=n,
                h=1.0 / n,
                dofs=space.total_dofs,
                l2_error=cls.l2_error(u, spec.manufactured),
                dg_error=float(np.sqrt(EstimatorService.dg_norm_computable(u, spec, constants, spec.manufactured))),
                eta=table.global_eta,
                theta=table.global_theta,
            )
            logger.info(
                f"Level n={n}: DoFs {level.dofs}, L2 error {level.l2_error:.4e}, "
                f"dG error {level.dg_error:.4e}, eta {level.eta:.4e}"
            )
            results.append(level)

        h = [level.h for level in results]
        l2 = [level.l2_error for level in results]
        dg = [level.dg_error for level in results]
        report = ConvergenceReport(problem=config.problem, levels=results)
        if len(results) > 1:
            report = report.model_copy(update={
                "l2_rates": cls.observed_rates(h, l2),
                "dg_rates": cls.observed_rates(h, dg),
                "l2_order": cls.fitted_order(h, l2),
                "dg_order": cls.fitted_order(h, dg),
            })
        return report
