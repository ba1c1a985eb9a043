"""
Adapt service: threshold marking, initial pre-refinement and the adaptation pass
"""
import logging
from typing import Optional

import numpy as np

from model.adaptation import AdaptResult, MarkSets
from model.dg_space import DGFunction, DGSpace
from model.indicator import IndicatorTable
from model.mesh import Mesh
from model.problem_spec import ProblemSpec
from service.estimator_service import EstimatorService
from service.mesh_service import MeshService
from service.space_service import SpaceService

logger = logging.getLogger(__name__)


class AdaptService:
    """Decides where the mesh changes and carries the previous solution along"""

    @staticmethod
    def mark(indicators: IndicatorTable, spec: ProblemSpec) -> MarkSets:
        """
        Threshold marking

        M_R = {E : eta_E^2 > stol_r}
        M_C = {E : eta_E^2 < stol_c, E not in the initial mesh}
        """
        eta_sq = indicators.eta_sq
        refine = indicators.element_ids[eta_sq > spec.stol_r]
        coarsen = indicators.element_ids[(eta_sq < spec.stol_c) & (indicators.generations > 0)]
        return MarkSets(
            refine_set=frozenset(int(e) for e in refine),
            coarsen_set=frozenset(int(e) for e in coarsen),
        )

    @staticmethod
    def prerefine_initial(spec: ProblemSpec, mesh0: Mesh, subdivisions: int = 2) -> Mesh:
        """
        Refine the initial mesh until the initial condition is resolved

        Each pass projects g onto the current space and refines every
        element with ||g - g_h||_{L2(E)} > stol_0, stopping when none
        remains or after max_prerefine passes.

        Args:
            spec: Problem data with initial condition and tolerances
            mesh0: Uniform initial mesh
            subdivisions: Composite quadrature level for the projection

        Returns:
            Initial mesh T_h^0
        """
        g = spec.initial_condition
        tolerance = spec.initial_tolerance
        mesh = mesh0
        for iteration in range(spec.max_prerefine):
            space = SpaceService.create_space(mesh, spec.degree)
            g_h = SpaceService.project_l2(space, g, subdivisions=subdivisions)
            errors = SpaceService.local_l2_errors(g_h, g, subdivisions=subdivisions)
            marked = mesh.active_ids[errors > tolerance]
            logger.debug(
                f"Pre-refinement pass {iteration + 1}: max ||g - g_h||_E = {float(np.max(errors)):.6e}, "
                f"{len(marked)} elements above {tolerance:.3e}"
            )
            if len(marked) == 0:
                break
            mesh = MeshService.refine(mesh, marked)
        logger.info(f"Initial mesh: {mesh0.num_active} -> {mesh.num_active} elements after pre-refinement")
        return mesh

    @classmethod
    def adapt_once(cls, mesh: Mesh, space: DGSpace, u: DGFunction, u_prev: DGFunction, spec: ProblemSpec,
                   indicators: Optional[IndicatorTable] = None, step: Optional[int] = None) -> AdaptResult:
        """
        Mark, refine, coarsen, rebuild the space and transfer u_prev

        Args:
            mesh: Current mesh T_h^{k-1}
            space: Space on mesh
            u: Solution computed on space, drives the indicators
            u_prev: Previous time level on space
            spec: Problem data
            indicators: Indicators of u; estimated when omitted
            step: Time step index for the event log

        Returns:
            AdaptResult with the new mesh, space and transferred u_prev
        """
        if indicators is None:
            indicators = EstimatorService.estimate(u, u_prev, spec)
        marks = cls.mark(indicators, spec)
        before = mesh.num_active

        new_mesh = MeshService.refine(mesh, marks.refine_set)
        new_mesh = MeshService.coarsen(new_mesh, marks.coarsen_set)
        changed = new_mesh is not mesh
        if changed:
            new_space = SpaceService.create_space(new_mesh, space.degree)
            transferred = SpaceService.transfer(u_prev, new_space)
        else:
            new_space, transferred = space, u_prev

        logger.info(
            f"Adapt event k={step}: |M_R|={len(marks.refine_set)} |M_C|={len(marks.coarsen_set)} "
            f"elements {before} -> {new_mesh.num_active}"
        )
        return AdaptResult(
            mesh=new_mesh,
            space=new_space,
            u_prev=transferred,
            marks=marks,
            elements_before=before,
            elements_after=new_mesh.num_active,
            changed=changed,
            step=step,
        )
