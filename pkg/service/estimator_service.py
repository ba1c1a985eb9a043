"""
Estimator service: residual-based a posteriori error indicators
"""
import logging
from typing import Iterable, Optional, Union

import numpy as np

from model.dg_space import DGFunction, DGSpace
from model.fields import ManufacturedSolution
from model.indicator import ElementIndicator, IndicatorTable, StabilityConstants
from model.mesh import Mesh
from model.problem_spec import ProblemSpec
from service.forms_service import FormsService
from service.quadrature_service import QuadratureService
from service.space_service import SpaceService

logger = logging.getLogger(__name__)


class EstimatorService:
    """Computes eta_E = (eta_R^2 + eta_0^2)^(1/2), Theta_E and the dG norm"""

    @staticmethod
    def compute_kappa0(spec: ProblemSpec, mesh: Mesh) -> float:
        """
        kappa0 = 1/tau + min div V / 2 over element quadrature points

        Returns:
            kappa0 clamped at 0; a non-positive value is logged as a warning
        """
        rule = QuadratureService.element_rule(SpaceService.quadrature_degree(spec.degree))
        points = np.einsum("qk,nkd->nqd", rule.points, mesh.active_coordinates)
        min_divergence = float(np.min(spec.velocity.divergence(points[..., 0], points[..., 1])))
        kappa0 = 1.0 / spec.tau + 0.5 * min_divergence
        if kappa0 <= 0.0:
            logger.warning(f"kappa0 = {kappa0:.6g} <= 0, falling back to kappa0 = 0 weights")
            return 0.0
        return kappa0

    @staticmethod
    def _weights(h: np.ndarray, epsilon: float, kappa0: float) -> np.ndarray:
        scaled = h / np.sqrt(epsilon)
        if kappa0 > 0.0:
            return np.minimum(scaled, 1.0 / np.sqrt(kappa0))
        return scaled

    @classmethod
    def stability_constants(cls, space: DGSpace, spec: ProblemSpec,
                            kappa0: Optional[float] = None) -> StabilityConstants:
        """rho_E = min(h_E eps^-1/2, kappa0^-1/2), rho_e likewise with h_e; c* = ||1/tau|| / kappa0"""
        if kappa0 is None:
            kappa0 = cls.compute_kappa0(spec, space.mesh)
        rho_element = cls._weights(space.mesh.diameters, spec.epsilon, kappa0)
        rho_edge = cls._weights(space.mesh.edges.lengths, spec.epsilon, kappa0)
        c_star = (1.0 / spec.tau) / kappa0 if kappa0 > 0.0 else float("inf")
        return StabilityConstants(kappa0=kappa0, rho_element=rho_element, rho_edge=rho_edge, c_star=c_star)

    @staticmethod
    def projected_data(space: DGSpace, spec: ProblemSpec):
        """alpha_h and V_h at element quadrature points"""
        alpha_h = SpaceService.project_l2(space, spec.alpha)
        velocity_h = SpaceService.project_components(space, spec.velocity)
        return alpha_h.values, np.stack([v.values for v in velocity_h], axis=-1)

    @classmethod
    def volume_residual(cls, u: DGFunction, u_prev: DGFunction, spec: ProblemSpec,
                        constants: StabilityConstants) -> np.ndarray:
        """
        eta_{E,R} = rho_E || l - alpha_h u + eps Lap_h u - V_h.grad u - r(u) ||_{L2(E)}

        l = u_prev / tau plus the manufactured source when present.

        Returns:
            (n_elements,) array aligned with the active elements
        """
        space = u.space
        alpha_h, velocity_h = cls.projected_data(space, spec)
        points = space.quad_points
        load = u_prev.values / spec.tau + FormsService.source_term(spec, points[..., 0], points[..., 1])
        density = (load - alpha_h * u.values + spec.epsilon * u.laplacians
                   - np.einsum("nqd,nqd->nq", velocity_h, u.gradients)
                   - FormsService.reaction(spec, u.values))
        norm_sq = np.einsum("nq,nq->n", space.quad_weights, density ** 2)
        return constants.rho_element * np.sqrt(norm_sq)

    @staticmethod
    def edge_jumps(u: DGFunction):
        """(||[u]||^2, ||[grad u].n||^2) in L2(e) per edge, zero on boundary edges"""
        quadrature = u.space.edge_quadrature
        interior = quadrature.interior
        values = u.edge_values
        gradients = u.edge_gradients
        value_jump = np.where(interior[:, None], values[:, 0] - values[:, 1], 0.0)
        normal_jump = np.einsum("eqd,ed->eq", gradients[:, 0] - gradients[:, 1], quadrature.normals)
        normal_jump = np.where(interior[:, None], normal_jump, 0.0)
        value_sq = np.einsum("eq,eq->e", quadrature.weights, value_jump ** 2)
        normal_sq = np.einsum("eq,eq->e", quadrature.weights, normal_jump ** 2)
        return value_sq, normal_sq

    @classmethod
    def edge_residual(cls, u: DGFunction, spec: ProblemSpec, constants: StabilityConstants) -> np.ndarray:
        """
        (eta_{E,0})^2 = 1/2 sum over interior edges e of E of
            eps^-1/2 rho_e ||[eps grad u]||^2 + (eps sigma/h_e + kappa0 h_e + h_e/eps) ||[u]||^2

        Returns:
            (n_elements,) array of eta_{E,0}
        """
        quadrature = u.space.edge_quadrature
        eps = spec.epsilon
        h = quadrature.lengths
        value_sq, normal_sq = cls.edge_jumps(u)
        per_edge = (constants.rho_edge / np.sqrt(eps) * eps ** 2 * normal_sq
                    + (eps * spec.penalty / h + constants.kappa0 * h + h / eps) * value_sq)
        per_edge = np.where(quadrature.interior, per_edge, 0.0)
        squared = np.zeros(u.space.num_elements)
        for side in (0, 1):
            present = quadrature.elements[:, side] >= 0
            np.add.at(squared, quadrature.elements[present, side], 0.5 * per_edge[present])
        return np.sqrt(squared)

    @classmethod
    def data_oscillation(cls, u: DGFunction, spec: ProblemSpec, constants: StabilityConstants) -> np.ndarray:
        """Theta_E = rho_E (||alpha - alpha_h||^2 + ||(V - V_h).grad u||^2)^(1/2)"""
        space = u.space
        alpha_h, velocity_h = cls.projected_data(space, spec)
        points = space.quad_points
        x, y = points[..., 0], points[..., 1]
        alpha_error = spec.alpha(x, y) - alpha_h
        convection_error = np.einsum("nqd,nqd->nq", spec.velocity(x, y) - velocity_h, u.gradients)
        norm_sq = np.einsum("nq,nq->n", space.quad_weights, alpha_error ** 2 + convection_error ** 2)
        return constants.rho_element * np.sqrt(norm_sq)

    @classmethod
    def estimate(cls, u: DGFunction, u_prev: DGFunction, spec: ProblemSpec,
                 constants: Optional[StabilityConstants] = None) -> IndicatorTable:
        """
        Indicators of every active element of u's mesh

        Args:
            u: Solution u_h^k on the current space
            u_prev: Previous level on the same space
            spec: Problem data
            constants: Precomputed weights

        Returns:
            IndicatorTable aligned with mesh.active_ids
        """
        space = u.space
        if constants is None:
            constants = cls.stability_constants(space, spec)
        table = IndicatorTable(
            element_ids=space.mesh.active_ids.copy(),
            generations=space.mesh.generation[space.mesh.active_ids].copy(),
            eta_R=cls.volume_residual(u, u_prev, spec, constants),
            eta_0=cls.edge_residual(u, spec, constants),
            theta=cls.data_oscillation(u, spec, constants),
            kappa0=constants.kappa0,
        )
        logger.debug(
            f"Estimated {len(table)} elements: eta = {table.global_eta:.6e}, "
            f"max eta_E = {table.max_eta:.6e}, Theta = {table.global_theta:.6e}"
        )
        return table

    @staticmethod
    def global_indicator(indicators: Union[IndicatorTable, Iterable[Union[ElementIndicator, float]]]) -> float:
        """eta = (sum_E eta_E^2)^(1/2)"""
        if isinstance(indicators, IndicatorTable):
            return indicators.global_eta
        total = 0.0
        for item in indicators:
            total += item.eta_sq if isinstance(item, ElementIndicator) else float(item) ** 2
        return float(np.sqrt(total))

    @classmethod
    def dg_norm_computable(cls, u: DGFunction, spec: ProblemSpec, constants: StabilityConstants,
                           exact: Optional[ManufacturedSolution] = None) -> float:
        """
        Squared computable dG norm of u, or of exact - u when exact is given

        sum_E (||eps grad v||^2 + kappa0 ||v||^2)
            + sum_e (sigma eps / h_e + kappa0 h_e + h_e / eps) ||[v]||^2;
        the dual semi-norm |V v|_* is not included.
        """
        space = u.space
        values = -u.values
        gradients = -u.gradients
        if exact is not None:
            points = space.quad_points
            values = values + exact.value(points[..., 0], points[..., 1])
            gradients = gradients + exact.gradient(points[..., 0], points[..., 1])
        eps = spec.epsilon
        volume = np.sum(space.quad_weights * (eps ** 2 * np.einsum("nqd,nqd->nq", gradients, gradients)
                                              + constants.kappa0 * values ** 2))
        quadrature = space.edge_quadrature
        h = quadrature.lengths
        value_sq, _ = cls.edge_jumps(u)
        edges = np.sum((spec.penalty * eps / h + constants.kappa0 * h + h / eps) * value_sq)
        return float(volume + edges)
