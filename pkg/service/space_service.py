"""
Space service: DG spaces, L2 projection, evaluation and transfer between meshes
"""
import logging
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from model.dg_space import DGFunction, DGSpace
from model.mesh import Mesh
from service.basis_service import BasisService
from service.quadrature_service import QuadratureService
from utils.errors import InvalidArgumentError

logger = logging.getLogger(__name__)

Field = Callable[[np.ndarray, np.ndarray], np.ndarray]


class SpaceService:
    """Builds DG spaces and moves functions between them"""

    @staticmethod
    def quadrature_degree(degree: int) -> int:
        """Exactness degree 2q + 2 of the element and edge rules"""
        return 2 * degree + 2

    @classmethod
    def create_space(cls, mesh: Mesh, degree: int) -> DGSpace:
        if degree < 1 or degree > BasisService.MAX_DEGREE:
            raise InvalidArgumentError(f"Polynomial degree must be in [1, {BasisService.MAX_DEGREE}], got {degree}")
        rule_degree = cls.quadrature_degree(degree)
        space = DGSpace(
            mesh=mesh,
            degree=degree,
            basis=BasisService.get(degree),
            element_rule=QuadratureService.element_rule(rule_degree),
            edge_rule=QuadratureService.edge_rule(rule_degree),
        )
        logger.debug(f"Created P{degree} space on {mesh.num_active} elements: {space.total_dofs} DoFs")
        return space

    @staticmethod
    def zero(space: DGSpace) -> DGFunction:
        return DGFunction(space=space, coefficients=np.zeros(space.total_dofs))

    @staticmethod
    def _sample(space: DGSpace, f: Field, subdivisions: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Values of f, reference weights and basis values on a (composite) element rule"""
        if subdivisions > 0:
            rule = QuadratureService.composite_element_rule(space.element_rule.degree, subdivisions)
            reference = rule.reference_points
            points = space.to_physical(np.arange(space.num_elements), reference)
            phi = space.basis.values(reference)
            weights = rule.weights
        else:
            points = space.quad_points
            phi = space.phi
            weights = space.element_rule.weights
        values = np.asarray(f(points[..., 0], points[..., 1]), dtype=float)
        return values, weights, phi

    @classmethod
    def project_coefficients(cls, space: DGSpace, f: Field, subdivisions: int = 0) -> np.ndarray:
        """
        Elementwise L2 projection coefficients of a scalar or vector field

        With the orthonormal basis, c_i = integral over the reference
        triangle of f * phi_i; the mass solve is a division by det(J).

        Returns:
            (n_elements, nb) for scalar f, (n_elements, nb, k) for f with a
            trailing component axis of size k
        """
        values, weights, phi = cls._sample(space, f, subdivisions)
        if values.ndim == 2:
            return np.einsum("q,nq,qb->nb", weights, values, phi)
        return np.einsum("q,nqk,qb->nbk", weights, values, phi)

    @classmethod
    def project_l2(cls, space: DGSpace, f: Field, subdivisions: int = 0) -> DGFunction:
        """
        L2 projection of a scalar field onto the space

        Args:
            space: Target space
            f: Callable f(x, y) evaluated on arrays of quadrature points
            subdivisions: Composite quadrature level for discontinuous data

        Returns:
            DGFunction g_h with (g_h - f, p)_E = 0 for all p in P^q(E)
        """
        coefficients = cls.project_coefficients(space, f, subdivisions)
        if coefficients.ndim != 2:
            raise InvalidArgumentError("project_l2 expects a scalar field")
        return DGFunction(space=space, coefficients=coefficients.ravel())

    @classmethod
    def project_components(cls, space: DGSpace, f: Field) -> Tuple[DGFunction, ...]:
        """Project a vector field component by component"""
        coefficients = cls.project_coefficients(space, f)
        if coefficients.ndim != 3:
            raise InvalidArgumentError("project_components expects a vector field")
        return tuple(
            DGFunction(space=space, coefficients=coefficients[..., k].ravel())
            for k in range(coefficients.shape[-1])
        )

    @classmethod
    def local_l2_errors(cls, u: DGFunction, f: Field, subdivisions: int = 0) -> np.ndarray:
        """||f - u||_{L2(E)} for every active element"""
        space = u.space
        values, weights, phi = cls._sample(space, f, subdivisions)
        difference = values - u.local @ phi.T
        squared = np.einsum("q,nq->n", weights, difference ** 2) * space.determinants
        return np.sqrt(squared)

    @staticmethod
    def l2_norm(u: DGFunction) -> float:
        return float(np.sqrt(np.sum(u.space.quad_weights * u.values ** 2)))

    @staticmethod
    def integrate(u: DGFunction) -> float:
        return float(np.sum(u.space.quad_weights * u.values))

    @staticmethod
    def _position(space: DGSpace, element_id: int) -> int:
        if not space.mesh.is_active(int(element_id)):
            raise InvalidArgumentError(f"Element {element_id} is not active in this space")
        return int(space.mesh.active_position[int(element_id)])

    @classmethod
    def evaluate(cls, u: DGFunction, element_id: int, local_point) -> float:
        """Value of u on element_id at a point (r, s) of the reference triangle"""
        position = cls._position(u.space, element_id)
        phi = u.space.basis.values(np.asarray(local_point, dtype=float))
        return float(phi @ u.local[position])

    @classmethod
    def evaluate_gradient(cls, u: DGFunction, element_id: int, local_point) -> np.ndarray:
        position = cls._position(u.space, element_id)
        reference = u.space.basis.gradients(np.asarray(local_point, dtype=float))
        gradient = u.space.inverse_jacobians[position].T @ (reference.T @ u.local[position])
        return gradient

    @classmethod
    def evaluate_at(cls, u: DGFunction, element_id: int, points: np.ndarray) -> np.ndarray:
        """Values of the polynomial of element_id at physical points (n, 2)"""
        position = cls._position(u.space, element_id)
        reference = u.space.to_reference(np.array([position]), np.asarray(points, dtype=float)[None])[0]
        return u.space.basis.values(reference) @ u.local[position]

    @staticmethod
    def jump(u: DGFunction, edge_index: int) -> np.ndarray:
        """[u] = u_0 n_0 + u_1 n_1 at the edge quadrature points, shape (nq, 2)"""
        quadrature = u.space.edge_quadrature
        values = u.edge_values[edge_index]
        difference = values[0] - values[1] if quadrature.interior[edge_index] else values[0]
        return difference[:, None] * quadrature.normals[edge_index][None, :]

    @staticmethod
    def average(u: DGFunction, edge_index: int) -> np.ndarray:
        """{u} at the edge quadrature points; the one-sided trace on the boundary"""
        quadrature = u.space.edge_quadrature
        values = u.edge_values[edge_index]
        if quadrature.interior[edge_index]:
            return 0.5 * (values[0] + values[1])
        return values[0].copy()

    @staticmethod
    def _find_active_ancestor(old: Mesh, new: Mesh, element_id: int) -> Optional[int]:
        current = element_id
        while current >= 0:
            if current < old.num_records and old.is_active(current):
                return current
            current = int(new.parent[current])
        return None

    @staticmethod
    def _active_descendants(old: Mesh, element_id: int) -> List[int]:
        leaves, stack = [], [element_id]
        while stack:
            current = stack.pop()
            if old.is_active(current):
                leaves.append(current)
            elif old.children[current, 0] >= 0:
                stack.extend(int(c) for c in old.children[current])
        return sorted(leaves)

    @classmethod
    def transfer(cls, u_old: DGFunction, new_space: DGSpace) -> DGFunction:
        """
        Move a function onto a space whose mesh was refined and/or coarsened from u_old's mesh

        Elements kept: coefficients copied. Elements created by refinement:
        the ancestor's polynomial restricted to the child, reproduced exactly.
        Parents restored by coarsening: L2 projection of the piecewise
        polynomial on the retired children.

        Args:
            u_old: Function on the source space
            new_space: Target space, same lineage and degree

        Returns:
            DGFunction on new_space
        """
        old_space = u_old.space
        old, new = old_space.mesh, new_space.mesh
        if new_space is old_space:
            return u_old
        if old.lineage != new.lineage or new.num_records < old.num_records:
            raise InvalidArgumentError("Target mesh does not descend from the source mesh")
        if old_space.degree != new_space.degree:
            raise InvalidArgumentError(
                f"Cannot transfer between degrees {old_space.degree} and {new_space.degree}"
            )

        nb = new_space.dofs_per_element
        result = np.zeros((new_space.num_elements, nb))
        copied, refined, refined_from = [], [], []
        coarse_positions, leaf_positions = [], []
        for position, element_id in enumerate(new.active_ids):
            element_id = int(element_id)
            if element_id < old.num_records and old.is_active(element_id):
                copied.append((position, int(old.active_position[element_id])))
                continue
            ancestor = cls._find_active_ancestor(old, new, element_id)
            if ancestor is not None:
                refined.append(position)
                refined_from.append(int(old.active_position[ancestor]))
                continue
            leaves = cls._active_descendants(old, element_id) if element_id < old.num_records else []
            if not leaves:
                raise InvalidArgumentError(f"Element {element_id} has no counterpart in the source mesh")
            for leaf in leaves:
                coarse_positions.append(position)
                leaf_positions.append(int(old.active_position[leaf]))

        if copied:
            target, source = np.array(copied).T
            result[target] = u_old.local[source]

        if refined:
            target = np.array(refined)
            source = np.array(refined_from)
            points = new_space.quad_points[target]
            reference = old_space.to_reference(source, points)
            values = np.einsum("nqb,nb->nq", old_space.basis.values(reference), u_old.local[source])
            result[target] = np.einsum("q,nq,qb->nb", new_space.element_rule.weights, values, new_space.phi)

        if coarse_positions:
            target = np.array(coarse_positions)
            source = np.array(leaf_positions)
            points = old_space.quad_points[source]
            reference = new_space.to_reference(target, points)
            phi = new_space.basis.values(reference)
            weighted = old_space.quad_weights[source] * u_old.values[source]
            contributions = np.einsum("nq,nqb->nb", weighted, phi) / new_space.determinants[target][:, None]
            np.add.at(result, target, contributions)

        logger.debug(
            f"Transferred solution: {len(copied)} kept, {len(refined)} refined, "
            f"{len(set(coarse_positions))} coarsened elements"
        )
        return DGFunction(space=new_space, coefficients=result.ravel())

    @staticmethod
    def coefficient_rows(u: DGFunction) -> List[Tuple[int, int, float]]:
        """(element_id, local_dof, value) rows, element-major"""
        rows = []
        for position, element_id in enumerate(u.space.mesh.active_ids):
            for local_dof, value in enumerate(u.local[position]):
                rows.append((int(element_id), local_dof, float(value)))
        return rows

    @staticmethod
    def element_means(u: DGFunction) -> Dict[int, float]:
        space = u.space
        means = np.einsum("nq,nq->n", space.quad_weights, u.values) / (0.5 * space.determinants)
        return {int(e): float(m) for e, m in zip(space.mesh.active_ids, means)}
