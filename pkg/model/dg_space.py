"""
Discontinuous piecewise-polynomial space over a mesh, and functions living in it
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from model.basis import OrthonormalBasis
from model.mesh import Mesh
from model.quadrature import QuadratureRule


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class EdgeQuadrature:
    """Two-sided traces of the basis at edge quadrature points

    Side 0 is edges.elements[:, 0], the element the normal points away from.
    Side 1 arrays are zero on boundary edges.
    """
    points: np.ndarray       # (n_edges, nq, 2)
    weights: np.ndarray      # (n_edges, nq), reference weights times edge length
    phi: np.ndarray          # (n_edges, 2, nq, nb)
    grad_phi: np.ndarray     # (n_edges, 2, nq, nb, 2)
    normals: np.ndarray      # (n_edges, 2)
    lengths: np.ndarray      # (n_edges,)
    elements: np.ndarray     # (n_edges, 2) active positions, -1 for no neighbour
    interior: np.ndarray     # (n_edges,) bool


@dataclass(frozen=True, eq=False)
class DGSpace:
    """P^q(E) on every active element of a mesh, degrees of freedom element-major

    The basis is orthonormal on the reference triangle, so the local mass
    matrix of element E is det(J_E) times the identity.
    """
    mesh: Mesh
    degree: int
    basis: OrthonormalBasis
    element_rule: QuadratureRule
    edge_rule: QuadratureRule

    @property
    def generation(self) -> int:
        return self.mesh.generation_counter

    @property
    def dofs_per_element(self) -> int:
        return self.basis.size

    @property
    def num_elements(self) -> int:
        return self.mesh.num_active

    @property
    def total_dofs(self) -> int:
        return self.num_elements * self.dofs_per_element

    def element_dofs(self, position: int) -> slice:
        nb = self.dofs_per_element
        return slice(position * nb, (position + 1) * nb)

    # element geometry

    @cached_property
    def x0(self) -> np.ndarray:
        return _frozen(self.mesh.active_coordinates[:, 0].copy())

    @cached_property
    def jacobians(self) -> np.ndarray:
        c = self.mesh.active_coordinates
        return _frozen(np.stack([c[:, 1] - c[:, 0], c[:, 2] - c[:, 0]], axis=-1))

    @cached_property
    def determinants(self) -> np.ndarray:
        return _frozen(np.abs(np.linalg.det(self.jacobians)))

    @cached_property
    def inverse_jacobians(self) -> np.ndarray:
        return _frozen(np.linalg.inv(self.jacobians))

    def to_reference(self, positions: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Pull physical points (n, nq, 2) back to the reference triangles of elements at positions (n,)"""
        shifted = points - self.x0[positions][:, None, :]
        return np.einsum("nij,nqj->nqi", self.inverse_jacobians[positions], shifted)

    def to_physical(self, positions: np.ndarray, reference: np.ndarray) -> np.ndarray:
        """Map reference points (nq, 2) into elements at positions -> (n, nq, 2)"""
        return self.x0[positions][:, None, :] + np.einsum("nij,qj->nqi", self.jacobians[positions], reference)

    def physical_gradients(self, positions: np.ndarray, reference_gradients: np.ndarray) -> np.ndarray:
        """Apply J^{-T} to reference gradients (n, nq, nb, 2)"""
        return np.einsum("nji,nqbj->nqbi", self.inverse_jacobians[positions], reference_gradients)

    # element quadrature

    @cached_property
    def quad_points(self) -> np.ndarray:
        positions = np.arange(self.num_elements)
        return _frozen(self.to_physical(positions, self.element_rule.reference_points))

    @cached_property
    def quad_weights(self) -> np.ndarray:
        return _frozen(self.element_rule.weights[None, :] * self.determinants[:, None])

    @cached_property
    def phi(self) -> np.ndarray:
        """(nq, nb) reference basis values, shared by all elements"""
        return _frozen(self.basis.values(self.element_rule.reference_points))

    @cached_property
    def grad_phi(self) -> np.ndarray:
        """(n_elements, nq, nb, 2) physical gradients"""
        reference = self.basis.gradients(self.element_rule.reference_points)
        reference = np.broadcast_to(reference, (self.num_elements,) + reference.shape)
        return _frozen(self.physical_gradients(np.arange(self.num_elements), reference))

    @cached_property
    def laplacian_phi(self) -> np.ndarray:
        """(n_elements, nq, nb) elementwise Laplacians, zero for q = 1"""
        hessians = self.basis.hessians(self.element_rule.reference_points)
        inv = self.inverse_jacobians
        physical = np.einsum("nki,qbkl,nlj->nqbij", inv, hessians, inv)
        return _frozen(physical[..., 0, 0] + physical[..., 1, 1])

    # edge quadrature

    @cached_property
    def edge_quadrature(self) -> EdgeQuadrature:
        table = self.mesh.edges
        t = self.edge_rule.points
        start = self.mesh.vertices[table.vertices[:, 0]]
        end = self.mesh.vertices[table.vertices[:, 1]]
        points = start[:, None, :] + t[None, :, None] * (end - start)[:, None, :]
        n_edges, nq, nb = table.num_edges, len(t), self.dofs_per_element

        phi = np.zeros((n_edges, 2, nq, nb))
        grad_phi = np.zeros((n_edges, 2, nq, nb, 2))
        for side in (0, 1):
            present = np.flatnonzero(table.elements[:, side] >= 0)
            positions = table.elements[present, side]
            reference = self.to_reference(positions, points[present])
            phi[present, side] = self.basis.values(reference)
            grad_phi[present, side] = self.physical_gradients(positions, self.basis.gradients(reference))

        return EdgeQuadrature(
            points=_frozen(points),
            weights=_frozen(self.edge_rule.weights[None, :] * table.lengths[:, None]),
            phi=_frozen(phi),
            grad_phi=_frozen(grad_phi),
            normals=table.normals,
            lengths=table.lengths,
            elements=table.elements,
            interior=table.interior,
        )


@dataclass(frozen=True, eq=False)
class DGFunction:
    """Coefficient vector of a function in a DGSpace"""
    space: DGSpace
    coefficients: np.ndarray

    def __post_init__(self):
        coefficients = np.array(self.coefficients, dtype=float)
        if coefficients.shape != (self.space.total_dofs,):
            raise ValueError(
                f"Coefficient vector of length {coefficients.size} does not match "
                f"{self.space.total_dofs} degrees of freedom"
            )
        if not np.all(np.isfinite(coefficients)):
            raise ValueError("Coefficient vector contains non-finite entries")
        coefficients.setflags(write=False)
        object.__setattr__(self, "coefficients", coefficients)

    @property
    def local(self) -> np.ndarray:
        """(n_elements, nb) view of the coefficients"""
        return self.coefficients.reshape(self.space.num_elements, self.space.dofs_per_element)

    @cached_property
    def values(self) -> np.ndarray:
        """(n_elements, nq) values at element quadrature points"""
        return _frozen(self.local @ self.space.phi.T)

    @cached_property
    def gradients(self) -> np.ndarray:
        """(n_elements, nq, 2) gradients at element quadrature points"""
        return _frozen(np.einsum("nb,nqbd->nqd", self.local, self.space.grad_phi))

    @cached_property
    def laplacians(self) -> np.ndarray:
        return _frozen(np.einsum("nb,nqb->nq", self.local, self.space.laplacian_phi))

    @cached_property
    def edge_values(self) -> np.ndarray:
        """(n_edges, 2, nq) traces from both sides"""
        quadrature = self.space.edge_quadrature
        local = self.local[np.maximum(quadrature.elements, 0)]
        return _frozen(np.einsum("esb,esqb->esq", local, quadrature.phi))

    @cached_property
    def edge_gradients(self) -> np.ndarray:
        """(n_edges, 2, nq, 2) gradient traces from both sides"""
        quadrature = self.space.edge_quadrature
        local = self.local[np.maximum(quadrature.elements, 0)]
        return _frozen(np.einsum("esb,esqbd->esqd", local, quadrature.grad_phi))
