"""
Forms service: SIPG assembly with upwinding, Allen-Cahn reaction and right-hand side
"""
import logging
from pathlib import Path
from typing import Optional, Tuple

import numpy as np
from scipy import sparse

from model.assembled_system import AssembledSystem
from model.dg_space import DGFunction, DGSpace
from model.problem_spec import ProblemSpec
from utils.errors import CoercivityError, InvalidArgumentError

logger = logging.getLogger(__name__)

SIGNS = (1.0, -1.0)


def _element_blocks(blocks: np.ndarray, nb: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """COO triplets of per-element (n, nb, nb) blocks on the diagonal"""
    n = blocks.shape[0]
    base = (np.arange(n) * nb)[:, None, None]
    local = np.arange(nb)
    rows = np.broadcast_to(base + local[None, :, None], blocks.shape)
    cols = np.broadcast_to(base + local[None, None, :], blocks.shape)
    return rows.ravel(), cols.ravel(), blocks.ravel()


def _coupling_blocks(blocks: np.ndarray, row_positions: np.ndarray, col_positions: np.ndarray,
                     nb: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    local = np.arange(nb)
    rows = np.broadcast_to((row_positions * nb)[:, None, None] + local[None, :, None], blocks.shape)
    cols = np.broadcast_to((col_positions * nb)[:, None, None] + local[None, None, :], blocks.shape)
    return rows.ravel(), cols.ravel(), blocks.ravel()


def _to_csr(triplets, size: int) -> sparse.csr_matrix:
    if not triplets:
        return sparse.csr_matrix((size, size))
    rows = np.concatenate([t[0] for t in triplets])
    cols = np.concatenate([t[1] for t in triplets])
    values = np.concatenate([t[2] for t in triplets])
    return sparse.coo_matrix((values, (rows, cols)), shape=(size, size)).tocsr()


class FormsService:
    """Assembles a_h(u, v) + r_h(u) = l_h(v) on a DG space"""

    @staticmethod
    def nonlinearity(u):
        """f(u) = 2u(1 - u)(1 - 2u), derivative of the double-well potential"""
        return 2.0 * u * (1.0 - u) * (1.0 - 2.0 * u)

    @staticmethod
    def nonlinearity_derivative(u):
        return 2.0 - 12.0 * u + 12.0 * u ** 2

    @classmethod
    def reaction(cls, spec: ProblemSpec, u):
        """r(u) = f(u) / eps, or zero when the reaction is switched off"""
        if spec.reaction == "none":
            return np.zeros_like(np.asarray(u, dtype=float))
        return cls.nonlinearity(u) / spec.epsilon

    @classmethod
    def reaction_derivative(cls, spec: ProblemSpec, u):
        if spec.reaction == "none":
            return np.zeros_like(np.asarray(u, dtype=float))
        return cls.nonlinearity_derivative(u) / spec.epsilon

    @classmethod
    def source_term(cls, spec: ProblemSpec, x, y) -> np.ndarray:
        """
        Volume source making the manufactured solution exact

        s = alpha u - eps Lap u + V.grad u + r(u) for a one-step problem
        started from u_prev = 0; zero without a manufactured solution.
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        exact = spec.manufactured
        if exact is None:
            return np.zeros(np.broadcast(x, y).shape)
        u = exact.value(x, y)
        convection = np.einsum("...d,...d->...", spec.velocity(x, y), exact.gradient(x, y))
        return (spec.alpha(x, y) * u - spec.epsilon * exact.laplacian(x, y)
                + convection + cls.reaction(spec, u))

    @staticmethod
    def kappa0_unclamped(space: DGSpace, spec: ProblemSpec) -> Tuple[float, float]:
        """(1/tau + min div V / 2, min div V) over element quadrature points"""
        points = space.quad_points
        min_divergence = float(np.min(spec.velocity.divergence(points[..., 0], points[..., 1])))
        return 1.0 / spec.tau + 0.5 * min_divergence, min_divergence

    @classmethod
    def assemble_bilinear(cls, space: DGSpace, spec: ProblemSpec) -> AssembledSystem:
        """
        Assemble D_h + O_h + K_h + J_h

        D_h: eps grad u.grad v + (1/tau) u v on elements (alpha - div V = 1/tau).
        O_h: -V u.grad v on elements, V.n u (v - v_out) on the outflow part
             of interior edges, V.n u v on the outflow boundary.
        K_h, J_h: symmetric interior penalty terms on interior edges only.

        Args:
            space: DG space
            spec: Problem data

        Returns:
            AssembledSystem without right-hand side

        Raises:
            CoercivityError: if 1/tau + min div V / 2 <= 0
        """
        kappa0, min_divergence = cls.kappa0_unclamped(space, spec)
        if kappa0 <= 0.0:
            logger.warning(f"kappa0 = {kappa0:.6g} <= 0 (min div V = {min_divergence:.6g}, tau = {spec.tau})")
            raise CoercivityError(
                f"Bilinear form is not coercive: 1/tau + min(div V)/2 = {kappa0:.6g}",
                min_divergence=min_divergence,
            )

        nb = space.dofs_per_element
        size = space.total_dofs
        eps = spec.epsilon
        w = space.quad_weights
        phi = space.phi
        grad = space.grad_phi

        mass_blocks = np.einsum("nq,qi,qj->nij", w, phi, phi)
        diffusion_blocks = eps * np.einsum("nq,nqid,nqjd->nij", w, grad, grad)
        points = space.quad_points
        velocity = spec.velocity(points[..., 0], points[..., 1])
        convection_blocks = -np.einsum("nq,qj,nqd,nqid->nij", w, phi, velocity, grad)

        d_triplets = [_element_blocks(diffusion_blocks + mass_blocks / spec.tau, nb)]
        o_triplets = [_element_blocks(convection_blocks, nb)]
        k_triplets, j_triplets = [], []

        quadrature = space.edge_quadrature
        edge_velocity = spec.velocity(quadrature.points[..., 0], quadrature.points[..., 1])
        normal_velocity = np.einsum("eqd,ed->eq", edge_velocity, quadrature.normals)
        inflow_part = np.minimum(normal_velocity, 0.0)
        outflow_part = np.maximum(normal_velocity, 0.0)

        interior = np.flatnonzero(quadrature.interior)
        if len(interior):
            wi = quadrature.weights[interior]
            positions = quadrature.elements[interior]
            normals = quadrature.normals[interior]
            traces = [quadrature.phi[interior, s] for s in (0, 1)]
            normal_derivatives = [
                np.einsum("mqbd,md->mqb", quadrature.grad_phi[interior, s], normals) for s in (0, 1)
            ]
            penalty = spec.penalty * eps / quadrature.lengths[interior]
            for a in (0, 1):
                for b in (0, 1):
                    consistency = -0.5 * eps * (
                        SIGNS[a] * np.einsum("mq,mqi,mqj->mij", wi, traces[a], normal_derivatives[b])
                        + SIGNS[b] * np.einsum("mq,mqi,mqj->mij", wi, normal_derivatives[a], traces[b])
                    )
                    jump = (SIGNS[a] * SIGNS[b] * penalty)[:, None, None] * np.einsum(
                        "mq,mqi,mqj->mij", wi, traces[a], traces[b]
                    )
                    k_triplets.append(_coupling_blocks(consistency, positions[:, a], positions[:, b], nb))
                    j_triplets.append(_coupling_blocks(jump, positions[:, a], positions[:, b], nb))

            outflow = outflow_part[interior]
            inflow = inflow_part[interior]
            upwind = {
                (0, 0): np.einsum("mq,mqi,mqj->mij", wi * outflow, traces[0], traces[0]),
                (1, 0): -np.einsum("mq,mqi,mqj->mij", wi * outflow, traces[1], traces[0]),
                (1, 1): -np.einsum("mq,mqi,mqj->mij", wi * inflow, traces[1], traces[1]),
                (0, 1): np.einsum("mq,mqi,mqj->mij", wi * inflow, traces[0], traces[1]),
            }
            for (a, b), blocks in upwind.items():
                o_triplets.append(_coupling_blocks(blocks, positions[:, a], positions[:, b], nb))

        boundary = np.flatnonzero(~quadrature.interior)
        if len(boundary):
            wb = quadrature.weights[boundary] * outflow_part[boundary]
            trace = quadrature.phi[boundary, 0]
            blocks = np.einsum("mq,mqi,mqj->mij", wb, trace, trace)
            owner = quadrature.elements[boundary, 0]
            o_triplets.append(_coupling_blocks(blocks, owner, owner, nb))

        terms = {
            "D": _to_csr(d_triplets, size),
            "O": _to_csr(o_triplets, size),
            "K": _to_csr(k_triplets, size),
            "J": _to_csr(j_triplets, size),
        }
        stiffness = (terms["D"] + terms["O"] + terms["K"] + terms["J"]).tocsr()
        mass = _to_csr([_element_blocks(mass_blocks, nb)], size)
        logger.debug(f"Assembled SIPG operator: {size} DoFs, {stiffness.nnz} nonzeros, kappa0 = {kappa0:.6g}")
        return AssembledSystem(space=space, stiffness=stiffness, mass=mass, terms=terms, kappa0=kappa0)

    @classmethod
    def assemble_rhs(cls, space: DGSpace, spec: ProblemSpec, u_prev: DGFunction) -> np.ndarray:
        """
        l_h(v) = (1/tau) (u_prev, v), plus manufactured data terms

        With a manufactured solution the source, the Neumann flux
        eps grad u.n on the boundary and the inflow value -V.n u on the
        inflow boundary are added.
        """
        if u_prev.space is not space:
            raise InvalidArgumentError("Previous solution does not live on the assembly space")
        nb = space.dofs_per_element
        load = np.einsum("nq,nq,qb->nb", space.quad_weights, u_prev.values, space.phi) / spec.tau

        exact = spec.manufactured
        if exact is not None:
            points = space.quad_points
            source = cls.source_term(spec, points[..., 0], points[..., 1])
            load = load + np.einsum("nq,nq,qb->nb", space.quad_weights, source, space.phi)

            quadrature = space.edge_quadrature
            boundary = np.flatnonzero(~quadrature.interior)
            if len(boundary):
                edge_points = quadrature.points[boundary]
                x, y = edge_points[..., 0], edge_points[..., 1]
                normals = quadrature.normals[boundary]
                flux = spec.epsilon * np.einsum("mqd,md->mq", exact.gradient(x, y), normals)
                normal_velocity = np.einsum("mqd,md->mq", spec.velocity(x, y), normals)
                inflow = -np.minimum(normal_velocity, 0.0) * exact.value(x, y)
                data = quadrature.weights[boundary] * (flux + inflow)
                contributions = np.einsum("mq,mqb->mb", data, quadrature.phi[boundary, 0])
                np.add.at(load, quadrature.elements[boundary, 0], contributions)

        return load.reshape(space.num_elements * nb)

    @classmethod
    def assemble(cls, space: DGSpace, spec: ProblemSpec, u_prev: DGFunction) -> AssembledSystem:
        system = cls.assemble_bilinear(space, spec)
        rhs = cls.assemble_rhs(space, spec, u_prev)
        return AssembledSystem(
            space=space,
            stiffness=system.stiffness,
            mass=system.mass,
            terms=system.terms,
            rhs=rhs,
            kappa0=system.kappa0,
        )

    @classmethod
    def nonlinear_vector(cls, spec: ProblemSpec, u: DGFunction) -> np.ndarray:
        """r_h(u)(phi_i) by quadrature"""
        space = u.space
        values = cls.reaction(spec, u.values)
        return np.einsum("nq,nq,qb->nb", space.quad_weights, values, space.phi).ravel()

    @classmethod
    def nonlinear_jacobian(cls, spec: ProblemSpec, u: DGFunction) -> sparse.csr_matrix:
        space = u.space
        derivative = cls.reaction_derivative(spec, u.values)
        blocks = np.einsum("nq,nq,qi,qj->nij", space.quad_weights, derivative, space.phi, space.phi)
        return _to_csr([_element_blocks(blocks, space.dofs_per_element)], space.total_dofs)

    @classmethod
    def residual(cls, system: AssembledSystem, spec: ProblemSpec, u: DGFunction) -> np.ndarray:
        """R(u) = A u + N(u) - b"""
        if system.rhs is None:
            raise InvalidArgumentError("System has no right-hand side")
        return system.stiffness @ u.coefficients + cls.nonlinear_vector(spec, u) - system.rhs

    @classmethod
    def assemble_residual_and_jacobian(cls, space: DGSpace, spec: ProblemSpec, u: DGFunction,
                                       u_prev: DGFunction,
                                       system: Optional[AssembledSystem] = None) -> Tuple[np.ndarray, sparse.csr_matrix]:
        """
        Residual and Jacobian of the semilinear system at u

        Args:
            space: DG space of u and u_prev
            spec: Problem data
            u: Current iterate
            u_prev: Previous time level on the same space
            system: Reusable assembled operator with right-hand side

        Returns:
            (R(u), A + diag-block (1/eps) f'(u) phi_i phi_j)
        """
        if u.space is not space or u_prev.space is not space:
            raise InvalidArgumentError("Functions do not live on the assembly space")
        if system is None:
            system = cls.assemble(space, spec, u_prev)
        residual = cls.residual(system, spec, u)
        jacobian = (system.stiffness + cls.nonlinear_jacobian(spec, u)).tocsr()
        return residual, jacobian

    @staticmethod
    def check_coercivity(system: AssembledSystem, samples: int = 100, seed: int = 0) -> float:
        """
        Check a_h(v, v) > 0 on random nonzero coefficient vectors

        Returns:
            Smallest a_h(v, v) / ||v||^2 observed

        Raises:
            CoercivityError: if a sample is not positive
        """
        rng = np.random.default_rng(seed)
        vectors = rng.standard_normal((samples, system.size))
        products = np.einsum("sn,sn->s", vectors, (system.stiffness @ vectors.T).T)
        ratios = products / np.einsum("sn,sn->s", vectors, vectors)
        smallest = float(np.min(ratios))
        logger.debug(f"Coercivity check over {samples} samples: min a_h(v,v)/|v|^2 = {smallest:.6g}")
        if smallest <= 0.0:
            raise CoercivityError(
                f"a_h(v, v) <= 0 for a random vector (value {smallest:.6g}); increase sigma",
                smallest_value=smallest,
            )
        return smallest

    @staticmethod
    def dump_matrix(matrix: sparse.spmatrix, path: Path) -> Path:
        """Write a sparse matrix as 'row col value' lines"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        coo = sparse.coo_matrix(matrix)
        order = np.lexsort((coo.col, coo.row))
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order]):
                handle.write(f"{r} {c} {v:.17g}\n")
        logger.info(f"Matrix written to {path}")
        return path
