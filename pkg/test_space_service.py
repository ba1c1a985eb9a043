"""
Tests for DG spaces, projection, evaluation and transfer between meshes
"""
import numpy as np
import pytest

from model.dg_space import DGFunction
from model.fields import ScalarField
from service.mesh_service import MeshService
from service.space_service import SpaceService
from utils.errors import InvalidArgumentError


def linear(x, y):
    return 0.3 * x - 1.2 * y + 0.7


@pytest.fixture
def space1():
    return SpaceService.create_space(MeshService.uniform_initial_mesh(1), 1)


@pytest.fixture
def indicator_on_first(space1):
    """1 on the first active element, 0 elsewhere"""
    ones = SpaceService.project_l2(space1, ScalarField(kind="constant", value=1.0)).local
    coefficients = np.zeros_like(ones)
    coefficients[0] = ones[0]
    return DGFunction(space=space1, coefficients=coefficients.ravel())


class TestCreateSpace:
    """Space construction"""

    def test_dof_counts(self, space1):
        assert space1.dofs_per_element == 3
        assert space1.total_dofs == 24
        space2 = SpaceService.create_space(space1.mesh, 2)
        assert space2.total_dofs == 48

    @pytest.mark.parametrize("degree", [0, 5])
    def test_degree_out_of_range(self, degree):
        with pytest.raises(InvalidArgumentError):
            SpaceService.create_space(MeshService.uniform_initial_mesh(1), degree)

    def test_local_mass_is_scaled_identity(self, space1):
        """Orthonormal basis: (phi_i, phi_j)_E = det(J_E) delta_ij"""
        mass = np.einsum("nq,qi,qj->nij", space1.quad_weights, space1.phi, space1.phi)
        expected = space1.determinants[:, None, None] * np.eye(3)[None]
        assert np.allclose(mass, expected, atol=1e-12)

    def test_coefficient_length_checked(self, space1):
        with pytest.raises(ValueError):
            DGFunction(space=space1, coefficients=np.zeros(5))

    def test_non_finite_coefficients_rejected(self, space1):
        coefficients = np.zeros(space1.total_dofs)
        coefficients[3] = np.nan
        with pytest.raises(ValueError):
            DGFunction(space=space1, coefficients=coefficients)


class TestProjection:
    """Elementwise L2 projection"""

    def test_constant_reproduced(self, space1):
        u = SpaceService.project_l2(space1, ScalarField(kind="constant", value=2.5))
        assert np.allclose(u.values, 2.5, atol=1e-12)
        assert np.allclose(u.gradients, 0.0, atol=1e-12)
        assert SpaceService.integrate(u) == pytest.approx(10.0)

    def test_linear_reproduced(self, space1):
        """P1 contains linear functions"""
        u = SpaceService.project_l2(space1, linear)
        points = space1.quad_points
        assert np.allclose(u.values, linear(points[..., 0], points[..., 1]), atol=1e-12)
        assert np.allclose(SpaceService.local_l2_errors(u, linear), 0.0, atol=1e-12)
        assert np.allclose(u.gradients, np.array([0.3, -1.2]), atol=1e-12)

    def test_projection_is_orthogonal(self):
        """(g - g_h, p) = 0 for every basis function"""
        space = SpaceService.create_space(MeshService.uniform_initial_mesh(2), 1)
        field = ScalarField(kind="cosine", value=1.0)
        g_h = SpaceService.project_l2(space, field)
        points = space.quad_points
        residual = field(points[..., 0], points[..., 1]) - g_h.values
        moments = np.einsum("nq,nq,qb->nb", space.quad_weights, residual, space.phi)
        assert np.allclose(moments, 0.0, atol=1e-12)

    def test_disk_mass(self):
        """Composite quadrature captures the area of the disk x^2 + y^2 <= 0.3"""
        space = SpaceService.create_space(MeshService.uniform_initial_mesh(4), 1)
        u = SpaceService.project_l2(space, ScalarField(kind="disk", radius_squared=0.3), subdivisions=2)
        assert SpaceService.integrate(u) == pytest.approx(np.pi * 0.3, abs=0.03)

    def test_vector_projection(self, space1):
        """Components of a linear vector field are reproduced"""
        vx, vy = SpaceService.project_components(space1, lambda x, y: np.stack([x, 2 * y], axis=-1))
        points = space1.quad_points
        assert np.allclose(vx.values, points[..., 0], atol=1e-12)
        assert np.allclose(vy.values, 2 * points[..., 1], atol=1e-12)

    def test_scalar_projection_rejects_vectors(self, space1):
        with pytest.raises(InvalidArgumentError):
            SpaceService.project_l2(space1, lambda x, y: np.stack([x, y], axis=-1))

    def test_l2_norm(self, space1):
        u = SpaceService.project_l2(space1, ScalarField(kind="constant", value=1.0))
        assert SpaceService.l2_norm(u) == pytest.approx(2.0)


class TestEvaluation:
    """Point evaluation, jumps and averages"""

    def test_evaluate_constant(self, space1):
        u = SpaceService.project_l2(space1, ScalarField(kind="constant", value=3.0))
        assert SpaceService.evaluate(u, 5, (1 / 3, 1 / 3)) == pytest.approx(3.0)
        assert np.allclose(SpaceService.evaluate_gradient(u, 5, (0.2, 0.2)), 0.0, atol=1e-12)

    def test_evaluate_at_physical_points(self, space1):
        u = SpaceService.project_l2(space1, linear)
        centroid = space1.mesh.active_coordinates[2].mean(axis=0)
        value = SpaceService.evaluate_at(u, 2, centroid[None, :])
        assert value[0] == pytest.approx(linear(centroid[0], centroid[1]))

    def test_evaluate_inactive_element(self, space1):
        refined = MeshService.refine(space1.mesh, [0])
        u = SpaceService.zero(SpaceService.create_space(refined, 1))
        with pytest.raises(InvalidArgumentError):
            SpaceService.evaluate(u, 0, (0.1, 0.1))

    def test_jump_of_single_element_indicator(self, space1, indicator_on_first):
        """[u] = n on edges of the first element, 0 elsewhere"""
        quadrature = space1.edge_quadrature
        touching = np.any(quadrature.elements == 0, axis=1)
        for e in range(space1.mesh.edges.num_edges):
            jump = SpaceService.jump(indicator_on_first, e)
            expected = quadrature.normals[e] if touching[e] else np.zeros(2)
            assert np.allclose(jump, expected[None, :], atol=1e-12)

    def test_average_on_interior_edge(self, space1, indicator_on_first):
        quadrature = space1.edge_quadrature
        e = int(np.flatnonzero(quadrature.interior & (quadrature.elements[:, 0] == 0))[0])
        assert np.allclose(SpaceService.average(indicator_on_first, e), 0.5)

    def test_element_means(self, space1):
        u = SpaceService.project_l2(space1, ScalarField(kind="constant", value=1.5))
        means = SpaceService.element_means(u)
        assert set(means) == set(int(e) for e in space1.mesh.active_ids)
        assert all(m == pytest.approx(1.5) for m in means.values())

    def test_coefficient_rows(self, space1):
        rows = SpaceService.coefficient_rows(SpaceService.zero(space1))
        assert len(rows) == 24
        assert rows[0] == (0, 0, 0.0)


class TestTransfer:
    """Moving functions across refinement and coarsening"""

    def test_identity(self, space1):
        u = SpaceService.project_l2(space1, linear)
        assert SpaceService.transfer(u, space1) is u

    def test_refinement_is_exact(self, space1):
        """Restriction to children reproduces the parent polynomial"""
        u = SpaceService.project_l2(space1, ScalarField(kind="cosine"))
        refined = MeshService.refine(space1.mesh, [0, 6])
        new_space = SpaceService.create_space(refined, 1)
        v = SpaceService.transfer(u, new_space)
        assert SpaceService.integrate(v) == pytest.approx(SpaceService.integrate(u), abs=1e-12)
        for position, element_id in enumerate(refined.active_ids):
            centroid = refined.coordinates([element_id])[0].mean(axis=0)
            ancestor = int(element_id)
            while not space1.mesh.is_active(ancestor):
                ancestor = int(refined.parent[ancestor])
            expected = SpaceService.evaluate_at(u, ancestor, centroid[None, :])[0]
            assert SpaceService.evaluate_at(v, int(element_id), centroid[None, :])[0] == pytest.approx(expected)

    def test_kept_elements_copied(self, space1):
        u = SpaceService.project_l2(space1, ScalarField(kind="cosine"))
        refined = MeshService.refine(space1.mesh, [0])
        v = SpaceService.transfer(u, SpaceService.create_space(refined, 1))
        kept = refined.active_position[7]
        assert np.array_equal(v.local[kept], u.local[7])

    def test_coarsening_projects_and_keeps_mass(self, space1):
        """Merging siblings is the L2 projection of the pieces"""
        fine_mesh = MeshService.refine(space1.mesh, [0])
        fine_space = SpaceService.create_space(fine_mesh, 1)
        u = SpaceService.project_l2(fine_space, ScalarField(kind="cosine"))
        children = [int(e) for e in fine_mesh.active_ids if fine_mesh.generation[e] > 0]
        coarse_space = SpaceService.create_space(MeshService.coarsen(fine_mesh, children), 1)
        v = SpaceService.transfer(u, coarse_space)
        assert coarse_space.num_elements == 8
        assert SpaceService.integrate(v) == pytest.approx(SpaceService.integrate(u), abs=1e-12)

    def test_coarsening_keeps_linears(self, space1):
        fine_mesh = MeshService.refine(space1.mesh, [0])
        u = SpaceService.project_l2(SpaceService.create_space(fine_mesh, 1), linear)
        children = [int(e) for e in fine_mesh.active_ids if fine_mesh.generation[e] > 0]
        coarse_space = SpaceService.create_space(MeshService.coarsen(fine_mesh, children), 1)
        v = SpaceService.transfer(u, coarse_space)
        points = coarse_space.quad_points
        assert np.allclose(v.values, linear(points[..., 0], points[..., 1]), atol=1e-12)

    def test_unrelated_mesh_rejected(self, space1):
        u = SpaceService.zero(space1)
        other = SpaceService.create_space(MeshService.uniform_initial_mesh(1), 1)
        with pytest.raises(InvalidArgumentError):
            SpaceService.transfer(u, other)

    def test_degree_mismatch_rejected(self, space1):
        refined = MeshService.refine(space1.mesh, [0])
        with pytest.raises(InvalidArgumentError):
            SpaceService.transfer(SpaceService.zero(space1), SpaceService.create_space(refined, 2))
