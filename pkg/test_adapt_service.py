"""
Tests for marking, initial pre-refinement and the adaptation pass
"""
import numpy as np
import pytest
from pydantic import ValidationError

from model.adaptation import MarkSets
from model.fields import ScalarField, VelocityField
from model.indicator import IndicatorTable
from model.problem_spec import ProblemSpec
from service.adapt_service import AdaptService
from service.estimator_service import EstimatorService
from service.mesh_service import MeshService
from service.space_service import SpaceService


def make_spec(**kwargs):
    values = dict(epsilon=0.01, velocity=VelocityField(kind="expanding", v0=10.0), tau=0.001, final_time=0.001)
    values.update(kwargs)
    return ProblemSpec(**values)


@pytest.fixture
def table():
    """eta^2 = 4e-2, 1e-6, 2.5e-3, 0 on elements of generations 0, 1, 1, 0"""
    return IndicatorTable(
        element_ids=np.array([10, 11, 12, 13]),
        generations=np.array([0, 1, 1, 0]),
        eta_R=np.array([0.2, 0.001, 0.05, 0.0]),
        eta_0=np.zeros(4),
        theta=np.zeros(4),
        kappa0=1.0,
    )


class TestMark:
    """Threshold marking"""

    def test_thresholds(self, table):
        marks = AdaptService.mark(table, make_spec(stol_r=1e-2, stol_c=1e-5))
        assert marks.refine_set == frozenset({10})
        assert marks.coarsen_set == frozenset({11})

    def test_initial_elements_never_coarsened(self, table):
        """Element 13 has eta = 0 but belongs to the initial mesh"""
        marks = AdaptService.mark(table, make_spec(stol_r=1e-2, stol_c=1e-5))
        assert 13 not in marks.coarsen_set

    def test_monotone_in_tolerances(self, table):
        """A larger stol_r marks fewer elements, a larger stol_c more"""
        loose = AdaptService.mark(table, make_spec(stol_r=1e-1, stol_c=1e-2))
        tight = AdaptService.mark(table, make_spec(stol_r=1e-3, stol_c=1e-7))
        assert loose.refine_set <= tight.refine_set
        assert tight.coarsen_set <= loose.coarsen_set
        assert tight.refine_set == frozenset({10, 12})
        assert loose.coarsen_set == frozenset({11, 12})

    def test_mark_sets_disjoint(self):
        with pytest.raises(ValidationError):
            MarkSets(refine_set=frozenset({1, 2}), coarsen_set=frozenset({2}))
        assert MarkSets().is_empty


class TestPrerefine:
    """Initial mesh T_h^0"""

    def test_smooth_zero_data_keeps_mesh(self):
        mesh0 = MeshService.uniform_initial_mesh(2)
        spec = make_spec(initial_condition=ScalarField(kind="zero"))
        assert AdaptService.prerefine_initial(spec, mesh0) is mesh0

    def test_no_passes(self):
        mesh0 = MeshService.uniform_initial_mesh(2)
        spec = make_spec(initial_condition=ScalarField(kind="disk"), max_prerefine=0)
        assert AdaptService.prerefine_initial(spec, mesh0) is mesh0

    def test_disk_refined_near_its_edge(self):
        """Refinement follows the discontinuity at x^2 + y^2 = 0.3"""
        mesh0 = MeshService.uniform_initial_mesh(2)
        spec = make_spec(initial_condition=ScalarField(kind="disk"), max_prerefine=2)
        mesh = AdaptService.prerefine_initial(spec, mesh0, subdivisions=1)
        assert mesh.num_active > mesh0.num_active
        assert mesh.is_conforming()
        refined = mesh.active_ids[mesh.generation[mesh.active_ids] > 0]
        centroids = mesh.coordinates(refined).mean(axis=1)
        distance = np.abs(np.linalg.norm(centroids, axis=1) - np.sqrt(0.3))
        assert np.min(distance) < 0.3


class TestAdaptOnce:
    """One mark/refine/coarsen/transfer pass"""

    def test_nothing_marked(self):
        """Zero state: no indicator above stol_r and only initial elements"""
        space = SpaceService.create_space(MeshService.uniform_initial_mesh(1), 1)
        zero = SpaceService.zero(space)
        result = AdaptService.adapt_once(space.mesh, space, zero, zero, make_spec(), step=1)
        assert not result.changed
        assert result.mesh is space.mesh
        assert result.u_prev is zero
        assert result.elements_before == result.elements_after == 8

    def test_refinement_moves_previous_solution(self):
        spec = make_spec(initial_condition=ScalarField(kind="disk"), stol_r=1e-8, stol_c=1e-12)
        space = SpaceService.create_space(MeshService.uniform_initial_mesh(2), 1)
        u_prev = SpaceService.project_l2(space, spec.initial_condition, subdivisions=1)
        indicators = EstimatorService.estimate(u_prev, u_prev, spec)
        result = AdaptService.adapt_once(space.mesh, space, u_prev, u_prev, spec, indicators=indicators, step=3)
        assert result.changed
        assert result.step == 3
        assert result.elements_after > result.elements_before
        assert result.u_prev.space is result.space
        assert result.space.mesh is result.mesh
        assert SpaceService.integrate(result.u_prev) == pytest.approx(SpaceService.integrate(u_prev), abs=1e-12)
        assert result.marks.refine_set

    def test_mixed_refine_and_coarsen(self):
        """Element 7 is refined with its partner 6 while the four children of 0 and 1 merge back"""
        spec = make_spec(stol_r=1e-2, stol_c=1e-5)
        mesh = MeshService.refine(MeshService.uniform_initial_mesh(1), [0])
        children = sorted(int(c) for p in (0, 1) for c in mesh.children[p])
        space = SpaceService.create_space(mesh, 1)
        active = mesh.active_ids
        eta_R = np.full(len(active), np.sqrt(1e-3))
        eta_R[np.isin(active, children)] = 0.0
        eta_R[active == 7] = 1.0
        table = IndicatorTable(
            element_ids=active,
            generations=mesh.generation[active],
            eta_R=eta_R,
            eta_0=np.zeros(len(active)),
            theta=np.zeros(len(active)),
            kappa0=1.0,
        )
        u_prev = SpaceService.project_l2(space, ScalarField(kind="linear", a=1.0, b=2.0))
        result = AdaptService.adapt_once(mesh, space, u_prev, u_prev, spec, indicators=table, step=2)
        assert result.marks.refine_set == frozenset({7})
        assert result.marks.coarsen_set == frozenset(children)
        assert result.elements_before == 10
        assert result.elements_after == 10
        new_children = {int(c) for p in (6, 7) for c in result.mesh.children[p]}
        assert set(result.mesh.active_ids.tolist()) == {0, 1, 2, 3, 4, 5} | new_children
        assert result.mesh.is_conforming()
        # the linear u_prev survives both operations exactly
        exact = SpaceService.project_l2(result.space, ScalarField(kind="linear", a=1.0, b=2.0))
        assert np.allclose(result.u_prev.coefficients, exact.coefficients, atol=1e-12)
