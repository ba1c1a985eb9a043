"""
Tests for reference quadrature rules and the orthonormal basis
"""
import numpy as np
import pytest

from service.basis_service import BasisService
from service.quadrature_service import QuadratureService


@pytest.mark.parametrize("degree", [1, 2, 4, 6, 10])
def test_element_rule_integrates_monomials(degree):
    """r^a s^b with a + b <= degree is integrated exactly"""
    rule = QuadratureService.element_rule(degree)
    r, s = rule.reference_points[:, 0], rule.reference_points[:, 1]
    for a in range(degree + 1):
        for b in range(degree + 1 - a):
            approx = float(np.sum(rule.weights * r ** a * s ** b))
            assert approx == pytest.approx(BasisService.monomial_moment(a, b), rel=1e-12, abs=1e-15)


def test_element_rule_points_inside_triangle():
    """Barycentric coordinates are non-negative and sum to one"""
    rule = QuadratureService.element_rule(6)
    assert np.all(rule.points >= 0)
    assert np.allclose(rule.points.sum(axis=1), 1.0)
    assert float(np.sum(rule.weights)) == pytest.approx(0.5)


@pytest.mark.parametrize("degree", [1, 3, 4, 10])
def test_edge_rule_integrates_powers(degree):
    """t^k on [0, 1] for k <= degree"""
    rule = QuadratureService.edge_rule(degree)
    for k in range(degree + 1):
        assert float(np.sum(rule.weights * rule.points ** k)) == pytest.approx(1.0 / (k + 1), rel=1e-12)


@pytest.mark.parametrize("level", [1, 2])
def test_composite_rule(level):
    """4**level copies of the base rule, still exact for polynomials"""
    base = QuadratureService.element_rule(4)
    rule = QuadratureService.composite_element_rule(4, level)
    assert rule.num_points == base.num_points * 4 ** level
    r, s = rule.reference_points[:, 0], rule.reference_points[:, 1]
    assert float(np.sum(rule.weights * r ** 2 * s ** 2)) == pytest.approx(BasisService.monomial_moment(2, 2))


def test_edge_rule_has_no_reference_points():
    """reference_points belongs to element rules"""
    with pytest.raises(ValueError):
        _ = QuadratureService.edge_rule(2).reference_points


@pytest.mark.parametrize("degree", [1, 2, 3, 4])
def test_basis_is_orthonormal(degree):
    """Gram matrix of the basis on the reference triangle is the identity"""
    basis = BasisService.get(degree)
    rule = QuadratureService.element_rule(2 * degree)
    phi = basis.values(rule.reference_points)
    gram = np.einsum("q,qi,qj->ij", rule.weights, phi, phi)
    assert basis.size == BasisService.dofs_per_element(degree)
    assert np.allclose(gram, np.eye(basis.size), atol=1e-12)


def test_basis_gradients_match_finite_differences():
    """Analytic reference gradients of the P2 basis"""
    basis = BasisService.get(2)
    point = np.array([0.2, 0.3])
    step = 1e-6
    numeric = np.stack([
        (basis.values(point + step * e) - basis.values(point - step * e)) / (2 * step)
        for e in np.eye(2)
    ], axis=-1)
    assert np.allclose(basis.gradients(point), numeric, atol=1e-7)


def test_basis_degree_out_of_range():
    with pytest.raises(ValueError):
        BasisService.get(5)
