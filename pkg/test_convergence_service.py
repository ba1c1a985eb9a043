"""
Tests for uniform refinement studies on manufactured solutions
"""
import pytest

from service.convergence_service import ConvergenceService
from service.experiment_service import ExperimentService
from utils.errors import ConfigError


def test_observed_rates():
    """Halving h and quartering the error is order 2"""
    h = [1.0, 0.5, 0.25]
    errors = [1.0, 0.25, 0.0625]
    assert ConvergenceService.observed_rates(h, errors) == pytest.approx([2.0, 2.0])
    assert ConvergenceService.fitted_order(h, errors) == pytest.approx(2.0)


def test_requires_manufactured_solution():
    with pytest.raises(ConfigError):
        ConvergenceService.run(ExperimentService.builtin("sheer"), [2])


def test_errors_decrease():
    """Two coarse levels of the linear manufactured problem"""
    report = ConvergenceService.run(ExperimentService.builtin("manufactured-linear"), [2, 4])
    coarse, fine = report.levels
    assert fine.dofs == 4 * coarse.dofs
    assert fine.l2_error < coarse.l2_error
    assert fine.dg_error < coarse.dg_error
    assert len(report.l2_rates) == 1
    assert coarse.effectivity > 0
    assert len(report.csv_rows()) == 2


@pytest.mark.slow
def test_linear_manufactured_orders():
    """L2 order near 2, dG order near 1, stable effectivity over n = 4..32"""
    report = ConvergenceService.run(ExperimentService.builtin("manufactured-linear"))
    assert 1.8 <= report.l2_order <= 2.2
    assert 0.8 <= report.dg_order <= 1.2
    assert report.effectivity_spread <= 30.0

