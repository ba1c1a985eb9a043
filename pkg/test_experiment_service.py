"""
Tests for the built-in experiments and their drivers
"""
import math

import pytest
from pydantic import ValidationError

from model.experiment import ExperimentConfig
from service.experiment_service import ExperimentService
from utils.errors import ConfigError


class TestBuiltins:
    """Registry of problems"""

    def test_problem_names(self):
        assert ExperimentService.problem_names() == [
            "expanding", "sheer", "manufactured-linear", "manufactured-nonlinear",
        ]

    def test_expanding_desk(self):
        config = ExperimentService.builtin("expanding")
        spec = config.spec
        assert config.mode == "adaptive"
        assert config.run_name == "expanding_adaptive"
        assert spec.epsilon == 0.001
        assert spec.velocity.kind == "expanding" and spec.velocity.v0 == 10.0
        assert spec.initial_condition.kind == "disk"
        assert spec.tau == 0.001 and spec.num_steps == 20
        assert spec.stol_r == 1e-2 and spec.stol_c == 1e-5
        assert config.snapshot_times == [0.0, 0.01, 0.02]

    def test_expanding_paper_scale(self):
        config = ExperimentService.builtin("expanding", "paper")
        assert config.spec.final_time == pytest.approx(0.06)
        assert config.uniform_n == 64

    def test_sheer(self):
        config = ExperimentService.builtin("sheer")
        assert config.spec.epsilon == 0.01
        assert config.spec.velocity.kind == "sheer" and config.spec.velocity.v0 == 100.0
        assert config.spec.initial_condition.half_width == 0.1

    @pytest.mark.parametrize("name, reaction", [
        ("manufactured-linear", "none"),
        ("manufactured-nonlinear", "allen_cahn"),
    ])
    def test_manufactured(self, name, reaction):
        config = ExperimentService.builtin(name)
        assert config.mode == "uniform"
        assert config.spec.reaction == reaction
        assert config.spec.manufactured is not None
        assert config.spec.num_steps == 1

    def test_unknown_problem(self):
        with pytest.raises(ConfigError):
            ExperimentService.builtin("vortex")

    def test_unknown_scale(self):
        with pytest.raises(ConfigError):
            ExperimentService.builtin("sheer", "huge")

    def test_unknown_manufactured_kind(self):
        with pytest.raises(ConfigError):
            ExperimentService.builtin_manufactured("quadratic")

    def test_snapshot_outside_run_rejected(self):
        config = ExperimentService.builtin("sheer")
        data = config.model_dump()
        data["snapshot_times"] = [0.5]
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate(data)


class TestDriver:
    """Initial mesh and adaptation settings"""

    def test_uniform_driver(self):
        config = ExperimentService.builtin("manufactured-linear")
        driver = ExperimentService.build_driver(config)
        assert not driver.enabled
        assert driver.initial_mesh.num_active == 8 * 4 * 4

    def test_adaptive_driver_prerefines(self):
        config = ExperimentService.builtin("expanding")
        driver = ExperimentService.build_driver(config)
        assert driver.enabled
        assert driver.max_cycles == 1
        assert driver.initial_mesh.num_active > 8 * config.initial_n ** 2
        assert driver.initial_mesh.is_conforming()


def test_run_manufactured():
    """One uniform step of the linear manufactured problem"""
    result = ExperimentService.run(ExperimentService.builtin("manufactured-linear"))
    assert len(result.records) == 1
    assert result.records[0].dofs == 3 * 128
    assert [s.k for s in result.snapshots] == [1]


class TestPlateau:
    """Upper constant state of the bulk phase"""

    def test_expanding_stays_at_one(self):
        assert ExperimentService.builtin("expanding").spec.plateau_value() == 1.0

    def test_sheer_compression(self):
        spec = ExperimentService.builtin("sheer").spec
        assert spec.plateau_value() == pytest.approx((3.0 + math.sqrt(5.0)) / 4.0)

    def test_linear_reaction(self):
        spec = ExperimentService.builtin("manufactured-linear").spec
        assert spec.plateau_value() == 1.0
