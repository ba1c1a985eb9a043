"""
Tests for the advac command line
"""
from unittest.mock import patch

import pytest

import advac
from logging_config import LoggingConfig
from model.verification import CheckResult
from service.config_service import ConfigService
from service.verification_service import VerificationService
from utils.dependency_checker import DependencyChecker


@pytest.fixture(autouse=True)
def reset_logging():
    """Each invocation installs fresh handlers"""
    LoggingConfig.reset()
    yield
    LoggingConfig.reset()


def run_cli(tmp_path, *args):
    return advac.main(["--log-dir", str(tmp_path / "logs"), *args])


def test_config_command_writes_yaml(tmp_path):
    target = tmp_path / "sheer.yaml"
    assert run_cli(tmp_path, "config", "--problem", "sheer", "--set", "spec.tau=0.002", "--out", str(target)) == 0
    config = ConfigService.load(target)
    assert config.problem == "sheer"
    assert config.spec.tau == 0.002
    assert (tmp_path / "logs" / "advac.log").exists()


def test_run_command_writes_outputs(tmp_path):
    out = tmp_path / "run"
    assert run_cli(tmp_path, "run", "--problem", "manufactured-linear", "--out", str(out)) == 0
    assert (out / "timeseries.csv").exists()
    assert (out / "config.yaml").exists()
    assert (out / "manufactured-linear_uniform_1.vtk").exists()
    assert ConfigService.load(out / "config.yaml").output_dir == str(out)


def test_run_from_config_file(tmp_path):
    source = tmp_path / "m.yaml"
    assert run_cli(tmp_path, "config", "--problem", "manufactured-linear", "--set", "uniform_n=2",
                   "--out", str(source)) == 0
    out = tmp_path / "from_file"
    assert run_cli(tmp_path, "run", "--config", str(source), "--out", str(out)) == 0
    assert (out / "timeseries.csv").exists()


@pytest.mark.parametrize("args", [
    ["run", "--problem", "vortex"],
    ["run", "--problem", "sheer", "--set", "spec.tau=-1"],
    ["config", "--problem", "sheer", "--set", "bad-override", "--out", "unused.yaml"],
])
def test_configuration_errors_exit_2(tmp_path, args):
    assert run_cli(tmp_path, *args) == 2


def test_missing_config_file_exit_2(tmp_path):
    assert run_cli(tmp_path, "run", "--config", str(tmp_path / "missing.yaml")) == 2


def test_newton_failure_exit_3(tmp_path):
    """A nonlinear step cannot converge in one iteration to 1e-30"""
    code = run_cli(tmp_path, "run", "--problem", "manufactured-nonlinear", "--out", str(tmp_path / "out"),
                   "--set", "newton.max_iters=1", "--set", "newton.abs_tol=1e-30", "--set", "newton.rel_tol=1e-30")
    assert code == 3


def test_non_coercive_data_exit_3(tmp_path):
    code = run_cli(tmp_path, "run", "--problem", "manufactured-linear", "--out", str(tmp_path / "out"),
                   "--set", "spec.velocity.a=-3000", "--set", "spec.velocity.c=-3000")
    assert code == 3


def test_convergence_command(tmp_path):
    out = tmp_path / "conv"
    assert run_cli(tmp_path, "convergence", "--problem", "manufactured-linear", "--levels", "2",
                   "--out", str(out)) == 0
    assert (out / "convergence.csv").read_text().startswith("n,h,dofs")


def test_verify_command(tmp_path):
    assert run_cli(tmp_path, "verify") == 0


def test_failed_verification_exit_3(tmp_path):
    failing = [CheckResult(name="jacobian", passed=False, detail="relative error 1.0")]
    with patch.object(VerificationService, "run_all", return_value=failing):
        assert run_cli(tmp_path, "verify") == 3


def test_verify_missing_core_package_exit_2(tmp_path):
    with patch.object(DependencyChecker, "check_package", side_effect=lambda name: name != "scipy"):
        assert run_cli(tmp_path, "verify") == 2


def test_run_without_meshio_skips_snapshots(tmp_path):
    out = tmp_path / "run"
    with patch.object(DependencyChecker, "check_package", side_effect=lambda name: name != "meshio"):
        assert run_cli(tmp_path, "run", "--problem", "manufactured-linear", "--out", str(out)) == 0
    assert (out / "timeseries.csv").exists()
    assert not list(out.glob("*.vtk"))
