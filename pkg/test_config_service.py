"""
Tests for experiment files and command-line overrides
"""
import pytest

from service.config_service import ConfigService
from service.experiment_service import ExperimentService
from utils.errors import ConfigError


@pytest.fixture
def sheer():
    return ExperimentService.builtin("sheer")


class TestFlatYaml:
    """One dotted key per line"""

    def test_flatten_unflatten(self):
        nested = {"a": 1, "spec": {"tau": 0.1, "velocity": {"kind": "zero"}}}
        flat = ConfigService.flatten(nested)
        assert flat == {"a": 1, "spec.tau": 0.1, "spec.velocity.kind": "zero"}
        assert ConfigService.unflatten(flat) == nested

    def test_conflicting_keys(self):
        with pytest.raises(ConfigError):
            ConfigService.unflatten({"spec": 1, "spec.tau": 0.1})

    def test_text_uses_dotted_keys(self, sheer):
        text = ConfigService.to_text(sheer)
        assert "spec.velocity.kind: sheer\n" in text
        assert "problem: sheer\n" in text

    def test_round_trip(self, sheer, tmp_path):
        """dump -> load gives the same configuration and the same bytes"""
        first = ConfigService.dump(sheer, tmp_path / "a.yaml")
        loaded = ConfigService.load(first)
        assert loaded == sheer
        second = ConfigService.dump(loaded, tmp_path / "b.yaml")
        assert first.read_bytes() == second.read_bytes()

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            ConfigService.load(tmp_path / "missing.yaml")

    def test_not_a_mapping(self, tmp_path):
        path = tmp_path / "list.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigError):
            ConfigService.load(path)


class TestOverrides:
    """key=value strings"""

    def test_parse_scalar_types(self):
        assert ConfigService.parse_override("spec.tau=0.002") == ("spec.tau", 0.002)
        assert ConfigService.parse_override("mode=uniform") == ("mode", "uniform")
        assert ConfigService.parse_override("initial_n=8") == ("initial_n", 8)

    @pytest.mark.parametrize("override", ["spec.tau", "=3", "mode=[unclosed"])
    def test_malformed(self, override):
        with pytest.raises(ConfigError):
            ConfigService.parse_override(override)

    def test_apply(self, sheer):
        changed = ConfigService.apply_overrides(sheer, ["spec.tau=0.002", "spec.velocity.v0=50"])
        assert changed.spec.tau == 0.002
        assert changed.spec.velocity.v0 == 50.0
        assert changed.spec.epsilon == sheer.spec.epsilon

    @pytest.mark.parametrize("override", ["spec.tau=-1", "spec.unknown=3", "mode=sideways"])
    def test_invalid_values(self, sheer, override):
        with pytest.raises(ConfigError):
            ConfigService.apply_overrides(sheer, [override])

    def test_load_with_overrides(self, sheer, tmp_path):
        path = ConfigService.dump(sheer, tmp_path / "sheer.yaml")
        loaded = ConfigService.load(path, ["mode=uniform"])
        assert loaded.mode == "uniform"
        assert loaded.run_name == "sheer_uniform"
