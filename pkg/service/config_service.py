"""
Config service: flat dotted-key YAML experiment files and command-line overrides
"""
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, Optional

import yaml
from pydantic import ValidationError

from model.experiment import ExperimentConfig
from utils.errors import ConfigError

logger = logging.getLogger(__name__)


class ConfigService:
    """Serialises ExperimentConfig as one `dotted.key: value` line per field"""

    @staticmethod
    def flatten(data: Dict[str, Any], prefix: str = "") -> Dict[str, Any]:
        flat: Dict[str, Any] = {}
        for key, value in data.items():
            dotted = f"{prefix}{key}"
            if isinstance(value, dict):
                flat.update(ConfigService.flatten(value, prefix=f"{dotted}."))
            else:
                flat[dotted] = value
        return flat

    @staticmethod
    def unflatten(flat: Dict[str, Any]) -> Dict[str, Any]:
        nested: Dict[str, Any] = {}
        for dotted, value in flat.items():
            node = nested
            parts = str(dotted).split(".")
            for part in parts[:-1]:
                child = node.setdefault(part, {})
                if not isinstance(child, dict):
                    raise ConfigError(f"Key '{dotted}' conflicts with scalar key '{part}'")
                node = child
            node[parts[-1]] = value
        return nested

    @classmethod
    def to_text(cls, config: ExperimentConfig) -> str:
        flat = cls.flatten(config.model_dump(mode="json"))
        return yaml.safe_dump(flat, sort_keys=False, default_flow_style=None)

    @classmethod
    def from_mapping(cls, flat: Dict[str, Any], overrides: Optional[Iterable[str]] = None) -> ExperimentConfig:
        flat = dict(flat)
        for override in overrides or ():
            key, value = cls.parse_override(override)
            flat[key] = value
        try:
            return ExperimentConfig.model_validate(cls.unflatten(flat))
        except ValidationError as e:
            raise ConfigError(f"Invalid experiment configuration: {e}") from e

    @staticmethod
    def parse_override(override: str):
        """'spec.tau=0.002' -> ('spec.tau', 0.002), values parsed as YAML scalars"""
        if "=" not in override:
            raise ConfigError(f"Override '{override}' is not of the form key=value")
        key, raw = override.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"Override '{override}' has an empty key")
        try:
            return key, yaml.safe_load(raw)
        except yaml.YAMLError as e:
            raise ConfigError(f"Cannot parse value of override '{override}': {e}") from e

    @classmethod
    def apply_overrides(cls, config: ExperimentConfig, overrides: Iterable[str]) -> ExperimentConfig:
        return cls.from_mapping(cls.flatten(config.model_dump(mode="json")), overrides)

    @classmethod
    def dump(cls, config: ExperimentConfig, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(cls.to_text(config))
        logger.info(f"Configuration written to {path}")
        return path

    @classmethod
    def load(cls, path: Path, overrides: Optional[Iterable[str]] = None) -> ExperimentConfig:
        """
        Read an experiment file

        Args:
            path: YAML file with flat dotted keys
            overrides: key=value strings applied on top of the file

        Returns:
            Validated ExperimentConfig

        Raises:
            ConfigError: if the file is unreadable or a value is invalid
        """
        path = Path(path)
        try:
            with open(path, "r", encoding="utf-8") as handle:
                flat = yaml.safe_load(handle)
        except (OSError, yaml.YAMLError) as e:
            raise ConfigError(f"Cannot read configuration {path}: {e}") from e
        if not isinstance(flat, dict):
            raise ConfigError(f"Configuration {path} is not a key-value mapping")
        return cls.from_mapping(flat, overrides)
