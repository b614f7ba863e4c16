"""
Configuration Manager
=====================

Loads run configs from TOML or JSON files, applies command-line overrides
and echoes the source text into the run directory.
"""

import json
from pathlib import Path
from typing import Any, Dict, Optional

import structlog
import toml
from pydantic import ValidationError

from emotrust.config.settings import EngineSettings, RunConfig
from emotrust.core.exceptions import ConfigError

logger = structlog.get_logger(__name__)

CONFIG_ECHO = "config.toml"


class ConfigManager:
    """
    Run-config loader.

    Priority (highest first):
    1. Command line overrides (``--seed``, ``--out``, ``--folds``)
    2. Config file given with ``--config``
    3. Defaults declared on ``RunConfig``
    """

    def __init__(self, config_file: Optional[Path] = None):
        self.config_file = Path(config_file) if config_file else None
        self.config: Optional[RunConfig] = None
        self.source_text: Optional[str] = None

    def load_config(
        self,
        seed: Optional[int] = None,
        output_dir: Optional[Path] = None,
        folds: Optional[int] = None,
    ) -> RunConfig:
        """
        Load, override and validate the run config.

        Raises:
            ConfigError: If the file is unreadable or fails validation
        """
        config_data: Dict[str, Any] = {}
        if self.config_file is not None:
            if not self.config_file.is_file():
                raise ConfigError(
                    "Config file not found", config_path=str(self.config_file)
                )
            logger.info("Loading run config", file=str(self.config_file))
            self.source_text = self._read_text(self.config_file)
            if self.config_file.suffix.lower() == ".json":
                config_data = self._parse_json(self.source_text)
            else:
                config_data = self._parse_toml(self.source_text)

        if seed is not None:
            config_data["seed"] = seed
        if output_dir is not None:
            config_data["output_dir"] = str(output_dir)
        if folds is not None:
            config_data.setdefault("data", {})
            if not isinstance(config_data["data"], dict):
                raise ConfigError("[data] must be a table", config_key="data")
            config_data["data"]["folds"] = folds

        try:
            self.config = RunConfig.model_validate(config_data)
        except ValidationError as e:
            first = e.errors()[0]
            key = ".".join(str(part) for part in first["loc"])
            raise ConfigError(
                f"Invalid run config: {key}: {first['msg']}",
                config_path=str(self.config_file) if self.config_file else None,
                config_key=key,
                cause=e,
            )

        logger.debug("Run config loaded", output_dir=str(self.config.output_dir))
        return self.config

    def echo_config(self, output_dir: Optional[Path] = None) -> Path:
        """
        Write the config into the run directory for provenance.

        The original file text is copied verbatim; runs configured only by
        flags get the effective config dumped as TOML.
        """
        if self.config is None:
            raise ConfigError("No configuration loaded")
        target = Path(output_dir or self.config.output_dir) / CONFIG_ECHO
        if self.source_text is not None:
            text = self.source_text
        else:
            text = toml.dumps(self.config.model_dump(mode="json", exclude_none=True))
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(text, encoding="utf-8")
        except OSError as e:
            raise ConfigError(
                f"Failed to echo configuration: {e}", config_path=str(target), cause=e
            )
        return target

    @staticmethod
    def engine_settings() -> EngineSettings:
        try:
            return EngineSettings()
        except ValidationError as e:
            raise ConfigError(f"Invalid EMOTRUST_ environment settings: {e}", cause=e)

    def _read_text(self, file_path: Path) -> str:
        try:
            return file_path.read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(
                f"Failed to read config file: {e}", config_path=str(file_path), cause=e
            )

    def _parse_toml(self, text: str) -> Dict[str, Any]:
        try:
            return toml.loads(text)
        except toml.TomlDecodeError as e:
            raise ConfigError(
                f"Failed to parse TOML: {e}", config_path=str(self.config_file), cause=e
            )

    def _parse_json(self, text: str) -> Dict[str, Any]:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(
                f"Failed to parse JSON: {e}", config_path=str(self.config_file), cause=e
            )
        if not isinstance(data, dict):
            raise ConfigError("Config root must be an object", config_path=str(self.config_file))
        return data
