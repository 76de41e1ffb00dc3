"""Base configuration class with override tracking and metadata support."""

from __future__ import annotations

import hashlib
import json
from datetime import datetime
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, ValidationError

from .errors import ConfigError
from .logger import LogLevel, logger
from .utils import canonical_json

try:
    import tomllib
except ImportError:
    import tomli as tomllib  # type: ignore


def read_config_file(path: str | Path) -> dict[str, Any]:
    """Read a JSON or TOML configuration file into a dictionary.

    Raises:
        ConfigError: If the file is missing, unparsable or not a mapping.
    """
    file = Path(path)
    if not file.exists():
        msg = f"Configuration file not found: {file}"
        raise ConfigError(msg)
    try:
        if file.suffix.lower() == ".toml":
            with open(file, "rb") as f:
                data = tomllib.load(f)
        else:
            with open(file) as f:
                data = json.load(f)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        msg = f"Cannot parse configuration file {file}: {exc}"
        raise ConfigError(msg) from exc
    if not isinstance(data, dict):
        msg = f"Configuration file {file} must hold a mapping, got {type(data).__name__}"
        raise ConfigError(msg)
    return data


class LensConfig(BaseModel):
    """
    Base configuration class that extends Pydantic BaseModel with override tracking,
    metadata output and a content hash.

    Example:
        ```python
        from cornerlens import RunConfig

        config = RunConfig.from_file("frequency.json")
        config.log_summary()
        config.export_config("resolved.json")
        print(config.config_hash())
        ```
    """

    model_config = ConfigDict(
        extra="forbid",
        validate_assignment=True,
        arbitrary_types_allowed=True,
    )

    _config_metadata: dict[str, Any] = {}

    @classmethod
    def from_file(cls, path: str | Path) -> LensConfig:
        """Load and validate a configuration from a JSON or TOML file.

        Raises:
            ConfigError: If the file cannot be read or fails validation.
        """
        data = read_config_file(path)
        try:
            config = cls.model_validate(data)
        except ValidationError as exc:
            msg = f"Invalid configuration in {path}: {exc}"
            raise ConfigError(msg) from exc
        config.set_metadata(config_name=cls.__name__, config_file=str(path))
        return config

    def set_metadata(
        self,
        *,
        config_name: str | None = None,
        preset_name: str | None = None,
        config_file: str | None = None,
        field_overrides: dict[str, Any] | None = None,
        preset_dirs: list[str] | None = None,
    ) -> None:
        """
        Set metadata about the configuration and its overrides.

        Args:
            config_name: Name of the config class being used
            preset_name: Name of the preset selected (if any)
            config_file: Path of the configuration file read (if any)
            field_overrides: Dictionary of field overrides {field_path: value}
            preset_dirs: List of preset directories searched
        """
        self._config_metadata = {
            "config_name": config_name or self.__class__.__name__,
            "preset_name": preset_name,
            "config_file": config_file,
            "field_overrides": field_overrides or {},
            "preset_dirs": preset_dirs or [],
            "timestamp": datetime.now().isoformat(),
        }

    def get_metadata(self) -> dict[str, Any]:
        """
        Get metadata about the configuration and applied overrides.

        Returns:
            Dictionary containing config_name, preset_name, config_file,
            field_overrides, preset_dirs and timestamp
        """
        return self._config_metadata.copy()

    def get_overrides_summary(self) -> list[str]:
        """
        Get a human-readable list of all overrides applied to this config.

        Returns:
            List of override descriptions in the format:
                - "preset: PresetName" (if a preset was selected)
                - "file: path" (if a configuration file was read)
                - "field.path=value" (for each field override)
        """
        overrides = []

        if self._config_metadata.get("preset_name"):
            overrides.append(f"preset: {self._config_metadata['preset_name']}")

        if self._config_metadata.get("config_file"):
            overrides.append(f"file: {self._config_metadata['config_file']}")

        for field_path, value in self._config_metadata.get("field_overrides", {}).items():
            overrides.append(f"{field_path}={value}")

        return overrides

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON dump of the configuration values."""
        return hashlib.sha256(canonical_json(self.model_dump(mode="json")).encode()).hexdigest()

    def export_config(
        self,
        filepath: str | Path,
        *,
        include_metadata: bool = True,
        indent: int = 2,
    ) -> None:
        """
        Export the configuration to a JSON file with optional metadata.

        The exported JSON structure (with metadata) looks like:
            ```json
            {
                "config": {"grid": {"r_min": 1e-06, ...}, ...},
                "metadata": {
                    "config_name": "RunConfig",
                    "preset_name": "PureMode",
                    "config_file": null,
                    "field_overrides": {"grid.rings_per_decade": 32},
                    "preset_dirs": ["/path/to/presets"],
                    "timestamp": "2025-01-15T10:30:00.123456"
                },
                "config_hash": "..."
            }
            ```
        """
        output: dict[str, Any] = {}

        if include_metadata:
            output["config"] = self.model_dump(mode="json")
            output["metadata"] = self.get_metadata()
            output["config_hash"] = self.config_hash()
        else:
            output = self.model_dump(mode="json")

        with open(filepath, "w") as f:
            json.dump(output, f, indent=indent, default=str)

        logger.info(f"Configuration exported to {filepath}")

    def to_json_with_metadata(self, *, indent: int = 2) -> str:
        """Convert the configuration to a JSON string with metadata."""
        output = {
            "config": self.model_dump(mode="json"),
            "metadata": self.get_metadata(),
            "config_hash": self.config_hash(),
        }
        return json.dumps(output, indent=indent, default=str)

    def log_summary(self, level: LogLevel = "INFO") -> None:
        """
        Log a summary of the configuration and applied overrides.

        Example:
            ```python
            config.log_summary()
            # INFO - cornerlens - Configuration: RunConfig
            # INFO - cornerlens - Preset: PureMode
            # INFO - cornerlens - Applied Overrides:
            # INFO - cornerlens -   - preset: PureMode
            # INFO - cornerlens -   - grid.rings_per_decade=32
            ```
        """
        log_fn = getattr(logger, level.lower())
        metadata = self.get_metadata()

        log_fn(f"Configuration: {metadata.get('config_name', self.__class__.__name__)}")

        if metadata.get("preset_name"):
            log_fn(f"Preset: {metadata['preset_name']}")

        overrides = self.get_overrides_summary()
        if overrides:
            log_fn("Applied Overrides:")
            for override in overrides:
                log_fn(f"  - {override}")
        else:
            log_fn("No overrides applied (using defaults)")

        if metadata.get("preset_dirs"):
            log_fn(f"Preset directories: {', '.join(metadata['preset_dirs'])}")

        log_fn(f"Config hash: {self.config_hash()}")
