"""Tests for the with_config decorator."""

import json
import sys
from pathlib import Path
from unittest.mock import patch

import pytest
from pydantic import BaseModel

from cornerlens.config import GridParams, RunConfig
from cornerlens.decorators import with_config
from cornerlens.errors import ConfigError

PRESETS = Path(__file__).parent / "fixtures" / "presets"
RUNS = Path(__file__).parent / "fixtures" / "runs"


class QuickRun(RunConfig):
    """Run with a coarse grid."""

    seed: int = 5
    grid: GridParams = GridParams(rings_per_decade=8, angular_nodes=33)


class UnrelatedConfig(BaseModel):
    """Not a run configuration."""

    other_value: str = "test"


class TestWithConfigDecorator:
    """Test the with_config decorator."""

    def test_infers_config_from_type_annotation(self, tmp_path):
        """The config class comes from the first parameter annotation."""

        @with_config(preset_dirs=str(tmp_path))
        def my_func(cfg: RunConfig, command: str):
            return cfg, command

        with patch.object(sys, "argv", ["corner-lens", "frequency"]):
            cfg, command = my_func()

        assert type(cfg) is RunConfig
        assert command == "frequency"
        assert cfg.get_metadata()["preset_name"] is None

    def test_explicit_config_cls(self, tmp_path):
        """An explicit config_cls replaces the annotated default."""

        @with_config(config_cls=QuickRun, preset_dirs=str(tmp_path))
        def my_func(cfg: RunConfig, command: str):
            return cfg

        result = my_func(["spectrum"])
        assert isinstance(result, QuickRun)
        assert result.seed == 5

    def test_explicit_config_cls_must_be_subclass(self, tmp_path):
        """config_cls is checked when the decorator is applied."""
        with pytest.raises(TypeError, match="must be a subclass of"):

            @with_config(config_cls=UnrelatedConfig, preset_dirs=str(tmp_path))  # type: ignore[arg-type]
            def my_func(cfg: RunConfig, command: str):
                return cfg

    def test_requires_type_hints(self):
        with pytest.raises(TypeError, match="type hints"):

            @with_config()
            def my_func(cfg, command):  # type: ignore[no-untyped-def]
                return cfg

    def test_annotation_must_be_config(self):
        with pytest.raises(TypeError, match="must be a LensConfig"):

            @with_config()
            def my_func(cfg: UnrelatedConfig, command: str):  # type: ignore[type-var]
                return cfg

    def test_preset_from_directory(self):
        """Presets of extra directories can be selected by class name."""

        @with_config(preset_dirs=str(PRESETS))
        def my_func(cfg: RunConfig, command: str):
            return cfg

        result = my_func(["frequency", "--preset", "FineGrid"])
        assert result.grid.rings_per_decade == 48
        assert result.get_metadata()["preset_name"] == "FineGrid"

    def test_builtin_presets_available(self, tmp_path):
        @with_config(preset_dirs=str(tmp_path))
        def my_func(cfg: RunConfig, command: str):
            return cfg

        result = my_func(["spectrum", "--preset", "HemisphereSpectrum"])
        assert result.profile.dim == 3

    def test_override_priority(self):
        """Preset defaults < configuration file < dotted overrides."""

        @with_config(preset_dirs=str(PRESETS))
        def my_func(cfg: RunConfig, command: str):
            return cfg

        result = my_func(
            [
                "frequency",
                "--preset",
                "CoarseGrid",
                "--config",
                str(RUNS / "perturbed.json"),
                "--grid.angular_nodes",
                "33",
            ]
        )
        # grid.rings_per_decade comes from the file, angular_nodes from the flag
        assert result.grid.rings_per_decade == 16
        assert result.grid.angular_nodes == 33
        assert result.seed == 3
        assert result.get_overrides_summary() == [
            "preset: CoarseGrid",
            f"file: {RUNS / 'perturbed.json'}",
            "grid.angular_nodes=33",
        ]

    def test_exported_config_reloads(self, tmp_path):
        """A resolved configuration reproduces itself through --config."""

        @with_config(preset_dirs=str(tmp_path))
        def my_func(cfg: RunConfig, command: str):
            return cfg

        first = my_func(["profile", "--preset", "PerturbedCorner", "--seed", "9"])
        path = tmp_path / "resolved.json"
        first.export_config(path)
        second = my_func(["profile", "--config", str(path)])
        assert second.config_hash() == first.config_hash()
        assert json.loads(path.read_text())["config_hash"] == first.config_hash()

    def test_invalid_override_raises_config_error(self, tmp_path):
        @with_config(preset_dirs=str(tmp_path))
        def my_func(cfg: RunConfig, command: str):
            return cfg

        with pytest.raises(ConfigError, match="Invalid configuration"):
            my_func(["frequency", "--grid.r_min", "0.5"])

    def test_missing_config_file(self, tmp_path):
        @with_config(preset_dirs=str(tmp_path))
        def my_func(cfg: RunConfig, command: str):
            return cfg

        with pytest.raises(ConfigError, match="not found"):
            my_func(["frequency", "--config", str(tmp_path / "absent.json")])
