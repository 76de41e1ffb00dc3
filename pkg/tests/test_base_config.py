"""Tests for LensConfig and the error hierarchy."""

import json
import logging

import pytest
from pydantic import Field

from cornerlens.base_config import LensConfig, read_config_file
from cornerlens.errors import ConfigError, CornerLensError, DomainError, NumericalError, VerificationFailure


class SmallConfig(LensConfig):
    """Config used by these tests."""

    value: int = Field(default=10, ge=0)
    name: str = "small"


class TestLensConfig:
    """Tests for LensConfig metadata, hashing and export."""

    def test_extra_fields_forbidden(self):
        with pytest.raises(ValueError):
            SmallConfig(unknown=1)  # type: ignore[call-arg]

    def test_validate_assignment(self):
        config = SmallConfig()
        with pytest.raises(ValueError):
            config.value = -1

    def test_metadata_round_trip(self):
        config = SmallConfig()
        config.set_metadata(config_name="SmallConfig", preset_name="Quick", field_overrides={"value": 3})
        metadata = config.get_metadata()
        assert metadata["preset_name"] == "Quick"
        assert metadata["field_overrides"] == {"value": 3}
        assert "timestamp" in metadata

    def test_get_metadata_returns_copy(self):
        config = SmallConfig()
        config.set_metadata()
        config.get_metadata()["preset_name"] = "changed"
        assert config.get_metadata()["preset_name"] is None

    def test_overrides_summary(self):
        config = SmallConfig()
        config.set_metadata(preset_name="Quick", config_file="run.json", field_overrides={"value": 3})
        assert config.get_overrides_summary() == ["preset: Quick", "file: run.json", "value=3"]

    def test_config_hash_depends_on_values_only(self):
        a, b = SmallConfig(), SmallConfig()
        a.set_metadata(preset_name="Quick")
        assert a.config_hash() == b.config_hash()
        assert SmallConfig(value=11).config_hash() != a.config_hash()

    def test_export_with_metadata(self, tmp_path):
        config = SmallConfig(value=4)
        config.set_metadata(preset_name="Quick")
        path = tmp_path / "config.json"
        config.export_config(path)
        data = json.loads(path.read_text())
        assert data["config"] == {"value": 4, "name": "small"}
        assert data["metadata"]["preset_name"] == "Quick"
        assert data["config_hash"] == config.config_hash()

    def test_export_without_metadata(self, tmp_path):
        path = tmp_path / "config.json"
        SmallConfig().export_config(path, include_metadata=False)
        assert json.loads(path.read_text()) == {"value": 10, "name": "small"}

    def test_to_json_with_metadata(self):
        data = json.loads(SmallConfig().to_json_with_metadata())
        assert set(data) == {"config", "metadata", "config_hash"}

    def test_log_summary(self, caplog):
        config = SmallConfig()
        config.set_metadata(preset_name="Quick", field_overrides={"value": 3})
        with caplog.at_level(logging.INFO, logger="cornerlens"):
            config.log_summary()
        assert "Preset: Quick" in caplog.text
        assert "value=3" in caplog.text
        assert "Config hash" in caplog.text

    def test_from_json_file(self, tmp_path):
        path = tmp_path / "small.json"
        path.write_text(json.dumps({"value": 5}))
        config = SmallConfig.from_file(path)
        assert config.value == 5
        assert config.get_metadata()["config_file"] == str(path)

    def test_from_toml_file(self, tmp_path):
        path = tmp_path / "small.toml"
        path.write_text('value = 6\nname = "toml"\n')
        config = SmallConfig.from_file(path)
        assert (config.value, config.name) == (6, "toml")

    def test_from_file_validation_error(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"value": -1}))
        with pytest.raises(ConfigError, match="Invalid configuration"):
            SmallConfig.from_file(path)


class TestReadConfigFile:
    """Tests for read_config_file."""

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            read_config_file(tmp_path / "missing.json")

    def test_unparsable_file(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError, match="Cannot parse"):
            read_config_file(path)

    def test_non_mapping(self, tmp_path):
        path = tmp_path / "list.json"
        path.write_text("[1, 2]")
        with pytest.raises(ConfigError, match="mapping"):
            read_config_file(path)


class TestErrors:
    """Tests for exit codes and the machine-readable error form."""

    def test_exit_codes(self):
        assert ConfigError.exit_code == 2
        assert NumericalError.exit_code == 3
        assert VerificationFailure.exit_code == 1

    def test_domain_error_is_value_error(self):
        assert issubclass(DomainError, ValueError)
        assert issubclass(DomainError, CornerLensError)

    def test_to_dict(self):
        assert NumericalError("singular").to_dict() == {"error": "NumericalError", "message": "singular", "exit_code": 3}

    def test_verification_failure_lists_checks(self):
        exc = VerificationFailure(["almgren.height", "hardy.hardy_zero_potential"])
        assert exc.failed == ["almgren.height", "hardy.hardy_zero_potential"]
        assert "almgren.height" in str(exc)
