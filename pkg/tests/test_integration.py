"""End-to-end runs of the corner-lens entry point."""

import csv
import json
from pathlib import Path

import pytest

from cornerlens.cli import main

FIXTURES = Path(__file__).parent / "fixtures" / "runs"
SMALL = ["--grid.rings_per_decade", "8", "--grid.angular_nodes", "33"]


def read_json(path):
    return json.loads(Path(path).read_text())


def count_rows(path):
    with open(path, newline="") as f:
        return sum(1 for _ in csv.DictReader(f))


class TestIntegration:
    """Full pipeline: discovery, parsing, building, running and writing artifacts."""

    def test_preset_with_overrides(self, tmp_path):
        code = main(["frequency", "--preset", "PureMode", "--grid.r_min", "1e-4", *SMALL, "--out", str(tmp_path)])
        assert code == 0
        summary = read_json(tmp_path / "summary.json")
        assert summary["gamma"] == pytest.approx(1.5, rel=1e-4)
        assert summary["classification"] == "positive-finite-limit"
        assert count_rows(tmp_path / "trace.csv") == 25

        resolved = read_json(tmp_path / "config.resolved.json")
        assert resolved["metadata"]["preset_name"] == "PureMode"
        assert resolved["metadata"]["field_overrides"]["grid.r_min"] == 1e-4
        assert resolved["config"]["grid"]["angular_nodes"] == 33
        sidecar = read_json(tmp_path / "summary.json.meta.json")
        assert sidecar["config_hash"] == resolved["config_hash"]

    def test_configuration_file(self, tmp_path):
        args = [
            "spectrum",
            "--config",
            str(FIXTURES / "perturbed.json"),
            "--spectrum.k_max",
            "2",
            "--spectrum.n_grid",
            "256",
            "--out",
            str(tmp_path),
        ]
        assert main(args) == 0
        assert count_rows(tmp_path / "spectrum.csv") == 2
        assert count_rows(tmp_path / "shrinking_caps.csv") == 7
        assert not (tmp_path / "hardy.csv").exists()
        assert read_json(tmp_path / "config.resolved.json")["config"]["seed"] == 3

    def test_counterexample(self, tmp_path):
        args = ["counterexample", "--preset", "LogCornerExample", "--grid.rings_per_decade", "12", "--grid.angular_nodes", "65"]
        assert main([*args, "--out", str(tmp_path)]) == 0
        summary = read_json(tmp_path / "summary.json")
        assert summary["classification"] == "divergent"
        assert summary["gamma"] == pytest.approx(4.0)
        for name in ("curves.csv", "trace.csv", "defect.csv"):
            assert (tmp_path / name).exists()

    def test_numerical_failure_is_reported(self, tmp_path, capsys):
        code = main(["counterexample", "--grid.r_max", "0.9", "--grid.r_min", "1e-3", "--out", str(tmp_path)])
        assert code == 3
        assert "curve window" in capsys.readouterr().err
        assert read_json(tmp_path / "error.json")["error"] == "GeometryError"

    def test_verify(self, tmp_path, capsys):
        assert main(["verify", "--suite", "geometry", "--out", str(tmp_path)]) == 0
        assert "PASS  geometry" in capsys.readouterr().out
        assert count_rows(tmp_path / "verify.csv") == 4
