"""Tests for the verify suites runner."""

from unittest.mock import patch

import pytest

from cornerlens.config import SUITE_NAMES
from cornerlens.errors import GeometryError
from cornerlens.suites import SUITES, CheckResult, check, run_check, run_suites


def failing_check(seed):
    msg = "Could not bracket the root"
    raise GeometryError(msg)


class TestRegistry:
    """Tests for suite registration."""

    def test_every_suite_has_checks(self):
        assert tuple(SUITES) == SUITE_NAMES
        assert all(SUITES[name] for name in SUITE_NAMES)

    def test_check_decorator(self):
        with patch.dict(SUITES["geometry"]):
            decorated = check("geometry", "always")(lambda seed: (True, "ok"))
            assert SUITES["geometry"]["always"] is decorated
        assert "always" not in SUITES["geometry"]


class TestRunCheck:
    """Tests for run_check."""

    def test_passing_check(self):
        with patch.dict(SUITES["geometry"], {"always": lambda seed: (True, f"seed {seed}")}):
            result = run_check("geometry", "always", 7)
        assert result == CheckResult(suite="geometry", name="always", passed=True, detail="seed 7")

    def test_library_error_is_a_failure(self):
        with patch.dict(SUITES["geometry"], {"broken": failing_check}):
            result = run_check("geometry", "broken", 0)
        assert not result.passed
        assert result.detail.startswith("GeometryError: Could not bracket")

    def test_other_errors_propagate(self):
        def crash(seed):
            raise RuntimeError("boom")

        with patch.dict(SUITES["geometry"], {"crash": crash}):
            with pytest.raises(RuntimeError, match="boom"):
                run_check("geometry", "crash", 0)


class TestRunSuites:
    """Tests for run_suites."""

    def test_geometry_suite(self):
        results = run_suites(["geometry"])
        assert [r.name for r in results] == list(SUITES["geometry"])
        assert all(r.passed for r in results), [r.detail for r in results if not r.passed]

    def test_unknown_suite(self):
        with pytest.raises(KeyError, match="Unknown suites"):
            run_suites(["geometry", "topology"])

    def test_registration_order(self):
        fake = {"b": lambda seed: (True, ""), "a": lambda seed: (False, "no")}
        with patch.dict(SUITES, {"geometry": fake}):
            results = run_suites(["geometry"], seed=3)
        assert [(r.name, r.passed) for r in results] == [("b", True), ("a", False)]

    def test_worker_processes(self):
        serial = run_suites(["geometry"], jobs=1)
        parallel = run_suites(["geometry"], jobs=2)
        assert parallel == serial
