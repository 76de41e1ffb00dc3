"""Tests for the release tag check."""

from unittest.mock import patch

import cornerlens
from scripts.verify_tag_matches_version import (
    load_changelog_version,
    load_package_version,
    load_project_version,
    main,
    normalize_tag,
)


class TestVersions:
    """The version is declared consistently across the repository."""

    def test_sources_agree(self):
        version = load_project_version()
        assert load_package_version() == version == cornerlens.__version__
        assert load_changelog_version() == version

    def test_normalize_tag(self):
        assert normalize_tag("refs/tags/v0.1.0") == "0.1.0"
        assert normalize_tag(" v1.2.3 ") == "1.2.3"
        assert normalize_tag("0.1.0") == "0.1.0"


class TestMain:
    """Exit status of the check."""

    def test_matching_tag(self, capsys):
        assert main(["verify", f"v{cornerlens.__version__}"]) == 0
        assert "matches corner-lens" in capsys.readouterr().out

    def test_mismatch(self, capsys):
        assert main(["verify", "v9.9.9"]) == 1
        out = capsys.readouterr().out
        assert "pyproject.toml" in out
        assert "CHANGELOG.md" in out

    def test_tag_from_environment(self, monkeypatch):
        monkeypatch.delenv("GITHUB_REF_NAME", raising=False)
        monkeypatch.setenv("GITHUB_REF", f"refs/tags/v{cornerlens.__version__}")
        assert main(["verify"]) == 0

    def test_missing_tag(self, monkeypatch):
        monkeypatch.delenv("GITHUB_REF_NAME", raising=False)
        monkeypatch.delenv("GITHUB_REF", raising=False)
        assert main(["verify"]) == 1

    def test_missing_changelog(self, tmp_path):
        with patch("scripts.verify_tag_matches_version.CHANGELOG", tmp_path / "CHANGELOG.md"):
            assert load_changelog_version() is None
