#!/usr/bin/env python3
"""Ensure a release tag matches the corner-lens version everywhere it is declared.

The version lives in pyproject.toml, in ``cornerlens.__version__`` and as the
top heading of CHANGELOG.md; all three must equal the tag.
"""

from __future__ import annotations

import os
import re
import sys
from pathlib import Path

try:  # pragma: no cover
    import tomllib  # type: ignore[attr-defined]
except ModuleNotFoundError:  # pragma: no cover
    try:
        import tomli as tomllib  # type: ignore[no-redef]
    except ModuleNotFoundError as exc:  # pragma: no cover
        raise RuntimeError("tomllib/tomli is required to parse pyproject.toml") from exc


REPO_ROOT = Path(__file__).resolve().parents[1]
PYPROJECT = REPO_ROOT / "pyproject.toml"
PACKAGE_INIT = REPO_ROOT / "src" / "cornerlens" / "__init__.py"
CHANGELOG = REPO_ROOT / "CHANGELOG.md"

VERSION_ASSIGNMENT = re.compile(r'^__version__\s*=\s*["\']([^"\']+)["\']', re.MULTILINE)
CHANGELOG_HEADING = re.compile(r"^##\s+v?(\S+)", re.MULTILINE)


def load_project_version() -> str:
    data = tomllib.loads(PYPROJECT.read_text(encoding="utf-8"))
    return data["project"]["version"]


def load_package_version() -> str | None:
    match = VERSION_ASSIGNMENT.search(PACKAGE_INIT.read_text(encoding="utf-8"))
    return match.group(1) if match else None


def load_changelog_version() -> str | None:
    if not CHANGELOG.exists():
        return None
    match = CHANGELOG_HEADING.search(CHANGELOG.read_text(encoding="utf-8"))
    return match.group(1) if match else None


def requested_tag(argv: list[str]) -> str | None:
    if len(argv) > 1:
        return argv[1]
    return os.environ.get("GITHUB_REF_NAME") or os.environ.get("GITHUB_REF")


def normalize_tag(tag: str) -> str:
    tag = tag.strip().removeprefix("refs/tags/")
    return tag[1:] if tag.startswith("v") else tag


def main(argv: list[str]) -> int:
    raw_tag = requested_tag(argv)
    if not raw_tag:
        print("No tag provided. Pass it as an argument or via GITHUB_REF_NAME.")
        return 1

    tag = normalize_tag(raw_tag)
    declared = {
        "pyproject.toml": load_project_version(),
        "cornerlens.__version__": load_package_version(),
        "CHANGELOG.md": load_changelog_version(),
    }
    mismatched = {source: version for source, version in declared.items() if version != tag}
    if mismatched:
        for source, version in mismatched.items():
            print(f"Tag mismatch: normalized tag '{tag}' does not equal {source} version '{version}'.")
        return 1

    print(f"Tag '{raw_tag}' matches corner-lens {tag} in {', '.join(declared)}.")
    return 0


if __name__ == "__main__":
    raise SystemExit(main(sys.argv))
