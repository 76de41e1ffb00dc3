"""Settings loader for preset directories and configuration files."""

import json
from pathlib import Path
from typing import Any

from .base_config import read_config_file

try:
    import tomllib
except ImportError:
    import tomli as tomllib  # type: ignore

RC_FILE = ".cornerlensrc"
BUILTIN_PRESETS = Path(__file__).parent / "presets"


def find_root_dir(start_path: Path) -> Path | None:
    """Find project root directory containing pyproject.toml or .cornerlensrc.

    Args:
        start_path: Starting directory for search

    Returns:
        Path to root directory or None if not found
    """
    current = start_path.resolve()
    while True:
        if (current / "pyproject.toml").exists() or (current / RC_FILE).exists():
            return current

        parent = current.parent
        if parent == current:
            break
        current = parent

    return None


def substitute_variables(path_str: str, cwd: Path, root: Path | None) -> str:
    """Substitute variables in path string.

    Supported variables:
    - $CWD: Current working directory
    - $ROOT: Project root (directory with pyproject.toml or .cornerlensrc)

    Args:
        path_str: Path string potentially containing variables
        cwd: Current working directory
        root: Project root directory (or None)

    Returns:
        Path with variables substituted
    """
    result = path_str
    result = result.replace("$CWD", str(cwd))
    if root:
        result = result.replace("$ROOT", str(root))
    return result


def load_preset_dirs(start_path: Path | None = None) -> list[str] | None:
    """Load the preset_dirs setting from project settings files.

    Searches for settings in this order:
    1. .cornerlensrc (JSON) in current directory or parent directories
    2. pyproject.toml [tool.cornerlens] section
    3. Returns None if not found

    Example pyproject.toml:
        [tool.cornerlens]
        preset_dirs = ["$ROOT/presets", "presets"]

    Example .cornerlensrc:
        {
            "preset_dirs": ["$ROOT/presets", "presets"]
        }
    """
    if start_path is None:
        start_path = Path.cwd()

    current = start_path.resolve()
    while True:
        rc_file = current / RC_FILE
        if rc_file.exists():
            try:
                with open(rc_file) as f:
                    data = json.load(f)
                    if "preset_dirs" in data:
                        dirs = data["preset_dirs"]
                        if isinstance(dirs, str):
                            return [dirs]
                        return list(dirs)
            except (json.JSONDecodeError, KeyError):
                pass

        pyproject = current / "pyproject.toml"
        settings = None
        if pyproject.exists():
            try:
                with open(pyproject, "rb") as f:
                    data = tomllib.load(f)
                    if "tool" in data and "cornerlens" in data["tool"]:
                        settings = data["tool"]["cornerlens"]
                        if "preset_dirs" in settings:
                            dirs = settings["preset_dirs"]
                            if isinstance(dirs, str):
                                return [dirs]
                            return list(dirs)
            except (tomllib.TOMLDecodeError, KeyError):
                pass

        if settings or rc_file.exists():
            break

        parent = current.parent
        if parent == current:
            break
        current = parent

    return None


def resolve_preset_dirs(preset_dirs: list[str] | None, cwd: Path | None = None) -> list[Path]:
    """Built-in presets followed by the substituted user directories.

    Relative paths are taken relative to ``cwd``; later directories override
    presets of the same name found earlier.
    """
    cwd = cwd or Path.cwd()
    root = find_root_dir(cwd)
    dirs = preset_dirs if preset_dirs is not None else load_preset_dirs(cwd) or []
    resolved = [BUILTIN_PRESETS]
    for dir_str in dirs:
        path = Path(substitute_variables(dir_str, cwd, root))
        if not path.is_absolute():
            path = cwd / path
        resolved.append(path)
    return resolved


def load_config_file(path: str | Path) -> dict[str, Any]:
    """Values of a JSON or TOML run configuration file.

    A file written by ``export_config`` (with a ``config`` and ``metadata``
    section) yields its ``config`` section.
    """
    data = read_config_file(path)
    if "config" in data and "metadata" in data and isinstance(data["config"], dict):
        return data["config"]
    return data
