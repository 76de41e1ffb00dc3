"""Atomic CSV and JSON artifacts with metadata sidecars.

Every artifact ``X`` is accompanied by ``X.meta.json`` holding the config
hash, the seed, package versions, the tolerances the numbers were checked
against and the artifact's columns. Floats are written with ``repr`` so
identical configurations give identical files.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .base_config import LensConfig
from .logger import logger

VERSIONED_PACKAGES = ("corner-lens", "numpy", "scipy", "pydantic")


def _atomic_write(path: Path, text: str) -> None:
    """Write through a temporary file in the target directory and rename it into place."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with tempfile.NamedTemporaryFile("w", dir=path.parent, prefix=f".{path.name}.", suffix=".tmp", delete=False, encoding="utf-8", newline="") as tmp:
        tmp.write(text)
        tmp.flush()
        os.fsync(tmp.fileno())
        name = tmp.name
    try:
        os.replace(name, path)
    except OSError:
        os.unlink(name)
        raise


def format_value(value: Any) -> str:
    """CSV cell text: round-trip exact floats, empty for None."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _to_json(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _to_json(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_json(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_to_json(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        number = float(value)
        return number if math.isfinite(number) else repr(number)
    return value


def write_csv(path: str | Path, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Write rows under a fixed header.

    Raises:
        ValueError: If a row does not match the header length
    """
    target = Path(path)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        if len(row) != len(columns):
            msg = f"Row of length {len(row)} does not match the {len(columns)} columns of {target.name}"
            raise ValueError(msg)
        writer.writerow([format_value(v) for v in row])
    _atomic_write(target, buffer.getvalue())
    return target


def write_json(path: str | Path, data: Any, *, indent: int = 2) -> Path:
    """Write JSON with sorted keys; numpy values become plain numbers."""
    target = Path(path)
    _atomic_write(target, json.dumps(_to_json(data), indent=indent, sort_keys=True) + "\n")
    return target


def file_sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1024 * 1024), b""):
            h.update(chunk)
    return h.hexdigest()


def package_versions() -> dict[str, str]:
    versions = {}
    for name in VERSIONED_PACKAGES:
        try:
            versions[name] = version(name)
        except PackageNotFoundError:
            versions[name] = "unknown"
    return versions


@dataclass
class ArtifactWriter:
    """Writes the artifacts of one command into a directory, each with its sidecar.

    Example:
        ```python
        writer = ArtifactWriter(Path("runs/pure"), config)
        writer.csv("trace.csv", ["r", "H"], rows, tolerances={"gamma": 1e-8})
        writer.json("summary.json", {"gamma": 1.5})
        ```
    """

    directory: Path
    config: LensConfig
    written: list[Path] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.directory.mkdir(parents=True, exist_ok=True)

    @property
    def _formats(self) -> tuple[bool, bool]:
        outputs = getattr(self.config, "outputs", None)
        if outputs is None:
            return True, True
        return outputs.write_csv, outputs.write_json

    def _sidecar(self, target: Path, columns: Sequence[str] | None, tolerances: dict[str, float] | None) -> None:
        meta = {
            "artifact": target.name,
            "sha256": file_sha256(target),
            "config_hash": self.config.config_hash(),
            "seed": getattr(self.config, "seed", None),
            "versions": package_versions(),
            "tolerances": tolerances or {},
            "columns": list(columns) if columns is not None else None,
        }
        write_json(target.with_name(f"{target.name}.meta.json"), meta)

    def csv(
        self,
        name: str,
        columns: Sequence[str],
        rows: Iterable[Sequence[Any]],
        *,
        tolerances: dict[str, float] | None = None,
    ) -> Path | None:
        """Write a CSV artifact unless CSV output is switched off."""
        if not self._formats[0]:
            return None
        target = write_csv(self.directory / name, columns, rows)
        self._sidecar(target, columns, tolerances)
        self.written.append(target)
        logger.info(f"Wrote {target}")
        return target

    def json(self, name: str, data: Any, *, tolerances: dict[str, float] | None = None) -> Path | None:
        """Write a JSON artifact unless JSON output is switched off."""
        if not self._formats[1]:
            return None
        target = write_json(self.directory / name, data)
        columns = sorted(data) if isinstance(data, dict) else None
        self._sidecar(target, columns, tolerances)
        self.written.append(target)
        logger.info(f"Wrote {target}")
        return target
