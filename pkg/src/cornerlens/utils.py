"""Dictionary helpers shared by the configuration layer."""

from __future__ import annotations

import json
from typing import Any


def set_nested_value(d: dict, path: list[str], value: Any) -> None:
    """Set value at nested path in dictionary.

    Args:
        d: Dictionary to modify in place
        path: List of keys representing path (e.g., ["grid", "r_min"])
        value: Value to set at the path

    Example:
        >>> d = {}
        >>> set_nested_value(d, ["grid", "r_min"], 1e-6)
        >>> d
        {'grid': {'r_min': 1e-06}}
    """
    for key in path[:-1]:
        d = d.setdefault(key, {})
    d[path[-1]] = value


def deep_merge(base: dict, update: dict) -> dict:
    """Return a copy of ``base`` with ``update`` merged in recursively.

    Nested dictionaries are merged key by key; any other value in ``update``
    replaces the one in ``base``. A nested dictionary whose ``kind`` tag
    differs from the base one replaces it whole.

    Example:
        >>> deep_merge({"grid": {"r_min": 1.0, "r_max": 2.0}}, {"grid": {"r_min": 0.5}})
        {'grid': {'r_min': 0.5, 'r_max': 2.0}}
    """
    merged = dict(base)
    for key, value in update.items():
        current = merged.get(key)
        if isinstance(value, dict) and isinstance(current, dict) and value.get("kind", current.get("kind")) == current.get("kind"):
            merged[key] = deep_merge(current, value)
        else:
            merged[key] = value
    return merged


def canonical_json(data: Any) -> str:
    """Serialize ``data`` with sorted keys and no whitespace."""
    return json.dumps(data, sort_keys=True, separators=(",", ":"), default=str)
