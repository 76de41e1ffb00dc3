"""Registry of run presets: named subclasses of the run configuration."""

import importlib
import importlib.util
import inspect
import sys
from pathlib import Path
from typing import Any, Type

from pydantic import BaseModel

from .base_config import LensConfig
from .logger import logger


class PresetRegistry:
    """Registry of presets, discovered as direct subclasses of a config class.

    Example:
        ```python
        registry = PresetRegistry()
        registry.discover(Path("presets"), RunConfig)
        registry.get_preset("PureMode")
        ```
    """

    def __init__(self) -> None:
        self._presets: dict[str, Type[LensConfig]] = {}

    def discover(self, root_dir: Path, main_config_cls: Type[LensConfig]) -> None:
        """Register every direct subclass of ``main_config_cls`` defined under ``root_dir``.

        Args:
            root_dir: Directory scanned recursively for ``*.py`` files (private modules skipped)
            main_config_cls: The run configuration class presets derive from
        """
        if not root_dir.exists():
            return

        for py_file in sorted(root_dir.rglob("*.py")):
            if py_file.stem.startswith("_"):
                continue

            module = self._import_module(py_file)
            if module is None:
                continue

            for _, obj in inspect.getmembers(module):
                if self._is_config_class(obj) and self._is_preset_of(obj, main_config_cls):
                    self.register_preset(obj.__name__, obj)

    def register_preset(self, name: str, cls: Type[LensConfig]) -> None:
        """Register a preset under its class name; a later registration wins."""
        if name in self._presets and self._presets[name] is not cls:
            logger.debug(f"Preset '{name}' overridden by {cls.__module__}")
        self._presets[name] = cls

    def get_preset(self, name: str) -> Type[LensConfig]:
        """Get a preset by class name.

        Raises:
            KeyError: If the preset is not registered
        """
        if name not in self._presets:
            raise KeyError(f"Preset '{name}' not found. Available presets: {self.list_presets()}")
        return self._presets[name]

    def list_presets(self) -> list[str]:
        """Registered preset names, sorted."""
        return sorted(self._presets)

    def describe(self) -> dict[str, str]:
        """First docstring line of every preset."""
        return {name: inspect.cleandoc(self._presets[name].__doc__ or "").split("\n")[0] for name in self.list_presets()}

    def _import_module(self, py_file: Path) -> Any:
        """Import a Python module from file path, reusing an existing import of the same file.

        Returns:
            Imported module or None if import fails
        """
        try:
            file_path_resolved = py_file.resolve()
            for module in list(sys.modules.values()):
                if module is None:
                    continue
                try:
                    module_file = getattr(module, "__file__", None)
                    if module_file and Path(module_file).resolve() == file_path_resolved:
                        return module
                except (OSError, ValueError):
                    continue
        except OSError:
            pass

        module_name = self._derive_module_name(py_file)
        if module_name:
            try:
                return importlib.import_module(module_name)
            except ModuleNotFoundError:
                pass

        try:
            module_name = f"cornerlens_preset_{py_file.stem}_{id(py_file)}"

            spec = importlib.util.spec_from_file_location(module_name, py_file)
            if spec is None or spec.loader is None:
                return None

            module = importlib.util.module_from_spec(spec)
            sys.modules[module_name] = module
            spec.loader.exec_module(module)
            return module
        except Exception as exc:
            logger.warning(f"Skipping preset module {py_file}: {exc}")
            return None

    def _derive_module_name(self, py_file: Path) -> str | None:
        """Derive the module path of a Python file from the most specific sys.path entry containing it."""
        try:
            file_path = py_file.resolve()
        except OSError:
            return None

        best_candidate: tuple[str, int] | None = None
        for entry in sys.path:
            entry_path = Path(entry or ".")
            try:
                entry_resolved = entry_path.resolve()
            except OSError:
                continue

            try:
                relative = file_path.relative_to(entry_resolved)
            except ValueError:
                continue

            parts = relative.with_suffix("").parts
            if not parts or not all(part.isidentifier() for part in parts):
                continue

            candidate = ".".join(parts)
            depth = len(parts)
            if best_candidate is None or depth < best_candidate[1]:
                best_candidate = (candidate, depth)

        return best_candidate[0] if best_candidate else None

    def _is_config_class(self, obj: Any) -> bool:
        return inspect.isclass(obj) and issubclass(obj, BaseModel) and obj is not BaseModel

    def _is_preset_of(self, cls: Type[BaseModel], parent_cls: Type[BaseModel]) -> bool:
        """True if ``cls`` is a direct subclass of ``parent_cls``."""
        return parent_cls in cls.__bases__
