"""Decorators for config-driven commands."""

from functools import wraps
from pathlib import Path
from typing import Any, Callable, Type, TypeVar, get_type_hints

from pydantic import ValidationError

from .base_config import LensConfig
from .cli import ConfigCLIParser
from .config_loader import load_config_file, resolve_preset_dirs
from .errors import ConfigError
from .logger import configure_logging
from .registry import PresetRegistry
from .utils import deep_merge, set_nested_value

T = TypeVar("T", bound=LensConfig)


def _build_config(
    config_cls: Type[LensConfig],
    field_overrides: dict[str, Any],
    *,
    preset_name: str | None = None,
    config_file: str | None = None,
    preset_dirs: list[str] | None = None,
) -> LensConfig:
    """Build and validate a config instance with all overrides applied.

    Override priority (from lowest to highest):
    1. Defaults of ``config_cls`` (the preset class when one is selected)
    2. Values of the configuration file
    3. Dotted field overrides

    Raises:
        ConfigError: If the file cannot be read or the merged values fail validation

    Example:
        config_cls = PerturbedCorner           # grid.rings_per_decade=24
        config_file = "fine.json"              # {"grid": {"rings_per_decade": 32}}
        field_overrides = {"grid.angular_nodes": 257}
        Result: PerturbedCorner(grid=GridParams(rings_per_decade=32, angular_nodes=257, ...))
    """
    try:
        config_dict = config_cls().model_dump(mode="json")
    except ValidationError as exc:
        msg = f"Defaults of {config_cls.__name__} are invalid: {exc}"
        raise ConfigError(msg) from exc

    if config_file is not None:
        config_dict = deep_merge(config_dict, load_config_file(config_file))

    for path, value in field_overrides.items():
        set_nested_value(config_dict, path.split("."), value)

    try:
        config = config_cls.model_validate(config_dict)
    except ValidationError as exc:
        msg = f"Invalid configuration: {exc}"
        raise ConfigError(msg) from exc

    config.set_metadata(
        config_name=config_cls.__name__,
        preset_name=preset_name,
        config_file=config_file,
        field_overrides=field_overrides,
        preset_dirs=preset_dirs or [],
    )

    return config


def with_config(
    config_cls: Type[T] | None = None,
    preset_dirs: str | list[str] | None = None,
) -> Callable[[Callable[[T, str], Any]], Callable[[list[str] | None], Any]]:
    """Decorator to make a command function config-driven.

    Discovers presets, parses the command line, configures logging, builds the
    config and calls ``func(config, command)``. The config class is inferred
    from the function's first parameter type annotation.

    Args:
        config_cls: Optional default config class; it must be a subclass of the
                    first parameter's annotation. Priority: --preset flag >
                    config_cls parameter > type annotation.
        preset_dirs: Directory or list of directories scanned for presets on top
                     of the built-in ones. If None, they come from .cornerlensrc
                     or the [tool.cornerlens] section of pyproject.toml.
                     Supports $CWD and $ROOT.

    Example:
        @with_config()
        def run_command(cfg: RunConfig, command: str) -> None:
            ...

        run_command(["frequency", "--preset", "PureMode", "--out", "runs/pure"])
    """

    def decorator(func: Callable[[T, str], Any]) -> Callable[[list[str] | None], Any]:
        type_hints = get_type_hints(func)
        if not type_hints:
            msg = f"Function '{func.__name__}' must have type hints for its first parameter"
            raise TypeError(msg)

        first_param_name = next(iter(func.__code__.co_varnames[: func.__code__.co_argcount]))
        if first_param_name not in type_hints:
            msg = f"First parameter '{first_param_name}' of function '{func.__name__}' must have a type hint"
            raise TypeError(msg)

        annotated_config_cls = type_hints[first_param_name]

        if not (isinstance(annotated_config_cls, type) and issubclass(annotated_config_cls, LensConfig)):
            msg = f"First parameter type of '{func.__name__}' must be a LensConfig, got {annotated_config_cls}"
            raise TypeError(msg)

        if config_cls is not None:
            if not (isinstance(config_cls, type) and issubclass(config_cls, annotated_config_cls)):
                msg = f"Provided config_cls '{config_cls.__name__}' must be a subclass of '{annotated_config_cls.__name__}'"
                raise TypeError(msg)

        @wraps(func)
        def wrapper(args: list[str] | None = None) -> Any:
            dirs = [preset_dirs] if isinstance(preset_dirs, str) else preset_dirs
            resolved_paths = resolve_preset_dirs(dirs, Path.cwd())

            registry = PresetRegistry()
            for preset_path in resolved_paths:
                registry.discover(preset_path, annotated_config_cls)

            parser = ConfigCLIParser(annotated_config_cls, registry)
            parsed = parser.parse(args)

            log_level = parsed.field_overrides.get("log_level")
            if log_level is not None:
                try:
                    configure_logging(log_level)
                except AttributeError as exc:
                    msg = f"Unknown log level '{log_level}'"
                    raise ConfigError(msg) from exc

            if parsed.preset:
                try:
                    final_cls = registry.get_preset(parsed.preset)
                except KeyError as exc:
                    raise ConfigError(str(exc)) from exc
            elif config_cls is not None:
                final_cls = config_cls
            else:
                final_cls = annotated_config_cls

            config = _build_config(
                final_cls,
                parsed.field_overrides,
                preset_name=parsed.preset,
                config_file=parsed.config_file,
                preset_dirs=[str(p) for p in resolved_paths],
            )

            return func(config, parsed.command)  # pyrefly: ignore[bad-argument-type]

        return wrapper

    return decorator
