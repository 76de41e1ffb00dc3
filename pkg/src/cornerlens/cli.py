"""Command-line interface: parser for run configurations and the ``corner-lens`` entry point."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from types import UnionType
from typing import Any, Literal, Type, Union, get_args, get_origin

from pydantic import BaseModel
from pydantic.fields import FieldInfo

from .base_config import LensConfig
from .registry import PresetRegistry

COMMANDS = ("spectrum", "frequency", "profile", "counterexample", "verify")

EPILOG = """\
examples:
  corner-lens spectrum --preset HemisphereSpectrum --out runs/hemisphere
  corner-lens frequency --config perturbed.json --grid.rings_per_decade=32
  corner-lens verify --suite hardy --suite spectral

exit codes: 0 success, 1 verification failure, 2 configuration error, 3 numerical error
"""


@dataclass
class ParsedArgs:
    """Command, preset, configuration file and dotted field overrides of one invocation."""

    command: str
    preset: str | None = None
    config_file: str | None = None
    field_overrides: dict[str, Any] = field(default_factory=dict)


class ConfigCLIParser:
    """Parser for corner-lens command lines.

    Supports:
    1. a positional command (spectrum, frequency, profile, counterexample, verify)
    2. --preset=ClassName (select a preset)
    3. --config=path (JSON or TOML run configuration)
    4. --field.nested=value (override specific fields using exact field names)
    5. shorthands --out, --suite, --log-level for outputs.directory, verify.suites, log_level
    """

    def __init__(self, config_cls: Type[LensConfig], registry: PresetRegistry) -> None:
        self.config_cls = config_cls
        self.registry = registry
        self.parser = argparse.ArgumentParser(
            prog="corner-lens",
            description="Almgren frequency, cap spectra and limit profiles at conical boundary points",
            epilog=EPILOG,
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        self._build_parser()

    def _build_parser(self) -> None:
        self.parser.add_argument("command", nargs="?", choices=COMMANDS, help="Pipeline to run")
        self.parser.add_argument(
            "--preset",
            type=str,
            choices=self.registry.list_presets(),
            help="Select a preset",
        )
        self.parser.add_argument("--config", type=str, dest="config_file", help="JSON or TOML run configuration")
        self.parser.add_argument("--list-presets", action="store_true", help="Show available presets")

        self._add_field_arguments(self.config_cls, prefix="")

        self.parser.add_argument("--out", dest="outputs.directory", type=str, help="Output directory")
        self.parser.add_argument("--suite", dest="verify.suites", action="append", help="Verification suite (repeatable)")
        self.parser.add_argument("--log-level", dest="log_level", type=str.upper, help="Log level")

    def _add_field_arguments(self, model: Type[BaseModel], prefix: str) -> None:
        """Recursively add arguments for model fields.

        Args:
            model: Model to extract fields from
            prefix: Prefix for nested fields (e.g., "grid.")
        """
        for field_name, field_info in model.model_fields.items():
            field_type = field_info.annotation
            arg_name = f"{prefix}{field_name}"

            origin = get_origin(field_type)
            if origin is None and isinstance(field_type, type) and issubclass(field_type, BaseModel):
                self._add_field_arguments(field_type, f"{prefix}{field_name}.")
            else:
                self.parser.add_argument(
                    f"--{arg_name}",
                    type=self._infer_type(field_type, field_info),
                    help=field_info.description or f"Override {arg_name}",
                )

    def _infer_type(self, field_type: Any, field_info: FieldInfo) -> type:
        """Infer argument type from Pydantic field type.

        Args:
            field_type: Pydantic field annotation
            field_info: Field information

        Returns:
            Type callable for argparse
        """
        origin = get_origin(field_type)
        if origin in (Union, UnionType):
            args = get_args(field_type)
            field_type = next((arg for arg in args if arg is not type(None)), args[0])
            origin = get_origin(field_type)

        if origin is Literal:
            values = get_args(field_type)
            if all(type(v) is type(values[0]) for v in values):
                return type(values[0])
            return self._json_type  # pyrefly: ignore[bad-return]

        if origin is not None:
            return self._json_type  # pyrefly: ignore[bad-return]

        if isinstance(field_type, type) and issubclass(field_type, Enum):
            return str

        if field_type in (int, float, str, bool):
            if field_type is bool:
                return self._bool_type  # pyrefly: ignore[bad-return]
            return field_type

        # lists, tuples, tagged unions and nested models are given as JSON
        return self._json_type  # pyrefly: ignore[bad-return]

    def _bool_type(self, value: str) -> bool:
        """Parse boolean from string.

        Raises:
            argparse.ArgumentTypeError: If value is not a valid boolean
        """
        if value.lower() in ("true", "1", "yes", "y"):
            return True
        elif value.lower() in ("false", "0", "no", "n"):
            return False
        else:
            raise argparse.ArgumentTypeError(f"Boolean value expected, got: {value}")

    def _json_type(self, value: str) -> Any:
        """Parse JSON from string.

        Raises:
            argparse.ArgumentTypeError: If JSON is invalid
        """
        try:
            return json.loads(value)
        except json.JSONDecodeError as e:
            raise argparse.ArgumentTypeError(f"Invalid JSON: {e}")

    def parse(self, args: list[str] | None = None) -> ParsedArgs:
        """Parse command-line arguments.

        ``--list-presets`` prints the registered presets and exits.

        Args:
            args: Arguments to parse (defaults to sys.argv)

        Returns:
            The parsed command, preset, configuration file and field overrides
        """
        if args is None:
            args = sys.argv[1:]

        parsed = self.parser.parse_args(args)

        if parsed.list_presets:
            presets = self.registry.describe()
            print("Available presets:")
            for name, summary in presets.items():
                print(f"  {name}: {summary}" if summary else f"  {name}")
            if not presets:
                print("  None")
            sys.exit(0)

        if parsed.command is None:
            self.parser.error("a command is required")

        field_overrides: dict[str, Any] = {}
        for key, value in vars(parsed).items():
            if key in ("command", "preset", "config_file", "list_presets") or value is None:
                continue
            field_overrides[key] = value

        return ParsedArgs(
            command=parsed.command,
            preset=parsed.preset,
            config_file=parsed.config_file,
            field_overrides=field_overrides,
        )


def _requested_directory(args: list[str]) -> Path | None:
    """Output directory named on the command line, for error reports before a config exists."""
    for i, arg in enumerate(args):
        for flag in ("--out", "--outputs.directory"):
            if arg == flag and i + 1 < len(args):
                return Path(args[i + 1])
            if arg.startswith(f"{flag}="):
                return Path(arg.split("=", 1)[1])
    return None


def main(argv: list[str] | None = None) -> int:
    """Entry point of ``corner-lens``; returns the process exit code.

    Errors are reported on stderr and as ``error.json`` in the output
    directory. Configuration errors raised before a configuration exists are
    written there only when the directory named by ``--out`` already exists.
    """
    from .commands import run_command
    from .errors import ConfigError, CornerLensError
    from .output import write_json

    args = list(sys.argv[1:] if argv is None else argv)
    try:
        run_command(args)
    except CornerLensError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        directory = _requested_directory(args)
        if isinstance(exc, ConfigError) and directory is not None and directory.is_dir():
            write_json(directory / "error.json", exc.to_dict())
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
