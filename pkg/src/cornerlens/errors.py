"""Exception hierarchy for corner-lens.

Every error carries the process exit code the CLI reports for it.
"""

from __future__ import annotations

from typing import ClassVar


class CornerLensError(Exception):
    """Base class for all corner-lens errors."""

    exit_code: ClassVar[int] = 3

    def to_dict(self) -> dict[str, object]:
        """Machine-readable form written to ``error.json`` by the CLI."""
        return {
            "error": type(self).__name__,
            "message": str(self),
            "exit_code": self.exit_code,
        }


class ConfigError(CornerLensError):
    """Invalid or unreadable configuration, unknown preset."""

    exit_code: ClassVar[int] = 2


class DomainError(CornerLensError, ValueError):
    """Evaluation outside the domain of an operation."""


class GeometryError(CornerLensError):
    """Root bracketing failure, empty cap or non-graph boundary curve."""


class ResolutionError(CornerLensError):
    """More eigenmodes requested than the grid resolves."""


class AdmissibilityError(CornerLensError):
    """Eigenvalue below the Hardy threshold."""


class NumericalError(CornerLensError):
    """Singular or indefinite discretization, failed linear solve."""


class DegenerateSolutionError(CornerLensError):
    """Vanishing height function."""


class UnsupportedConfigurationError(CornerLensError):
    """Configuration outside the scope of the requested operation."""


class VerificationFailure(CornerLensError):
    """One or more property checks failed."""

    exit_code: ClassVar[int] = 1

    def __init__(self, failed: list[str]) -> None:
        self.failed = list(failed)
        super().__init__(f"Failed checks: {', '.join(self.failed)}")
