"""corner-lens - Almgren frequency and asymptotic profiles at conical boundary points.

Numerical companion for elliptic equations with singular lower-order terms
near a boundary point where the domain is asymptotic to a cone:

1. Straightening of curved corners onto their tangent cone
2. Cap spectra, exponent ladders and the Hardy inequality with boundary term
3. Frequency traces H, D, N, blow-ups and the Pohozaev identity
4. Limit coefficients of the Fourier expansion and the limit profile
5. A logarithmic corner on which the frequency limit exists but the height
   has no power-law limit

Example:
    from cornerlens import RunConfig, run

    config = RunConfig()
    config.outputs.directory = "runs/pure"
    run(config, "frequency")
"""

from .base_config import LensConfig
from .commands import build_problem, run, run_command
from .config import RunConfig
from .decorators import with_config
from .errors import (
    AdmissibilityError,
    ConfigError,
    CornerLensError,
    DegenerateSolutionError,
    DomainError,
    GeometryError,
    NumericalError,
    ResolutionError,
    UnsupportedConfigurationError,
    VerificationFailure,
)
from .logger import configure_logging
from .registry import PresetRegistry

__version__ = "0.1.0"

__all__ = [
    "LensConfig",
    "RunConfig",
    "with_config",
    "PresetRegistry",
    "configure_logging",
    "run",
    "run_command",
    "build_problem",
    "CornerLensError",
    "ConfigError",
    "DomainError",
    "GeometryError",
    "ResolutionError",
    "AdmissibilityError",
    "NumericalError",
    "DegenerateSolutionError",
    "UnsupportedConfigurationError",
    "VerificationFailure",
]
