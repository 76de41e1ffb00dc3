"""Run configuration shared by every command."""

from __future__ import annotations

import math
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .base_config import LensConfig
from .coefficients import CoefficientBundle
from .logger import LogLevel
from .profiles import BoundaryProfile, LogCurve

SuiteName = Literal["geometry", "coefficients", "spectral", "hardy", "field", "almgren", "fourier", "logexample"]
SUITE_NAMES: tuple[str, ...] = ("geometry", "coefficients", "spectral", "hardy", "field", "almgren", "fourier", "logexample")


class StraighteningParams(BaseModel):
    """Constant C0 and exponent δ of the corner-defect bound |φ − ∇φ·x'| ≤ C0|x'|^{1+δ}."""

    model_config = ConfigDict(extra="forbid")

    C0: float = Field(default=0.0, ge=0.0)
    delta: float = Field(default=0.5, gt=0.0, lt=1.0)


class GridParams(BaseModel):
    """Graded polar grid on [r_min, r_max]."""

    model_config = ConfigDict(extra="forbid")

    r_min: float = Field(default=1e-6, gt=0.0)
    r_max: float = Field(default=0.1, gt=0.0)
    rings_per_decade: int = Field(default=24, ge=2)
    angular_nodes: int = Field(default=129, ge=3)
    inner_decades: int = Field(default=3, ge=1, description="Decades below r_min for the artificial inner ring")

    @model_validator(mode="after")
    def _check_range(self) -> GridParams:
        if not self.r_min < self.r_max:
            msg = f"Need r_min < r_max, got ({self.r_min}, {self.r_max})"
            raise ValueError(msg)
        return self


class RadiiParams(BaseModel):
    """Radii at which the frequency is traced and how γ is extracted."""

    model_config = ConfigDict(extra="forbid")

    stride: int = Field(default=1, ge=1, description="Use every stride-th ring")
    values: list[float] | None = Field(default=None, description="Explicit radii inside the grid range")
    decay: float = Field(default=0.5, gt=0.0, description="Exponent of the correction in the gamma fit")
    window_decades: float = Field(default=2.0, gt=0.0)
    tolerance: float = Field(default=0.05, gt=0.0, description="Relative variation of a positive finite limit")


class SolutionParams(BaseModel):
    """Which solution w is analyzed.

    ``modes`` are separable sector modes, composed with the straightening
    map on perturbed profiles; ``zonal`` are axisymmetric modes of the
    half space; ``solve`` runs the Dirichlet solver with the mode data on
    the outer arc; ``log_harmonic`` samples the logarithmic corner harmonic.
    """

    model_config = ConfigDict(extra="forbid")

    kind: Literal["modes", "zonal", "solve", "log_harmonic"] = "modes"
    modes: list[tuple[int, float]] = Field(default_factory=lambda: [(1, 1.0)])
    manufactured: bool = Field(default=True, description="Carry the manufactured source of non-exact solutions")

    @model_validator(mode="after")
    def _check_modes(self) -> SolutionParams:
        if not self.modes or all(weight == 0.0 for _, weight in self.modes):
            msg = "At least one mode needs a nonzero weight"
            raise ValueError(msg)
        if any(k < 1 for k, _ in self.modes):
            msg = "Mode indices start at 1"
            raise ValueError(msg)
        return self


class SpectrumParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    k_max: int = Field(default=4, ge=1)
    n_grid: int = Field(default=1024, ge=64)
    azimuthal: int = Field(default=0, ge=0, description="Azimuthal order m of axisymmetric caps")


class FourierParams(BaseModel):
    """Limit-coefficient extraction."""

    model_config = ConfigDict(extra="forbid")

    R: float | None = Field(default=None, gt=0.0, description="Radius of the boundary term (default r_max/2)")
    radius_ratio: float = Field(default=2.0, gt=1.0)
    blowup_lambda: float | None = Field(default=None, gt=0.0, description="Blow-up scale compared with the profile")
    extra_indices: list[int] = Field(default_factory=list, description="1-based eigen indices reported besides the block")
    block_tolerance: float = Field(default=0.05, gt=0.0)


class HardyParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    trials: int = Field(default=1000, ge=1)
    radius: float = Field(default=1.0, gt=0.0)


class CounterexampleParams(BaseModel):
    """Logarithmic corner and the window of its corner-defect extrapolation."""

    model_config = ConfigDict(extra="forbid")

    alpha: float = Field(default=0.5, gt=0.0, lt=2.0)
    sigma: float = Field(default=0.3, gt=0.0)
    x_min: float = Field(default=1e-7, gt=0.0)
    x_max: float = Field(default=1e-3, gt=0.0)
    samples: int = Field(default=25, ge=4)


class OutputParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    directory: str = "out"
    write_csv: bool = True
    write_json: bool = True


class VerifyParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    suites: list[SuiteName] = Field(default_factory=list, description="Suites to run (empty runs all)")


class RunConfig(LensConfig):
    """Complete configuration of a corner-lens run.

    Example:
        ```python
        config = RunConfig(profile=BoundaryProfile.sector(2 / 3))
        config.grid.rings_per_decade = 32
        ```
    """

    profile: BoundaryProfile = Field(default_factory=lambda: BoundaryProfile.sector(2.0 / 3.0))
    straightening: StraighteningParams = Field(default_factory=StraighteningParams)
    bundle: CoefficientBundle = Field(default_factory=CoefficientBundle)
    grid: GridParams = Field(default_factory=GridParams)
    radii: RadiiParams = Field(default_factory=RadiiParams)
    solution: SolutionParams = Field(default_factory=SolutionParams)
    spectrum: SpectrumParams = Field(default_factory=SpectrumParams)
    fourier: FourierParams = Field(default_factory=FourierParams)
    hardy: HardyParams = Field(default_factory=HardyParams)
    counterexample: CounterexampleParams = Field(default_factory=CounterexampleParams)
    outputs: OutputParams = Field(default_factory=OutputParams)
    verify: VerifyParams = Field(default_factory=VerifyParams)
    seed: int = Field(default=0, ge=0)
    jobs: int = Field(default=1, ge=1)
    log_level: LogLevel = "INFO"

    @model_validator(mode="after")
    def _check_consistency(self) -> RunConfig:
        dim = self.profile.dim
        self.bundle.check_dimension(dim)
        if self.grid.r_max >= self.profile.radius:
            msg = f"grid.r_max={self.grid.r_max} must stay below the profile radius {self.profile.radius}"
            raise ValueError(msg)
        kind = self.solution.kind
        if kind in ("modes", "solve", "log_harmonic") and dim != 2:
            msg = f"Solution kind '{kind}' is planar; use 'zonal' for N=3"
            raise ValueError(msg)
        if kind == "zonal" and dim != 3:
            msg = "Zonal solutions need N=3"
            raise ValueError(msg)
        if kind == "log_harmonic" and not isinstance(self.profile.perturbation, LogCurve):
            msg = "The logarithmic harmonic lives on a log_curve profile"
            raise ValueError(msg)
        if kind == "zonal" and self.bundle.V.kind == "cosine":
            msg = "Zonal modes are exact for zero or constant V only"
            raise ValueError(msg)
        if not self.profile.is_straight and not isinstance(self.profile.perturbation, LogCurve) and self.straightening.C0 == 0.0:
            msg = "Perturbed profiles need straightening.C0 > 0"
            raise ValueError(msg)
        if self.counterexample.x_min >= self.counterexample.x_max:
            msg = "counterexample.x_min must be below counterexample.x_max"
            raise ValueError(msg)
        if self.radii.values is not None:
            bad = [r for r in self.radii.values if not self.grid.r_min <= r <= self.grid.r_max]
            if bad:
                msg = f"Radii {bad} lie outside [{self.grid.r_min}, {self.grid.r_max}]"
                raise ValueError(msg)
        return self

    @property
    def fourier_radius(self) -> float:
        """R of the limit-coefficient formula."""
        return self.fourier.R if self.fourier.R is not None else 0.5 * self.grid.r_max

    @property
    def blowup_scale(self) -> float:
        """λ of the blow-up compared with the limit profile (default ten times r_min)."""
        if self.fourier.blowup_lambda is not None:
            return self.fourier.blowup_lambda
        return 10.0 ** (math.floor(math.log10(self.grid.r_min)) + 1)
