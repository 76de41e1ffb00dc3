"""Sector modes on a straight corner."""

from pydantic import Field

from cornerlens.config import FourierParams, GridParams, RunConfig, SolutionParams
from cornerlens.profiles import BoundaryProfile


class PureMode(RunConfig):
    """Mode r^(3/2) psi_1 on the straight sector of opening 2pi/3."""

    profile: BoundaryProfile = Field(default_factory=lambda: BoundaryProfile.sector(2.0 / 3.0))
    grid: GridParams = Field(default_factory=lambda: GridParams(r_min=1e-6, r_max=0.1))
    solution: SolutionParams = Field(default_factory=lambda: SolutionParams(kind="modes", modes=[(1, 1.0)]))


class ModeMixture(RunConfig):
    """Mixture psi_1 + 0.1 psi_2 with both limit coefficients reported."""

    profile: BoundaryProfile = Field(default_factory=lambda: BoundaryProfile.sector(2.0 / 3.0))
    grid: GridParams = Field(default_factory=lambda: GridParams(r_min=1e-6, r_max=0.1))
    solution: SolutionParams = Field(default_factory=lambda: SolutionParams(kind="modes", modes=[(1, 1.0), (2, 0.1)]))
    fourier: FourierParams = Field(default_factory=lambda: FourierParams(extra_indices=[2]))
