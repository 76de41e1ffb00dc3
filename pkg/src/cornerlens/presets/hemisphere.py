"""Half space in three dimensions."""

import math

from pydantic import Field

from cornerlens.coefficients import AngularPotential, CoefficientBundle, Nonlinearity
from cornerlens.config import GridParams, RunConfig, SolutionParams
from cornerlens.profiles import BoundaryProfile


class HemisphereSpectrum(RunConfig):
    """Zonal mode r psi_1 of the half space, cap spectrum and Hardy certificate."""

    profile: BoundaryProfile = Field(default_factory=lambda: BoundaryProfile.cone(0.5 * math.pi))
    grid: GridParams = Field(default_factory=lambda: GridParams(r_min=1e-5, r_max=0.1))
    solution: SolutionParams = Field(default_factory=lambda: SolutionParams(kind="zonal"))


class HemispherePohozaev(RunConfig):
    """Zonal mode of the half space with V = 0.5 and a manufactured nonlinearity."""

    profile: BoundaryProfile = Field(default_factory=lambda: BoundaryProfile.cone(0.5 * math.pi))
    bundle: CoefficientBundle = Field(
        default_factory=lambda: CoefficientBundle(V=AngularPotential(kind="constant", c=0.5), f=Nonlinearity(c=1.0, p=4.0))
    )
    grid: GridParams = Field(default_factory=lambda: GridParams(r_min=1e-5, r_max=0.1))
    solution: SolutionParams = Field(default_factory=lambda: SolutionParams(kind="zonal"))
