"""Curved corner with the full coefficient bundle."""

from pydantic import Field

from cornerlens.coefficients import CoefficientBundle, DriftSpec, MatrixSpec, Nonlinearity, PotentialSpec
from cornerlens.config import FourierParams, GridParams, RunConfig, StraighteningParams
from cornerlens.profiles import BoundaryProfile, PowerBump


def _bundle() -> CoefficientBundle:
    return CoefficientBundle(
        A=MatrixSpec(kind="linear", amp=0.5),
        b=DriftSpec(amp=1.0, order=-0.5),
        h=PotentialSpec(amp=1.0, order=-1.5),
        f=Nonlinearity(c=1.0, p=4.0),
    )


class PerturbedCorner(RunConfig):
    """Power-bump boundary phi_0 + 0.5|x|^(3/2) on the 2pi/3 sector with A, b, h and f switched on."""

    profile: BoundaryProfile = Field(
        default_factory=lambda: BoundaryProfile.sector(2.0 / 3.0, perturbation=PowerBump(a=0.5, delta=0.5))
    )
    straightening: StraighteningParams = Field(default_factory=lambda: StraighteningParams(C0=0.5, delta=0.5))
    bundle: CoefficientBundle = Field(default_factory=_bundle)
    grid: GridParams = Field(default_factory=lambda: GridParams(r_min=1e-7, r_max=0.1, rings_per_decade=24, angular_nodes=129))
    fourier: FourierParams = Field(default_factory=lambda: FourierParams(blowup_lambda=1e-5))
