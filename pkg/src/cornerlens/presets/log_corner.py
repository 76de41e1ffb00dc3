"""Logarithmic corner where the height loses its power law."""

from pydantic import Field

from cornerlens.config import CounterexampleParams, GridParams, RunConfig, SolutionParams
from cornerlens.logexample import build_boundary
from cornerlens.profiles import BoundaryProfile

ALPHA = 0.5
SIGMA = 0.3


def _grid() -> GridParams:
    r_max = min(1e-2, 0.5 * build_boundary(ALPHA, SIGMA).radius)
    return GridParams(r_min=1e-6 * r_max, r_max=r_max, rings_per_decade=16, angular_nodes=129)


class LogCornerExample(RunConfig):
    """Corner of opening pi/2 bounded by the zero set of r^4(log r sin 4s + s cos 4s)."""

    profile: BoundaryProfile = Field(default_factory=lambda: build_boundary(ALPHA, SIGMA))
    grid: GridParams = Field(default_factory=_grid)
    solution: SolutionParams = Field(default_factory=lambda: SolutionParams(kind="log_harmonic"))
    counterexample: CounterexampleParams = Field(default_factory=lambda: CounterexampleParams(alpha=ALPHA, sigma=SIGMA))
