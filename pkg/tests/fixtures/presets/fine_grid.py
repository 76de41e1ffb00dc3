"""Preset fixtures for registry tests."""

from pydantic import Field

from cornerlens.config import GridParams, RunConfig


class FineGrid(RunConfig):
    """Twice the default ring density."""

    grid: GridParams = Field(default_factory=lambda: GridParams(rings_per_decade=48))


class FinerGrid(FineGrid):
    """Not a direct subclass of RunConfig."""

    grid: GridParams = Field(default_factory=lambda: GridParams(rings_per_decade=96))


class SeededRun(RunConfig):
    seed: int = 7
