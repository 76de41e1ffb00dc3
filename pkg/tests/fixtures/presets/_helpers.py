"""Private module, skipped by discovery."""

from cornerlens.config import RunConfig


class HiddenPreset(RunConfig):
    seed: int = 99
