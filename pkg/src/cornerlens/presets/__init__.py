"""Built-in run presets, discovered by :class:`cornerlens.registry.PresetRegistry`."""
