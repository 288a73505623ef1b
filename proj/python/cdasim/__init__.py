"""Continuous double auction simulator with switching fundamentalist and chartist agents."""

from ._core import ConfigError, __version__, analyze, default_config, dfa, fit_power_law, run

__all__ = ["ConfigError", "__version__", "analyze", "default_config", "dfa", "fit_power_law", "run"]
