"""Experiment harness: configuration, scenarios, runs, verification and I/O."""

from .config import ConfigError, ExperimentConfig, load_config, loads
from .run import CHECK_NAMES, initial_data, run_experiment, verify
from .scenarios import SCENARIOS, make_scenario

__all__ = ["CHECK_NAMES", "ConfigError", "ExperimentConfig", "SCENARIOS",
           "initial_data", "load_config", "loads", "make_scenario", "run_experiment", "verify"]
