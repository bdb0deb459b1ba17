"""Experiment harness: configuration, runners and table output."""
from .config import ExperimentConfig, build_config, read_config_file
from .runners import RUNNERS, execute

__all__ = ["ExperimentConfig", "RUNNERS", "build_config", "execute", "read_config_file"]
