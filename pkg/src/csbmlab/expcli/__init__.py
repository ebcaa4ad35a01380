"""Experiment orchestration: configuration, runners, plots, CLI."""

from .config import ExperimentConfig, build_config, parse_config_file
from .runners import (EXP4_MODELS, RunManifest, run_experiment1, run_experiment2,
                      run_experiment3, run_experiment4, run_moment_validation,
                      run_oversmooth_axioms, snr_unit)
from .svgplot import emit_plot, read_csv

__all__ = [
    "ExperimentConfig",
    "build_config",
    "parse_config_file",
    "RunManifest",
    "EXP4_MODELS",
    "run_experiment1",
    "run_experiment2",
    "run_experiment3",
    "run_experiment4",
    "run_moment_validation",
    "run_oversmooth_axioms",
    "snr_unit",
    "emit_plot",
    "read_csv",
]
