"""Experiment harness: config parsing, synthetic data, reports, and the CLI."""

from .config import ExperimentConfig, config_hash, load_config, parse_config, toy_benchmark_config
from .synth import build_models, make_toy_concepts, synth_dataset
from .reports import ReportBundle, emit_report

__all__ = [
    "ExperimentConfig",
    "ReportBundle",
    "build_models",
    "config_hash",
    "emit_report",
    "load_config",
    "make_toy_concepts",
    "parse_config",
    "synth_dataset",
    "toy_benchmark_config",
]
