"""Configuration, trial orchestration, caching and the command line."""

from .cache import ConstructionCache
from .config import ExperimentConfig, SeedPlan, build_source, load_config, parse_config
from .experiment import (
    RNG_ALGORITHM,
    ResultsTable,
    build_constructions,
    derive_seed,
    run_experiment,
    run_trial,
    trial_seeds,
)
from .report import OracleReport, info_report, oracle_report

__all__ = [
    "ConstructionCache", "ExperimentConfig", "SeedPlan", "build_source", "load_config",
    "parse_config", "RNG_ALGORITHM", "ResultsTable", "build_constructions", "derive_seed",
    "run_experiment", "run_trial", "trial_seeds", "OracleReport", "info_report", "oracle_report",
]
