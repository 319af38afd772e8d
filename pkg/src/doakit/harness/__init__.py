"""Scenario-driven experiment runner and command-line interface."""

from .config import ESTIMATOR_KINDS, EstimatorConfig, ExperimentConfig, load_config, parse_config
from .runner import (
    SummaryReport,
    TrialRecord,
    compare_estimators,
    match_estimates,
    run_experiment,
    run_trial,
    spectrum_traces,
)
