"""Monte Carlo reproduction harness and command-line interface."""

from .cases import CASES, EstimatorConfig, case
from .experiments import (
    ExperimentConfig,
    ResultTable,
    run_density,
    run_experiment,
    run_order_study,
    run_rmse,
    run_sizepower,
)

__all__ = [
    "CASES",
    "EstimatorConfig",
    "case",
    "ExperimentConfig",
    "ResultTable",
    "run_rmse",
    "run_sizepower",
    "run_density",
    "run_order_study",
    "run_experiment",
]
