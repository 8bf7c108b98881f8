"""Sample fit reliability.

Scores each observation by how well it agrees with models fitted on many
small random sub-samples, then uses the scores to anneal (drop the least
reliable rows and trace the estimate) or to weight a least-squares fit.
"""

__version__ = "0.1.0"

from .annealing import AnnealingConfig, AnnealingPath, AnnealingStep, anneal, anneal_with_bootstrap, covariate_balance
from .baselines import HuberConfig, HuberFit, RansacConfig, RansacFit, fit_huber, fit_ransac
from .core import BootstrapResult, Dataset, LinearFit, fit_ols, fit_wls, pairs_bootstrap
from .data_io import CsvSchema, describe, load_csv, write_csv
from .errors import (
    ComputationError,
    DegenerateSampleError,
    SFRError,
    ValidationError,
)
from .fitting import FitRow, FitTable, SFRFit, WeightScheme, fit_sfr, fit_table_compare, sfr_estimate
from .scoring import ReliabilityScores, ScoringConfig, score_sample, score_sample_exhaustive
from .simulation import MetricsTable, ScenarioConfig, generate_scenario, jarque_bera, run_benchmark

__all__ = [
    "AnnealingConfig",
    "AnnealingPath",
    "AnnealingStep",
    "BootstrapResult",
    "ComputationError",
    "CsvSchema",
    "Dataset",
    "DegenerateSampleError",
    "FitRow",
    "FitTable",
    "HuberConfig",
    "HuberFit",
    "LinearFit",
    "MetricsTable",
    "RansacConfig",
    "RansacFit",
    "ReliabilityScores",
    "SFRError",
    "SFRFit",
    "ScenarioConfig",
    "ScoringConfig",
    "ValidationError",
    "WeightScheme",
    "anneal",
    "anneal_with_bootstrap",
    "covariate_balance",
    "describe",
    "fit_huber",
    "fit_ols",
    "fit_ransac",
    "fit_sfr",
    "fit_table_compare",
    "fit_wls",
    "generate_scenario",
    "jarque_bera",
    "load_csv",
    "pairs_bootstrap",
    "run_benchmark",
    "score_sample",
    "score_sample_exhaustive",
    "sfr_estimate",
    "write_csv",
]
