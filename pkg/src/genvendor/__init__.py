"""genvendor — generative demand sampling for newsvendor pricing decisions.

The package learns the conditional demand distribution D | (X=x, P=p) with a
conditional generative model, then turns generated demand samples into
inventory decisions at arbitrary prices and joint price-and-inventory
decisions, benchmarked against classical data-driven newsvendor baselines on
fully specified synthetic demand processes and a real-data CSV protocol.
"""

__version__ = "0.1.0"

from .numerics import Covariance, RngStream, derive_stream, sample_mvn, std_normal_cdf, std_normal_quantile
from .decisions import CostParams, JointDecision, build_price_grid, estimate_profit, inventory_decision, joint_decision, profit, rho
from .data import Dataset, DemandRecord
from .dgp import OracleModel, make_oracle, oracle_expected_profit, oracle_quantile, sample_demand, sample_features
from .cdgm import Generator, GeneratorEstimator, TextGeneratorEstimator, TrainConfig, generate, train
from .harness import ExperimentConfig, ExperimentReport, convergence_probe, run_inventory_experiment, run_joint_experiment, write_report

__all__ = [
    "Covariance",
    "RngStream",
    "derive_stream",
    "sample_mvn",
    "std_normal_cdf",
    "std_normal_quantile",
    "CostParams",
    "JointDecision",
    "build_price_grid",
    "estimate_profit",
    "inventory_decision",
    "joint_decision",
    "profit",
    "rho",
    "Dataset",
    "DemandRecord",
    "OracleModel",
    "make_oracle",
    "oracle_expected_profit",
    "oracle_quantile",
    "sample_demand",
    "sample_features",
    "Generator",
    "GeneratorEstimator",
    "TextGeneratorEstimator",
    "TrainConfig",
    "generate",
    "train",
    "ExperimentConfig",
    "ExperimentReport",
    "convergence_probe",
    "run_inventory_experiment",
    "run_joint_experiment",
    "write_report",
    "__version__",
]
