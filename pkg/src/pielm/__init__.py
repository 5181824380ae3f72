"""Physics-informed extreme learning machines for linear parabolic PDEs."""

from .assembly import AssemblyError, LinearSystem, assemble, condition_report
from .config import ConfigError, ExperimentConfig, Seeds, parse_config
from .domain import BoxDomain, Normalization
from .estimator import PIELMSolver, RandomFeatureTransformer
from .features import Activation, FeatureNetwork, MultiIndex, eval_feature_derivative, eval_features, eval_network, init_random
from .lstsq import SolveMethod, SolveOptions, SolveReport, solve_min_norm
from .metrics import ErrorReport, convergence_study, evaluate_error, fit_log_slope
from .problems import PdeProblem, make_black_scholes_problem, make_heat_problem, make_heston_problem
from .sampling import CollocationSet, sample_collocation, sample_test_set

__version__ = "0.1.0"

__all__ = [
    "Activation",
    "AssemblyError",
    "BoxDomain",
    "CollocationSet",
    "ConfigError",
    "ErrorReport",
    "ExperimentConfig",
    "FeatureNetwork",
    "LinearSystem",
    "MultiIndex",
    "Normalization",
    "PIELMSolver",
    "PdeProblem",
    "RandomFeatureTransformer",
    "Seeds",
    "SolveMethod",
    "SolveOptions",
    "SolveReport",
    "assemble",
    "condition_report",
    "convergence_study",
    "eval_feature_derivative",
    "eval_features",
    "eval_network",
    "evaluate_error",
    "fit_log_slope",
    "init_random",
    "make_black_scholes_problem",
    "make_heat_problem",
    "make_heston_problem",
    "parse_config",
    "sample_collocation",
    "sample_test_set",
    "solve_min_norm",
]
