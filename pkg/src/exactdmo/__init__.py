"""Direct optimization of precision, recall and F-beta through an exact
penalty on a lifted, piecewise-linear reformulation of the indicator."""
from .baselines import sigmoid_indicator, train_baseline, wce_loss_and_grad
from .dataio import (Dataset, DatasetError, gen_gauss2d, gen_toy1d, load_csv, save_csv,
                     split_stratified)
from .metrics import MetricsReport, TaskSpec, fbeta_from_pr, metrics_at_threshold, threshold_adjust
from .model import ModelParams, backward_scores, forward_scores, init_params
from .oracle import (oracle_best_threshold, oracle_feasibility_equivalence,
                     oracle_global_equivalence_fixed_theta)
from .reform import LiftedState, eta_residuals, h_subgradient, h_value, round_lifted
from .solver import (SolverConfig, TrainResult, penalty_value_and_grad,
                     regularizer_value_and_grad, run_exact_penalty, solve_subproblem)

__version__ = "0.1.0"

__all__ = [
    "Dataset", "DatasetError", "LiftedState", "MetricsReport", "ModelParams", "SolverConfig",
    "TaskSpec", "TrainResult", "backward_scores", "eta_residuals", "fbeta_from_pr",
    "forward_scores", "gen_gauss2d", "gen_toy1d", "h_subgradient", "h_value", "init_params",
    "load_csv", "metrics_at_threshold", "oracle_best_threshold",
    "oracle_feasibility_equivalence", "oracle_global_equivalence_fixed_theta",
    "penalty_value_and_grad", "regularizer_value_and_grad", "round_lifted",
    "run_exact_penalty", "save_csv", "sigmoid_indicator", "solve_subproblem",
    "split_stratified", "threshold_adjust", "train_baseline", "wce_loss_and_grad",
]
