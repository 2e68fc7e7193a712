"""Kernel SVC with density-derived per-sample slack costs.

Trains a soft-margin SVC whose per-sample slack penalties C * w_i come from
an RBF density estimate of the training set, plus a small weighted-loss MLP
regressor, k-fold evaluation utilities, and an HTTP service with a
command-line client.
"""

__version__ = "0.1.0"

from .data import (DataError, Dataset, FoldAssignment, Standardizer, clean,
                   kfold, load_csv, load_libsvm, parse_label_map, save_csv,
                   shuffle)
from .experiments import (DEFAULT_C_GRID, DEFAULT_GAMMA_K_GRID,
                          DEFAULT_GAMMA_S_GRID, ExperimentReport, GridSpec,
                          cross_validate, f1_score, format_mlp_table,
                          format_table, grid_search, mlp_experiment)
from .kernel import GramCache, gram, rbf
from .mlp import MlpRegressor, gradient_check, mae
from .reference import (ReferenceSolution, random_instance, selftest,
                        solve_reference)
from .svc import DualSolution, SolverStats, SvcModel, solve_dual
from .weighting import (SIGNED_CLAMP, WeightScheme, density, make_weights,
                        signed_density)

__all__ = [
    "DataError", "Dataset", "FoldAssignment", "Standardizer", "clean",
    "kfold", "load_csv", "load_libsvm", "parse_label_map", "save_csv",
    "shuffle", "DEFAULT_C_GRID", "DEFAULT_GAMMA_K_GRID",
    "DEFAULT_GAMMA_S_GRID", "ExperimentReport", "GridSpec", "cross_validate",
    "f1_score", "format_mlp_table", "format_table", "grid_search",
    "mlp_experiment", "GramCache", "gram", "rbf", "MlpRegressor",
    "gradient_check", "mae", "ReferenceSolution", "random_instance",
    "selftest", "solve_reference", "DualSolution", "SolverStats", "SvcModel",
    "solve_dual", "SIGNED_CLAMP", "WeightScheme", "density", "make_weights",
    "signed_density", "__version__",
]
