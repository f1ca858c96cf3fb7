"""Accuracy vs. group-fairness trade-off fronts for binary classifiers.

Trains a logistic head over fixed features under a scalarized combination of
binary cross entropy and a group-balanced accuracy loss, sweeps the trade-off
weight, and checks each solution with a Fritz-John stationarity residual.
"""

from fairfront.dataset import (
    Dataset,
    DatasetError,
    Sample,
    SplitSpec,
    SynthConfig,
    dataset_stats,
    generate_synthetic,
    load_csv,
    stratified_split,
    write_csv,
)
from fairfront.linear_model import (
    OptimizerState,
    PredictionBatch,
    TrainingError,
    WeightVector,
    adamax_step,
    forward,
    train,
)
from fairfront.losses import (
    LossPair,
    bce,
    cba,
    fairness_loss,
    finite_diff_check,
    loss_pair,
    scalarized_loss,
)
from fairfront.metrics import GroupReport, compare_train_test, evaluate
from fairfront.pareto import (
    ParetoFront,
    TradeoffPoint,
    dominance_filter,
    export_front,
    fj_residual,
    load_front,
    solve_at_alpha,
    sweep_front,
)

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "DatasetError",
    "GroupReport",
    "LossPair",
    "OptimizerState",
    "ParetoFront",
    "PredictionBatch",
    "Sample",
    "SplitSpec",
    "SynthConfig",
    "TradeoffPoint",
    "TrainingError",
    "WeightVector",
    "adamax_step",
    "bce",
    "cba",
    "compare_train_test",
    "dataset_stats",
    "dominance_filter",
    "evaluate",
    "export_front",
    "fairness_loss",
    "finite_diff_check",
    "fj_residual",
    "forward",
    "generate_synthetic",
    "load_csv",
    "load_front",
    "loss_pair",
    "scalarized_loss",
    "solve_at_alpha",
    "stratified_split",
    "sweep_front",
    "train",
    "write_csv",
]
