"""Pavement deterioration regression over a road-network graph."""

__version__ = "0.1.0"

from .baselines import (
    CartTree,
    LinearModel,
    MlpModel,
    fit_cart,
    fit_linear,
    fit_mlp,
    predict_baseline,
)
from .data import (
    Dataset,
    FeatureSpec,
    SectionRecord,
    assemble_features,
    generate_synthetic,
    load_csv,
    split,
    write_csv,
)
from .exceptions import PavesageError
from .experiment import EvalReport, ExperimentConfig, run_experiment
from .graph import RoadGraph, build_graph, neighbors, sample_neighborhood
from .metrics import Metrics, compute_metrics, mse_mae, r2_score
from .params_io import load_model, save_model
from .report import emit_report
from .sage import (
    SageConfig,
    SageParams,
    forward_full,
    forward_sampled,
    init_params,
    predict,
    train,
)

__all__ = [
    "CartTree",
    "Dataset",
    "EvalReport",
    "ExperimentConfig",
    "FeatureSpec",
    "LinearModel",
    "Metrics",
    "MlpModel",
    "PavesageError",
    "RoadGraph",
    "SageConfig",
    "SageParams",
    "SectionRecord",
    "assemble_features",
    "build_graph",
    "compute_metrics",
    "emit_report",
    "fit_cart",
    "fit_linear",
    "fit_mlp",
    "forward_full",
    "forward_sampled",
    "generate_synthetic",
    "init_params",
    "load_csv",
    "load_model",
    "mse_mae",
    "neighbors",
    "predict",
    "predict_baseline",
    "r2_score",
    "run_experiment",
    "sample_neighborhood",
    "save_model",
    "split",
    "train",
    "write_csv",
]
