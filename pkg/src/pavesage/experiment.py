"""Multi-model, multi-indicator comparison runner.

Each (indicator, model) cell trains on the dataset's train mask, scores on
the test mask, and owns an rng seed derived stably from the master seed and
the cell key, so serial and parallel execution produce identical reports.
A failing cell records its error and never takes other cells down with it.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .baselines import fit_cart, fit_linear, fit_mlp, predict_baseline
from .data import Dataset
from .exceptions import ConfigError
from .metrics import Metrics, compute_metrics
from .sage import EpochStats, SageConfig, SageParams, predict, train

KNOWN_MODELS = ("lr", "cart", "nn", "sage")


@dataclass
class ExperimentConfig:
    master_seed: int = 0
    sage: SageConfig = field(default_factory=SageConfig)
    mlp_epochs: int = 300
    mlp_learning_rate: float = 0.01
    cart_max_depth: int | None = None
    cart_min_samples_leaf: int = 1
    ridge_eps: float = 1e-8
    jobs: int = 1


@dataclass
class EvalReport:
    indicators: tuple[str, ...]
    models: tuple[str, ...]
    cells: dict[tuple[str, str], Metrics] = field(default_factory=dict)
    errors: dict[tuple[str, str], str] = field(default_factory=dict)
    history: dict[str, list[EpochStats]] = field(default_factory=dict)
    sage_params: dict[str, SageParams] = field(default_factory=dict)
    run_info: dict = field(default_factory=dict)


def cell_seed(master_seed: int, *parts: str) -> int:
    """Stable 63-bit seed derived from the master seed and string parts."""
    text = ":".join([str(master_seed), *parts])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def _run_cell(indicator: str, model: str, dataset: Dataset, config: ExperimentConfig):
    seed = cell_seed(config.master_seed, indicator, model)
    mask = dataset.train_mask
    x_tr, y_tr = dataset.x[mask], dataset.y[mask]
    x_te, y_te = dataset.x[~mask], dataset.y[~mask]
    history = None
    params = None
    if model == "lr":
        fitted = fit_linear(x_tr, y_tr, ridge_eps=config.ridge_eps)
        preds = predict_baseline(fitted, x_te)
    elif model == "cart":
        fitted = fit_cart(
            x_tr,
            y_tr,
            max_depth=config.cart_max_depth,
            min_samples_leaf=config.cart_min_samples_leaf,
        )
        preds = predict_baseline(fitted, x_te)
    elif model == "nn":
        fitted = fit_mlp(
            x_tr,
            y_tr,
            epochs=config.mlp_epochs,
            learning_rate=config.mlp_learning_rate,
            rng_seed=seed,
        )
        preds = predict_baseline(fitted, x_te)
    elif model == "sage":
        sage_cfg = replace(config.sage, rng_seed=seed)
        params, history = train(dataset.graph, dataset.x, dataset.y, mask, sage_cfg)
        preds = predict(
            dataset.graph, dataset.x, params, include_self=sage_cfg.include_self_in_mean
        )[~mask]
    else:
        raise ConfigError(f"unknown model {model!r}; known: {KNOWN_MODELS}")
    return compute_metrics(y_te, preds), history, params


def run_experiment(
    datasets: dict[str, Dataset],
    models: tuple[str, ...] | list[str],
    config: ExperimentConfig,
) -> EvalReport:
    """Fills the full indicator x model metrics grid on the test splits."""
    indicators = tuple(datasets.keys())
    models = tuple(models)
    if not indicators or not models:
        raise ConfigError("run_experiment needs at least one indicator and one model")
    for model in models:
        if model not in KNOWN_MODELS:
            raise ConfigError(f"unknown model {model!r}; known: {KNOWN_MODELS}")
    for indicator, ds in datasets.items():
        if ds.train_mask is None:
            raise ConfigError(f"dataset for {indicator!r} has no train/test split")

    report = EvalReport(
        indicators=indicators,
        models=models,
        run_info={"master_seed": config.master_seed},
    )
    keys = [(ind, m) for ind in indicators for m in models]

    def run(key):
        ind, m = key
        try:
            return key, _run_cell(ind, m, datasets[ind], config), None
        except Exception as exc:  # per-cell isolation: a diverging fit is data
            return key, None, f"{type(exc).__name__}: {exc}"

    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            outcomes = list(pool.map(run, keys))
    else:
        outcomes = [run(k) for k in keys]

    for key, result, error in outcomes:
        if error is not None:
            report.errors[key] = error
            continue
        metrics, history, params = result
        report.cells[key] = metrics
        if history is not None:
            report.history[key[0]] = history
        if params is not None:
            report.sage_params[key[0]] = params
    return report
