"""Regression metrics: coefficient of determination, MSE, MAE."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ShapeError, UndefinedMetricError


@dataclass(frozen=True)
class Metrics:
    r2: float
    mse: float
    mae: float


def r2_score(y_true, y_pred) -> float:
    """1 - SS_res / SS_tot. Negative when predictions underperform the mean.

    Raises UndefinedMetricError when y_true has zero variance; a silent 0
    would masquerade as "model explains nothing", which is a different claim.
    """
    yt = np.asarray(y_true, dtype=np.float64).ravel()
    yp = np.asarray(y_pred, dtype=np.float64).ravel()
    if yt.size != yp.size:
        raise ShapeError(f"length mismatch: {yt.size} vs {yp.size}")
    if yt.size < 2:
        raise ShapeError("r2_score needs at least 2 observations")
    ss_tot = float(np.sum((yt - yt.mean()) ** 2))
    if ss_tot == 0.0:
        raise UndefinedMetricError("r2_score undefined: targets have zero variance")
    ss_res = float(np.sum((yt - yp) ** 2))
    return 1.0 - ss_res / ss_tot


def mse_mae(y_true, y_pred) -> tuple[float, float]:
    """Means of squared and absolute errors."""
    yt = np.asarray(y_true, dtype=np.float64).ravel()
    yp = np.asarray(y_pred, dtype=np.float64).ravel()
    if yt.size != yp.size:
        raise ShapeError(f"length mismatch: {yt.size} vs {yp.size}")
    if yt.size == 0:
        raise ShapeError("mse_mae needs at least one observation")
    diff = yt - yp
    return float(np.mean(diff * diff)), float(np.mean(np.abs(diff)))


def compute_metrics(y_true, y_pred) -> Metrics:
    mse, mae = mse_mae(y_true, y_pred)
    return Metrics(r2=r2_score(y_true, y_pred), mse=mse, mae=mae)
