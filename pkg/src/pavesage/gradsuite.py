"""Finite-difference audit of every analytic gradient in the package.

Each entry builds a scalar loss around one primitive (or one parameter block
of the full model) and compares the hand-written backward pass against
central differences at many random points. ReLU inputs are nudged away from
the kink, where the subgradient convention makes finite differences
meaningless.
"""

from __future__ import annotations

import numpy as np

from . import numerics
from .baselines import MlpModel, _init_mlp, mlp_loss_and_grads
from .data import generate_synthetic
from .graph import build_graph
from .numerics import grad_check, mean_rows, mean_rows_backward, mse_loss
from .sage import SageConfig, init_params, loss_and_grads


def _away_from_kink(x: np.ndarray, margin: float = 2e-3) -> np.ndarray:
    sign = np.where(x >= 0, 1.0, -1.0)
    return np.where(np.abs(x) < margin, sign * (np.abs(x) + margin), x)


def _check_matmul(rng) -> float:
    a = rng.normal(size=(4, 5))
    b = rng.normal(size=(5, 3))
    t = rng.normal(size=(4, 3))

    def f(p):
        loss, g = mse_loss(numerics.matmul(p, b), t)
        da, _ = numerics.matmul_backward(p, b, g)
        return loss, da

    return grad_check(f, a)


def _check_relu(rng) -> float:
    x = _away_from_kink(rng.normal(size=(4, 6)))
    t = rng.normal(size=(4, 6))

    def f(p):
        loss, g = mse_loss(numerics.relu(p), t)
        return loss, numerics.relu_backward(p, g)

    return grad_check(f, x)


def _check_concat(rng) -> float:
    a = rng.normal(size=(3, 4))
    b = rng.normal(size=(3, 2))
    t = rng.normal(size=(3, 6))

    def f(p):
        loss, g = mse_loss(numerics.concat_cols(p, b), t)
        ga, _ = numerics.split_cols(g, p.shape[1])
        return loss, ga

    return grad_check(f, a)


def _check_mean_rows(rng) -> float:
    x = rng.normal(size=(6, 3))
    groups = [[0, 2, 4], [1], [], [3, 5, 0]]
    t = rng.normal(size=(len(groups), 3))

    def f(p):
        loss, g = mse_loss(mean_rows(p, groups), t)
        return loss, mean_rows_backward(p.shape[0], groups, g)

    return grad_check(f, x)


def _check_mse(rng) -> float:
    p0 = rng.normal(size=(5, 2))
    t = rng.normal(size=(5, 2))

    def f(p):
        return mse_loss(p, t)

    return grad_check(f, p0)


_PRIMITIVE_CHECKS = (
    ("matmul", _check_matmul),
    ("relu", _check_relu),
    ("concat_cols", _check_concat),
    ("mean_rows", _check_mean_rows),
    ("mse_loss", _check_mse),
)


def _model_fixture(seed: int):
    records, _ = generate_synthetic(
        n_nodes=10, n_routes=2, spatial_strength=0.5, rng_seed=seed
    )
    graph = build_graph(records)
    rng = np.random.default_rng(seed + 1)
    return graph, rng.normal(size=(10, 6)), rng.normal(size=10)


def _check_sage_params(seed: int) -> dict[str, float]:
    """Checks the full two-layer training loss wrt each weight block and the head."""
    graph, features, targets = _model_fixture(seed)
    config = SageConfig(hidden_dims=(5, 4), fanouts=(None, None), rng_seed=seed)
    params = init_params(features.shape[1], config)

    def check_block(point, set_block, pick_grad):
        def f(p):
            trial = params.copy()
            set_block(trial, p)
            loss, grads = loss_and_grads(graph, features, trial, targets)
            return loss, pick_grad(grads)

        return grad_check(f, point)

    results = {}
    for k in range(len(params.weights)):
        results[f"sage_w{k}"] = check_block(
            params.weights[k],
            lambda trial, p, k=k: trial.weights.__setitem__(k, p),
            lambda grads, k=k: grads["weights"][k],
        )
    results["sage_head_w"] = check_block(
        params.head_w,
        lambda trial, p: setattr(trial, "head_w", p),
        lambda grads: grads["head_w"],
    )
    results["sage_head_b"] = check_block(
        np.array([[params.head_b]]),
        lambda trial, p: setattr(trial, "head_b", float(p[0, 0])),
        lambda grads: np.array([[grads["head_b"]]]),
    )
    return results


def _check_mlp(seed: int) -> float:
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(12, 4))
    y = rng.normal(size=12)
    model = _init_mlp(4, rng)
    model.b1 = rng.normal(size=model.b1.size) * 0.1  # move preactivations off 0

    def f(p):
        loss, grads = mlp_loss_and_grads(MlpModel(p, model.b1, model.w2, model.b2), x, y)
        return loss, grads["w1"]

    return grad_check(f, model.w1)


def gradient_suite(rng_seed: int = 0, n_points: int = 100) -> dict[str, float]:
    """Max relative gradient error per check, over n_points random points each."""
    results: dict[str, float] = {}
    for p_i, (name, check) in enumerate(_PRIMITIVE_CHECKS):
        worst = 0.0
        for i in range(n_points):
            rng = np.random.default_rng((rng_seed, p_i, i))
            worst = max(worst, check(rng))
        results[name] = worst

    sage_worst: dict[str, float] = {}
    mlp_worst = 0.0
    for i in range(n_points):
        for key, err in _check_sage_params(rng_seed + i).items():
            sage_worst[key] = max(sage_worst.get(key, 0.0), err)
        mlp_worst = max(mlp_worst, _check_mlp(rng_seed + 10_000 + i))
    results.update(sage_worst)
    results["mlp_w1"] = mlp_worst
    return results
