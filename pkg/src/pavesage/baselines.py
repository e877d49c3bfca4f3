"""Graph-agnostic comparison regressors: linear, CART, and a small MLP.

All three consume the same standardized feature matrix as the graph model but
ignore adjacency entirely, which is exactly what makes them useful baselines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError, DataError, NumericError, ShapeError
from .numerics import mse_loss, relu, relu_backward

MLP_HIDDEN = 100


@dataclass
class LinearModel:
    coefficients: np.ndarray
    intercept: float


@dataclass
class CartTree:
    """Binary regression tree in array form; -1 marks "no child" / leaf fields.

    Rows of the arrays are nodes: internal nodes route x[feature] <= threshold
    to `left`, otherwise `right`; leaves carry the mean training target.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    max_depth: int | None
    min_samples_leaf: int

    @property
    def n_nodes(self) -> int:
        return self.feature.size


@dataclass
class MlpModel:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: float


def _check_xy(x: np.ndarray, y: np.ndarray):
    if x.ndim != 2:
        raise ShapeError(f"feature matrix must be 2-D, got {x.shape}")
    if x.shape[0] != y.size or x.shape[0] < 1:
        raise ShapeError(f"{x.shape[0]} feature rows for {y.size} targets")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise DataError("non-finite values in training data")


def fit_linear(x, y, ridge_eps: float = 1e-8) -> LinearModel:
    """Least squares via the normal equations with a tiny ridge term.

    ridge_eps exists purely to keep the solve well-posed on collinear
    columns; it is far below any statistically meaningful regularization.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    _check_xy(x, y)
    xt = np.concatenate([x, np.ones((x.shape[0], 1))], axis=1)
    gram = xt.T @ xt + ridge_eps * np.eye(xt.shape[1])
    beta = np.linalg.solve(gram, xt.T @ y)
    return LinearModel(coefficients=beta[:-1].copy(), intercept=float(beta[-1]))


def _sse_scan(ys: np.ndarray):
    """Prefix/suffix SSE of a target vector already sorted by the split feature."""
    n = ys.size
    csum = np.cumsum(ys)
    csq = np.cumsum(ys * ys)
    left_n = np.arange(1, n, dtype=np.float64)
    sse_l = csq[:-1] - csum[:-1] ** 2 / left_n
    right_n = n - left_n
    rsum = csum[-1] - csum[:-1]
    rsq = csq[-1] - csq[:-1]
    sse_r = rsq - rsum**2 / right_n
    return sse_l, sse_r


def _best_split(x, y, idx, min_samples_leaf):
    """(reduction, feature, threshold) of the best valid split, or None.

    Candidates are midpoints between consecutive distinct sorted values;
    ties resolve to the lowest feature index, then the lowest threshold,
    via strict-improvement scanning in that order.
    """
    ys_all = y[idx]
    n = idx.size
    parent_sse = float(np.sum((ys_all - ys_all.mean()) ** 2))
    best = None
    for f in range(x.shape[1]):
        xs = x[idx, f]
        order = np.argsort(xs, kind="stable")
        xs = xs[order]
        ys = ys_all[order]
        sse_l, sse_r = _sse_scan(ys)
        for cut in range(min_samples_leaf - 1, n - min_samples_leaf):
            if xs[cut] == xs[cut + 1]:
                continue
            reduction = parent_sse - (sse_l[cut] + sse_r[cut])
            if best is None or reduction > best[0]:
                threshold = (xs[cut] + xs[cut + 1]) / 2.0
                best = (float(reduction), f, float(threshold))
    return best


def fit_cart(x, y, max_depth: int | None = None, min_samples_leaf: int = 1) -> CartTree:
    """Greedy variance-reduction regression tree."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    _check_xy(x, y)
    if min_samples_leaf < 1:
        raise ConfigError(f"min_samples_leaf must be >= 1, got {min_samples_leaf}")

    feature, threshold, left, right, value = [], [], [], [], []

    def new_node():
        feature.append(-1)
        threshold.append(np.nan)
        left.append(-1)
        right.append(-1)
        value.append(np.nan)
        return len(feature) - 1

    # Explicit stack instead of recursion: adversarial targets can produce
    # trees deeper than the interpreter's recursion limit.
    root = new_node()
    stack = [(root, np.arange(x.shape[0]), 0)]
    while stack:
        node, idx, depth = stack.pop()
        ys = y[idx]
        value[node] = float(ys.mean())
        splittable = (
            (max_depth is None or depth < max_depth)
            and idx.size >= 2 * min_samples_leaf
            and float(ys.min()) != float(ys.max())
        )
        if not splittable:
            continue
        best = _best_split(x, y, idx, min_samples_leaf)
        if best is None or best[0] <= 0.0:
            continue
        _, f, thr = best
        go_left = x[idx, f] <= thr
        feature[node] = f
        threshold[node] = thr
        left[node] = new_node()
        right[node] = new_node()
        stack.append((right[node], idx[~go_left], depth + 1))
        stack.append((left[node], idx[go_left], depth + 1))
    return CartTree(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        value=np.array(value, dtype=np.float64),
        max_depth=max_depth,
        min_samples_leaf=min_samples_leaf,
    )


def _init_mlp(d: int, rng: np.random.Generator) -> MlpModel:
    b = math.sqrt(6.0 / (d + MLP_HIDDEN))
    w1 = rng.uniform(-b, b, size=(MLP_HIDDEN, d))
    b_out = math.sqrt(6.0 / (MLP_HIDDEN + 1))
    w2 = rng.uniform(-b_out, b_out, size=(1, MLP_HIDDEN))
    return MlpModel(w1=w1, b1=np.zeros(MLP_HIDDEN), w2=w2, b2=0.0)


def mlp_loss_and_grads(model: MlpModel, x: np.ndarray, y: np.ndarray):
    """Full-batch MSE and analytic gradients of all four parameter blocks."""
    z1 = x @ model.w1.T + model.b1
    h = relu(z1)
    pred = (h @ model.w2.T).ravel() + model.b2
    loss, gpred = mse_loss(pred.reshape(-1, 1), y.reshape(-1, 1))
    dpred = gpred.reshape(-1, 1)
    g_w2 = dpred.T @ h
    g_b2 = float(dpred.sum())
    dh = dpred @ model.w2
    dz1 = relu_backward(z1, dh)
    g_w1 = dz1.T @ x
    g_b1 = dz1.sum(axis=0)
    return loss, {"w1": g_w1, "b1": g_b1, "w2": g_w2, "b2": g_b2}


def fit_mlp(
    x, y, epochs: int, learning_rate: float = 0.01, rng_seed: int = 0
) -> MlpModel:
    """One ReLU hidden layer of width 100, full-batch Adam on MSE.

    Targets are standardized internally; the inverse map is folded back into
    the output layer, so predictions are in raw units. epochs=0 returns the
    untouched initialized network.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    _check_xy(x, y)
    rng = np.random.default_rng(rng_seed)
    model = _init_mlp(x.shape[1], rng)
    if epochs == 0:
        return model

    mu = float(y.mean())
    sd = float(y.std()) or 1.0
    y_std = (y - mu) / sd

    beta1, beta2, eps = 0.9, 0.999, 1e-8
    state = {
        k: (np.zeros_like(v), np.zeros_like(v))
        for k, v in (("w1", model.w1), ("b1", model.b1), ("w2", model.w2))
    }
    m_b2 = v_b2 = 0.0
    for t in range(1, epochs + 1):
        loss, grads = mlp_loss_and_grads(model, x, y_std)
        if not math.isfinite(loss):
            raise NumericError(f"non-finite MLP loss at epoch {t - 1}")
        c1, c2 = 1 - beta1**t, 1 - beta2**t
        for key in ("w1", "b1", "w2"):
            p = getattr(model, key)
            g = grads[key]
            m, v = state[key]
            m *= beta1
            m += (1 - beta1) * g
            v *= beta2
            v += (1 - beta2) * g * g
            p -= learning_rate * (m / c1) / (np.sqrt(v / c2) + eps)
        g = grads["b2"]
        m_b2 = beta1 * m_b2 + (1 - beta1) * g
        v_b2 = beta2 * v_b2 + (1 - beta2) * g * g
        model.b2 -= learning_rate * (m_b2 / c1) / (math.sqrt(v_b2 / c2) + eps)

    model.w2 = model.w2 * sd
    model.b2 = model.b2 * sd + mu
    return model


def _predict_cart(tree: CartTree, x: np.ndarray) -> np.ndarray:
    out = np.empty(x.shape[0], dtype=np.float64)
    for i in range(x.shape[0]):
        node = 0
        while tree.feature[node] >= 0:
            if x[i, tree.feature[node]] <= tree.threshold[node]:
                node = tree.left[node]
            else:
                node = tree.right[node]
        out[i] = tree.value[node]
    return out


def predict_baseline(model, x) -> np.ndarray:
    """Deterministic predictions for any of the three baseline model kinds."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError(f"feature matrix must be 2-D, got {x.shape}")
    if isinstance(model, LinearModel):
        if x.shape[1] != model.coefficients.size:
            raise ShapeError(
                f"model expects {model.coefficients.size} features, got {x.shape[1]}"
            )
        return x @ model.coefficients + model.intercept
    if isinstance(model, CartTree):
        needed = int(model.feature.max()) + 1 if model.feature.max() >= 0 else 0
        if x.shape[1] < needed:
            raise ShapeError(f"tree splits on feature {needed - 1}, got {x.shape[1]} columns")
        return _predict_cart(model, x)
    if isinstance(model, MlpModel):
        if x.shape[1] != model.w1.shape[1]:
            raise ShapeError(
                f"model expects {model.w1.shape[1]} features, got {x.shape[1]}"
            )
        return (relu(x @ model.w1.T + model.b1) @ model.w2.T).ravel() + model.b2
    raise ConfigError(f"unknown baseline model type: {type(model).__name__}")
