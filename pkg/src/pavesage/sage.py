"""K-layer mean-aggregation graph regressor with neighbor-sampled training.

Layer update: h_v <- relu(W_k @ [h_v || mean of neighbor h]), where the mean
runs over the node's (full or sampled) neighborhood and excludes the node
itself; self information enters only through the concatenation. A linear head
maps the final embedding to a scalar prediction. All gradients are composed
by hand from the numerics primitives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .exceptions import (
    ConfigError,
    ConsistencyError,
    NumericError,
    ShapeError,
    UndefinedMetricError,
)
from .graph import RoadGraph, SampledNeighborhood, sample_neighborhood
from .metrics import r2_score
from .numerics import (
    Matrix,
    concat_cols,
    matmul,
    mse_loss,
    relu,
    relu_backward,
    segment_mean,
)

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass
class SageConfig:
    """Model and training settings; hidden_dims and fanouts share length K."""

    hidden_dims: tuple[int, ...] = (256, 256)
    fanouts: tuple[int | None, ...] = (25, 10)
    learning_rate: float = 0.01
    epochs: int = 400
    rng_seed: int = 0
    batch_size: int = 128
    patience: int | None = 50
    include_self_in_mean: bool = False

    def __post_init__(self):
        self.hidden_dims = tuple(int(h) for h in self.hidden_dims)
        self.fanouts = tuple(None if f is None else int(f) for f in self.fanouts)
        if len(self.hidden_dims) < 1:
            raise ConfigError("at least one layer is required")
        if len(self.fanouts) != len(self.hidden_dims):
            raise ConfigError(
                f"fanouts ({len(self.fanouts)}) and hidden_dims "
                f"({len(self.hidden_dims)}) must have equal length"
            )
        if any(h < 1 for h in self.hidden_dims):
            raise ConfigError(f"hidden_dims must be positive, got {self.hidden_dims}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.epochs < 0 or self.batch_size < 1:
            raise ConfigError("epochs must be >= 0 and batch_size >= 1")

    @property
    def n_layers(self) -> int:
        return len(self.hidden_dims)


@dataclass
class SageParams:
    """Trainable state: one weight matrix per layer plus the linear head."""

    weights: list[np.ndarray]
    head_w: np.ndarray
    head_b: float
    input_dim: int

    def __post_init__(self):
        prev = self.input_dim
        for k, w in enumerate(self.weights):
            if w.shape[1] != 2 * prev:
                raise ShapeError(
                    f"layer {k} weight is {w.shape}, expected ({w.shape[0]}, {2 * prev})"
                )
            prev = w.shape[0]
        if self.head_w.shape != (1, prev):
            raise ShapeError(f"head weight is {self.head_w.shape}, expected (1, {prev})")

    def copy(self) -> "SageParams":
        return SageParams(
            [w.copy() for w in self.weights],
            self.head_w.copy(),
            float(self.head_b),
            self.input_dim,
        )


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    test_loss: float
    train_r2: float
    test_r2: float


def init_params(input_dim: int, config: SageConfig) -> SageParams:
    """Glorot-uniform weights, zero head bias; deterministic per rng_seed."""
    if input_dim < 1:
        raise ConfigError(f"input_dim must be >= 1, got {input_dim}")
    rng = np.random.default_rng(config.rng_seed)
    weights = []
    prev = input_dim
    for width in config.hidden_dims:
        fan_in, fan_out = 2 * prev, width
        bound = math.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(width, fan_in)))
        prev = width
    bound = math.sqrt(6.0 / (prev + 1))
    head_w = rng.uniform(-bound, bound, size=(1, prev))
    return SageParams(weights, head_w, 0.0, input_dim)


def _csr_groups(graph: RoadGraph, include_self: bool):
    """Flattened (member rows, segment ids, sizes) of each node's mean group."""
    n = graph.n_nodes
    members = graph.neighbor_ids
    segs = np.repeat(np.arange(n, dtype=np.int64), graph.degrees)
    sizes = graph.degrees.astype(np.int64)
    if include_self:
        own = np.arange(n, dtype=np.int64)
        members = np.concatenate([members, own])
        segs = np.concatenate([segs, own])
        sizes = sizes + 1
    return members, segs, sizes


def aggregate(
    graph: RoadGraph,
    h_prev: Matrix,
    neighborhood: Sequence[tuple[int, Sequence[int]]] | None = None,
    row_of: Mapping[int, int] | None = None,
    include_self: bool = False,
) -> Matrix:
    """Per-node mean of neighbor embeddings; empty neighborhoods give zero rows.

    Full mode (neighborhood=None): h_prev has one row per graph node and the
    mean runs over the true neighbor lists. Sampled mode: neighborhood is a
    sequence of (center, sampled ids) and row_of maps a node id to its row in
    h_prev; a sampled id missing from row_of is an internal consistency error.
    """
    if neighborhood is None:
        if h_prev.shape[0] != graph.n_nodes:
            raise ShapeError(
                f"h_prev has {h_prev.shape[0]} rows for {graph.n_nodes} nodes"
            )
        members, segs, _ = _csr_groups(graph, include_self)
        return segment_mean(h_prev[members], segs, graph.n_nodes)

    if row_of is None:
        raise ConfigError("sampled-mode aggregate requires row_of")
    rows: list[int] = []
    segs_l: list[int] = []
    for g, (center, ids) in enumerate(neighborhood):
        todo = list(ids) + ([center] if include_self else [])
        for u in todo:
            if u not in row_of:
                raise ConsistencyError(
                    f"sampled node {u} is not covered by the frontier embedding"
                )
            rows.append(row_of[u])
            segs_l.append(g)
    if not rows:
        return np.zeros((len(neighborhood), h_prev.shape[1]))
    return segment_mean(
        h_prev[np.array(rows)], np.array(segs_l, dtype=np.int64), len(neighborhood)
    )


def layer_forward(h_prev_self: Matrix, h_agg: Matrix, w_k: Matrix) -> Matrix:
    """relu(concat(self, aggregated) @ w_k.T); rows are preserved."""
    if h_prev_self.shape[0] != h_agg.shape[0]:
        raise ShapeError(
            f"self/aggregate row mismatch: {h_prev_self.shape} vs {h_agg.shape}"
        )
    if w_k.shape[1] != h_prev_self.shape[1] + h_agg.shape[1]:
        raise ShapeError(
            f"weight expects {w_k.shape[1]} input columns, got "
            f"{h_prev_self.shape[1]} + {h_agg.shape[1]}"
        )
    return relu(matmul(concat_cols(h_prev_self, h_agg), w_k.T))


def forward_full(
    graph: RoadGraph,
    features: Matrix,
    params: SageParams,
    include_self: bool = False,
) -> np.ndarray:
    """Deterministic full-neighborhood forward pass; returns one prediction per node."""
    if features.shape[0] != graph.n_nodes:
        raise ShapeError(
            f"features have {features.shape[0]} rows for {graph.n_nodes} nodes"
        )
    h = features
    for w in params.weights:
        h = layer_forward(h, aggregate(graph, h, include_self=include_self), w)
    return (h @ params.head_w.T).ravel() + params.head_b


def predict(
    graph: RoadGraph,
    features: Matrix,
    params: SageParams,
    include_self: bool = False,
) -> np.ndarray:
    """Inference entry point; alias of forward_full."""
    return forward_full(graph, features, params, include_self=include_self)


# ---------------------------------------------------------------------------
# Shared forward/backward engine over explicit level structures.
# A "level plan" holds, for each layer k: the rows (into the previous level's
# embedding matrix) of each output node's self embedding and of its mean-group
# members. The full-graph plan and the sampled-batch plan differ only here.


class _LevelPlan:
    __slots__ = ("self_rows", "members", "segs", "sizes", "n_lower")

    def __init__(self, self_rows, members, segs, sizes, n_lower):
        self.self_rows = self_rows
        self.members = members
        self.segs = segs
        self.sizes = sizes
        self.n_lower = n_lower


def _positions(sorted_ids: np.ndarray, wanted: np.ndarray) -> np.ndarray:
    pos = np.searchsorted(sorted_ids, wanted)
    bad = (pos >= sorted_ids.size) | (sorted_ids[np.minimum(pos, sorted_ids.size - 1)] != wanted)
    if np.any(bad):
        missing = wanted[bad][0]
        raise ConsistencyError(
            f"sampled node {missing} is not covered by the frontier embedding"
        )
    return pos


def _full_plan(graph: RoadGraph, n_layers: int, include_self: bool):
    members, segs, sizes = _csr_groups(graph, include_self)
    own = np.arange(graph.n_nodes, dtype=np.int64)
    plan = _LevelPlan(own, members, segs, sizes, graph.n_nodes)
    return [plan] * n_layers, np.arange(graph.n_nodes, dtype=np.int64)


def _sampled_plan(
    graph: RoadGraph,
    batch: np.ndarray,
    nabe: SampledNeighborhood,
    include_self: bool,
):
    """Level plans for a sampled batch forward; deepest level first."""
    k_layers = len(nabe.layers)
    node_sets = [batch]  # node_sets[j] = nodes whose layer-(K-j) embedding is needed
    for hop in nabe.layers:
        reached = set(int(v) for v in node_sets[-1])
        for _, ids in hop:
            reached.update(ids)
        node_sets.append(np.fromiter(sorted(reached), dtype=np.int64, count=len(reached)))

    plans = []
    for k in range(k_layers, 0, -1):  # layer k consumes hop K-k+1
        hop = nabe.layers[k_layers - k]
        upper = node_sets[k_layers - k]
        lower = node_sets[k_layers - k + 1]
        self_rows = _positions(lower, upper)
        sizes = np.array(
            [len(ids) + (1 if include_self else 0) for _, ids in hop], dtype=np.int64
        )
        flat = [u for _, ids in hop for u in ids]
        if include_self:
            flat += [c for c, _ in hop]
            segs = np.concatenate(
                [
                    np.repeat(np.arange(len(hop), dtype=np.int64), sizes - 1),
                    np.arange(len(hop), dtype=np.int64),
                ]
            )
        else:
            segs = np.repeat(np.arange(len(hop), dtype=np.int64), sizes)
        members = (
            _positions(lower, np.array(flat, dtype=np.int64))
            if flat
            else np.empty(0, dtype=np.int64)
        )
        plans.insert(0, _LevelPlan(self_rows, members, segs, sizes, lower.size))
    return plans, node_sets[-1]


def _run_plan(features_rows: Matrix, params: SageParams, plans, retain: bool):
    """Applies the layers along a level plan; optionally keeps caches for backward."""
    h = features_rows
    caches = []
    for w, plan in zip(params.weights, plans):
        agg = segment_mean(h[plan.members], plan.segs, plan.self_rows.size)
        c = concat_cols(h[plan.self_rows], agg)
        z = matmul(c, w.T)
        if retain:
            caches.append((c, z, h.shape[1], plan))
        h = relu(z)
    pred = (h @ params.head_w.T).ravel() + params.head_b
    return pred, h, caches


def _backward_plan(params: SageParams, caches, h_final: Matrix, dpred: np.ndarray):
    """Gradients of all parameters given d(loss)/d(prediction)."""
    dcol = dpred.reshape(-1, 1)
    g_head_w = dcol.T @ h_final
    g_head_b = float(dpred.sum())
    dh = dcol @ params.head_w
    g_weights: list[np.ndarray] = [None] * len(params.weights)
    for k in range(len(params.weights) - 1, -1, -1):
        c, z, prev_width, plan = caches[k]
        dz = relu_backward(z, dh)
        g_weights[k] = dz.T @ c
        dc = dz @ params.weights[k]
        d_self, d_agg = dc[:, :prev_width], dc[:, prev_width:]
        dh_prev = np.zeros((plan.n_lower, prev_width))
        np.add.at(dh_prev, plan.self_rows, d_self)
        if plan.members.size:
            scaled = np.zeros_like(d_agg)
            nz = plan.sizes > 0
            scaled[nz] = d_agg[nz] / plan.sizes[nz, None]
            np.add.at(dh_prev, plan.members, scaled[plan.segs])
        dh = dh_prev
    return {"weights": g_weights, "head_w": g_head_w, "head_b": g_head_b}


def forward_sampled(
    graph: RoadGraph,
    features: Matrix,
    params: SageParams,
    batch: Sequence[int],
    fanouts: Sequence[int | None],
    rng_seed: int,
    include_self: bool = False,
) -> np.ndarray:
    """Forward pass over a sampled multi-hop neighborhood of the batch.

    With saturating fanouts this equals forward_full restricted to the batch.
    """
    if len(batch) == 0:
        raise ConfigError("forward_sampled: batch must be non-empty")
    if len(fanouts) != len(params.weights):
        raise ConfigError(
            f"{len(fanouts)} fanouts for a {len(params.weights)}-layer model"
        )
    nabe = sample_neighborhood(graph, batch, fanouts, rng_seed)
    batch_arr = np.asarray(batch, dtype=np.int64)
    plans, base_nodes = _sampled_plan(graph, batch_arr, nabe, include_self)
    pred, _, _ = _run_plan(features[base_nodes], params, plans, retain=False)
    return pred


def loss_and_grads(
    graph: RoadGraph,
    features: Matrix,
    params: SageParams,
    targets: np.ndarray,
    nodes: np.ndarray | None = None,
    include_self: bool = False,
) -> tuple[float, dict]:
    """MSE of the full-graph forward over `nodes` plus analytic parameter gradients."""
    y = np.asarray(targets, dtype=np.float64).ravel()
    sel = np.arange(graph.n_nodes) if nodes is None else np.asarray(nodes, dtype=np.int64)
    plans, base = _full_plan(graph, len(params.weights), include_self)
    pred, h_final, caches = _run_plan(features[base], params, plans, retain=True)
    loss, gsel = mse_loss(pred[sel].reshape(-1, 1), y[sel].reshape(-1, 1))
    dpred = np.zeros(graph.n_nodes)
    dpred[sel] = gsel.ravel()
    grads = _backward_plan(params, caches, h_final, dpred)
    return loss, grads


class _AdamState:
    def __init__(self, params: SageParams, lr: float):
        self.lr = lr
        self.t = 0
        self.m = [np.zeros_like(w) for w in params.weights]
        self.v = [np.zeros_like(w) for w in params.weights]
        self.m_hw = np.zeros_like(params.head_w)
        self.v_hw = np.zeros_like(params.head_w)
        self.m_hb = 0.0
        self.v_hb = 0.0

    def step(self, params: SageParams, grads: dict):
        self.t += 1
        c1 = 1.0 - ADAM_BETA1**self.t
        c2 = 1.0 - ADAM_BETA2**self.t

        def update(p, g, m, v):
            m *= ADAM_BETA1
            m += (1 - ADAM_BETA1) * g
            v *= ADAM_BETA2
            v += (1 - ADAM_BETA2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + ADAM_EPS)

        for w, g, m, v in zip(params.weights, grads["weights"], self.m, self.v):
            update(w, g, m, v)
        update(params.head_w, grads["head_w"], self.m_hw, self.v_hw)
        g = grads["head_b"]
        self.m_hb = ADAM_BETA1 * self.m_hb + (1 - ADAM_BETA1) * g
        self.v_hb = ADAM_BETA2 * self.v_hb + (1 - ADAM_BETA2) * g * g
        params.head_b -= self.lr * (self.m_hb / c1) / (
            math.sqrt(self.v_hb / c2) + ADAM_EPS
        )


def _r2_or_nan(y: np.ndarray, pred: np.ndarray) -> float:
    try:
        return r2_score(y, pred)
    except UndefinedMetricError:
        return float("nan")


def train(
    graph: RoadGraph,
    features: Matrix,
    targets: np.ndarray,
    train_mask: np.ndarray,
    config: SageConfig,
) -> tuple[SageParams, list[EpochStats]]:
    """Mini-batch Adam on MSE over the train nodes via sampled forward passes.

    Targets are standardized internally with train-split statistics; the
    inverse affine map is folded into the returned head parameters, so
    predictions come out in raw target units. History entries are computed
    once per epoch with the deterministic full-graph forward, in raw units.
    Early stopping (config.patience) watches test R-squared.
    """
    y = np.asarray(targets, dtype=np.float64).ravel()
    mask = np.asarray(train_mask, dtype=bool).ravel()
    if features.shape[0] != graph.n_nodes or y.size != graph.n_nodes:
        raise ShapeError(
            f"features/targets rows ({features.shape[0]}/{y.size}) "
            f"!= n_nodes ({graph.n_nodes})"
        )
    if mask.size != graph.n_nodes:
        raise ShapeError(f"train_mask has {mask.size} entries for {graph.n_nodes} nodes")
    train_idx = np.flatnonzero(mask)
    test_idx = np.flatnonzero(~mask)
    if train_idx.size == 0 or test_idx.size == 0:
        raise ConfigError("train requires at least one train node and one test node")

    params = init_params(features.shape[1], config)
    if config.epochs == 0:
        return params, []

    mu = float(y[train_idx].mean())
    sd = float(y[train_idx].std())
    if sd == 0.0:
        sd = 1.0
    y_std = (y - mu) / sd

    adam = _AdamState(params, config.learning_rate)
    rng = np.random.default_rng(config.rng_seed)
    include_self = config.include_self_in_mean
    history: list[EpochStats] = []
    best_r2 = -math.inf
    best_epoch = 0

    for epoch in range(config.epochs):
        order = rng.permutation(train_idx)
        for b_i, start in enumerate(range(0, order.size, config.batch_size)):
            batch = order[start : start + config.batch_size]
            hood_seed = int(rng.integers(0, 2**63 - 1))
            nabe = sample_neighborhood(graph, batch, config.fanouts, hood_seed)
            plans, base = _sampled_plan(graph, batch, nabe, include_self)
            pred, h_final, caches = _run_plan(features[base], params, plans, retain=True)
            loss, gpred = mse_loss(
                pred.reshape(-1, 1), y_std[batch].reshape(-1, 1)
            )
            if not math.isfinite(loss):
                raise NumericError(
                    f"non-finite training loss {loss} at epoch {epoch}, batch {b_i}"
                )
            grads = _backward_plan(params, caches, h_final, gpred.ravel())
            adam.step(params, grads)

        pred_raw = forward_full(graph, features, params, include_self) * sd + mu
        tr_loss, _ = mse_loss(
            pred_raw[train_idx].reshape(-1, 1), y[train_idx].reshape(-1, 1)
        )
        te_loss, _ = mse_loss(
            pred_raw[test_idx].reshape(-1, 1), y[test_idx].reshape(-1, 1)
        )
        te_r2 = _r2_or_nan(y[test_idx], pred_raw[test_idx])
        history.append(
            EpochStats(
                epoch,
                tr_loss,
                te_loss,
                _r2_or_nan(y[train_idx], pred_raw[train_idx]),
                te_r2,
            )
        )
        if config.patience is not None and math.isfinite(te_r2):
            if te_r2 > best_r2:
                best_r2 = te_r2
                best_epoch = epoch
            elif epoch - best_epoch >= config.patience:
                break

    params.head_w = params.head_w * sd
    params.head_b = params.head_b * sd + mu
    return params, history
