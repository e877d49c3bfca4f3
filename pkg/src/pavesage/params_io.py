"""One container format for every trained model kind.

Models are stored as an .npz archive holding the raw float64 payloads plus a
JSON metadata entry (model kind, shape echo, and arbitrary run context such
as the target indicator and split seed). Loading validates the recorded
shapes against the payloads and refuses anything inconsistent.
"""

from __future__ import annotations

import json

import numpy as np

from .baselines import CartTree, LinearModel, MlpModel
from .exceptions import DataError, ShapeError
from .sage import SageParams

FORMAT_VERSION = 1


def _meta_of(model, extra: dict | None) -> dict:
    meta = dict(extra or {})
    meta["format_version"] = FORMAT_VERSION
    if isinstance(model, SageParams):
        meta["kind"] = "sage"
        meta["input_dim"] = model.input_dim
        meta["hidden_dims"] = [int(w.shape[0]) for w in model.weights]
    elif isinstance(model, LinearModel):
        meta["kind"] = "lr"
        meta["n_features"] = int(model.coefficients.size)
    elif isinstance(model, CartTree):
        meta["kind"] = "cart"
        meta["n_nodes"] = int(model.n_nodes)
        meta["max_depth"] = model.max_depth
        meta["min_samples_leaf"] = model.min_samples_leaf
    elif isinstance(model, MlpModel):
        meta["kind"] = "nn"
        meta["n_features"] = int(model.w1.shape[1])
    else:
        raise DataError(f"cannot serialize model of type {type(model).__name__}")
    return meta


def save_model(path, model, meta: dict | None = None) -> None:
    """Writes the model and its metadata to an .npz container."""
    payload: dict[str, np.ndarray] = {}
    if isinstance(model, SageParams):
        for k, w in enumerate(model.weights):
            payload[f"w{k}"] = w
        payload["head_w"] = model.head_w
        payload["head_b"] = np.array([model.head_b])
    elif isinstance(model, LinearModel):
        payload["coefficients"] = model.coefficients
        payload["intercept"] = np.array([model.intercept])
    elif isinstance(model, CartTree):
        payload["feature"] = model.feature
        payload["threshold"] = model.threshold
        payload["left"] = model.left
        payload["right"] = model.right
        payload["value"] = model.value
    elif isinstance(model, MlpModel):
        payload["w1"] = model.w1
        payload["b1"] = model.b1
        payload["w2"] = model.w2
        payload["b2"] = np.array([model.b2])
    payload["meta_json"] = np.array(json.dumps(_meta_of(model, meta), sort_keys=True))
    np.savez(path, **payload)


def _load_sage(data, meta) -> SageParams:
    hidden = meta.get("hidden_dims")
    input_dim = meta.get("input_dim")
    if hidden is None or input_dim is None:
        raise DataError("sage container lacks shape metadata")
    weights = []
    prev = int(input_dim)
    for k, width in enumerate(hidden):
        key = f"w{k}"
        if key not in data:
            raise DataError(f"sage container missing layer payload {key!r}")
        w = data[key]
        if w.shape != (int(width), 2 * prev):
            raise ShapeError(
                f"layer {k} payload shape {w.shape} != recorded ({width}, {2 * prev})"
            )
        weights.append(np.ascontiguousarray(w, dtype=np.float64))
        prev = int(width)
    head_w = np.ascontiguousarray(data["head_w"], dtype=np.float64)
    if head_w.shape != (1, prev):
        raise ShapeError(f"head payload shape {head_w.shape} != (1, {prev})")
    return SageParams(weights, head_w, float(data["head_b"][0]), int(input_dim))


def _load_cart(data, meta) -> CartTree:
    tree = CartTree(
        feature=data["feature"].astype(np.int64),
        threshold=data["threshold"].astype(np.float64),
        left=data["left"].astype(np.int64),
        right=data["right"].astype(np.int64),
        value=data["value"].astype(np.float64),
        max_depth=meta.get("max_depth"),
        min_samples_leaf=int(meta.get("min_samples_leaf", 1)),
    )
    sizes = {a.size for a in (tree.feature, tree.threshold, tree.left, tree.right, tree.value)}
    if len(sizes) != 1 or tree.n_nodes != int(meta.get("n_nodes", -1)):
        raise ShapeError("cart container arrays disagree with recorded node count")
    return tree


def load_model(path):
    """Returns (model, meta). Rejects unknown kinds and shape mismatches."""
    with np.load(path, allow_pickle=False) as data:
        if "meta_json" not in data:
            raise DataError(f"{path}: not a pavesage model container")
        meta = json.loads(str(data["meta_json"][()]))
        kind = meta.get("kind")
        if kind == "sage":
            return _load_sage(data, meta), meta
        if kind == "lr":
            coef = np.ascontiguousarray(data["coefficients"], dtype=np.float64)
            if coef.size != int(meta.get("n_features", -1)):
                raise ShapeError("linear payload width disagrees with metadata")
            return LinearModel(coef, float(data["intercept"][0])), meta
        if kind == "cart":
            return _load_cart(data, meta), meta
        if kind == "nn":
            model = MlpModel(
                w1=np.ascontiguousarray(data["w1"], dtype=np.float64),
                b1=np.ascontiguousarray(data["b1"], dtype=np.float64),
                w2=np.ascontiguousarray(data["w2"], dtype=np.float64),
                b2=float(data["b2"][0]),
            )
            if model.w1.shape[1] != int(meta.get("n_features", -1)) or (
                model.w1.shape[0] != model.b1.size or model.w2.shape != (1, model.b1.size)
            ):
                raise ShapeError("mlp payload shapes disagree with metadata")
            return model, meta
        raise DataError(f"{path}: unknown model kind {kind!r}")
