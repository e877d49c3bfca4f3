"""Dense float64 primitives with hand-written backward passes.

Every matrix in this package is a 2-D, C-contiguous ``numpy.ndarray`` of
float64. Each primitive here is a pure function; the matching ``*_backward``
function maps an upstream gradient to gradients of the primitive's inputs.
There is no tape: the model composes these five primitives explicitly, which
keeps every gradient auditable against ``grad_check``.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .exceptions import NumericError, ShapeError

Matrix = np.ndarray


def as_matrix(x, name: str = "matrix") -> Matrix:
    """Coerce to a 2-D float64 array, rejecting anything with another rank."""
    m = np.asarray(x, dtype=np.float64)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got ndim={m.ndim}")
    return np.ascontiguousarray(m)


def matmul(a: Matrix, b: Matrix) -> Matrix:
    """Matrix product a @ b."""
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul shapes incompatible: {a.shape} x {b.shape}")
    return a @ b


def matmul_backward(a: Matrix, b: Matrix, upstream: Matrix) -> tuple[Matrix, Matrix]:
    """Gradients of a @ b wrt a and b given the upstream gradient."""
    if upstream.shape != (a.shape[0], b.shape[1]):
        raise ShapeError(
            f"matmul upstream shape {upstream.shape} != {(a.shape[0], b.shape[1])}"
        )
    return upstream @ b.T, a.T @ upstream


def relu(x: Matrix) -> Matrix:
    """Elementwise max(0, x)."""
    return np.maximum(x, 0.0)


def relu_backward(x: Matrix, upstream: Matrix) -> Matrix:
    """Masks the upstream gradient where x <= 0 (subgradient 0 at 0)."""
    if upstream.shape != x.shape:
        raise ShapeError(f"relu upstream shape {upstream.shape} != {x.shape}")
    return np.where(x > 0.0, upstream, 0.0)


def concat_cols(a: Matrix, b: Matrix) -> Matrix:
    """Column-wise concatenation [a | b]."""
    if a.shape[0] != b.shape[0]:
        raise ShapeError(f"concat_cols row mismatch: {a.shape} vs {b.shape}")
    return np.concatenate([a, b], axis=1)


def split_cols(m: Matrix, left_cols: int) -> tuple[Matrix, Matrix]:
    """Inverse of concat_cols: splits at the seam, returning copies."""
    if not 0 <= left_cols <= m.shape[1]:
        raise ShapeError(f"split_cols seam {left_cols} outside width {m.shape[1]}")
    return m[:, :left_cols].copy(), m[:, left_cols:].copy()


def _flatten_groups(groups: Sequence[Sequence[int]], n_rows: int):
    """Flattens row-index groups into (member, segment) arrays with validation."""
    sizes = np.array([len(g) for g in groups], dtype=np.int64)
    members = np.fromiter(
        (i for g in groups for i in g), dtype=np.int64, count=int(sizes.sum())
    )
    if members.size and (members.min() < 0 or members.max() >= n_rows):
        raise IndexError(
            f"group index out of range: rows are 0..{n_rows - 1}, "
            f"got {members.min()}..{members.max()}"
        )
    segs = np.repeat(np.arange(len(groups), dtype=np.int64), sizes)
    return members, segs, sizes


def segment_mean(values: Matrix, seg_ids: np.ndarray, n_segments: int) -> Matrix:
    """Per-segment mean of rows; empty segments yield zero rows.

    Two numerical guarantees beyond a naive sum/k:
    - canonical summation: each column's entries are added in ascending value
      order, so the result is bit-identical under any relabeling of the rows
      feeding a segment (this makes graph aggregation exactly permutation-
      equivariant downstream);
    - shifted accumulation: summing (x - segment min) makes the mean of
      identical values exact for any segment size.
    """
    m, d = values.shape
    if m == 0:
        return np.zeros((n_segments, d), dtype=np.float64)
    counts = np.bincount(seg_ids, minlength=n_segments)
    if counts.max() <= _PAD_LANES_MAX:
        return _segment_mean_padded(values, seg_ids, n_segments, counts)
    return _segment_mean_sorted(values, seg_ids, n_segments, counts)


_PAD_LANES_MAX = 8  # road networks are nearly path-shaped; big hubs take the slow path


def _segment_mean_padded(values, seg_ids, n_segments, counts):
    """Scatter members into per-segment lanes, sort the short lane axis, reduce."""
    m, d = values.shape
    k = int(counts.max())
    order = np.argsort(seg_ids, kind="stable")
    segs_c = seg_ids[order]
    starts = np.searchsorted(segs_c, np.arange(n_segments))
    slot = np.arange(m) - starts[segs_c]
    lanes = np.full((n_segments, d, k), np.inf)
    lanes[segs_c, :, slot] = values[order]
    lanes.sort(axis=2)
    nonempty = counts > 0
    mins = np.where(nonempty[:, None], lanes[:, :, 0], 0.0)
    shifted = np.where(np.isinf(lanes), 0.0, lanes - mins[:, :, None])
    out = mins + shifted.sum(axis=2) / np.maximum(counts, 1)[:, None]
    out[~nonempty] = 0.0
    return out


def _segment_mean_sorted(values, seg_ids, n_segments, counts):
    """General path: per-column ascending order via one 2-D argsort."""
    m, d = values.shape
    nonempty = counts > 0
    denom = np.maximum(counts, 1).astype(np.float64)

    order = np.argsort(values, axis=0, kind="stable")
    segs2 = seg_ids[order]
    vals2 = np.take_along_axis(values, order, axis=0)
    cols = np.arange(d, dtype=np.int64)[None, :]

    # Per (segment, column) minimum = value at the segment's first occurrence
    # in the ascending stream (duplicate-index assignment keeps the last write,
    # so writing positions in reverse leaves the earliest one).
    min_pos = np.zeros((n_segments, d), dtype=np.int64)
    min_pos[segs2[::-1, :], cols] = np.arange(m - 1, -1, -1, dtype=np.int64)[:, None]
    mins = np.take_along_axis(vals2, min_pos, axis=0)
    mins[~nonempty] = 0.0

    shifted = vals2 - mins[segs2, cols]
    bins = (segs2 * d + cols).ravel()
    sums = np.bincount(bins, weights=shifted.ravel(), minlength=n_segments * d)
    out = mins + sums.reshape(n_segments, d) / denom[:, None]
    out[~nonempty] = 0.0
    return out


def mean_rows(x: Matrix, groups: Sequence[Sequence[int]]) -> Matrix:
    """Row g of the output is the mean of x's rows listed in groups[g].

    An empty group produces a zero row by convention.
    """
    members, segs, _ = _flatten_groups(groups, x.shape[0])
    return segment_mean(x[members], segs, len(groups))


def mean_rows_backward(
    n_rows: int, groups: Sequence[Sequence[int]], upstream: Matrix
) -> Matrix:
    """Distributes upstream[g] / |group g| back onto each member row."""
    if upstream.shape[0] != len(groups):
        raise ShapeError(
            f"mean_rows upstream has {upstream.shape[0]} rows for {len(groups)} groups"
        )
    members, segs, sizes = _flatten_groups(groups, n_rows)
    grad = np.zeros((n_rows, upstream.shape[1]), dtype=np.float64)
    if members.size:
        scaled = upstream[segs] / sizes[segs, None]
        np.add.at(grad, members, scaled)
    return grad


def mse_loss(pred: Matrix, target: Matrix) -> tuple[float, Matrix]:
    """Mean squared error and its gradient wrt pred."""
    if pred.shape != target.shape:
        raise ShapeError(f"mse_loss shape mismatch: {pred.shape} vs {target.shape}")
    if pred.size == 0:
        raise ShapeError("mse_loss needs at least one element")
    diff = pred - target
    loss = float(np.mean(diff * diff))
    grad = 2.0 * diff / diff.size
    return loss, grad


def grad_check(
    f: Callable[[Matrix], tuple[float, Matrix]],
    point: Matrix,
    h: float = 1e-5,
) -> float:
    """Max relative disagreement between f's analytic gradient and central differences.

    f(point) must return (scalar value, gradient matrix of point's shape).
    The per-entry error is |a - n| / max(1e-8, |a| + |n|).
    """
    x = np.array(point, dtype=np.float64)
    value, grad = f(x)
    if not np.isfinite(value):
        raise NumericError(f"grad_check: f evaluated to non-finite value {value}")
    if grad.shape != x.shape:
        raise ShapeError(f"analytic gradient shape {grad.shape} != point {x.shape}")
    worst = 0.0
    it = np.nditer(x, flags=["multi_index"])
    while not it.finished:
        idx = it.multi_index
        orig = x[idx]
        x[idx] = orig + h
        up, _ = f(x)
        x[idx] = orig - h
        down, _ = f(x)
        x[idx] = orig
        if not (np.isfinite(up) and np.isfinite(down)):
            raise NumericError(f"grad_check: non-finite f near entry {idx}")
        numeric = (up - down) / (2.0 * h)
        analytic = grad[idx]
        err = abs(analytic - numeric) / max(1e-8, abs(analytic) + abs(numeric))
        worst = max(worst, err)
        it.iternext()
    return worst
