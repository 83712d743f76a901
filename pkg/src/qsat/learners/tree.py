"""Greedy CART regression trees with exact SSE split search.

Split candidates are midpoints between consecutive distinct sorted values of
each candidate feature; rows with x[j] <= threshold go left. The winning
split minimizes the summed child SSE, with ties broken by lowest feature
index, then lowest threshold. Leaves predict the node target mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError

_LEAF = -1


@dataclass(frozen=True)
class Tree:
    """Flat-array binary tree. ``feature[i] == -1`` marks a leaf; ``value``
    holds leaf predictions and ``gain`` per-node SSE (or boosting-gain)
    decrease for internal nodes."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    gain: np.ndarray

    def predict(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(len(X), dtype=np.int64)
        while True:
            f = self.feature[node]
            active = np.nonzero(f != _LEAF)[0]
            if active.size == 0:
                break
            cur = node[active]
            go_left = X[active, f[active]] <= self.threshold[cur]
            node[active] = np.where(go_left, self.left[cur], self.right[cur])
        return self.value[node]

    def feature_gains(self, n_features: int) -> np.ndarray:
        """Total split-gain decrease per feature (unnormalized)."""
        totals = np.zeros(n_features)
        internal = self.feature != _LEAF
        np.add.at(totals, self.feature[internal], self.gain[internal])
        return totals

    def thresholds_by_feature(self, n_features: int) -> list:
        out = [[] for _ in range(n_features)]
        for f, t in zip(self.feature, self.threshold):
            if f != _LEAF:
                out[f].append(float(t))
        return out

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "gain": self.gain.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls(
            np.asarray(d["feature"], dtype=np.int64),
            np.asarray(d["threshold"], dtype=np.float64),
            np.asarray(d["left"], dtype=np.int64),
            np.asarray(d["right"], dtype=np.int64),
            np.asarray(d["value"], dtype=np.float64),
            np.asarray(d["gain"], dtype=np.float64),
        )


class _Builder:
    __slots__ = ("feature", "threshold", "left", "right", "value", "gain")

    def __init__(self):
        self.feature = []
        self.threshold = []
        self.left = []
        self.right = []
        self.value = []
        self.gain = []

    def add(self) -> int:
        self.feature.append(_LEAF)
        self.threshold.append(0.0)
        self.left.append(_LEAF)
        self.right.append(_LEAF)
        self.value.append(0.0)
        self.gain.append(0.0)
        return len(self.feature) - 1

    def freeze(self) -> Tree:
        return Tree(
            np.asarray(self.feature, dtype=np.int64),
            np.asarray(self.threshold, dtype=np.float64),
            np.asarray(self.left, dtype=np.int64),
            np.asarray(self.right, dtype=np.int64),
            np.asarray(self.value, dtype=np.float64),
            np.asarray(self.gain, dtype=np.float64),
        )


def resolve_max_features(max_features, n_features: int) -> int:
    if max_features in (None, "all"):
        return n_features
    if max_features == "sqrt":
        return max(1, int(math.isqrt(n_features)))
    if isinstance(max_features, int) and 1 <= max_features <= n_features:
        return max_features
    raise ConfigError(f"max_features must be 'all', 'sqrt', or 1..{n_features}, "
                      f"got {max_features!r}")


def midpoint(lo: float, hi: float) -> float:
    """Split threshold between adjacent sorted values; falls back to the
    lower value when the average is not strictly between them (adjacent
    floats), so training-time counts match predict-time routing."""
    mid = 0.5 * (lo + hi)
    return mid if lo < mid < hi else lo


def best_sse_split(X, y, idx, features, min_samples_leaf):
    """Lowest child-SSE split over ``features`` (ascending order) for the
    rows in ``idx``. Returns (feature, threshold, sse_decrease) or None.

    All candidate cuts of all features are evaluated in one vectorized pass;
    column k's candidates sit at left-counts 1..n-1 where the sorted feature
    value changes.
    """
    n = idx.size
    y_node = y[idx]
    Xn = X[np.ix_(idx, features)]
    order = np.argsort(Xn, axis=0, kind="stable")
    xs = np.take_along_axis(Xn, order, axis=0)
    ys = y_node[order]
    csum = np.cumsum(ys, axis=0)
    csq = np.cumsum(ys * ys, axis=0)
    total = csum[-1]
    total_sq = csq[-1]
    node_sse = float(total_sq[0] - total[0] * total[0] / n)

    nl = np.arange(1, n, dtype=np.float64)[:, None]
    sl = csum[:-1]
    ql = csq[:-1]
    # clamp at zero and pin single-element sides to exact zero so candidates
    # that tie in exact arithmetic tie here too (matters for the tie rule)
    left_sse = np.maximum(ql - sl * sl / nl, 0.0)
    right_sse = np.maximum((total_sq - ql) - (total - sl) ** 2 / (n - nl), 0.0)
    left_sse[0] = 0.0
    right_sse[-1] = 0.0
    sse = left_sse + right_sse
    sse[xs[1:] == xs[:-1]] = np.inf
    if min_samples_leaf > 1:
        lo_cut = min_samples_leaf - 1
        hi_cut = n - min_samples_leaf
        if lo_cut > 0:
            sse[:lo_cut] = np.inf
        if hi_cut < n - 1:
            sse[hi_cut:] = np.inf

    rows = np.argmin(sse, axis=0)
    col_best = sse[rows, np.arange(sse.shape[1])]
    finite = np.isfinite(col_best)
    if not finite.any():
        return None
    low = float(col_best[finite].min())
    # Near-tied finalists get a canonical (row-order) recompute: two features
    # inducing the same partition must tie exactly, which per-column prefix
    # sums cannot guarantee. A unique finalist needs no recompute.
    slack = low * 1e-9 + 1e-13 * (float(total_sq[0]) + 1.0)
    contenders = np.nonzero(finite & (col_best <= low + slack))[0]
    best = None
    best_sse = np.inf
    for col in contenders:  # ascending feature order breaks remaining ties
        cut = int(rows[col]) + 1
        threshold = midpoint(float(xs[cut - 1, col]), float(xs[cut, col]))
        if len(contenders) == 1:
            canonical = float(col_best[col])
        else:
            canonical = _partition_sse(Xn[:, col], y_node, threshold)
        if canonical < best_sse:
            best_sse = canonical
            best = (int(features[col]), threshold, node_sse - best_sse)
    return best


def _partition_sse(x: np.ndarray, y: np.ndarray, threshold: float) -> float:
    left = x <= threshold
    y_left = y[left]
    y_right = y[~left]
    sse = 0.0
    for side in (y_left, y_right):
        mean = side.sum() / side.size
        sse += float(((side - mean) ** 2).sum())
    return sse


def grow_tree(X, y, *, max_depth=None, min_samples_split=2, min_samples_leaf=1,
              max_features=None, rng=None) -> Tree:
    """Grow a CART regression tree (depth-first, left before right)."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, d = X.shape
    if min_samples_split < 2 or min_samples_leaf < 1:
        raise ConfigError("min_samples_split >= 2 and min_samples_leaf >= 1 required")
    m = resolve_max_features(max_features, d)
    all_features = np.arange(d)

    builder = _Builder()
    root = builder.add()
    stack = [(root, np.arange(n), 0)]
    while stack:
        node, idx, depth = stack.pop()
        y_node = y[idx]
        mean = float(np.mean(y_node))
        builder.value[node] = mean
        if (
            idx.size < min_samples_split
            or idx.size < 2 * min_samples_leaf
            or (max_depth is not None and depth >= max_depth)
            or np.all(y_node == y_node[0])
        ):
            continue
        if m < d:
            features = np.sort(rng.choice(d, size=m, replace=False))
        else:
            features = all_features
        found = best_sse_split(X, y, idx, features, min_samples_leaf)
        if found is None:
            continue
        j, threshold, decrease = found
        go_left = X[idx, j] <= threshold
        left_node = builder.add()
        right_node = builder.add()
        builder.feature[node] = j
        builder.threshold[node] = threshold
        builder.left[node] = left_node
        builder.right[node] = right_node
        builder.gain[node] = decrease
        # push right first so the left child is processed (and draws any
        # feature-subset randomness) first
        stack.append((right_node, idx[~go_left], depth + 1))
        stack.append((left_node, idx[go_left], depth + 1))
    return builder.freeze()
