"""Second-order boosting with L1/L2-regularized leaf weights.

Squared loss gives per-sample gradient g = prediction - target and unit
hessian. A leaf's weight is -soft_threshold(G, alpha) / (H + lambda); splits
maximize 0.5 * [S(G_L) + S(G_R) - S(G)] with S(G) = soft_threshold(G)^2 / (H
+ lambda) and are taken only when that gain is positive. Rows are subsampled
per tree and features per tree via colsample_bytree.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import ConfigError
from ..rng import child_rng
from .boosting import subsample_rows
from .tree import Tree, _Builder, _partition_sse, midpoint

DEFAULTS = {
    "colsample_bytree": 1.0,
    "learning_rate": 0.1,
    "max_depth": 7,
    "n_estimators": 200,
    "reg_alpha": 0.0,
    "reg_lambda": 1.5,
    "subsample": 0.8,
    "min_samples_leaf": 1,
    "min_samples_split": 2,
}


def _soft_threshold(g: np.ndarray, alpha: float):
    return np.sign(g) * np.maximum(0.0, np.abs(g) - alpha)


def _soft_threshold_scalar(g: float, alpha: float) -> float:
    return math.copysign(max(0.0, abs(g) - alpha), g)


def _leaf_weight(G: float, H: float, lam: float, alpha: float) -> float:
    return -_soft_threshold_scalar(G, alpha) / (H + lam)


def _best_gain_split(X, g, idx, features, lam, alpha, min_samples_leaf):
    n = idx.size
    g_node = g[idx]
    H = float(n)
    Xn = X[np.ix_(idx, features)]
    order = np.argsort(Xn, axis=0, kind="stable")
    xs = np.take_along_axis(Xn, order, axis=0)
    gs = g_node[order]
    cg = np.cumsum(gs, axis=0)
    G_total = cg[-1]
    parent_score = _soft_threshold_scalar(float(G_total[0]), alpha) ** 2 / (H + lam)

    HL = np.arange(1, n, dtype=np.float64)[:, None]
    GL = cg[:-1]
    score_l = _soft_threshold(GL, alpha) ** 2 / (HL + lam)
    score_r = _soft_threshold(G_total - GL, alpha) ** 2 / ((H - HL) + lam)
    gain = 0.5 * (score_l + score_r - parent_score)
    gain[xs[1:] == xs[:-1]] = -np.inf
    if min_samples_leaf > 1:
        lo_cut = min_samples_leaf - 1
        hi_cut = n - min_samples_leaf
        if lo_cut > 0:
            gain[:lo_cut] = -np.inf
        if hi_cut < n - 1:
            gain[hi_cut:] = -np.inf

    rows = np.argmax(gain, axis=0)
    col_best = gain[rows, np.arange(gain.shape[1])]
    finite = np.isfinite(col_best) & (col_best > 0.0)
    if not finite.any():
        return None
    high = float(col_best[finite].max())
    # near-tied finalists are re-scored canonically (see best_sse_split);
    # with both regularizers off the canonical score is the same child-SSE
    # expression CART uses, so the two builders break ties identically
    slack = high * 1e-9 + 1e-13 * (parent_score + float(np.abs(G_total[0])) + 1.0)
    contenders = np.nonzero(finite & (col_best >= high - slack))[0]
    best = None
    best_key = None
    for col in contenders:  # ascending feature order breaks remaining ties
        cut = int(rows[col]) + 1
        threshold = midpoint(float(xs[cut - 1, col]), float(xs[cut, col]))
        if len(contenders) == 1:
            key = -float(col_best[col])
        elif lam == 0.0 and alpha == 0.0:
            key = _partition_sse(Xn[:, col], g_node, threshold)
        else:
            key = -_canonical_gain(Xn[:, col], g_node, threshold, lam, alpha,
                                   parent_score)
        if best_key is None or key < best_key:
            best_key = key
            best = (int(features[col]), threshold, float(col_best[col]))
    return best


def _canonical_gain(x, g, threshold, lam, alpha, parent_score):
    left = x <= threshold
    GL = float(g[left].sum())
    GR = float(g[~left].sum())
    HL = float(left.sum())
    HR = float(len(g) - HL)
    score_l = _soft_threshold_scalar(GL, alpha) ** 2 / (HL + lam)
    score_r = _soft_threshold_scalar(GR, alpha) ** 2 / (HR + lam)
    return 0.5 * (score_l + score_r - parent_score)


def _grow_gain_tree(X, g, *, max_depth, min_samples_split, min_samples_leaf,
                    features, lam, alpha) -> Tree:
    n = len(g)
    builder = _Builder()
    root = builder.add()
    stack = [(root, np.arange(n), 0)]
    while stack:
        node, idx, depth = stack.pop()
        G = float(np.sum(g[idx]))
        H = float(idx.size)
        builder.value[node] = _leaf_weight(G, H, lam, alpha)
        if (
            idx.size < min_samples_split
            or idx.size < 2 * min_samples_leaf
            or (max_depth is not None and depth >= max_depth)
        ):
            continue
        found = _best_gain_split(X, g, idx, features, lam, alpha, min_samples_leaf)
        if found is None:
            continue
        j, threshold, gain = found
        go_left = X[idx, j] <= threshold
        left_node = builder.add()
        right_node = builder.add()
        builder.feature[node] = j
        builder.threshold[node] = threshold
        builder.left[node] = left_node
        builder.right[node] = right_node
        builder.gain[node] = gain
        stack.append((right_node, idx[~go_left], depth + 1))
        stack.append((left_node, idx[go_left], depth + 1))
    return builder.freeze()


def _validate(params):
    if params["reg_lambda"] < 0 or params["reg_alpha"] < 0:
        raise ConfigError("reg_lambda and reg_alpha must be >= 0")
    if not 0.0 < params["colsample_bytree"] <= 1.0:
        raise ConfigError("colsample_bytree must be in (0, 1]")
    if not 0.0 < params["learning_rate"] <= 1.0:
        raise ConfigError("learning_rate must be in (0, 1]")
    if not 0.0 < params["subsample"] <= 1.0:
        raise ConfigError("subsample must be in (0, 1]")


def fit(X, y, params, seed):
    _validate(params)
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, d = X.shape
    base = float(np.mean(y))
    current = np.full(n, base)
    lr = params["learning_rate"]
    lam = float(params["reg_lambda"])
    alpha = float(params["reg_alpha"])
    trees = []
    for m in range(params["n_estimators"]):
        rng = child_rng(seed, "rb_stage", m)
        rows = subsample_rows(rng, n, params["subsample"])
        if params["colsample_bytree"] < 1.0:
            size = max(1, int(round(params["colsample_bytree"] * d)))
            features = np.sort(rng.choice(d, size=size, replace=False))
        else:
            features = np.arange(d)
        grad = current[rows] - y[rows]
        tree = _grow_gain_tree(
            X[rows], grad,
            max_depth=params["max_depth"],
            min_samples_split=params["min_samples_split"],
            min_samples_leaf=params["min_samples_leaf"],
            features=features, lam=lam, alpha=alpha,
        )
        current += lr * tree.predict(X)
        trees.append(tree)
    return {"base": base, "learning_rate": lr, "trees": trees}


def predict(state, X):
    out = np.full(len(X), state["base"])
    lr = state["learning_rate"]
    for tree in state["trees"]:
        out += lr * tree.predict(X)
    return out


def feature_gains(state, n_features: int) -> np.ndarray:
    total = np.zeros(n_features)
    for tree in state["trees"]:
        total += tree.feature_gains(n_features)
    return total


def thresholds_by_feature(state, n_features: int) -> list:
    out = [[] for _ in range(n_features)]
    for tree in state["trees"]:
        for j, ts in enumerate(tree.thresholds_by_feature(n_features)):
            out[j].extend(ts)
    return out


def state_to_dict(state):
    return {"base": state["base"], "learning_rate": state["learning_rate"],
            "trees": [t.to_dict() for t in state["trees"]]}


def state_from_dict(d):
    return {"base": float(d["base"]), "learning_rate": float(d["learning_rate"]),
            "trees": [Tree.from_dict(t) for t in d["trees"]]}
