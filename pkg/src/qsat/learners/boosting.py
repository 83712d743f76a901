"""Stagewise gradient boosting with squared loss.

Stage 0 is the target mean. Each stage fits a depth-limited CART tree to the
current residuals on a seeded row subsample, and the ensemble advances by
learning_rate times the tree's prediction.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from ..rng import child_rng
from .tree import Tree, grow_tree

DEFAULTS = {
    "learning_rate": 0.1,
    "loss": "squared_error",
    "max_depth": 7,
    "n_estimators": 200,
    "subsample": 0.8,
    "max_features": "all",
    "min_samples_leaf": 1,
    "min_samples_split": 2,
}


def _validate(params):
    if params["loss"] != "squared_error":
        raise ConfigError(f"unsupported loss {params['loss']!r}")
    if not 0.0 < params["learning_rate"] <= 1.0:
        raise ConfigError("learning_rate must be in (0, 1]")
    if not 0.0 < params["subsample"] <= 1.0:
        raise ConfigError("subsample must be in (0, 1]")
    if params["n_estimators"] < 0:
        raise ConfigError("n_estimators must be >= 0")


def subsample_rows(rng, n: int, fraction: float) -> np.ndarray:
    """Seeded row subset (without replacement, original order) for one stage."""
    if fraction >= 1.0:
        return np.arange(n)
    size = max(1, int(round(fraction * n)))
    return np.sort(rng.choice(n, size=size, replace=False))


def fit(X, y, params, seed):
    _validate(params)
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    base = float(np.mean(y))
    current = np.full(n, base)
    lr = params["learning_rate"]
    trees = []
    for m in range(params["n_estimators"]):
        rng = child_rng(seed, "gb_stage", m)
        rows = subsample_rows(rng, n, params["subsample"])
        residual = y[rows] - current[rows]
        tree = grow_tree(
            X[rows], residual,
            max_depth=params["max_depth"],
            min_samples_split=params["min_samples_split"],
            min_samples_leaf=params["min_samples_leaf"],
            max_features=params["max_features"],
            rng=rng,
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


def staged_train_mse(X, y, params, seed) -> np.ndarray:
    """Training MSE after each stage (stage 0 = mean predictor); diagnostic
    used by the boosting monotonicity checks."""
    state = fit(X, y, params, seed)
    current = np.full(len(y), state["base"])
    mses = [float(np.mean((y - current) ** 2))]
    for tree in state["trees"]:
        current += state["learning_rate"] * tree.predict(np.asarray(X, dtype=np.float64))
        mses.append(float(np.mean((y - current) ** 2)))
    return np.asarray(mses)


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
