"""Random-forest regressor: bagged CART trees, mean-aggregated.

Per-tree randomness (bootstrap rows, per-node feature subsets) derives from
the master seed through a per-tree stream, so serial and parallel runs agree.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from ..rng import child_rng
from .tree import Tree, grow_tree

DEFAULTS = {
    "max_depth": None,
    "max_features": "sqrt",
    "min_samples_leaf": 1,
    "min_samples_split": 2,
    "n_estimators": 200,
    "bootstrap": True,
}


def fit(X, y, params, seed):
    n_estimators = params["n_estimators"]
    if not isinstance(n_estimators, int) or n_estimators < 1:
        raise ConfigError(f"n_estimators must be >= 1, got {n_estimators!r}")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    trees = []
    for t in range(n_estimators):
        rng = child_rng(seed, "rf_tree", t)
        if params["bootstrap"]:
            rows = rng.integers(0, n, size=n)
            X_t, y_t = X[rows], y[rows]
        else:
            X_t, y_t = X, y
        trees.append(grow_tree(
            X_t, y_t,
            max_depth=params["max_depth"],
            min_samples_split=params["min_samples_split"],
            min_samples_leaf=params["min_samples_leaf"],
            max_features=params["max_features"],
            rng=rng,
        ))
    return {"trees": trees}


def predict(state, X):
    total = np.zeros(len(X))
    for tree in state["trees"]:
        total += tree.predict(X)
    return total / len(state["trees"])


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
    return {"trees": [t.to_dict() for t in state["trees"]]}


def state_from_dict(d):
    return {"trees": [Tree.from_dict(t) for t in d["trees"]]}
