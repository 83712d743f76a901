"""AdaBoost.R2 with squared per-round loss and weighted-median aggregation.

Each round fits a shallow CART tree on a weighted bootstrap resample, scores
it by L_i = (|error_i| / max|error|)^2 over all training rows, and reweights
samples by beta^(learning_rate * (1 - L_i)) with beta = Lbar / (1 - Lbar).
Rounds with Lbar >= 0.5 end the loop; a perfect round (max error 0) is kept
with a dominating weight and also ends it.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import ConfigError
from ..rng import child_rng
from .tree import Tree, grow_tree

DEFAULTS = {
    "learning_rate": 0.05,
    "loss": "square",
    "n_estimators": 100,
    "base_max_depth": 3,
}

# beta floor so a zero-loss round gets a finite, dominating median weight
_BETA_FLOOR = 1e-300


def fit(X, y, params, seed):
    if params["loss"] != "square":
        raise ConfigError(f"unsupported loss {params['loss']!r}")
    if params["n_estimators"] < 1:
        raise ConfigError("n_estimators must be >= 1")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    lr = params["learning_rate"]
    weights = np.full(n, 1.0 / n)
    trees = []
    tree_weights = []
    for m in range(params["n_estimators"]):
        rng = child_rng(seed, "ada_round", m)
        rows = rng.choice(n, size=n, replace=True, p=weights)
        tree = grow_tree(
            X[rows], y[rows],
            max_depth=params["base_max_depth"],
            min_samples_split=2, min_samples_leaf=1,
            max_features=None, rng=rng,
        )
        pred = tree.predict(X)
        err = np.abs(pred - y)
        err_max = float(err.max())
        if err_max == 0.0:
            trees.append(tree)
            tree_weights.append(lr * math.log(1.0 / _BETA_FLOOR))
            break
        loss = (err / err_max) ** 2
        avg_loss = float(np.sum(weights * loss))
        if avg_loss >= 0.5:
            if not trees:  # keep something predictable for degenerate data
                trees.append(tree)
                tree_weights.append(1.0)
            break
        beta = avg_loss / (1.0 - avg_loss)
        trees.append(tree)
        tree_weights.append(lr * math.log(1.0 / max(beta, _BETA_FLOOR)))
        weights = weights * beta ** (lr * (1.0 - loss))
        weights = weights / weights.sum()
    return {"trees": trees, "tree_weights": np.asarray(tree_weights)}


def weighted_median(preds: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Row-wise weighted median: first prediction where the sorted cumulative
    weight reaches half the total."""
    order = np.argsort(preds, axis=1, kind="stable")
    sorted_preds = np.take_along_axis(preds, order, axis=1)
    cdf = np.cumsum(weights[order], axis=1)
    at_or_above = cdf >= 0.5 * cdf[:, -1:]
    idx = at_or_above.argmax(axis=1)
    return sorted_preds[np.arange(len(preds)), idx]


def predict(state, X):
    preds = np.column_stack([t.predict(X) for t in state["trees"]])
    return weighted_median(preds, state["tree_weights"])


def state_to_dict(state):
    return {"trees": [t.to_dict() for t in state["trees"]],
            "tree_weights": state["tree_weights"].tolist()}


def state_from_dict(d):
    return {"trees": [Tree.from_dict(t) for t in d["trees"]],
            "tree_weights": np.asarray(d["tree_weights"], dtype=np.float64)}
