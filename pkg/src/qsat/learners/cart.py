"""Single decision-tree regressor (thin wrapper over the CART core)."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from ..rng import child_rng
from .tree import Tree, grow_tree

DEFAULTS = {
    "criterion": "squared_error",
    "max_depth": None,
    "max_features": "sqrt",
    "min_samples_leaf": 1,
    "min_samples_split": 2,
}


def fit(X, y, params, seed):
    if params["criterion"] != "squared_error":
        raise ConfigError(f"unsupported criterion {params['criterion']!r}")
    tree = grow_tree(
        X, y,
        max_depth=params["max_depth"],
        min_samples_split=params["min_samples_split"],
        min_samples_leaf=params["min_samples_leaf"],
        max_features=params["max_features"],
        rng=child_rng(seed, "decision_tree"),
    )
    return {"tree": tree}


def predict(state, X):
    return state["tree"].predict(X)


def feature_gains(state, n_features: int) -> np.ndarray:
    return state["tree"].feature_gains(n_features)


def thresholds_by_feature(state, n_features: int) -> list:
    return state["tree"].thresholds_by_feature(n_features)


def state_to_dict(state):
    return {"tree": state["tree"].to_dict()}


def state_from_dict(d):
    return {"tree": Tree.from_dict(d["tree"])}
