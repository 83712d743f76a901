"""k-nearest-neighbor regression with Minkowski distance.

Neighbor ties at equal distance resolve by lowest training-row index.
Distance weighting uses w = 1/d; any exact match (d = 0) among the k
selected neighbors short-circuits to the mean of the exact matches.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError

DEFAULTS = {"n_neighbors": 15, "p": 1, "weights": "distance"}


def fit(X, y, params, seed):
    k = params["n_neighbors"]
    p = params["p"]
    if not isinstance(k, int) or k < 1:
        raise ConfigError(f"n_neighbors must be a positive integer, got {k!r}")
    if p < 1:
        raise ConfigError(f"p must be >= 1, got {p!r}")
    if params["weights"] not in ("uniform", "distance"):
        raise ConfigError(f"weights must be 'uniform' or 'distance', got {params['weights']!r}")
    return {"X": np.array(X, dtype=np.float64), "y": np.array(y, dtype=np.float64),
            "n_neighbors": k, "p": float(p), "weights": params["weights"]}


def _minkowski(queries, train, p):
    diff = np.abs(queries[:, None, :] - train[None, :, :])
    if p == 1.0:
        return diff.sum(axis=2)
    if p == 2.0:
        return np.sqrt((diff * diff).sum(axis=2))
    return (diff**p).sum(axis=2) ** (1.0 / p)


def predict(state, X):
    train, y = state["X"], state["y"]
    k = state["n_neighbors"]
    if k > len(train):
        raise ConfigError(f"n_neighbors={k} exceeds training size {len(train)}")
    dist = _minkowski(X, train, state["p"])
    order = np.argsort(dist, axis=1, kind="stable")[:, :k]
    d_k = np.take_along_axis(dist, order, axis=1)
    y_k = y[order]
    if state["weights"] == "uniform":
        return y_k.mean(axis=1)
    out = np.empty(len(X))
    exact = d_k == 0.0
    has_exact = exact.any(axis=1)
    for i in np.nonzero(has_exact)[0]:
        out[i] = y_k[i, exact[i]].mean()
    rest = ~has_exact
    if rest.any():
        w = 1.0 / d_k[rest]
        out[rest] = (w * y_k[rest]).sum(axis=1) / w.sum(axis=1)
    return out


def state_to_dict(state):
    return {"X": state["X"].tolist(), "y": state["y"].tolist(),
            "n_neighbors": state["n_neighbors"], "p": state["p"],
            "weights": state["weights"]}


def state_from_dict(d):
    return {"X": np.asarray(d["X"], dtype=np.float64),
            "y": np.asarray(d["y"], dtype=np.float64),
            "n_neighbors": int(d["n_neighbors"]), "p": float(d["p"]),
            "weights": d["weights"]}
