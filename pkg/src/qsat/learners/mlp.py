"""Single-hidden-layer perceptron regressor.

Logistic hidden activation, linear output, L2 penalty on weights (not
biases). Trained full-batch with adaptive-moment gradient steps; optional
early stopping watches a seeded 10% validation split with patience and
min-delta, restoring the best weights seen.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError, QsatError
from ..rng import child_rng

DEFAULTS = {
    "activation": "logistic",
    "alpha": 0.01,
    "early_stopping": True,
    "hidden_layer_sizes": (30,),
    "learning_rate_init": 0.01,
    "max_iter": 2000,
    "n_iter_no_change": 20,
    "tol": 1e-6,
    "validation_fraction": 0.1,
}

_ADAM_B1 = 0.9
_ADAM_B2 = 0.999
_ADAM_EPS = 1e-8


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-np.clip(x, -500.0, 500.0)))


def init_weights(d: int, h: int, rng) -> dict:
    """Uniform Glorot initialization; biases start at zero."""
    lim1 = np.sqrt(6.0 / (d + h))
    lim2 = np.sqrt(6.0 / (h + 1))
    return {
        "W1": rng.uniform(-lim1, lim1, size=(d, h)),
        "b1": np.zeros(h),
        "W2": rng.uniform(-lim2, lim2, size=h),
        "b2": 0.0,
    }


def forward(weights: dict, X: np.ndarray):
    hidden = _sigmoid(X @ weights["W1"] + weights["b1"])
    return hidden @ weights["W2"] + weights["b2"], hidden


def loss_and_grads(weights: dict, X: np.ndarray, y: np.ndarray, alpha: float):
    """Objective 0.5*MSE + alpha/(2n)*(||W1||^2 + ||W2||^2) and its gradients."""
    n = len(y)
    pred, hidden = forward(weights, X)
    err = pred - y
    penalty = (alpha / (2.0 * n)) * (
        float(np.sum(weights["W1"] ** 2)) + float(np.sum(weights["W2"] ** 2))
    )
    loss = 0.5 * float(np.mean(err**2)) + penalty
    d_pred = err / n
    gW2 = hidden.T @ d_pred + (alpha / n) * weights["W2"]
    gb2 = float(np.sum(d_pred))
    d_hidden = np.outer(d_pred, weights["W2"]) * hidden * (1.0 - hidden)
    gW1 = X.T @ d_hidden + (alpha / n) * weights["W1"]
    gb1 = d_hidden.sum(axis=0)
    return loss, {"W1": gW1, "b1": gb1, "W2": gW2, "b2": gb2}


def fit(X, y, params, seed):
    hidden_sizes = tuple(params["hidden_layer_sizes"])
    if len(hidden_sizes) != 1 or hidden_sizes[0] < 1:
        raise ConfigError(
            f"exactly one hidden layer of >= 1 units is supported, got {hidden_sizes!r}"
        )
    if params["activation"] != "logistic":
        raise ConfigError(f"unsupported activation {params['activation']!r}")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, d = X.shape
    h = hidden_sizes[0]
    alpha = float(params["alpha"])
    rng = child_rng(seed, "mlp")
    weights = init_weights(d, h, rng)

    if params["early_stopping"] and n >= 10:
        n_val = max(1, int(round(params["validation_fraction"] * n)))
        perm = rng.permutation(n)
        val_idx, fit_idx = perm[:n_val], perm[n_val:]
        X_fit, y_fit = X[fit_idx], y[fit_idx]
        X_val, y_val = X[val_idx], y[val_idx]
    else:
        X_fit, y_fit = X, y
        X_val = y_val = None

    m = {k: np.zeros_like(np.asarray(v, dtype=np.float64)) for k, v in weights.items()}
    v = {k: np.zeros_like(np.asarray(val, dtype=np.float64)) for k, val in weights.items()}
    lr = float(params["learning_rate_init"])
    best_val = np.inf
    best_weights = {k: np.copy(w) for k, w in weights.items()}
    stale = 0
    history = []
    for t in range(1, params["max_iter"] + 1):
        loss, grads = loss_and_grads(weights, X_fit, y_fit, alpha)
        if not np.isfinite(loss):
            raise QsatError(f"training loss became non-finite at iteration {t}")
        history.append(loss)
        for key in ("W1", "b1", "W2", "b2"):
            g = grads[key]
            m[key] = _ADAM_B1 * m[key] + (1 - _ADAM_B1) * g
            v[key] = _ADAM_B2 * v[key] + (1 - _ADAM_B2) * np.square(g)
            m_hat = m[key] / (1 - _ADAM_B1**t)
            v_hat = v[key] / (1 - _ADAM_B2**t)
            weights[key] = weights[key] - lr * m_hat / (np.sqrt(v_hat) + _ADAM_EPS)
        if X_val is not None:
            val_pred, _ = forward(weights, X_val)
            val_loss = 0.5 * float(np.mean((val_pred - y_val) ** 2))
            if val_loss < best_val - params["tol"]:
                best_val = val_loss
                best_weights = {k: np.copy(w) for k, w in weights.items()}
                stale = 0
            else:
                stale += 1
                if stale >= params["n_iter_no_change"]:
                    break
    final = best_weights if X_val is not None else weights
    return {
        "W1": final["W1"], "b1": final["b1"],
        "W2": final["W2"], "b2": float(final["b2"]),
        "loss_history": history,
    }


def predict(state, X):
    pred, _ = forward(state, X)
    return pred


def state_to_dict(state):
    return {
        "W1": state["W1"].tolist(), "b1": state["b1"].tolist(),
        "W2": state["W2"].tolist(), "b2": state["b2"],
    }


def state_from_dict(d):
    return {
        "W1": np.asarray(d["W1"], dtype=np.float64),
        "b1": np.asarray(d["b1"], dtype=np.float64),
        "W2": np.asarray(d["W2"], dtype=np.float64),
        "b2": float(d["b2"]),
    }
