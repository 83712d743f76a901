"""Epsilon-insensitive support vector regression, RBF kernel.

The dual is solved by pairwise coordinate steps on the 2n box-constrained
variables (alpha, alpha*) under the single equality constraint, always moving
the maximal-violating pair; optimization stops when the KKT violation gap
drops below tol. The bias comes from the KKT conditions of the free
variables (midpoint of the violation interval when none are free).
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError, ConvergenceError

DEFAULTS = {
    "C": 10.0,
    "degree": 2,
    "gamma": "scale",
    "kernel": "rbf",
    "epsilon": 0.1,
    "tol": 1e-3,
    "max_iter": 500000,
}


def resolve_gamma(gamma, X: np.ndarray) -> float:
    if gamma == "scale":
        var = float(np.var(X))
        return 1.0 / (X.shape[1] * var) if var > 0 else 1.0
    value = float(gamma)
    if value <= 0:
        raise ConfigError(f"gamma must be positive, got {gamma!r}")
    return value


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    sq = (
        np.sum(A * A, axis=1)[:, None]
        + np.sum(B * B, axis=1)[None, :]
        - 2.0 * (A @ B.T)
    )
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


def _solve_dual(K: np.ndarray, y: np.ndarray, C: float, epsilon: float,
                tol: float, max_iter: int):
    """Returns (beta, b, gap) for the epsilon-insensitive dual."""
    n = len(y)
    u = np.concatenate([np.ones(n), -np.ones(n)])
    z = np.zeros(2 * n)
    grad = np.concatenate([epsilon - y, epsilon + y])
    diag = np.concatenate([np.diag(K), np.diag(K)])
    gap = np.inf
    converged = False
    for _ in range(max_iter):
        minus_ug = -u * grad
        up = ((u > 0) & (z < C)) | ((u < 0) & (z > 0))
        low = ((u < 0) & (z < C)) | ((u > 0) & (z > 0))
        if not up.any() or not low.any():
            converged = True
            break
        i = int(np.argmax(np.where(up, minus_ug, -np.inf)))
        j = int(np.argmin(np.where(low, minus_ug, np.inf)))
        gap = minus_ug[i] - minus_ug[j]
        if gap < tol:
            converged = True
            break
        bi, bj = i % n, j % n
        quad = diag[i] + diag[j] - 2.0 * K[bi, bj]
        if quad <= 0.0:
            quad = 1e-12
        delta = gap / quad
        delta = min(delta, C - z[i] if u[i] > 0 else z[i])
        delta = min(delta, z[j] if u[j] > 0 else C - z[j])
        if delta <= 0.0:
            break
        z[i] += u[i] * delta
        z[j] -= u[j] * delta
        cols = np.concatenate([K[:, bi] - K[:, bj]] * 2)
        grad += delta * u * cols
    if not converged:
        raise ConvergenceError(
            f"dual optimizer stalled with KKT gap {gap:.3e} > tol {tol:g}",
            iterations=max_iter,
        )
    beta = z[:n] - z[n:]
    minus_ug = -u * grad
    free = (z > 1e-9) & (z < C - 1e-9)
    if free.any():
        b = float(np.mean(minus_ug[free]))
    else:
        up = ((u > 0) & (z < C)) | ((u < 0) & (z > 0))
        low = ((u < 0) & (z < C)) | ((u > 0) & (z > 0))
        hi = float(np.max(np.where(up, minus_ug, -np.inf))) if up.any() else 0.0
        lo = float(np.min(np.where(low, minus_ug, np.inf))) if low.any() else 0.0
        b = 0.5 * (hi + lo)
    return beta, b, gap


def fit(X, y, params, seed):
    if params["kernel"] != "rbf":
        raise ConfigError(f"unsupported kernel {params['kernel']!r}")
    C = float(params["C"])
    epsilon = float(params["epsilon"])
    if C <= 0:
        raise ConfigError("C must be > 0")
    if epsilon < 0:
        raise ConfigError("epsilon must be >= 0")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    gamma = resolve_gamma(params["gamma"], X)
    K = rbf_kernel(X, X, gamma)
    beta, b, _ = _solve_dual(K, y, C, epsilon, params["tol"], params["max_iter"])
    support = np.nonzero(beta != 0.0)[0]
    return {
        "support_vectors": X[support].copy(),
        "dual_coef": beta[support].copy(),
        "bias": b,
        "gamma": gamma,
    }


def predict(state, X):
    if len(state["dual_coef"]) == 0:
        return np.full(len(X), state["bias"])
    K = rbf_kernel(X, state["support_vectors"], state["gamma"])
    return K @ state["dual_coef"] + state["bias"]


def dual_objective(K: np.ndarray, y: np.ndarray, beta: np.ndarray,
                   epsilon: float) -> float:
    """Value of the reduced dual objective at beta (lower is better)."""
    return float(0.5 * beta @ K @ beta - y @ beta + epsilon * np.sum(np.abs(beta)))


def state_to_dict(state):
    return {
        "support_vectors": state["support_vectors"].tolist(),
        "dual_coef": state["dual_coef"].tolist(),
        "bias": state["bias"],
        "gamma": state["gamma"],
    }


def state_from_dict(d):
    sv = np.asarray(d["support_vectors"], dtype=np.float64)
    if sv.ndim == 1:  # no support vectors serialized as []
        sv = sv.reshape(0, 0)
    return {
        "support_vectors": sv,
        "dual_coef": np.asarray(d["dual_coef"], dtype=np.float64),
        "bias": float(d["bias"]),
        "gamma": float(d["gamma"]),
    }
