"""Linear models: ridge closed form and lasso/elastic-net coordinate descent.

Both fit an unpenalized intercept on centered data. Ridge solves the normal
equations by Cholesky factorization; the coordinate-descent path handles the
L1 term by soft-thresholding and stops when the largest coefficient change
falls below tol.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError, ConvergenceError, SingularSystemError

RIDGE_DEFAULTS = {"alpha": 50.0}
LASSO_DEFAULTS = {"alpha": 0.01, "max_iter": 10000, "tol": 1e-8}


def _center(X, y):
    x_mean = X.mean(axis=0)
    y_mean = float(y.mean())
    return X - x_mean, y - y_mean, x_mean, y_mean


def ridge_solve(X, y, alpha: float):
    """(coef, intercept) minimizing ||y - Xw - b||^2 + alpha * ||w||^2."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    Xc, yc, x_mean, y_mean = _center(X, y)
    if alpha == 0.0 and np.linalg.matrix_rank(Xc) < X.shape[1]:
        raise SingularSystemError(
            "unpenalized fit on rank-deficient centered data"
        )
    A = Xc.T @ Xc + alpha * np.eye(X.shape[1])
    try:
        L = np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        raise SingularSystemError(
            "normal equations are singular; increase alpha or drop collinear columns"
        ) from None
    z = np.linalg.solve(L, Xc.T @ yc)
    coef = np.linalg.solve(L.T, z)
    return coef, y_mean - float(coef @ x_mean)


def coordinate_descent(X, y, alpha: float, l1_ratio: float, max_iter: int,
                       tol: float):
    """(coef, intercept) minimizing
    (1/2n)||y - Xw - b||^2 + alpha * (l1_ratio ||w||_1 + (1-l1_ratio)/2 ||w||_2^2).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, d = X.shape
    Xc, yc, x_mean, y_mean = _center(X, y)
    col_sq = (Xc * Xc).sum(axis=0) / n
    l1 = alpha * l1_ratio
    l2 = alpha * (1.0 - l1_ratio)
    coef = np.zeros(d)
    residual = yc.copy()
    for it in range(max_iter):
        max_delta = 0.0
        for j in range(d):
            if col_sq[j] == 0.0:
                continue
            rho = float(Xc[:, j] @ residual) / n + col_sq[j] * coef[j]
            new = np.sign(rho) * max(0.0, abs(rho) - l1) / (col_sq[j] + l2)
            delta = new - coef[j]
            if delta != 0.0:
                residual -= delta * Xc[:, j]
                coef[j] = new
                max_delta = max(max_delta, abs(delta))
        if max_delta < tol:
            break
    else:
        raise ConvergenceError("coordinate descent did not converge", iterations=max_iter)
    return coef, y_mean - float(coef @ x_mean)


def ridge_fit(X, y, params, seed):
    if params["alpha"] < 0:
        raise ConfigError("alpha must be >= 0")
    coef, intercept = ridge_solve(X, y, float(params["alpha"]))
    return {"coef": coef, "intercept": intercept}


def lasso_fit(X, y, params, seed):
    if params["alpha"] <= 0:
        raise ConfigError("alpha must be > 0")
    coef, intercept = coordinate_descent(
        X, y, float(params["alpha"]), 1.0, params["max_iter"], params["tol"]
    )
    return {"coef": coef, "intercept": intercept}


def linear_predict(state, X):
    return X @ state["coef"] + state["intercept"]


def state_to_dict(state):
    return {"coef": state["coef"].tolist(), "intercept": state["intercept"]}


def state_from_dict(d):
    return {"coef": np.asarray(d["coef"], dtype=np.float64),
            "intercept": float(d["intercept"])}
