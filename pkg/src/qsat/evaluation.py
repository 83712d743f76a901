"""Cross-validation, grid search, metrics, importances, comparison reports.

Model selection runs in log-target space with the MAE-first / RMSE-second
rule; reports additionally carry the back-transformed (participants-scale)
MAE so both error scales are visible.
"""

from __future__ import annotations

import datetime
import enum
import itertools
from dataclasses import dataclass

import numpy as np

from . import learners
from .errors import ConfigError
from .rng import child_rng, child_seed


@dataclass(frozen=True)
class FoldPlan:
    """Deterministic k-fold assignment: seeded shuffle, contiguous chunks,
    fold sizes differing by at most one."""

    k: int
    assignment: np.ndarray
    seed: int

    def fold_indices(self, fold: int) -> np.ndarray:
        return np.nonzero(self.assignment == fold)[0]

    def rest_indices(self, fold: int) -> np.ndarray:
        return np.nonzero(self.assignment != fold)[0]


def kfold_split(n: int, k: int, seed: int) -> FoldPlan:
    if not 2 <= k <= n:
        raise ConfigError(f"need 2 <= k <= n, got k={k}, n={n}")
    perm = child_rng(seed, "kfold").permutation(n)
    assignment = np.empty(n, dtype=np.int64)
    base, extra = divmod(n, k)
    start = 0
    for fold in range(k):
        size = base + (1 if fold < extra else 0)
        assignment[perm[start:start + size]] = fold
        start += size
    return FoldPlan(k, assignment, seed)


class MetricUnit(enum.Enum):
    LOG_SPACE = "log_space"
    RAW_SPACE = "raw_space"


@dataclass(frozen=True)
class MetricSet:
    r2: float
    mae: float
    rmse: float
    unit: MetricUnit


def compute_metrics(y_true, y_pred, unit: MetricUnit = MetricUnit.LOG_SPACE) -> MetricSet:
    """R^2, MAE, RMSE. Constant truth (zero variance) defines R^2 as 1 for a
    perfect fit and 0 otherwise; "perfect" tolerates last-ulp float noise,
    since no floating-point learner reproduces a non-dyadic constant exactly.
    """
    y_true = np.asarray(y_true, dtype=np.float64)
    y_pred = np.asarray(y_pred, dtype=np.float64)
    if y_true.shape != y_pred.shape or y_true.ndim != 1 or len(y_true) == 0:
        raise ConfigError("y_true and y_pred must be equal-length non-empty vectors")
    err = y_pred - y_true
    sse = float(np.sum(err**2))
    rmse = float(np.sqrt(np.mean(err**2)))
    if float(y_true.max()) == float(y_true.min()):
        scale = max(1.0, abs(float(y_true[0])))
        r2 = 1.0 if rmse <= 1e-12 * scale else 0.0
    else:
        sst = float(np.sum((y_true - y_true.mean()) ** 2))
        r2 = 1.0 - sse / sst
    return MetricSet(
        r2=r2,
        mae=float(np.mean(np.abs(err))),
        rmse=rmse,
        unit=unit,
    )


def grid_cells(grid: dict) -> list:
    """Cartesian product of a {param: [values]} grid in declaration order."""
    if not grid:
        raise ConfigError("empty hyperparameter grid")
    keys = list(grid.keys())
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


def grid_search(kind: str, grid: dict, X, y, fold_plan: FoldPlan):
    """Exhaustive CV search. Winner has lowest mean MAE, ties broken by lower
    RMSE, remaining ties by earliest grid order. Per-cell failures are
    recorded, not fatal (unless every cell fails)."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    cells = grid_cells(grid)
    table = []
    best = None  # (mae, rmse, order)
    best_params = None
    for order, params in enumerate(cells):
        maes, rmses = [], []
        failure = None
        for fold in range(fold_plan.k):
            fit_idx = fold_plan.rest_indices(fold)
            val_idx = fold_plan.fold_indices(fold)
            seed = child_seed(fold_plan.seed, "grid_fit", kind, order, fold)
            try:
                model = learners.fit_model(kind, X[fit_idx], y[fit_idx], params, seed)
            except Exception as exc:  # record and move on to the next cell
                failure = f"{type(exc).__name__}: {exc}"
                break
            m = compute_metrics(y[val_idx], model.predict(X[val_idx]))
            maes.append(m.mae)
            rmses.append(m.rmse)
        row = {"params": params, "error": failure}
        if failure is None:
            row["mean_mae"] = float(np.mean(maes))
            row["mean_rmse"] = float(np.mean(rmses))
            key = (row["mean_mae"], row["mean_rmse"], order)
            if best is None or key < best:
                best = key
                best_params = params
        table.append(row)
    if best_params is None:
        raise ConfigError(f"every grid cell failed for kind {kind!r}")
    return best_params, table


def impurity_importance(model: learners.RegressorModel) -> np.ndarray:
    """Per-feature split-gain totals normalized to sum to 1 (zeros when the
    model never split)."""
    if model.kind not in learners.TREE_KINDS:
        raise ConfigError(f"impurity importance requires a tree-based kind, "
                          f"got {model.kind!r}")
    gains = learners.feature_gains(model)
    total = float(gains.sum())
    return gains / total if total > 0 else gains


def permutation_importance(model: learners.RegressorModel, X, y,
                           repeats: int = 5, seed: int = 0) -> np.ndarray:
    """Mean MAE increase when each column is shuffled within itself."""
    if repeats < 1:
        raise ConfigError("repeats must be >= 1")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    baseline = float(np.mean(np.abs(model.predict(X) - y)))
    out = np.zeros(X.shape[1])
    for j in range(X.shape[1]):
        deltas = []
        for r in range(repeats):
            rng = child_rng(seed, "perm", j, r)
            shuffled = X.copy()
            shuffled[:, j] = shuffled[rng.permutation(len(X)), j]
            mae = float(np.mean(np.abs(model.predict(shuffled) - y)))
            deltas.append(mae - baseline)
        out[j] = float(np.mean(deltas))
    return out


@dataclass(frozen=True)
class KindResult:
    """Outcome of one learner's search/refit/evaluate pass."""

    kind: str
    best_params: dict | None
    cv_table: list
    model: learners.RegressorModel | None
    test_pred_log: np.ndarray | None
    metrics: dict | None
    error: str | None = None


@dataclass(frozen=True)
class ComparisonReport:
    rows: list
    dataset_fingerprint: str
    seed: int
    timestamp: str
    k: int

    def to_dict(self) -> dict:
        return {
            "rows": self.rows,
            "dataset_fingerprint": self.dataset_fingerprint,
            "seed": self.seed,
            "timestamp": self.timestamp,
            "k": self.k,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ComparisonReport":
        return cls(list(d["rows"]), d["dataset_fingerprint"], int(d["seed"]),
                   d["timestamp"], int(d["k"]))


def evaluate_kinds(X_train, y_train, X_test, y_test, kinds, grids, seed: int,
                   k: int = 5) -> list:
    """Grid-search each kind on the training set, refit the winner on all of
    it, and measure train/test metrics. Per-kind failures become error rows."""
    X_train = np.asarray(X_train, dtype=np.float64)
    y_train = np.asarray(y_train, dtype=np.float64)
    X_test = np.asarray(X_test, dtype=np.float64)
    y_test = np.asarray(y_test, dtype=np.float64)
    plan = kfold_split(len(y_train), k, seed)
    results = []
    for kind in kinds:
        grid = grids.get(kind)
        if grid is None:
            raise ConfigError(f"no grid provided for kind {kind!r}")
        try:
            best_params, cv_table = grid_search(kind, grid, X_train, y_train, plan)
            model = learners.fit_model(
                kind, X_train, y_train, best_params, child_seed(seed, "refit", kind)
            )
        except Exception as exc:
            results.append(KindResult(kind, None, [], None, None, None,
                                      error=f"{type(exc).__name__}: {exc}"))
            continue
        train_m = compute_metrics(y_train, model.predict(X_train))
        test_pred = model.predict(X_test)
        test_m = compute_metrics(y_test, test_pred)
        raw_mae = float(np.mean(np.abs(np.exp(test_pred) - np.exp(y_test))))
        metrics = {
            "test_r2": test_m.r2,
            "train_r2": train_m.r2,
            "test_mae_log": test_m.mae,
            "test_mae_raw": raw_mae,
            "test_rmse_log": test_m.rmse,
        }
        results.append(KindResult(kind, best_params, cv_table, model, test_pred, metrics))
    return results


def build_comparison_report(results, dataset_fingerprint: str, seed: int,
                            k: int = 5, timestamp: str | None = None) -> ComparisonReport:
    rows = []
    for res in results:
        row = {"model": res.kind, "best_params": res.best_params, "error": res.error}
        if res.metrics is not None:
            row.update(res.metrics)
        rows.append(row)
    ts = timestamp if timestamp is not None else (
        datetime.datetime.now(datetime.timezone.utc).isoformat()
    )
    return ComparisonReport(rows, dataset_fingerprint, seed, ts, k)
