"""Out-of-fold stacking: base models feed a linear or elastic-net meta-learner.

Row i of the OOF matrix holds, per base kind, the prediction of a model
trained on every fold except the one containing i. The meta-learner is fit
on that matrix; base models are then refit on the full training set for
inference.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import learners
from .errors import ConfigError, NotFittedError
from .evaluation import kfold_split
from .learners.linear import coordinate_descent, ridge_solve
from .rng import child_seed

DEFAULT_BASE_KINDS = (
    "knn",
    "gradient_boosting",
    "random_forest",
    "regularized_boosting",
    "decision_tree",
)

# Tiny ridge term that keeps the linear meta solve well-posed when base
# predictions are (near-)collinear.
_META_STABILIZER = 1e-8


@dataclass(frozen=True)
class StackConfig:
    base_kinds: tuple = DEFAULT_BASE_KINDS
    base_params: dict | None = None  # kind -> hyperparams override
    meta: str = "linear"  # or "elastic_net"
    meta_alpha: float = 0.001
    meta_l1_ratio: float = 0.5
    fold_count: int = 5
    seed: int = 0

    def __post_init__(self):
        if len(set(self.base_kinds)) != len(self.base_kinds):
            raise ConfigError("base_kinds must be duplicate-free")
        if not self.base_kinds:
            raise ConfigError("at least one base kind is required")
        if self.meta not in ("linear", "elastic_net"):
            raise ConfigError(f"meta must be 'linear' or 'elastic_net', got {self.meta!r}")
        if self.fold_count < 2:
            raise ConfigError("fold_count must be >= 2")

    def params_for(self, kind: str) -> dict | None:
        return (self.base_params or {}).get(kind)


@dataclass(frozen=True)
class StackedModel:
    base_kinds: tuple
    base_models: tuple  # refit on the full training set, same order
    meta_coef: np.ndarray
    meta_intercept: float
    config: StackConfig

    def to_dict(self) -> dict:
        return {
            "base_kinds": list(self.base_kinds),
            "base_models": [learners.model_to_dict(m) for m in self.base_models],
            "meta_coef": self.meta_coef.tolist(),
            "meta_intercept": self.meta_intercept,
            "meta": self.config.meta,
            "meta_alpha": self.config.meta_alpha,
            "meta_l1_ratio": self.config.meta_l1_ratio,
            "fold_count": self.config.fold_count,
            "seed": self.config.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StackedModel":
        cfg = StackConfig(
            base_kinds=tuple(d["base_kinds"]),
            meta=d["meta"],
            meta_alpha=float(d["meta_alpha"]),
            meta_l1_ratio=float(d["meta_l1_ratio"]),
            fold_count=int(d["fold_count"]),
            seed=int(d["seed"]),
        )
        return cls(
            tuple(d["base_kinds"]),
            tuple(learners.model_from_dict(m) for m in d["base_models"]),
            np.asarray(d["meta_coef"], dtype=np.float64),
            float(d["meta_intercept"]),
            cfg,
        )


def build_oof_matrix(X, y, base_kinds, k: int, seed: int, base_params=None,
                     trace=None) -> np.ndarray:
    """n x m matrix of out-of-fold predictions (column order = base_kinds).

    ``trace``, when given, receives (kind, fold, training_row_indices) for
    every base fit, enabling leakage audits.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    if k < 2 or n < k:
        raise ConfigError(f"need 2 <= k <= n, got k={k}, n={n}")
    plan = kfold_split(n, k, seed)
    oof = np.empty((n, len(base_kinds)))
    for col, kind in enumerate(base_kinds):
        params = (base_params or {}).get(kind)
        for fold in range(k):
            fit_idx = plan.rest_indices(fold)
            val_idx = plan.fold_indices(fold)
            if trace is not None:
                trace.append((kind, fold, fit_idx.copy()))
            model = learners.fit_model(
                kind, X[fit_idx], y[fit_idx], params,
                child_seed(seed, "oof", kind, fold),
            )
            oof[val_idx, col] = model.predict(X[val_idx])
    return oof


def _fit_meta(oof: np.ndarray, y: np.ndarray, cfg: StackConfig):
    if cfg.meta == "linear":
        return ridge_solve(oof, y, _META_STABILIZER)
    return coordinate_descent(oof, y, cfg.meta_alpha, cfg.meta_l1_ratio,
                              max_iter=10000, tol=1e-8)


def fit_stacked(X, y, cfg: StackConfig) -> StackedModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    oof = build_oof_matrix(X, y, cfg.base_kinds, cfg.fold_count, cfg.seed,
                           cfg.base_params)
    coef, intercept = _fit_meta(oof, y, cfg)
    refit = tuple(
        learners.fit_model(kind, X, y, cfg.params_for(kind),
                           child_seed(cfg.seed, "stack_refit", kind))
        for kind in cfg.base_kinds
    )
    return StackedModel(tuple(cfg.base_kinds), refit, coef, float(intercept), cfg)


def predict_stacked(model: StackedModel, X) -> np.ndarray:
    if model.meta_coef is None:
        raise NotFittedError("stacked model is not fitted")
    X = np.asarray(X, dtype=np.float64)
    base = np.column_stack([m.predict(X) for m in model.base_models])
    return base @ model.meta_coef + model.meta_intercept


def ensemble_average(per_model: dict) -> float:
    """Arithmetic mean of the nine participants-scale predictions."""
    expected = set(learners.NINE_KINDS)
    got = set(per_model)
    if got != expected:
        missing = sorted(expected - got)
        extra = sorted(got - expected)
        raise ConfigError(
            f"ensemble average needs exactly the nine kinds "
            f"(missing {missing}, unexpected {extra})"
        )
    return float(sum(per_model[k] for k in learners.NINE_KINDS) / len(learners.NINE_KINDS))
