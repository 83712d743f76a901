"""Nine regression learners behind one fit/predict contract.

Every learner is fit as ``fit_model(kind, X, y, params, seed)`` where y is in
log space, and queried as ``predict_model(model, X)``. Fitted models are
immutable, reject width mismatches and non-finite inputs, and serialize to
plain dicts that reload to bit-identical predictors.
"""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType

import numpy as np

from ..errors import ConfigError
from . import adaboost, boosting, cart, forest, knn, linear, mlp, regularized, svr

# Kind order mirrors the model-comparison report.
NINE_KINDS = (
    "knn",
    "gradient_boosting",
    "random_forest",
    "regularized_boosting",
    "decision_tree",
    "svr",
    "mlp",
    "adaboost_r2",
    "ridge",
)
TREE_KINDS = ("decision_tree", "random_forest", "gradient_boosting", "regularized_boosting")
ALL_KINDS = NINE_KINDS + ("lasso",)


@dataclass(frozen=True)
class RegressorModel:
    """A fitted learner: kind, resolved hyperparameters, and opaque state."""

    kind: str
    hyperparams: MappingProxyType
    feature_count: int
    state: object

    def predict(self, X) -> np.ndarray:
        return predict_model(self, X)


class _Impl:
    def __init__(self, fit, predict, defaults, to_dict, from_dict,
                 feature_gains=None, thresholds=None):
        self.fit = fit
        self.predict = predict
        self.defaults = defaults
        self.to_dict = to_dict
        self.from_dict = from_dict
        self.feature_gains = feature_gains
        self.thresholds = thresholds


_REGISTRY = {
    "knn": _Impl(knn.fit, knn.predict, knn.DEFAULTS, knn.state_to_dict,
                 knn.state_from_dict),
    "decision_tree": _Impl(cart.fit, cart.predict, cart.DEFAULTS,
                           cart.state_to_dict, cart.state_from_dict,
                           cart.feature_gains, cart.thresholds_by_feature),
    "random_forest": _Impl(forest.fit, forest.predict, forest.DEFAULTS,
                           forest.state_to_dict, forest.state_from_dict,
                           forest.feature_gains, forest.thresholds_by_feature),
    "gradient_boosting": _Impl(boosting.fit, boosting.predict, boosting.DEFAULTS,
                               boosting.state_to_dict, boosting.state_from_dict,
                               boosting.feature_gains, boosting.thresholds_by_feature),
    "regularized_boosting": _Impl(regularized.fit, regularized.predict,
                                  regularized.DEFAULTS, regularized.state_to_dict,
                                  regularized.state_from_dict,
                                  regularized.feature_gains,
                                  regularized.thresholds_by_feature),
    "adaboost_r2": _Impl(adaboost.fit, adaboost.predict, adaboost.DEFAULTS,
                         adaboost.state_to_dict, adaboost.state_from_dict),
    "ridge": _Impl(linear.ridge_fit, linear.linear_predict, linear.RIDGE_DEFAULTS,
                   linear.state_to_dict, linear.state_from_dict),
    "lasso": _Impl(linear.lasso_fit, linear.linear_predict, linear.LASSO_DEFAULTS,
                   linear.state_to_dict, linear.state_from_dict),
    "svr": _Impl(svr.fit, svr.predict, svr.DEFAULTS, svr.state_to_dict,
                 svr.state_from_dict),
    "mlp": _Impl(mlp.fit, mlp.predict, mlp.DEFAULTS, mlp.state_to_dict,
                 mlp.state_from_dict),
}


def register_kind(name, fit, predict, defaults=None, to_dict=None, from_dict=None):
    """Add a custom learner kind (used by tests and extensions)."""
    _REGISTRY[name] = _Impl(fit, predict, defaults or {}, to_dict, from_dict)


def default_params(kind: str) -> dict:
    return dict(_get(kind).defaults)


def _get(kind: str) -> _Impl:
    try:
        return _REGISTRY[kind]
    except KeyError:
        raise ConfigError(f"unknown learner kind {kind!r}") from None


def _check_matrix(X, expect_width=None) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ConfigError(f"expected a 2-D feature matrix, got ndim={X.ndim}")
    if expect_width is not None and X.shape[1] != expect_width:
        raise ConfigError(
            f"feature width {X.shape[1]} does not match model width {expect_width}"
        )
    if not np.isfinite(X).all():
        raise ConfigError("feature matrix contains non-finite values")
    return X


def fit_model(kind: str, X, y, params: dict | None = None, seed: int = 0) -> RegressorModel:
    impl = _get(kind)
    X = _check_matrix(X)
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1 or len(y) != len(X):
        raise ConfigError("y must be a vector with one entry per row of X")
    if len(y) == 0:
        raise ConfigError("cannot fit on an empty dataset")
    if not np.isfinite(y).all():
        raise ConfigError("target vector contains non-finite values")
    merged = dict(impl.defaults)
    for key, value in (params or {}).items():
        if impl.defaults and key not in impl.defaults:
            raise ConfigError(f"unknown hyperparameter {key!r} for kind {kind!r}")
        merged[key] = value
    state = impl.fit(X, y, merged, seed)
    return RegressorModel(kind, MappingProxyType(merged), X.shape[1], state)


def predict_model(model: RegressorModel, X) -> np.ndarray:
    impl = _get(model.kind)
    X = _check_matrix(X, expect_width=model.feature_count)
    return impl.predict(model.state, X)


def model_to_dict(model: RegressorModel) -> dict:
    impl = _get(model.kind)
    if impl.to_dict is None:
        raise ConfigError(f"kind {model.kind!r} does not support serialization")
    params = {
        key: (list(value) if isinstance(value, tuple) else value)
        for key, value in model.hyperparams.items()
    }
    return {
        "kind": model.kind,
        "hyperparams": params,
        "feature_count": model.feature_count,
        "state": impl.to_dict(model.state),
    }


def model_from_dict(d: dict) -> RegressorModel:
    impl = _get(d["kind"])
    if impl.from_dict is None:
        raise ConfigError(f"kind {d['kind']!r} does not support serialization")
    return RegressorModel(
        d["kind"],
        MappingProxyType(dict(d["hyperparams"])),
        int(d["feature_count"]),
        impl.from_dict(d["state"]),
    )


def feature_gains(model: RegressorModel) -> np.ndarray:
    """Raw per-feature split-gain totals; tree-based kinds only."""
    impl = _get(model.kind)
    if impl.feature_gains is None:
        raise ConfigError(f"kind {model.kind!r} has no impurity-based importance")
    return impl.feature_gains(model.state, model.feature_count)


def learned_thresholds(model: RegressorModel) -> list:
    """Per-feature learned split thresholds; tree-based kinds only."""
    impl = _get(model.kind)
    if impl.thresholds is None:
        raise ConfigError(f"kind {model.kind!r} has no split thresholds")
    return impl.thresholds(model.state, model.feature_count)
