"""Shared fixtures: a small synthetic corpus, its matrices, and a fast
fixture bundle reused by persistence/service/CLI tests."""

from __future__ import annotations

import numpy as np
import pytest

from qsat.data import GeneratorConfig, serialize_csv, synthesize_dataset
from qsat.preprocess import TrimConfig, fit_pipeline, transform
from qsat.training import TrainConfig, train_bundle

# One representative cell per kind keeps the fixture bundle fast while still
# exercising every learner and the full train path.
FAST_GRIDS = {
    "knn": {"n_neighbors": [5], "p": [1], "weights": ["distance"]},
    "gradient_boosting": {"learning_rate": [0.1], "loss": ["squared_error"],
                          "max_depth": [3], "n_estimators": [30], "subsample": [0.8]},
    "random_forest": {"max_depth": [None], "max_features": ["sqrt"],
                      "min_samples_leaf": [1], "min_samples_split": [2],
                      "n_estimators": [30]},
    "regularized_boosting": {"colsample_bytree": [1.0], "learning_rate": [0.1],
                             "max_depth": [3], "n_estimators": [30],
                             "reg_alpha": [0], "reg_lambda": [1.5],
                             "subsample": [0.8]},
    "decision_tree": {"criterion": ["squared_error"], "max_depth": [None],
                      "max_features": ["sqrt"], "min_samples_leaf": [1],
                      "min_samples_split": [2]},
    "svr": {"C": [10.0], "degree": [2], "gamma": ["scale"], "kernel": ["rbf"],
            "epsilon": [0.1]},
    "mlp": {"activation": ["logistic"], "alpha": [0.01], "early_stopping": [True],
            "hidden_layer_sizes": [[10]]},
    "adaboost_r2": {"learning_rate": [0.05], "loss": ["square"], "n_estimators": [20]},
    "ridge": {"alpha": [50.0]},
}


@pytest.fixture(scope="session")
def small_corpus():
    return synthesize_dataset(GeneratorConfig(per_design_count=40, seed=7))


@pytest.fixture(scope="session")
def small_corpus_csv(small_corpus) -> bytes:
    return serialize_csv(small_corpus).encode("utf-8")


@pytest.fixture(scope="session")
def training_matrices(small_corpus):
    pipeline, trimmed = fit_pipeline(small_corpus, TrimConfig())
    X, y = transform(pipeline, trimmed.records)
    return X, y


@pytest.fixture(scope="session")
def fixture_train_config():
    return TrainConfig(seed=11, grids=FAST_GRIDS)


@pytest.fixture(scope="session")
def fixture_outcome(small_corpus_csv, fixture_train_config):
    outcome = train_bundle(small_corpus_csv, fixture_train_config)
    assert outcome.bundle is not None, [r.error for r in outcome.results]
    return outcome


@pytest.fixture(scope="session")
def fixture_bundle(fixture_outcome):
    return fixture_outcome.bundle


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
