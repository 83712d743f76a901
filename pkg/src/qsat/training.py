"""End-to-end training: corpus in, persisted bundle + comparison report out.

The pipeline order is fixed: balance by design, stratified train/test split,
trim the training side, fit the preprocess pipeline, grid-search every
learner, refit winners, fit the stack, calibrate conformal scores on held-out
data, and assemble the bundle.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from . import learners
from .bundle import ModelBundle
from .conformal import calibrate
from .data import (
    DEFAULT_ALLOWED_SCORES,
    Dataset,
    balance_by_design,
    parse_csv,
    train_test_split,
)
from .evaluation import build_comparison_report, evaluate_kinds
from .grids import DEFAULT_GRIDS
from .preprocess import FEATURE_COLUMNS, TrimConfig, fit_pipeline, transform
from .rng import child_seed
from .stacking import DEFAULT_BASE_KINDS, StackConfig, fit_stacked
from .training_report import design_sample_stats


@dataclass(frozen=True)
class TrainConfig:
    seed: int = 42
    test_fraction: float = 0.2
    k: int = 5
    grids: dict = field(default_factory=lambda: dict(DEFAULT_GRIDS))
    trim: TrimConfig = field(default_factory=TrimConfig)
    include_lasso: bool = False
    calibration_fraction: float | None = None  # None -> calibrate on the test split
    allowed_scores: frozenset = DEFAULT_ALLOWED_SCORES
    stack_base_kinds: tuple = DEFAULT_BASE_KINDS
    permutation_repeats: int = 5

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "test_fraction": self.test_fraction,
            "k": self.k,
            "grids": self.grids,
            "trim": self.trim.to_dict(),
            "include_lasso": self.include_lasso,
            "calibration_fraction": self.calibration_fraction,
            "allowed_scores": sorted(self.allowed_scores),
            "stack_base_kinds": list(self.stack_base_kinds),
            "permutation_repeats": self.permutation_repeats,
        }


@dataclass(frozen=True)
class TrainOutcome:
    bundle: ModelBundle | None  # None when some learner failed
    results: list
    train: Dataset  # trimmed training split the models saw
    test: Dataset
    design_stats: dict
    y_test_log: np.ndarray


def corpus_fingerprint(csv_bytes: bytes) -> str:
    return hashlib.sha256(csv_bytes).hexdigest()[:16]


def ensemble_log_predictor(models: dict):
    """Row-wise log of the nine-model participants-scale mean."""
    nine = [models[k] for k in learners.NINE_KINDS]

    def predict_log(X):
        raw = np.mean([np.exp(m.predict(X)) for m in nine], axis=0)
        return np.log(raw)

    return predict_log


def train_bundle(csv_bytes: bytes, cfg: TrainConfig) -> TrainOutcome:
    dataset = parse_csv(csv_bytes, cfg.allowed_scores)
    fingerprint = corpus_fingerprint(csv_bytes)
    balanced = balance_by_design(dataset, cfg.seed)
    train, test = train_test_split(balanced, cfg.test_fraction, cfg.seed)
    if cfg.calibration_fraction:
        train, calibration = train_test_split(
            train, cfg.calibration_fraction, child_seed(cfg.seed, "calibration_split")
        )
        protocol = "three_way_split"
    else:
        calibration = test
        protocol = "test_split"

    pipeline, trimmed_train = fit_pipeline(train, cfg.trim)
    X_train, y_train = transform(pipeline, trimmed_train.records)
    X_test, y_test = transform(pipeline, test.records)

    kinds = list(learners.NINE_KINDS) + (["lasso"] if cfg.include_lasso else [])
    grids = dict(DEFAULT_GRIDS)
    grids.update(cfg.grids)
    results = evaluate_kinds(X_train, y_train, X_test, y_test, kinds, grids,
                             cfg.seed, cfg.k)
    report = build_comparison_report(results, fingerprint, cfg.seed, cfg.k)
    stats = design_sample_stats(train, trimmed_train)

    by_kind = {r.kind: r for r in results}
    failed = [r.kind for r in results if r.error is not None]
    if failed:
        return TrainOutcome(None, results, trimmed_train, test, stats, y_test)

    models = {r.kind: r.model for r in results}
    base_params = {
        kind: by_kind[kind].best_params
        for kind in cfg.stack_base_kinds
        if kind in by_kind
    }
    stacked = fit_stacked(
        X_train, y_train,
        StackConfig(base_kinds=cfg.stack_base_kinds, base_params=base_params,
                    fold_count=cfg.k, seed=child_seed(cfg.seed, "stack")),
    )

    X_cal, y_cal = transform(pipeline, calibration.records)
    conformal = calibrate(ensemble_log_predictor(models), X_cal, y_cal)

    importances = _importance_maps(models, by_kind, X_test, y_test, cfg)
    metadata = {
        "seed": cfg.seed,
        "dataset_fingerprint": fingerprint,
        "grids": grids,
        "test_fraction": cfg.test_fraction,
        "k": cfg.k,
        "allowed_scores": sorted(cfg.allowed_scores),
        "record_counts": {
            "input": len(dataset),
            "balanced": len(balanced),
            "train": len(trimmed_train),
            "test": len(test),
            "calibration": len(calibration),
        },
    }
    bundle = ModelBundle(pipeline, models, conformal, protocol, report,
                         importances, metadata, stacked)
    return TrainOutcome(bundle, results, trimmed_train, test, stats, y_test)


def _importance_maps(models, by_kind, X_test, y_test, cfg: TrainConfig) -> dict:
    from .evaluation import impurity_importance, permutation_importance

    impurity = impurity_importance(models["random_forest"])
    # permutation importance targets the best kind by held-out log MAE
    best_kind = min(
        (k for k in learners.NINE_KINDS),
        key=lambda k: by_kind[k].metrics["test_mae_log"],
    )
    perm = permutation_importance(
        models[best_kind], X_test, y_test,
        repeats=cfg.permutation_repeats,
        seed=child_seed(cfg.seed, "perm_importance"),
    )
    perm = np.maximum(perm, 0.0)
    total = float(perm.sum())
    perm = perm / total if total > 0 else perm
    return {
        "impurity": {name: float(v) for name, v in zip(FEATURE_COLUMNS, impurity)},
        "permutation": {name: float(v) for name, v in zip(FEATURE_COLUMNS, perm)},
        "permutation_model": best_kind,
    }
