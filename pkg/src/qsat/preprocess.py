"""Fitted preprocessing: outlier trimming, log target, encoding, scaling.

The transform chain is fixed: trim (training only) -> one-hot design encode ->
standardize all feature columns -> natural-log the target. A fitted pipeline
is immutable and replays bit-identically at inference, where trimming and
refitting never happen.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .data import DESIGN_ORDER, METRIC_KEYS, Dataset, DesignType, Provenance
from .errors import ConfigError, NotFittedError

FEATURE_COLUMNS = tuple(d.value for d in DESIGN_ORDER) + METRIC_KEYS


class TrimMethod(enum.Enum):
    PERCENTILE_95 = "percentile_95"
    STD_RULE = "std_rule"


@dataclass(frozen=True)
class TrimConfig:
    """Outlier-removal rule applied to training sample sizes.

    percentile_95 removes records strictly above the group's 95th percentile
    (linear interpolation); std_rule removes records farther than
    ``std_multiplier`` sample standard deviations from the group mean.
    """

    method: TrimMethod = TrimMethod.PERCENTILE_95
    group_by_design: bool = True
    std_multiplier: float = 3.0

    def __post_init__(self):
        if self.std_multiplier <= 0:
            raise ConfigError("std_multiplier must be > 0")

    def to_dict(self) -> dict:
        return {
            "method": self.method.value,
            "group_by_design": self.group_by_design,
            "std_multiplier": self.std_multiplier,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrimConfig":
        return cls(TrimMethod(d["method"]), bool(d["group_by_design"]),
                   float(d["std_multiplier"]))


def trim_outliers(dataset: Dataset, cfg: TrimConfig) -> Dataset:
    """Remove extreme-sample-size records per the configured rule."""
    if len(dataset) == 0:
        raise ConfigError("cannot trim an empty dataset")
    if cfg.group_by_design:
        groups = {}
        for i, rec in enumerate(dataset.records):
            groups.setdefault(rec.design, []).append(i)
        for d, idx in groups.items():
            if len(idx) < 2:
                raise ConfigError(f"design {d.value!r} has fewer than 2 records to trim")
        keep = set()
        for idx in groups.values():
            y = np.array([dataset.records[i].sample_size for i in idx], dtype=np.float64)
            keep.update(i for i, ok in zip(idx, _keep_mask(y, cfg)) if ok)
        records = tuple(rec for i, rec in enumerate(dataset.records) if i in keep)
    else:
        y = dataset.sample_sizes()
        mask = _keep_mask(y, cfg)
        records = tuple(rec for rec, ok in zip(dataset.records, mask) if ok)
    return Dataset(records, Provenance.DERIVED)


def _keep_mask(y: np.ndarray, cfg: TrimConfig) -> np.ndarray:
    if cfg.method is TrimMethod.PERCENTILE_95:
        cutoff = np.percentile(y, 95)
        return y <= cutoff
    mean = float(np.mean(y))
    std = float(np.std(y, ddof=1)) if len(y) > 1 else 0.0
    return np.abs(y - mean) <= cfg.std_multiplier * std


def log_target(y: int) -> float:
    """Natural log of a participant count (>= 1)."""
    if y < 1:
        raise ConfigError(f"sample_size must be >= 1, got {y}")
    return math.log(y)


def inverse_log_target(z: float) -> float:
    return math.exp(z)


def encode_design(design: DesignType) -> np.ndarray:
    """One-hot vector over the five designs in alphabetical label order."""
    vec = np.zeros(len(DESIGN_ORDER))
    vec[DESIGN_ORDER.index(design)] = 1.0
    return vec


@dataclass(frozen=True)
class ScalerParams:
    """Per-column mean and population standard deviation, fitted on training
    data only. Zero-std (constant) columns standardize to all-zeros."""

    mean: np.ndarray
    std: np.ndarray

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "ScalerParams":
        return cls(np.asarray(d["mean"], dtype=np.float64),
                   np.asarray(d["std"], dtype=np.float64))


def fit_scaler(X: np.ndarray) -> ScalerParams:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ConfigError("scaler fit requires a 2-D matrix with n >= 2 rows")
    return ScalerParams(np.mean(X, axis=0), np.std(X, axis=0))


def apply_scaler(X: np.ndarray, params: ScalerParams) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    denom = np.where(params.std == 0.0, 1.0, params.std)
    return (X - params.mean) / denom


def _raw_features(records) -> np.ndarray:
    rows = np.empty((len(records), len(FEATURE_COLUMNS)))
    for i, rec in enumerate(records):
        rows[i, : len(DESIGN_ORDER)] = encode_design(rec.design)
        rows[i, len(DESIGN_ORDER):] = rec.metric_values()
    return rows


@dataclass(frozen=True)
class PreprocessPipeline:
    """Fitted transform chain shared by training and inference.

    Feature layout: five one-hot design columns (alphabetical) followed by
    the ten metric columns in CSV order, all standardized.
    """

    trim: TrimConfig = field(default_factory=TrimConfig)
    scaler: ScalerParams | None = None

    @property
    def fitted(self) -> bool:
        return self.scaler is not None

    def to_dict(self) -> dict:
        if not self.fitted:
            raise NotFittedError("cannot serialize an unfitted pipeline")
        return {
            "trim": self.trim.to_dict(),
            "target_transform": "log_natural",
            "design_encoding": "one_hot",
            "design_order": [d.value for d in DESIGN_ORDER],
            "feature_columns": list(FEATURE_COLUMNS),
            "scaler": self.scaler.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PreprocessPipeline":
        return cls(TrimConfig.from_dict(d["trim"]), ScalerParams.from_dict(d["scaler"]))


def fit_pipeline(train: Dataset, trim_cfg: TrimConfig | None = None):
    """Fit the pipeline on training data.

    Returns (pipeline, trimmed_train): the trimmed dataset is what models
    should be fit on, so callers see exactly what the scaler saw.
    """
    if len(train) == 0:
        raise ConfigError("cannot fit a pipeline on an empty dataset")
    cfg = trim_cfg if trim_cfg is not None else TrimConfig()
    trimmed = trim_outliers(train, cfg)
    scaler = fit_scaler(_raw_features(trimmed.records))
    return PreprocessPipeline(cfg, scaler), trimmed


def transform(pipeline: PreprocessPipeline, records, with_target: bool = True):
    """Records -> (X, y_log). Inference callers pass with_target=False and
    get (X, None). Never trims, never refits."""
    if not pipeline.fitted:
        raise NotFittedError("transform called before fit")
    X = apply_scaler(_raw_features(records), pipeline.scaler)
    if not with_target:
        return X, None
    y = np.array([log_target(rec.sample_size) for rec in records])
    return X, y


def transform_features(pipeline: PreprocessPipeline, design: DesignType,
                       scores: dict) -> np.ndarray:
    """One inference row (no target) -> 1 x 15 standardized matrix."""
    if not pipeline.fitted:
        raise NotFittedError("transform called before fit")
    row = np.empty((1, len(FEATURE_COLUMNS)))
    row[0, : len(DESIGN_ORDER)] = encode_design(design)
    row[0, len(DESIGN_ORDER):] = [scores[k] for k in METRIC_KEYS]
    return apply_scaler(row, pipeline.scaler)
