"""Split-conformal intervals around a participants-count recommendation.

Nonconformity is the absolute log-space residual on a calibration set that
the point model never trained on. For a request at miscoverage alpha, the
interval half-width q is the ceil((n+1)(1-alpha))-th smallest score (infinite
when that rank exceeds n); the log interval is exponentiated and rounded
outward to integer participant counts, with the lower end floored at 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class ConformalCalibration:
    """Sorted nonconformity scores plus a per-alpha quantile cache."""

    scores: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        scores = np.sort(np.asarray(self.scores, dtype=np.float64))
        if scores.size < 1:
            raise ConfigError("calibration requires at least one score")
        if not np.isfinite(scores).all() or (scores < 0).any():
            raise ConfigError("nonconformity scores must be finite and non-negative")
        object.__setattr__(self, "scores", scores)

    @property
    def n_cal(self) -> int:
        return int(self.scores.size)

    def quantile(self, alpha: float) -> float:
        """The conformal half-width for miscoverage alpha (may be +inf)."""
        if not 0.0 < alpha < 1.0:
            raise ConfigError(f"alpha must be in (0, 1), got {alpha}")
        cached = self._cache.get(alpha)
        if cached is not None:
            return cached
        rank = math.ceil((self.n_cal + 1) * (1.0 - alpha))
        q = float("inf") if rank > self.n_cal else float(self.scores[rank - 1])
        self._cache[alpha] = q
        return q

    def to_dict(self) -> dict:
        return {"scores": self.scores.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "ConformalCalibration":
        return cls(np.asarray(d["scores"], dtype=np.float64))


def calibrate(predict_log, X_cal, y_cal_log) -> ConformalCalibration:
    """Score a point predictor on held-out data.

    ``predict_log`` maps a feature matrix to log-space predictions; the
    caller asserts the calibration rows were not used to train it.
    """
    X_cal = np.asarray(X_cal, dtype=np.float64)
    y_cal_log = np.asarray(y_cal_log, dtype=np.float64)
    if len(X_cal) == 0:
        raise ConfigError("calibration set is empty")
    residuals = np.abs(y_cal_log - np.asarray(predict_log(X_cal), dtype=np.float64))
    return ConformalCalibration(residuals)


def _snap(value: float) -> float:
    # exp/log round-trips leave integer bounds a few ulps off; snap before
    # the outward rounding so zero-width intervals collapse cleanly
    nearest = round(value)
    if abs(value - nearest) <= 1e-9 * max(1.0, abs(value)):
        return float(nearest)
    return value


def predict_interval(cal: ConformalCalibration, pred_log: float, alpha: float):
    """(lower, upper) participant counts around a log-space point prediction.

    Ends are rounded outward (floor/ceil), the lower end is floored at 1, and
    the upper end is +inf when the calibration set is too small for alpha.
    """
    q = cal.quantile(alpha)
    if math.isinf(q):
        return (1, float("inf"))
    lower = max(1, math.floor(_snap(math.exp(pred_log - q))))
    upper = math.ceil(_snap(math.exp(pred_log + q)))
    return (lower, upper)
