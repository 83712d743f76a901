"""Study records, corpus ingestion, balancing, splitting, and synthesis.

A corpus is a list of scored qualitative studies: one research design, ten
ordinal methodology scores, and the observed participant count (the target).
CSV is the only ingestion format; the synthetic generator stands in for real
corpora and is calibrated to published per-design sample-size moments.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigError,
    CsvFormatError,
    InvalidScoreError,
    MissingDesignError,
    UnknownDesignError,
)
from .rng import child_rng


class DesignType(enum.Enum):
    """The five supported qualitative research designs."""

    CASE_STUDY = "case_study"
    GROUNDED_THEORY = "grounded_theory"
    PHENOMENOLOGY = "phenomenology"
    NARRATIVE = "narrative"
    ETHNOGRAPHIC = "ethnographic"

    @classmethod
    def from_label(cls, label: str) -> "DesignType":
        try:
            return _LABELS[label]
        except KeyError:
            raise UnknownDesignError(f"unknown design label {label!r}") from None


_LABELS = {d.value: d for d in DesignType}

# One-hot column order: alphabetical by label.
DESIGN_ORDER = tuple(sorted(DesignType, key=lambda d: d.value))

# Feature columns in wire order (matches the CSV schema).
METRIC_KEYS = (
    "research_scope",
    "researcher_competence",
    "information_power",
    "interview_count",
    "interview_duration",
    "observation_duration",
    "homogeneity",
    "participant_originality",
    "data_variety",
    "data_quality",
)

CSV_HEADER = ("design",) + METRIC_KEYS + ("sample_size",)

# Ordinal rubric points. The default allowed set is the union of the two
# three-level rubric variants (10/15/20 and 15/20/25) seen in real corpora.
DEFAULT_ALLOWED_SCORES = frozenset({10, 15, 20, 25})


def validate_scores(scores: dict, allowed_scores=DEFAULT_ALLOWED_SCORES) -> None:
    """Raise InvalidScoreError unless exactly the ten metric keys are present
    with integer values from the allowed ordinal set."""
    extra = set(scores) - set(METRIC_KEYS)
    if extra:
        raise InvalidScoreError(f"unexpected metric keys {sorted(extra)}")
    for key in METRIC_KEYS:
        if key not in scores:
            raise InvalidScoreError(f"missing metric {key!r}")
        value = scores[key]
        if not isinstance(value, int) or isinstance(value, bool):
            raise InvalidScoreError(f"score must be an integer, got {value!r}", column=key)
        if value not in allowed_scores:
            raise InvalidScoreError(
                f"score {value} not in allowed set {sorted(allowed_scores)}", column=key
            )


@dataclass(frozen=True)
class StudyRecord:
    """One scored study: design, ten ordinal metric scores, observed sample size.

    Construct through :func:`make_record` (or ``parse_csv``) to get score-set
    validation; the dataclass itself checks structure only.
    """

    design: DesignType
    scores: dict
    sample_size: int

    def __post_init__(self):
        if not isinstance(self.design, DesignType):
            raise CsvFormatError(f"design must be a DesignType, got {self.design!r}")
        extra = set(self.scores) - set(METRIC_KEYS)
        missing = set(METRIC_KEYS) - set(self.scores)
        if extra or missing:
            raise InvalidScoreError(
                f"scores must have exactly the ten metric keys "
                f"(missing {sorted(missing)}, extra {sorted(extra)})"
            )
        if not isinstance(self.sample_size, int) or self.sample_size < 1:
            raise CsvFormatError(
                f"sample_size must be a positive integer, got {self.sample_size!r}"
            )

    def metric_values(self) -> tuple:
        return tuple(self.scores[k] for k in METRIC_KEYS)


def make_record(design, scores, sample_size,
                allowed_scores=DEFAULT_ALLOWED_SCORES) -> StudyRecord:
    """Validating StudyRecord constructor (score-set membership included)."""
    validate_scores(scores, allowed_scores)
    return StudyRecord(design, dict(scores), sample_size)


class Provenance(enum.Enum):
    INGESTED = "ingested"
    SYNTHETIC = "synthetic"
    DERIVED = "derived"


@dataclass(frozen=True)
class Dataset:
    """An ordered, immutable collection of study records."""

    records: tuple
    provenance: Provenance = Provenance.DERIVED

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def design_counts(self) -> dict:
        counts = {d: 0 for d in DesignType}
        for rec in self.records:
            counts[rec.design] += 1
        return counts

    def sample_sizes(self) -> np.ndarray:
        return np.array([r.sample_size for r in self.records], dtype=np.float64)


def parse_csv(text, allowed_scores=DEFAULT_ALLOWED_SCORES) -> Dataset:
    """Parse a corpus CSV (exact header, LF, UTF-8) into a Dataset.

    Errors carry the offending 1-based row number (header is row 1) and,
    where applicable, the column name.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise CsvFormatError("empty input: missing header row", row=1) from None
    if tuple(header) != CSV_HEADER:
        missing = set(CSV_HEADER) - set(header)
        unknown = set(header) - set(CSV_HEADER)
        detail = []
        if missing:
            detail.append(f"missing columns {sorted(missing)}")
        if unknown:
            detail.append(f"unknown columns {sorted(unknown)}")
        if not detail:
            detail.append("columns out of order")
        raise CsvFormatError("bad header: " + "; ".join(detail), row=1)

    records = []
    for row_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(CSV_HEADER):
            raise CsvFormatError(
                f"expected {len(CSV_HEADER)} fields, found {len(row)}", row=row_no
            )
        try:
            design = DesignType.from_label(row[0])
        except UnknownDesignError:
            raise UnknownDesignError(f"unknown design label {row[0]!r}", row=row_no,
                                     column="design") from None
        scores = {}
        for key, raw in zip(METRIC_KEYS, row[1:-1]):
            try:
                value = int(raw)
            except ValueError:
                raise InvalidScoreError(f"non-integer score {raw!r}", row=row_no,
                                        column=key) from None
            if value not in allowed_scores:
                raise InvalidScoreError(
                    f"score {value} not in allowed set {sorted(allowed_scores)}",
                    row=row_no, column=key,
                )
            scores[key] = value
        try:
            sample_size = int(row[-1])
        except ValueError:
            raise CsvFormatError(f"non-integer sample_size {row[-1]!r}", row=row_no,
                                 column="sample_size") from None
        if sample_size < 1:
            raise CsvFormatError(f"sample_size must be >= 1, got {sample_size}",
                                 row=row_no, column="sample_size")
        records.append(StudyRecord(design, scores, sample_size))
    return Dataset(tuple(records), Provenance.INGESTED)


def serialize_csv(dataset: Dataset) -> str:
    """Inverse of parse_csv: exact schema, comma-separated, LF line endings."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rec in dataset.records:
        writer.writerow(
            [rec.design.value, *[rec.scores[k] for k in METRIC_KEYS], rec.sample_size]
        )
    return out.getvalue()


def balance_by_design(dataset: Dataset, seed: int) -> Dataset:
    """Downsample each design (without replacement, seeded) to the minimum
    per-design count. Original within-design record order is preserved."""
    counts = dataset.design_counts()
    missing = [d for d in DESIGN_ORDER if counts[d] == 0]
    if missing:
        raise MissingDesignError(
            f"designs absent from dataset: {[d.value for d in missing]}"
        )
    floor = min(counts.values())
    keep = set()
    for d in DESIGN_ORDER:
        indices = [i for i, rec in enumerate(dataset.records) if rec.design is d]
        rng = child_rng(seed, "balance", d.value)
        chosen = rng.choice(len(indices), size=floor, replace=False)
        keep.update(indices[i] for i in chosen)
    records = tuple(rec for i, rec in enumerate(dataset.records) if i in keep)
    return Dataset(records, Provenance.DERIVED)


def train_test_split(dataset: Dataset, test_fraction: float, seed: int):
    """Deterministic stratified-by-design split into (train, test).

    Per design, round-half-up(count * fraction) records go to the test side;
    both sides keep the input record order.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ConfigError(f"test_fraction must be in (0, 1), got {test_fraction}")
    test_idx = set()
    for d in DESIGN_ORDER:
        indices = [i for i, rec in enumerate(dataset.records) if rec.design is d]
        n_d = len(indices)
        if n_d == 0:
            continue
        if n_d < 2:
            raise ConfigError(f"design {d.value!r} has {n_d} record(s); need >= 2 to split")
        n_test = math.floor(n_d * test_fraction + 0.5)
        if n_test < 1 or n_test >= n_d:
            raise ConfigError(
                f"design {d.value!r}: fraction {test_fraction} leaves an empty side "
                f"({n_test} of {n_d} in test)"
            )
        rng = child_rng(seed, "split", d.value)
        chosen = rng.choice(n_d, size=n_test, replace=False)
        test_idx.update(indices[i] for i in chosen)
    train = tuple(rec for i, rec in enumerate(dataset.records) if i not in test_idx)
    test = tuple(rec for i, rec in enumerate(dataset.records) if i in test_idx)
    return (Dataset(train, Provenance.DERIVED), Dataset(test, Provenance.DERIVED))


# Lognormal parameters matched to published per-design sample-size means and
# medians (mean = exp(mu + sigma^2/2), median = exp(mu)).
_DESIGN_TARGETS = {
    DesignType.ETHNOGRAPHIC: (32.4, 20.0),
    DesignType.GROUNDED_THEORY: (26.7, 25.0),
    DesignType.CASE_STUDY: (27.1, 10.0),
    DesignType.PHENOMENOLOGY: (18.0, 13.5),
    DesignType.NARRATIVE: (14.6, 12.0),
}


def _lognormal_params(mean: float, median: float) -> tuple:
    mu = math.log(median)
    sigma = math.sqrt(2.0 * (math.log(mean) - mu))
    return (mu, sigma)


DEFAULT_LOGNORMAL_PARAMS = {
    d: _lognormal_params(mean, median) for d, (mean, median) in _DESIGN_TARGETS.items()
}

# Levels used when emitting generated scores (one of the two rubric variants).
GENERATOR_SCORE_LEVELS = (10, 15, 20)

# Standard-normal tercile boundaries for the low/medium/high cut.
_TERCILES = (-0.43072729929545744, 0.43072729929545744)

# Relative signal weight per metric: information power is the cleanest
# predictor of sample size in the rubric, the rest carry equal, noisier
# signal. A metric's effective blend is signal_strength * weight.
DEFAULT_SIGNAL_WEIGHTS = {
    key: (1.0 if key == "information_power" else 0.8) for key in METRIC_KEYS
}


@dataclass(frozen=True)
class GeneratorConfig:
    """Configuration of the calibrated synthetic corpus generator.

    ``signal_strength`` in [0, 1] blends the (standardized, per-design)
    log sample size into each metric's latent level; ``flip_probability``
    then replaces a score with a random level. All ten rubric metrics
    score-increase with sample size by construction.
    """

    per_design_count: int = 150
    signal_strength: float = 0.8
    flip_probability: float = 0.1
    seed: int = 0
    lognormal_params: dict = field(
        default_factory=lambda: dict(DEFAULT_LOGNORMAL_PARAMS)
    )
    score_levels: tuple = GENERATOR_SCORE_LEVELS
    signal_weights: dict = field(
        default_factory=lambda: dict(DEFAULT_SIGNAL_WEIGHTS)
    )

    def __post_init__(self):
        if self.per_design_count < 1:
            raise ConfigError("per_design_count must be >= 1")
        if not 0.0 <= self.signal_strength <= 1.0:
            raise ConfigError("signal_strength must be in [0, 1]")
        if not 0.0 <= self.flip_probability < 0.5:
            raise ConfigError("flip_probability must be in [0, 0.5)")
        for d in DesignType:
            if d not in self.lognormal_params:
                raise ConfigError(f"missing lognormal params for design {d.value!r}")
            _, sigma = self.lognormal_params[d]
            if sigma <= 0:
                raise ConfigError(f"sigma must be > 0 for design {d.value!r}")
        if len(self.score_levels) < 2 or list(self.score_levels) != sorted(set(self.score_levels)):
            raise ConfigError("score_levels must be >= 2 strictly increasing values")
        for key in METRIC_KEYS:
            weight = self.signal_weights.get(key)
            if weight is None or not 0.0 <= weight <= 1.0:
                raise ConfigError(f"signal weight for {key!r} must be in [0, 1]")

    def to_dict(self) -> dict:
        return {
            "per_design_count": self.per_design_count,
            "signal_strength": self.signal_strength,
            "flip_probability": self.flip_probability,
            "seed": self.seed,
            "lognormal_params": {
                d.value: list(self.lognormal_params[d]) for d in DESIGN_ORDER
            },
            "score_levels": list(self.score_levels),
            "signal_weights": {k: self.signal_weights[k] for k in METRIC_KEYS},
        }


def synthesize_dataset(cfg: GeneratorConfig) -> Dataset:
    """Generate a calibrated corpus.

    Per design d: sample_size = max(1, round(exp(Normal(mu_d, sigma_d)))).
    Each metric's latent level blends the standardized observed log size
    with independent noise, is cut at standard-normal terciles into
    low/medium/high, and is then flipped to a random level with the
    configured probability. Fully deterministic for a fixed seed.
    """
    levels = np.array(cfg.score_levels)
    n_levels = len(levels)
    cuts = np.array(_TERCILES) if n_levels == 3 else _normal_quantile_cuts(n_levels)
    blend = cfg.signal_strength * np.array([cfg.signal_weights[k] for k in METRIC_KEYS])
    denom = np.sqrt(blend**2 + (1.0 - blend) ** 2)
    denom[(blend == 0.0) | (blend == 1.0)] = 1.0

    records = []
    for d in DESIGN_ORDER:
        mu, sigma = cfg.lognormal_params[d]
        rng = child_rng(cfg.seed, "synth", d.value)
        latent = rng.normal(mu, sigma, size=cfg.per_design_count)
        sizes = np.maximum(1, np.rint(np.exp(latent)).astype(np.int64))
        z_obs = (np.log(sizes) - mu) / sigma
        noise = rng.normal(0.0, 1.0, size=(cfg.per_design_count, len(METRIC_KEYS)))
        v = (blend[None, :] * z_obs[:, None] + (1.0 - blend[None, :]) * noise) / denom[None, :]
        level_idx = np.searchsorted(cuts, v, side="right")
        flips = rng.random(size=v.shape) < cfg.flip_probability
        random_levels = rng.integers(0, n_levels, size=v.shape)
        level_idx = np.where(flips, random_levels, level_idx)
        score_matrix = levels[level_idx]
        for i in range(cfg.per_design_count):
            scores = {k: int(score_matrix[i, j]) for j, k in enumerate(METRIC_KEYS)}
            records.append(StudyRecord(d, scores, int(sizes[i])))
    return Dataset(tuple(records), Provenance.SYNTHETIC)


def _normal_quantile_cuts(n_levels: int) -> np.ndarray:
    # Equal-probability N(0,1) cuts; only used for non-default level counts.
    from statistics import NormalDist

    qs = [(i + 1) / n_levels for i in range(n_levels - 1)]
    return np.array([NormalDist().inv_cdf(q) for q in qs])


def descriptive_stats(dataset: Dataset) -> dict:
    """Per-column summary for the ten metrics and sample_size.

    std is the sample (n-1) convention; skewness and kurtosis are the
    standardized third/fourth central moments (kurtosis is excess), reported
    as 0 for constant columns; quartiles use linear interpolation.
    """
    if len(dataset) < 2:
        raise ConfigError("descriptive statistics require at least 2 records")
    columns = {k: np.array([r.scores[k] for r in dataset], dtype=np.float64)
               for k in METRIC_KEYS}
    columns["sample_size"] = dataset.sample_sizes()
    return {name: column_stats(col) for name, col in columns.items()}


def column_stats(col: np.ndarray) -> dict:
    mean = float(np.mean(col))
    std = float(np.std(col, ddof=1))
    centered = col - mean
    m2 = float(np.mean(centered**2))
    if m2 == 0.0:
        skew = 0.0
        kurt = 0.0
    else:
        skew = float(np.mean(centered**3) / m2**1.5)
        kurt = float(np.mean(centered**4) / m2**2 - 3.0)
    q1, med, q3 = (float(v) for v in np.percentile(col, [25, 50, 75]))
    return {
        "mean": mean,
        "std": std,
        "min": float(np.min(col)),
        "q1": q1,
        "median": med,
        "q3": q3,
        "max": float(np.max(col)),
        "skewness": skew,
        "kurtosis": kurt,
    }
