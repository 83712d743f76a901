"""Corpus parsing, balancing, splitting, synthesis, descriptive stats."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsat.data import (
    CSV_HEADER,
    DEFAULT_LOGNORMAL_PARAMS,
    DESIGN_ORDER,
    METRIC_KEYS,
    Dataset,
    DesignType,
    GeneratorConfig,
    Provenance,
    StudyRecord,
    balance_by_design,
    descriptive_stats,
    parse_csv,
    serialize_csv,
    synthesize_dataset,
    train_test_split,
)
from qsat.errors import (
    ConfigError,
    CsvFormatError,
    InvalidScoreError,
    MissingDesignError,
    UnknownDesignError,
)

from .oracles import moments_reference, percentile_linear


def _row(design="phenomenology", score=15, n=12):
    return ",".join([design] + [str(score)] * 10 + [str(n)])


HEADER = ",".join(CSV_HEADER)


def _record(design=DesignType.PHENOMENOLOGY, score=15, n=12):
    return StudyRecord(design, {k: score for k in METRIC_KEYS}, n)


class TestParseCsv:
    def test_minimal_valid_row(self):
        ds = parse_csv(f"{HEADER}\n{_row()}\n")
        assert len(ds) == 1
        rec = ds.records[0]
        assert rec.design is DesignType.PHENOMENOLOGY
        assert rec.sample_size == 12
        assert all(rec.scores[k] == 15 for k in METRIC_KEYS)
        assert ds.provenance is Provenance.INGESTED

    def test_unknown_design_reports_row(self):
        with pytest.raises(UnknownDesignError) as err:
            parse_csv(f"{HEADER}\n{_row(design='oral_history')}\n")
        assert err.value.row == 2

    def test_score_outside_allowed_set_reports_row_and_column(self):
        bad = ",".join(["phenomenology", "17"] + ["15"] * 9 + ["12"])
        with pytest.raises(InvalidScoreError) as err:
            parse_csv(f"{HEADER}\n{bad}\n")
        assert err.value.row == 2
        assert err.value.column == "research_scope"

    def test_custom_allowed_scores(self):
        text = f"{HEADER}\n{_row(score=15)}\n"
        parse_csv(text, allowed_scores=frozenset({15}))
        with pytest.raises(InvalidScoreError):
            parse_csv(text, allowed_scores=frozenset({10, 20}))

    def test_non_integer_score(self):
        bad = ",".join(["case_study", "15.5"] + ["15"] * 9 + ["3"])
        with pytest.raises(InvalidScoreError) as err:
            parse_csv(f"{HEADER}\n{bad}\n")
        assert err.value.column == "research_scope"

    def test_sample_size_below_one(self):
        with pytest.raises(CsvFormatError) as err:
            parse_csv(f"{HEADER}\n{_row(n=0)}\n")
        assert err.value.column == "sample_size"

    def test_missing_column_header(self):
        broken = HEADER.replace("data_quality,", "")
        with pytest.raises(CsvFormatError) as err:
            parse_csv(f"{broken}\n")
        assert "data_quality" in str(err.value)

    def test_roundtrip_identity(self, small_corpus):
        text = serialize_csv(small_corpus)
        again = parse_csv(text)
        assert list(again.records) == list(small_corpus.records)
        assert serialize_csv(again) == text


class TestRecordValidation:
    def test_requires_all_ten_keys(self):
        scores = {k: 15 for k in METRIC_KEYS[:-1]}
        with pytest.raises(InvalidScoreError):
            StudyRecord(DesignType.CASE_STUDY, scores, 5)

    def test_rejects_extra_key(self):
        scores = {k: 15 for k in METRIC_KEYS}
        scores["bonus"] = 15
        with pytest.raises(InvalidScoreError):
            StudyRecord(DesignType.CASE_STUDY, scores, 5)

    def test_design_enum_is_closed(self):
        assert len(DesignType) == 5
        with pytest.raises(UnknownDesignError):
            DesignType.from_label("mixed_methods")


class TestBalance:
    def test_downsamples_to_minimum(self):
        counts = {"case_study": 21, "grounded_theory": 15, "phenomenology": 15,
                  "narrative": 12, "ethnographic": 8}
        records = []
        for label, count in counts.items():
            records.extend(_record(DesignType.from_label(label), n=i + 1)
                           for i in range(count))
        balanced = balance_by_design(Dataset(tuple(records)), seed=0)
        assert len(balanced) == 8 * 5
        assert all(c == 8 for c in balanced.design_counts().values())

    def test_published_raw_counts_balance_to_400(self):
        counts = {"case_study": 219, "grounded_theory": 151, "phenomenology": 151,
                  "narrative": 120, "ethnographic": 80}
        records = []
        for label, count in counts.items():
            records.extend(_record(DesignType.from_label(label), n=i + 1)
                           for i in range(count))
        balanced = balance_by_design(Dataset(tuple(records)), seed=42)
        assert len(balanced) == 400
        assert all(c == 80 for c in balanced.design_counts().values())

    def test_already_balanced_is_fixed_point(self):
        records = [_record(d, n=i + 1) for d in DesignType for i in range(10)]
        ds = Dataset(tuple(records))
        balanced = balance_by_design(ds, seed=3)
        assert list(balanced.records) == list(ds.records)

    def test_deterministic_for_seed(self):
        records = []
        for i, d in enumerate(DesignType):
            for j in range(3 if i == 0 else 2):
                records.append(_record(d, n=j + 1))
        ds = Dataset(tuple(records))
        a = balance_by_design(ds, seed=7)
        b = balance_by_design(ds, seed=7)
        assert list(a.records) == list(b.records)
        assert all(c == 2 for c in a.design_counts().values())

    def test_missing_design_rejected(self):
        records = [_record(DesignType.CASE_STUDY, n=2)] * 3
        with pytest.raises(MissingDesignError):
            balance_by_design(Dataset(tuple(records)), seed=0)

    def test_preserves_within_design_order(self):
        records = [_record(DesignType.CASE_STUDY, n=i + 1) for i in range(9)]
        for d in list(DesignType)[1:]:
            records.extend(_record(d, n=j + 1) for j in range(4))
        balanced = balance_by_design(Dataset(tuple(records)), seed=5)
        kept = [r.sample_size for r in balanced if r.design is DesignType.CASE_STUDY]
        assert kept == sorted(kept)


class TestTrainTestSplit:
    def test_stratified_counts(self):
        records = [_record(d, n=i + 1) for d in DesignType for i in range(20)]
        train, test = train_test_split(Dataset(tuple(records)), 0.2, seed=1)
        assert len(train) == 80 and len(test) == 20
        assert all(c == 4 for c in test.design_counts().values())

    def test_deterministic(self):
        records = [_record(d, n=i + 1) for d in DesignType for i in range(20)]
        ds = Dataset(tuple(records))
        a = train_test_split(ds, 0.2, seed=9)
        b = train_test_split(ds, 0.2, seed=9)
        assert list(a[0].records) == list(b[0].records)
        assert list(a[1].records) == list(b[1].records)

    def test_partition_small(self):
        records = [_record(d, n=i + 1) for d in DesignType for i in range(2)]
        ds = Dataset(tuple(records))
        train, test = train_test_split(ds, 0.5, seed=2)
        assert len(train) == 5 and len(test) == 5
        merged = sorted(map(id, train.records)) + sorted(map(id, test.records))
        assert sorted(merged) == sorted(map(id, ds.records))

    @given(seed=st.integers(0, 10_000),
           fraction=st.floats(0.2, 0.8),
           per_design=st.integers(3, 12))
    @settings(max_examples=40, deadline=None)
    def test_partition_property(self, seed, fraction, per_design):
        records = [_record(d, n=i + 1) for d in DesignType for i in range(per_design)]
        ds = Dataset(tuple(records))
        train, test = train_test_split(ds, fraction, seed)
        ids = sorted(map(id, train.records)) + sorted(map(id, test.records))
        assert len(train) + len(test) == len(ds)
        assert sorted(ids) == sorted(map(id, ds.records))
        assert len(set(map(id, train.records)) & set(map(id, test.records))) == 0

    def test_fraction_bounds(self):
        records = [_record(d, n=i + 1) for d in DesignType for i in range(4)]
        ds = Dataset(tuple(records))
        for bad in (0.0, 1.0, -0.1):
            with pytest.raises(ConfigError):
                train_test_split(ds, bad, seed=0)

    def test_stratum_too_small(self):
        records = [_record(d, n=i + 1) for d in DesignType for i in range(2)]
        ds = Dataset(tuple(records))
        with pytest.raises(ConfigError):
            train_test_split(ds, 0.1, seed=0)  # round(0.2) == 0 per design


class TestSynthesize:
    def test_calibration_matches_published_means(self):
        ds = synthesize_dataset(GeneratorConfig(per_design_count=500, seed=13))
        targets = {"ethnographic": 32.4, "grounded_theory": 26.7,
                   "case_study": 27.1, "phenomenology": 18.0, "narrative": 14.6}
        for d in DesignType:
            sizes = [r.sample_size for r in ds if r.design is d]
            mean = float(np.mean(sizes))
            target = targets[d.value]
            assert abs(mean - target) / target < 0.15, (d, mean, target)

    def test_moment_matching_identities(self):
        # lognormal mean/median identities behind the default parameters
        for d, (mu, sigma) in DEFAULT_LOGNORMAL_PARAMS.items():
            mean = math.exp(mu + sigma**2 / 2.0)
            median = math.exp(mu)
            assert sigma > 0
            assert mean > median  # positive skew

    def test_zero_signal_is_independent(self):
        from scipy.stats import spearmanr

        ds = synthesize_dataset(GeneratorConfig(
            per_design_count=400, seed=5, signal_strength=0.0, flip_probability=0.499,
        ))
        sizes = ds.sample_sizes()
        for key in METRIC_KEYS:
            scores = np.array([r.scores[key] for r in ds], dtype=float)
            rho = spearmanr(scores, sizes).statistic
            assert abs(rho) < 0.1, (key, rho)

    def test_full_signal_is_step_function(self):
        ds = synthesize_dataset(GeneratorConfig(
            per_design_count=300, seed=5, signal_strength=1.0, flip_probability=0.0,
        ))
        for d in DesignType:
            rows = [(r.sample_size, r.scores["information_power"])
                    for r in ds if r.design is d]
            rows.sort()
            # grouped by sample size, scores must be single-valued and monotone
            by_size = {}
            for size, score in rows:
                by_size.setdefault(size, set()).add(score)
            assert all(len(v) == 1 for v in by_size.values())
            ordered = [next(iter(by_size[s])) for s in sorted(by_size)]
            assert ordered == sorted(ordered)

    def test_deterministic_bytes(self):
        cfg = GeneratorConfig(per_design_count=50, seed=99)
        assert serialize_csv(synthesize_dataset(cfg)) == serialize_csv(synthesize_dataset(cfg))

    def test_sizes_positive_and_skewed(self):
        ds = synthesize_dataset(GeneratorConfig(per_design_count=500, seed=21))
        for d in DesignType:
            sizes = np.array([r.sample_size for r in ds if r.design is d], dtype=float)
            assert sizes.min() >= 1
            _, _, skew, _ = moments_reference(sizes.tolist())
            sigma = DEFAULT_LOGNORMAL_PARAMS[d][1]
            if sigma >= 0.5:
                assert skew > 0

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            GeneratorConfig(flip_probability=0.5)
        with pytest.raises(ConfigError):
            GeneratorConfig(per_design_count=0)
        with pytest.raises(ConfigError):
            GeneratorConfig(signal_strength=1.5)


class TestDescriptiveStats:
    def test_constant_column_conventions(self):
        records = [_record(d, score=15, n=5) for d in DesignType for _ in range(2)]
        stats = descriptive_stats(Dataset(tuple(records)))
        col = stats["research_scope"]
        assert col["std"] == 0.0
        assert col["skewness"] == 0.0
        assert col["kurtosis"] == 0.0

    def test_hand_computed_quartiles(self):
        # quartile rule: linear interpolation between closest ranks
        records = [_record(DesignType.CASE_STUDY, n=v) for v in (1, 2, 3, 4, 5)]
        records.extend(_record(d, n=1) for d in list(DesignType)[1:])
        stats = descriptive_stats(Dataset(tuple(records[:5])))
        col = stats["sample_size"]
        assert col["mean"] == 3.0
        assert col["median"] == 3.0
        assert col["q1"] == 2.0
        assert col["q3"] == 4.0
        assert col["q1"] == percentile_linear([1, 2, 3, 4, 5], 25)

    def test_moments_against_reference(self, small_corpus):
        stats = descriptive_stats(small_corpus)
        sizes = small_corpus.sample_sizes().tolist()
        mean, std, skew, kurt = moments_reference(sizes)
        col = stats["sample_size"]
        assert col["mean"] == pytest.approx(mean, rel=1e-12)
        assert col["std"] == pytest.approx(std, rel=1e-12)
        assert col["skewness"] == pytest.approx(skew, rel=1e-9)
        assert col["kurtosis"] == pytest.approx(kurt, rel=1e-9)

    def test_needs_two_records(self):
        with pytest.raises(ConfigError):
            descriptive_stats(Dataset((_record(),)))
