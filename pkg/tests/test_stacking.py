"""OOF matrix construction, meta-learner fitting, ensemble averaging."""

import numpy as np
import pytest

from qsat import learners
from qsat.errors import ConfigError
from qsat.evaluation import compute_metrics, kfold_split
from qsat.stacking import (
    StackConfig,
    StackedModel,
    build_oof_matrix,
    ensemble_average,
    fit_stacked,
    predict_stacked,
)

FAST_BASES = ("knn", "decision_tree", "ridge")
FAST_PARAMS = {"knn": {"n_neighbors": 3}}


def _register_fold_mean_stub():
    def fit(X, y, params, seed):
        return {"mean": float(np.mean(y))}

    def predict(state, X):
        return np.full(len(X), state["mean"])

    learners.register_kind("fold_mean_stub", fit, predict)


class TestOofMatrix:
    def test_shape_and_no_self_rows(self, rng):
        X = rng.normal(size=(20, 3))
        y = rng.normal(size=20)
        trace = []
        oof = build_oof_matrix(X, y, FAST_BASES, k=5, seed=3,
                               base_params=FAST_PARAMS, trace=trace)
        assert oof.shape == (20, 3)
        plan = kfold_split(20, 5, 3)
        for kind, fold, fit_idx in trace:
            fold_rows = plan.fold_indices(fold)
            assert len(np.intersect1d(fold_rows, fit_idx)) == 0

    def test_fold_mean_stub_oracle(self, rng):
        _register_fold_mean_stub()
        n, k, seed = 15, 3, 9
        X = rng.normal(size=(n, 2))
        y = rng.normal(size=n)
        oof = build_oof_matrix(X, y, ("fold_mean_stub",), k, seed)
        plan = kfold_split(n, k, seed)
        for fold in range(k):
            rows = plan.fold_indices(fold)
            expected = y[plan.rest_indices(fold)].mean()
            assert np.allclose(oof[rows, 0], expected, atol=1e-14)

    def test_deterministic(self, rng):
        X = rng.normal(size=(18, 3))
        y = rng.normal(size=18)
        a = build_oof_matrix(X, y, FAST_BASES, 3, 7, base_params=FAST_PARAMS)
        b = build_oof_matrix(X, y, FAST_BASES, 3, 7, base_params=FAST_PARAMS)
        assert np.array_equal(a, b)

    def test_rejects_bad_k(self, rng):
        X = rng.normal(size=(4, 2))
        with pytest.raises(ConfigError):
            build_oof_matrix(X, np.ones(4), FAST_BASES, k=1, seed=0)
        with pytest.raises(ConfigError):
            build_oof_matrix(X, np.ones(4), FAST_BASES, k=5, seed=0)


class TestFitStacked:
    def _data(self, rng, n=60):
        X = rng.normal(size=(n, 4))
        y = X @ np.array([1.0, -0.5, 0.2, 0.0]) + 0.05 * rng.normal(size=n)
        return X, y

    def test_perfect_base_column_recovered(self, rng):
        _register_fold_mean_stub()
        X, y = self._data(rng)
        cfg = StackConfig(base_kinds=("ridge", "fold_mean_stub"),
                          base_params={"ridge": {"alpha": 1e-8}},
                          fold_count=5, seed=1)
        model = fit_stacked(X, y, cfg)
        # ridge with negligible penalty is essentially perfect on this linear
        # target; the meta-learner should lean entirely on that column
        assert model.meta_coef[0] == pytest.approx(1.0, abs=0.05)
        pred = predict_stacked(model, X)
        assert compute_metrics(y, pred).r2 > 0.99

    def test_constant_column_stays_stable(self, rng):
        # a fold-mean base duplicates the intercept column; the stabilized
        # meta solve must stay finite and close to the ridge-only stack
        _register_fold_mean_stub()
        X, y = self._data(rng)
        single = fit_stacked(X, y, StackConfig(
            base_kinds=("ridge",), fold_count=4, seed=2))
        doubled = fit_stacked(X, y, StackConfig(
            base_kinds=("ridge", "fold_mean_stub"), fold_count=4, seed=2))
        pred_single = predict_stacked(single, X)
        pred_double = predict_stacked(doubled, X)
        assert np.isfinite(pred_double).all()
        assert np.abs(pred_single - pred_double).max() < 0.5

    def test_exactly_duplicated_column_matches_single(self, rng):
        _register_fold_mean_stub()

        def fit2(Xf, yf, params, seed):
            return {"mean": float(np.mean(yf))}

        def predict2(state, Xq):
            return np.full(len(Xq), state["mean"])

        learners.register_kind("fold_mean_stub2", fit2, predict2)
        X, y = self._data(rng)
        one = fit_stacked(X, y, StackConfig(base_kinds=("fold_mean_stub",),
                                            fold_count=4, seed=5))
        two = fit_stacked(X, y, StackConfig(
            base_kinds=("fold_mean_stub", "fold_mean_stub2"), fold_count=4, seed=5))
        q = rng.normal(size=(10, 4))
        assert np.allclose(predict_stacked(one, q), predict_stacked(two, q),
                           atol=1e-8)

    def test_single_base_is_affine_recalibration(self, rng):
        X, y = self._data(rng)
        model = fit_stacked(X, y, StackConfig(base_kinds=("decision_tree",),
                                              fold_count=4, seed=3))
        assert model.meta_coef.shape == (1,)
        base_pred = model.base_models[0].predict(X)
        stacked = predict_stacked(model, X)
        assert np.allclose(stacked,
                           model.meta_coef[0] * base_pred + model.meta_intercept,
                           atol=1e-12)

    def test_elastic_net_meta(self, rng):
        X, y = self._data(rng)
        cfg = StackConfig(base_kinds=FAST_BASES, base_params=FAST_PARAMS,
                          meta="elastic_net", meta_alpha=0.01, fold_count=4, seed=4)
        model = fit_stacked(X, y, cfg)
        assert np.isfinite(predict_stacked(model, X)).all()

    def test_duplicate_base_kinds_rejected(self):
        with pytest.raises(ConfigError):
            StackConfig(base_kinds=("knn", "knn"))

    def test_stacked_r2_close_to_best_base(self, training_matrices):
        # the meta-learner may not beat the best base model, but it must not
        # fall behind its out-of-fold performance by more than 0.05
        X, y = training_matrices
        base_kinds = ("knn", "gradient_boosting", "random_forest",
                      "regularized_boosting", "decision_tree")
        base_params = {
            "knn": {"n_neighbors": 5},
            "gradient_boosting": {"n_estimators": 30, "max_depth": 3},
            "random_forest": {"n_estimators": 30},
            "regularized_boosting": {"n_estimators": 30, "max_depth": 3},
        }
        oof = build_oof_matrix(X, y, base_kinds, 5, 21, base_params=base_params)
        best_oof_r2 = max(compute_metrics(y, oof[:, j]).r2
                          for j in range(len(base_kinds)))
        model = fit_stacked(X, y, StackConfig(
            base_kinds=base_kinds, base_params=base_params,
            fold_count=5, seed=21))
        stacked_r2 = compute_metrics(y, predict_stacked(model, X)).r2
        assert stacked_r2 >= best_oof_r2 - 0.05

    def test_serialization_roundtrip(self, rng):
        X, y = self._data(rng)
        cfg = StackConfig(base_kinds=("ridge", "decision_tree"), fold_count=4, seed=8)
        model = fit_stacked(X, y, cfg)
        doc = model.to_dict()
        again = StackedModel.from_dict(doc)
        q = rng.normal(size=(12, 4))
        assert np.array_equal(predict_stacked(model, q), predict_stacked(again, q))


class TestEnsembleAverage:
    def test_constant_mean(self):
        per = {k: 20.0 for k in learners.NINE_KINDS}
        assert ensemble_average(per) == 20.0

    def test_hand_arithmetic(self):
        values = [10.0] * 4 + [20.0] * 5
        per = dict(zip(learners.NINE_KINDS, values))
        assert ensemble_average(per) == pytest.approx(140.0 / 9.0, rel=1e-15)

    def test_permutation_invariant_and_bounded(self, rng):
        values = rng.uniform(5, 50, size=9)
        per = dict(zip(learners.NINE_KINDS, values))
        shuffled_keys = list(per)
        rng.shuffle(shuffled_keys)
        per2 = {k: per[k] for k in shuffled_keys}
        assert ensemble_average(per) == ensemble_average(per2)
        assert min(values) <= ensemble_average(per) <= max(values)

    def test_missing_kind_rejected(self):
        per = {k: 1.0 for k in learners.NINE_KINDS[:-1]}
        with pytest.raises(ConfigError):
            ensemble_average(per)
        per_extra = {k: 1.0 for k in learners.NINE_KINDS}
        per_extra["stacked"] = 1.0
        with pytest.raises(ConfigError):
            ensemble_average(per_extra)
