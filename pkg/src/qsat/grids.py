"""Default hyperparameter grids for the comparison harness.

Each grid is a mapping of parameter name to candidate values; the search
walks the Cartesian product in declaration order. Grids are intentionally
small (this is a desk-scale tool) but always include each learner's
published best-parameter point, so those winners stay reachable. A JSON file
with the same structure can replace them via the CLI ``--grids`` flag.
"""

DEFAULT_GRIDS = {
    "knn": {
        "n_neighbors": [5, 15],
        "p": [1, 2],
        "weights": ["distance", "uniform"],
    },
    "gradient_boosting": {
        "learning_rate": [0.1],
        "loss": ["squared_error"],
        "max_depth": [3, 7],
        "n_estimators": [200],
        "subsample": [0.8],
    },
    "random_forest": {
        "max_depth": [None],
        "max_features": ["sqrt"],
        "min_samples_leaf": [1],
        "min_samples_split": [2],
        "n_estimators": [200],
    },
    "regularized_boosting": {
        "colsample_bytree": [1.0],
        "learning_rate": [0.1],
        "max_depth": [7],
        "n_estimators": [200],
        "reg_alpha": [0],
        "reg_lambda": [1.5],
        "subsample": [0.8],
    },
    "decision_tree": {
        "criterion": ["squared_error"],
        "max_depth": [None],
        "max_features": ["sqrt", "all"],
        "min_samples_leaf": [1],
        "min_samples_split": [2],
    },
    "svr": {
        "C": [1.0, 10.0],
        "degree": [2],
        "gamma": ["scale"],
        "kernel": ["rbf"],
        "epsilon": [0.1],
    },
    "mlp": {
        "activation": ["logistic"],
        "alpha": [0.01],
        "early_stopping": [True],
        "hidden_layer_sizes": [[30]],
    },
    "adaboost_r2": {
        "learning_rate": [0.05],
        "loss": ["square"],
        "n_estimators": [100],
    },
    "ridge": {
        "alpha": [1.0, 10.0, 50.0],
    },
    "lasso": {
        "alpha": [0.001, 0.01],
    },
}

# Published best-parameter points that the default grids must contain
# (one cell of each grid projects onto these exactly).
TABLE_BEST_PARAMS = {
    "knn": {"n_neighbors": 15, "p": 1, "weights": "distance"},
    "gradient_boosting": {"learning_rate": 0.1, "loss": "squared_error",
                          "max_depth": 7, "n_estimators": 200, "subsample": 0.8},
    "random_forest": {"max_depth": None, "max_features": "sqrt",
                      "min_samples_leaf": 1, "min_samples_split": 2,
                      "n_estimators": 200},
    "regularized_boosting": {"colsample_bytree": 1.0, "learning_rate": 0.1,
                             "max_depth": 7, "n_estimators": 200,
                             "reg_alpha": 0, "reg_lambda": 1.5, "subsample": 0.8},
    "decision_tree": {"criterion": "squared_error", "max_depth": None,
                      "max_features": "sqrt", "min_samples_leaf": 1,
                      "min_samples_split": 2},
    "svr": {"C": 10.0, "degree": 2, "gamma": "scale", "kernel": "rbf"},
    "mlp": {"activation": "logistic", "alpha": 0.01, "early_stopping": True,
            "hidden_layer_sizes": [30]},
    "adaboost_r2": {"learning_rate": 0.05, "loss": "square", "n_estimators": 100},
    "ridge": {"alpha": 50.0},
}
