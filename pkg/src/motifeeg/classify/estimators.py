"""Uniform access to the three classifier families.

An estimator is named by a kind (``"tree"``, ``"forest"``, ``"logistic"``)
and a parameter dict; every fitted model has ``predict`` and
``feature_importances``.
"""

import itertools

from ..errors import InvalidArgumentError
from .forest import train_random_forest
from .logistic import train_logistic
from .tree import train_decision_tree

KINDS = ("tree", "forest", "logistic")

PAPER_GRIDS = {
    "tree": {"criterion": ["gini", "log_loss"], "max_depth": [3, 4, 5, 10, 20]},
    "forest": {"n_estimators": [5, 10, 15, 20], "max_depth": [3, 4, 5, 10, 20],
               "min_samples_leaf": [1, 2, 3, 4], "min_samples_split": [2, 3, 4]},
    "logistic": {"C": [0.1, 0.5, 0.7, 1.0], "penalty": ["l1", "l2"]},
}

_ALLOWED = {
    "tree": {"criterion", "max_depth", "min_samples_leaf", "min_samples_split"},
    "forest": {"criterion", "n_estimators", "max_depth", "min_samples_leaf",
               "min_samples_split", "max_features", "bootstrap"},
    "logistic": {"C", "penalty", "tol", "max_iter"},
}


def check_params(kind, params):
    if kind not in KINDS:
        raise InvalidArgumentError(f"unknown estimator kind {kind!r}; expected one of {KINDS}")
    unknown = set(params) - _ALLOWED[kind]
    if unknown:
        raise InvalidArgumentError(f"unknown {kind} parameters: {sorted(unknown)}")


def fit_estimator(kind, params, X, y, seed=0):
    check_params(kind, params)
    if kind == "tree":
        return train_decision_tree(X, y, **params)
    if kind == "forest":
        return train_random_forest(X, y, seed=seed, **params)
    return train_logistic(X, y, **params)


def expand_grid(kind, grid):
    """All parameter combinations of one kind, in a fixed order.

    Keys are iterated in sorted order and values in the order given, so the
    first combination is the first value of every key.
    """
    check_params(kind, grid)
    keys = sorted(grid)
    return [(kind, dict(zip(keys, vals))) for vals in itertools.product(*(grid[k] for k in keys))]
