"""Recursive feature elimination, one feature per round."""

from typing import NamedTuple

import numpy as np

from ..errors import InvalidArgumentError
from .estimators import fit_estimator


class RFEResult(NamedTuple):
    selected: list  # column indices, ascending
    model: object  # fitted on X[:, selected]
    eliminated: list  # in removal order


def rfe(X, y, kind, params, target_k, seed=0):
    """Drop the least important feature until `target_k` remain.

    Importances come from the fitted estimator (impurity decrease for trees
    and forests, absolute standardized weight for logistic regression). On
    ties the feature with the highest column index is removed.
    """
    X = np.asarray(X, dtype=np.float64)
    d = X.shape[1]
    if not 1 <= target_k <= d:
        raise InvalidArgumentError(f"target_k must lie in [1, {d}], got {target_k}")
    active = list(range(d))
    eliminated = []
    model = fit_estimator(kind, params, X[:, active], y, seed)
    while len(active) > target_k:
        imp = np.asarray(model.feature_importances)
        low = imp.min()
        drop = max(i for i in range(len(active)) if imp[i] == low)
        eliminated.append(active.pop(drop))
        model = fit_estimator(kind, params, X[:, active], y, seed)
    return RFEResult(active, model, eliminated)
