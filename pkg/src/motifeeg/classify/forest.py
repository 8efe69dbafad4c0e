"""Bagged decision trees with per-split feature subsampling."""

import math
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgumentError
from .tree import CRITERIA, check_training_data, grow_tree


@dataclass
class RandomForestModel:
    trees: list
    n_estimators: int
    seeds: list
    min_samples_leaf: int
    min_samples_split: int

    def predict(self, X):
        """Majority vote; an even split goes to class 0."""
        votes = np.sum([t.predict(X) for t in self.trees], axis=0)
        return (2 * votes > len(self.trees)).astype(np.int64)

    @property
    def feature_importances(self):
        return np.mean([t.importances for t in self.trees], axis=0)


def _n_split_features(max_features, d):
    if max_features is None:
        return d
    if max_features == "sqrt":
        return max(1, int(math.sqrt(d)))
    return max(1, min(d, int(max_features)))


def train_random_forest(X, y, n_estimators=10, max_depth=None, min_samples_leaf=1,
                        min_samples_split=2, seed=0, criterion="gini",
                        max_features="sqrt", bootstrap=True):
    """Fit `n_estimators` trees, each on a bootstrap resample.

    Every tree gets its own generator spawned from `seed`, which drives both
    the bootstrap draw and the feature subset tried at each split.
    ``max_depth=None`` grows until leaves are pure.
    """
    if n_estimators < 1:
        raise InvalidArgumentError("n_estimators must be >= 1")
    if criterion not in CRITERIA:
        raise InvalidArgumentError(f"criterion must be one of {CRITERIA}")
    X, y = check_training_data(X, y)
    n, d = X.shape
    depth = n if max_depth is None else int(max_depth)
    k = _n_split_features(max_features, d)
    children = np.random.SeedSequence(seed).spawn(n_estimators)
    trees, seeds = [], []
    for child in children:
        rng = np.random.default_rng(child)
        rows = rng.integers(0, n, n) if bootstrap else np.arange(n)
        # a one-class resample still yields a valid (single-leaf) tree
        sampler = None if k == d else (lambda: rng.choice(d, k, replace=False))
        trees.append(grow_tree(X[rows], y[rows], criterion, depth, int(min_samples_leaf),
                               int(min_samples_split), sampler))
        seeds.append(int(child.generate_state(1)[0]))
    return RandomForestModel(trees, n_estimators, seeds, int(min_samples_leaf), int(min_samples_split))
