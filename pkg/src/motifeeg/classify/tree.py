"""CART-style binary decision tree for 0/1 labels."""

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgumentError

CRITERIA = ("gini", "log_loss")
GAIN_TOL = 1e-12


def check_training_data(X, y):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] == 0:
        raise InvalidArgumentError("training matrix is empty")
    if X.shape[0] != len(y):
        raise InvalidArgumentError(f"{X.shape[0]} rows but {len(y)} labels")
    if not np.isin(y, (0, 1)).all():
        raise InvalidArgumentError("labels must be 0 or 1")
    if len(np.unique(y)) < 2:
        raise InvalidArgumentError("training labels contain a single class")
    if not np.isfinite(X).all():
        raise InvalidArgumentError("training matrix has non-finite entries")
    return X, y.astype(np.int64)


def impurity(n1, n, criterion):
    """Node impurity from the positive count `n1` out of `n` (array-friendly)."""
    p1 = np.divide(n1, n, out=np.zeros_like(n1, dtype=np.float64), where=n > 0)
    p0 = 1.0 - p1
    if criterion == "gini":
        return 1.0 - p0 * p0 - p1 * p1
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(np.where(p0 > 0, p0 * np.log(p0), 0.0) + np.where(p1 > 0, p1 * np.log(p1), 0.0))
    return h


@dataclass
class DecisionTreeModel:
    """Flat-array tree. Node ``i`` is a leaf when ``feature[i] < 0``."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # P(y = 1) at each node
    n_features: int
    importances: np.ndarray
    criterion: str
    max_depth: int

    def predict_proba(self, X):
        X = np.asarray(X, dtype=np.float64)
        out = np.empty(len(X))
        for r, row in enumerate(X):
            i = 0
            while self.feature[i] >= 0:
                i = self.left[i] if row[self.feature[i]] <= self.threshold[i] else self.right[i]
            out[r] = self.value[i]
        return out

    def predict(self, X):
        return (self.predict_proba(X) > 0.5).astype(np.int64)

    @property
    def depth(self):
        depth = np.zeros(len(self.feature), dtype=np.int64)
        for i in range(len(self.feature)):
            if self.feature[i] >= 0:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    @property
    def feature_importances(self):
        return self.importances


def best_split(X, y, rows, features, criterion, min_samples_leaf):
    """Best (gain, feature, threshold) over `features`, or None.

    Thresholds are midpoints between adjacent distinct values. Features are
    scanned in ascending order and thresholds ascending; a candidate replaces
    the incumbent only if it is better by more than GAIN_TOL.
    """
    n = len(rows)
    yr = y[rows]
    parent = float(impurity(np.array(yr.sum()), np.array(n), criterion))
    best = None
    for f in sorted(features):
        xs = X[rows, f]
        order = np.argsort(xs, kind="stable")
        xs, ys = xs[order], yr[order]
        cut = np.flatnonzero(xs[1:] > xs[:-1]) + 1  # size of left child
        cut = cut[(cut >= min_samples_leaf) & (n - cut >= min_samples_leaf)]
        if len(cut) == 0:
            continue
        pos = np.cumsum(ys)[cut - 1]
        n_left = cut.astype(np.float64)
        child = (n_left * impurity(pos, n_left, criterion)
                 + (n - n_left) * impurity(ys.sum() - pos, n - n_left, criterion)) / n
        gain = parent - child
        j = int(np.argmax(gain))  # first maximum -> lowest threshold
        if best is None or gain[j] > best[0] + GAIN_TOL:
            c = cut[j]
            best = (float(gain[j]), f, float((xs[c - 1] + xs[c]) / 2))
    return best


def grow_tree(X, y, criterion="gini", max_depth=3, min_samples_leaf=1,
              min_samples_split=2, feature_sampler=None):
    """Greedy top-down tree on pre-validated arrays.

    `feature_sampler`, if given, is called at each split with no arguments
    and returns the candidate feature indices.
    """
    n, d = X.shape
    feature, threshold, left, right, value = [], [], [], [], []
    importances = np.zeros(d)

    def new_node(rows):
        feature.append(-1)
        threshold.append(np.nan)
        left.append(-1)
        right.append(-1)
        value.append(float(y[rows].mean()))
        return len(feature) - 1

    root = np.arange(n)
    stack = [(new_node(root), root, 0)]
    while stack:
        node, rows, depth = stack.pop()
        n1 = y[rows].sum()
        if depth >= max_depth or n1 == 0 or n1 == len(rows) or len(rows) < min_samples_split:
            continue
        if feature_sampler is None:
            split = best_split(X, y, rows, range(d), criterion, min_samples_leaf)
        else:
            drawn = set(int(f) for f in feature_sampler())
            split = best_split(X, y, rows, drawn, criterion, min_samples_leaf)
            if split is None:
                # none of the drawn features can split here; try the rest
                rest = [f for f in range(d) if f not in drawn]
                split = best_split(X, y, rows, rest, criterion, min_samples_leaf)
        if split is None:
            continue
        gain, f, thr = split
        importances[f] += len(rows) / n * gain
        mask = X[rows, f] <= thr
        feature[node], threshold[node] = f, thr
        l_rows, r_rows = rows[mask], rows[~mask]
        left[node] = new_node(l_rows)
        right[node] = new_node(r_rows)
        # right pushed first so the left subtree is numbered first
        stack.append((right[node], r_rows, depth + 1))
        stack.append((left[node], l_rows, depth + 1))

    total = importances.sum()
    if total > 0:
        importances = importances / total
    return DecisionTreeModel(
        np.array(feature, dtype=np.int64), np.array(threshold), np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64), np.array(value), d, importances, criterion, max_depth)


def train_decision_tree(X, y, criterion="gini", max_depth=3, min_samples_leaf=1,
                        min_samples_split=2):
    """Fit a decision tree.

    Parameters
    ----------
    X : array-like, shape (n, d)
    y : array-like of 0/1
    criterion : {"gini", "log_loss"}
    max_depth : int
    min_samples_leaf, min_samples_split : int

    Returns
    -------
    DecisionTreeModel
    """
    if criterion not in CRITERIA:
        raise InvalidArgumentError(f"criterion must be one of {CRITERIA}")
    if max_depth < 1 or min_samples_leaf < 1 or min_samples_split < 2:
        raise InvalidArgumentError("need max_depth >= 1, min_samples_leaf >= 1, min_samples_split >= 2")
    X, y = check_training_data(X, y)
    return grow_tree(X, y, criterion, int(max_depth), int(min_samples_leaf), int(min_samples_split))
