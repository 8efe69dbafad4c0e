"""Stratified k-fold evaluation with nested grid search and optional RFE."""

import csv
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import InvalidArgumentError
from .estimators import expand_grid, fit_estimator
from .metrics import f1_and_accuracy
from .rfe import rfe

log = logging.getLogger(__name__)

DEFAULT_RFE_ESTIMATOR = ("logistic", {"C": 1.0, "penalty": "l2"})
FOLD_FIELDS = ("fold", "n_train", "n_val", "train_accuracy", "train_f1",
               "val_accuracy", "val_f1", "kind", "params", "selected")


def stratified_folds(y, groups, folds, seed=0, warn=True):
    """Fold index for every sample, stratified by (class, group).

    Samples of each cell are shuffled and dealt to folds round-robin; the
    dealing counter carries over from one cell to the next, so per-class
    counts differ by at most one between folds. If some cell has fewer
    members than `folds`, stratification falls back to class only.
    """
    y = np.asarray(y)
    n = len(y)
    if folds < 2:
        raise InvalidArgumentError(f"need at least 2 folds, got {folds}")
    if n < folds:
        raise InvalidArgumentError(f"{n} samples cannot fill {folds} folds")
    groups = ["none"] * n if groups is None else [str(g) for g in groups]
    keys = [(int(c), g) for c, g in zip(y, groups)]
    cells = sorted(set(keys))
    if any(keys.count(c) < folds for c in cells):
        if len({g for _, g in cells}) > 1 and warn:
            log.warning("some (class, group) cell has fewer than %d members; "
                        "stratifying by class only", folds)
        keys = [(c, "none") for c, _ in keys]
        cells = sorted(set(keys))
    rng = np.random.default_rng(seed)
    out = np.empty(n, dtype=np.int64)
    counter = 0
    for cell in cells:
        members = np.array([i for i, k in enumerate(keys) if k == cell])
        for i in rng.permutation(members):
            out[i] = counter % folds
            counter += 1
    return out


def grid_search(X, y, groups, candidates, folds, seed=0):
    """Pick the candidate with the best mean validation F1.

    Returns the winning ``(kind, params)`` and the list of mean F1 scores
    in candidate order. Ties go to the earliest candidate.
    """
    assign = stratified_folds(y, groups, folds, seed, warn=False)
    scores = []
    for kind, params in candidates:
        f1s = []
        for f in range(folds):
            tr, va = assign != f, assign == f
            if len(np.unique(y[tr])) < 2:
                f1s.append(0.0)
                continue
            model = fit_estimator(kind, params, X[tr], y[tr], seed)
            f1s.append(f1_and_accuracy(y[va], model.predict(X[va]))[1])
        scores.append(float(np.mean(f1s)))
    best = int(np.argmax(scores))
    return candidates[best], scores


@dataclass
class FoldResult:
    fold: int
    n_train: int
    n_val: int
    train_accuracy: float
    train_f1: float
    val_accuracy: float
    val_f1: float
    kind: str
    params: dict
    selected: list


@dataclass
class EvalReport:
    """Outer-fold scores; training scores are for the model refit on each
    full training fold."""

    folds: list
    n_folds: int
    seed: int
    means: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.means:
            self.means = {k: float(np.mean([getattr(f, k) for f in self.folds]))
                          for k in ("train_accuracy", "train_f1", "val_accuracy", "val_f1")}

    def to_dict(self):
        return {"n_folds": self.n_folds, "seed": self.seed, "means": self.means,
                "folds": [asdict(f) for f in self.folds], **self.extra}

    @classmethod
    def from_dict(cls, d):
        extra = {k: v for k, v in d.items() if k not in ("n_folds", "seed", "means", "folds")}
        return cls([FoldResult(**f) for f in d["folds"]], d["n_folds"], d["seed"],
                   dict(d["means"]), extra)

    def write_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def write_fold_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(FOLD_FIELDS)
            for f in self.folds:
                row = asdict(f)
                row["params"] = json.dumps(row["params"], sort_keys=True)
                row["selected"] = " ".join(str(s) for s in row["selected"])
                w.writerow([repr(row[k]) if isinstance(row[k], float) else row[k]
                            for k in FOLD_FIELDS])


def _as_candidates(grid):
    """Accept ``{kind: {param: [values]}}`` or a ready list of (kind, params)."""
    if isinstance(grid, dict):
        out = []
        for kind in sorted(grid):
            out.extend(expand_grid(kind, grid[kind]))
        return out
    return [(kind, dict(params)) for kind, params in grid]


def stratified_kfold_cv(X, y, groups=None, folds=5, grid=None, seed=0, rfe_k=None,
                        rfe_estimator=DEFAULT_RFE_ESTIMATOR, feature_ids=None, threads=1):
    """Outer stratified k-fold CV with per-fold RFE and nested grid search.

    Parameters
    ----------
    X : array-like, shape (n, d)
    y : array-like of 0/1
    groups : sequence, optional
        Group attribute per sample, used together with the class for
        stratification.
    folds : int
        Outer fold count; the inner search uses the same count, capped by
        the smaller class size of the training fold.
    grid : dict or list
        ``{kind: {param: values}}`` or a list of ``(kind, params)``.
    seed : int
    rfe_k : int, optional
        If given and below the feature count, RFE with `rfe_estimator`
        keeps this many features in each training fold before tuning.
    feature_ids : list of str, optional
        Column names reported for the selected features.
    threads : int
        Outer folds evaluated concurrently; results are assembled in fold order.

    Returns
    -------
    EvalReport
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n, d = X.shape
    if len(y) != n:
        raise InvalidArgumentError(f"{n} rows but {len(y)} labels")
    if set(np.unique(y)) != {0, 1}:
        raise InvalidArgumentError("cross-validation needs both classes")
    if d == 0:
        raise InvalidArgumentError("feature matrix has no columns")
    candidates = _as_candidates(grid if grid is not None else {"tree": {"criterion": ["gini"], "max_depth": [3]}})
    if not candidates:
        raise InvalidArgumentError("classifier grid is empty")
    ids = list(feature_ids) if feature_ids is not None else list(range(d))
    groups = None if groups is None else np.asarray([str(g) for g in groups])
    assign = stratified_folds(y, groups, folds, seed)

    def run(f):
        tr, va = np.flatnonzero(assign != f), np.flatnonzero(assign == f)
        Xtr, ytr = X[tr], y[tr]
        if len(np.unique(ytr)) < 2:
            raise InvalidArgumentError(f"training fold {f} contains a single class")
        cols = list(range(d))
        if rfe_k is not None and rfe_k < d:
            cols = rfe(Xtr, ytr, *rfe_estimator, target_k=rfe_k, seed=seed).selected
        inner = min(folds, int(np.bincount(ytr).min()))
        gtr = None if groups is None else groups[tr]
        if inner >= 2:
            (kind, params), _ = grid_search(Xtr[:, cols], ytr, gtr, candidates, inner, seed + 1 + f)
        else:
            kind, params = candidates[0]
        model = fit_estimator(kind, params, Xtr[:, cols], ytr, seed)
        tr_acc, tr_f1 = f1_and_accuracy(ytr, model.predict(Xtr[:, cols]))
        va_acc, va_f1 = f1_and_accuracy(y[va], model.predict(X[va][:, cols]))
        return FoldResult(f, len(tr), len(va), tr_acc, tr_f1, va_acc, va_f1, kind,
                          dict(params), [ids[c] for c in cols])

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, range(folds)))
    else:
        results = [run(f) for f in range(folds)]
    return EvalReport(results, folds, seed)
