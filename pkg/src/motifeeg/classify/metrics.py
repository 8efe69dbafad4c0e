"""Accuracy and positive-class F1."""

import numpy as np

from ..errors import InvalidArgumentError


def f1_and_accuracy(y_true, y_pred):
    """Return ``(accuracy, f1)`` with class 1 as the positive class.

    F1 is 0 when precision + recall is 0 (no true positives).
    """
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape:
        raise InvalidArgumentError(f"length mismatch: {len(y_true)} vs {len(y_pred)}")
    if len(y_true) == 0:
        raise InvalidArgumentError("no labels to score")
    if not (np.isin(y_true, (0, 1)).all() and np.isin(y_pred, (0, 1)).all()):
        raise InvalidArgumentError("labels must be binary 0/1")
    accuracy = float(np.mean(y_true == y_pred))
    tp = int(np.sum((y_true == 1) & (y_pred == 1)))
    # 2PR/(P+R) reduces to 2tp / (2tp + fp + fn)
    denom = 2 * tp + int(np.sum(y_true != y_pred))
    f1 = 2 * tp / denom if tp else 0.0
    return accuracy, float(f1)
