"""L1/L2-penalized logistic regression on standardized features.

The objective is ``mean log-loss + (1/C) * penalty(w)`` with
``penalty = 0.5 * ||w||^2`` (l2) or ``||w||_1`` (l1); the bias is not
penalized.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from ..errors import InvalidArgumentError
from .tree import check_training_data

PENALTIES = ("l1", "l2")
GRAD_TOL = 1e-6
MAX_ITER = 10_000


@dataclass
class LogisticModel:
    weights: np.ndarray  # on standardized features
    bias: float
    mean: np.ndarray
    scale: np.ndarray
    penalty: str
    C: float
    n_iter: int
    converged: bool

    def decision_function(self, X):
        Z = (np.asarray(X, dtype=np.float64) - self.mean) / self.scale
        return Z @ self.weights + self.bias

    def predict(self, X):
        return (self.decision_function(X) > 0).astype(np.int64)

    @property
    def feature_importances(self):
        return np.abs(self.weights)


def _log_loss(z, y):
    # log(1 + e^z) - y z, stable for large |z|
    return np.mean(np.logaddexp(0.0, z) - y * z)


def logistic_objective(w, b, X, y, C, penalty="l2"):
    """Penalized mean log-loss at (w, b)."""
    pen = 0.5 * w @ w if penalty == "l2" else np.abs(w).sum()
    return _log_loss(X @ w + b, y) + pen / C


def logistic_gradient(w, b, X, y, C, penalty="l2"):
    """Gradient of `logistic_objective` w.r.t. (w, b).

    For l1 the penalty contributes ``sign(w) / C``, the gradient wherever no
    weight is exactly zero.
    """
    r = expit(X @ w + b) - y
    gw = X.T @ r / len(y)
    gw = gw + (w if penalty == "l2" else np.sign(w)) / C
    return gw, float(r.mean())


def _smooth_grad(w, b, X, y):
    r = expit(X @ w + b) - y
    return X.T @ r / len(y), float(r.mean())


def _soft_threshold(v, t):
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def _fit(X, y, C, penalty, tol, max_iter):
    """Proximal gradient with backtracking; plain gradient descent for l2.

    For l2 the penalty is folded into the smooth part. Convergence is
    measured by the norm of the (proximal) gradient mapping.
    """
    d = X.shape[1]
    w, b = np.zeros(d), 0.0
    lam = 1.0 / C
    l1 = penalty == "l1"

    def smooth(w, b):
        f = _log_loss(X @ w + b, y)
        return f if l1 else f + 0.5 * lam * (w @ w)

    def grad(w, b):
        gw, gb = _smooth_grad(w, b, X, y)
        return (gw, gb) if l1 else (gw + lam * w, gb)

    step = 1.0
    f = smooth(w, b)
    for it in range(1, max_iter + 1):
        gw, gb = grad(w, b)
        while True:
            w_new = w - step * gw
            if l1:
                w_new = _soft_threshold(w_new, step * lam)
            b_new = b - step * gb
            dw, db = w_new - w, b_new - b
            f_new = smooth(w_new, b_new)
            # sufficient decrease for the quadratic upper model
            if f_new <= f + gw @ dw + gb * db + (dw @ dw + db * db) / (2 * step) + 1e-15:
                break
            step *= 0.5
        mapping = np.sqrt(dw @ dw + db * db) / step
        w, b, f = w_new, b_new, f_new
        if mapping <= tol:
            return w, b, it, True
        step *= 2.0
    return w, b, max_iter, False


def train_logistic(X, y, C=1.0, penalty="l2", tol=GRAD_TOL, max_iter=MAX_ITER):
    """Fit penalized logistic regression from a zero start.

    Columns are z-scored with the training statistics (constant columns
    are only centred).
    """
    if penalty not in PENALTIES:
        raise InvalidArgumentError(f"penalty must be one of {PENALTIES}")
    if not C > 0:
        raise InvalidArgumentError(f"C must be positive, got {C}")
    X, y = check_training_data(X, y)
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0] = 1.0
    Z = (X - mean) / scale
    w, b, n_iter, ok = _fit(Z, y.astype(np.float64), float(C), penalty, tol, max_iter)
    return LogisticModel(w, float(b), mean, scale, penalty, float(C), n_iter, ok)
