"""Two-class Fisher discriminant projection."""

import numpy as np

from ..errors import InvalidArgumentError

RIDGE = 1e-6


def fisher_direction(X, y):
    """``w = Sw^-1 (mu1 - mu0)``, with ``RIDGE * I`` added to a singular Sw."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or len(X) != len(y):
        raise InvalidArgumentError("X must be 2-D with one row per label")
    if set(np.unique(y)) != {0, 1}:
        raise InvalidArgumentError("Fisher projection needs both classes")
    X0, X1 = X[y == 0], X[y == 1]
    sw = (X0 - X0.mean(0)).T @ (X0 - X0.mean(0)) + (X1 - X1.mean(0)).T @ (X1 - X1.mean(0))
    diff = X1.mean(0) - X0.mean(0)
    if np.linalg.matrix_rank(sw) < sw.shape[0]:
        sw = sw + RIDGE * np.eye(sw.shape[0])
    return np.linalg.solve(sw, diff)


def fisher_projection(X, y):
    """Scalar projection ``X @ w`` of every row onto the Fisher direction."""
    return np.asarray(X, dtype=np.float64) @ fisher_direction(X, y)
