"""Z-normalized similarity primitives.

All standard deviations are population standard deviations. A window whose
standard deviation is below ``DEGENERATE_STD`` is treated as flat: two flat
windows are at distance 0, a flat and a non-flat window at ``sqrt(2m)``.
"""

from typing import NamedTuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import InvalidArgumentError

DEGENERATE_STD = 1e-8
FFT_MIN_QUERY = 32
NEAR_MATCH_GAP = 1e-6


class PairwiseMatrix(NamedTuple):
    distances: np.ndarray
    excluded: np.ndarray


def _as_series(x, name="series"):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise InvalidArgumentError(f"{name} must be one-dimensional, got shape {x.shape}")
    return x


def trivial_match(i, j, m):
    """True if windows starting at `i` and `j` overlap by more than half of `m`."""
    return 2 * np.abs(np.asarray(i) - np.asarray(j)) < m


def z_normalize(x):
    """Return `x` shifted to mean 0 and scaled to unit population std.

    Flat input (std below ``DEGENERATE_STD``) maps to all zeros.
    """
    x = _as_series(x)
    if len(x) == 0:
        raise InvalidArgumentError("cannot z-normalize an empty series")
    centered = x - x.mean()
    std = centered.std()
    if std < DEGENERATE_STD:
        return np.zeros_like(x)
    return centered / std


def sliding_mean_std(t, m):
    """Mean and population std of every length-`m` window of `t`.

    Uses cumulative sums of the globally centered series, so the cost is
    linear in ``len(t)``.

    Returns
    -------
    means, stds : ndarray
        Arrays of length ``len(t) - m + 1``.
    """
    t = _as_series(t)
    n = len(t)
    if not 1 <= m <= n:
        raise InvalidArgumentError(f"window length {m} must lie in [1, {n}]")
    offset = t.mean()
    c = t - offset
    s1 = np.concatenate(([0.0], np.cumsum(c)))
    s2 = np.concatenate(([0.0], np.cumsum(c * c)))
    mean_c = (s1[m:] - s1[:-m]) / m
    var = (s2[m:] - s2[:-m]) / m - mean_c * mean_c
    np.maximum(var, 0.0, out=var)
    return mean_c + offset, np.sqrt(var)


def sliding_dot_product(q, t, method="auto"):
    """Dot product of `q` with every window of `t`.

    ``method`` is ``"direct"``, ``"fft"`` or ``"auto"`` (FFT for queries of
    at least ``FFT_MIN_QUERY`` samples).
    """
    m, n = len(q), len(t)
    if method == "auto":
        method = "fft" if m >= FFT_MIN_QUERY else "direct"
    if method == "direct":
        return sliding_window_view(t, m) @ q
    if method != "fft":
        raise InvalidArgumentError(f"unknown method {method!r}")
    size = 1 << int(np.ceil(np.log2(n + m)))
    prod = np.fft.rfft(t, size) * np.fft.rfft(q[::-1], size)
    return np.fft.irfft(prod, size)[m - 1:n]


def distance_profile(q, t, method="auto"):
    """Z-normalized Euclidean distance of `q` to every window of `t`.

    Parameters
    ----------
    q : array-like
        Query of length m.
    t : array-like
        Series of length n >= m.
    method : {"auto", "direct", "fft"}
        How sliding dot products are computed.

    Returns
    -------
    ndarray
        Length ``n - m + 1``; entry i is the distance between `q` and
        ``t[i:i+m]``.
    """
    q = _as_series(q, "query")
    t = _as_series(t)
    m, n = len(q), len(t)
    if m < 1:
        raise InvalidArgumentError("query must be non-empty")
    if m > n:
        raise InvalidArgumentError(f"query of length {m} is longer than series of length {n}")

    q_c = q - q.mean()
    q_std = q_c.std()
    _, t_std = sliding_mean_std(t, m)
    t_deg = t_std < DEGENERATE_STD
    if q_std < DEGENERATE_STD:
        return np.where(t_deg, 0.0, np.sqrt(2.0 * m))

    # q_c sums to zero, so centering t leaves the dot products unchanged
    # while avoiding cancellation for series with a large offset.
    dots = sliding_dot_product(q_c, t - t.mean(), method)
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = dots / (m * q_std * t_std)
    np.clip(corr, -1.0, 1.0, out=corr)
    dist = np.sqrt(2.0 * m * (1.0 - corr))
    dist[t_deg] = np.sqrt(2.0 * m)
    # near-identical windows: sqrt magnifies the rounding in corr, so
    # recompute them from explicitly normalized windows
    near = np.flatnonzero(~t_deg & (corr > 1.0 - NEAR_MATCH_GAP))
    if len(near):
        w = sliding_window_view(t, m)[near]
        w = w - w.mean(axis=1, keepdims=True)
        w /= w.std(axis=1, keepdims=True)
        dist[near] = np.linalg.norm(w - q_c / q_std, axis=1)
    return dist


def normalized_windows(t, m):
    """Stack of z-normalized length-`m` windows and a flat-window mask.

    Flat windows are returned as zero rows.
    """
    t = _as_series(t)
    if not 1 <= m <= len(t):
        raise InvalidArgumentError(f"window length {m} must lie in [1, {len(t)}]")
    windows = sliding_window_view(t, m)
    centered = windows - windows.mean(axis=1, keepdims=True)
    std = centered.std(axis=1)
    degenerate = std < DEGENERATE_STD
    z = np.zeros_like(centered)
    ok = ~degenerate
    z[ok] = centered[ok] / std[ok, None]
    return np.ascontiguousarray(z), degenerate


def pairwise_distance_matrix(t, m):
    """All-pairs z-normalized distances between length-`m` windows of `t`.

    Returns
    -------
    PairwiseMatrix
        ``distances`` is symmetric with a zero diagonal. ``excluded`` marks
        trivial matches, pairs with ``|i - j| < m/2``.
    """
    t = _as_series(t)
    if m > len(t):
        raise InvalidArgumentError(f"window length {m} exceeds series length {len(t)}")
    z, deg = normalized_windows(t, m)
    corr = (z @ z.T) / m
    np.clip(corr, -1.0, 1.0, out=corr)
    dist = np.sqrt(2.0 * m * (1.0 - corr))
    dist = 0.5 * (dist + dist.T)
    if deg.any():
        mixed = deg[:, None] ^ deg[None, :]
        dist[mixed] = np.sqrt(2.0 * m)
        dist[deg[:, None] & deg[None, :]] = 0.0
    np.fill_diagonal(dist, 0.0)
    idx = np.arange(len(z))
    excluded = trivial_match(idx[:, None], idx[None, :], m)
    return PairwiseMatrix(dist, excluded)
