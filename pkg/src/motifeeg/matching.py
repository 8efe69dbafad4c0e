"""Locating motif occurrences with an adaptive distance threshold."""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .motiflets import boundary_mask
from .ts_core import distance_profile


@dataclass(frozen=True)
class MatchSet:
    """Matches as (start, distance) pairs sorted by distance, and the
    threshold that admitted them."""

    entries: tuple
    threshold: float

    @property
    def distances(self):
        return np.array([d for _, d in self.entries])

    @property
    def starts(self):
        return [s for s, _ in self.entries]


def match_threshold(profile):
    """``max(mean(D) - 2 std(D), min(D))`` over the finite entries of D.

    The population std is used. The result is never below ``min(D)``, so
    the closest match always qualifies.
    """
    d = np.asarray(profile, dtype=np.float64)
    d = d[np.isfinite(d)]
    if len(d) == 0:
        raise InvalidArgumentError("distance profile has no finite entries")
    return float(max(d.mean() - 2.0 * d.std(), d.min()))


def select_matches(profile, m, threshold):
    """Greedy minima-first selection of positions with distance <= threshold.

    Each accepted position blocks its trivial matches (``2|i-j| < m``).
    Equal distances are taken in index order.
    """
    d = np.asarray(profile, dtype=np.float64)
    cand = np.flatnonzero(d <= threshold)
    order = cand[np.lexsort((cand, d[cand]))]
    blocked = np.zeros(len(d), dtype=bool)
    half = (m - 1) // 2
    entries = []
    for p in order:
        if blocked[p]:
            continue
        entries.append((int(p), float(d[p])))
        blocked[max(0, p - half):p + half + 1] = True
    return entries


def match(q, t, boundaries=None):
    """All threshold-qualifying, mutually non-overlapping matches of `q` in `t`.

    Parameters
    ----------
    q : array-like
        Motif values.
    t : array-like
        Series to search.
    boundaries : sequence of int, optional
        Splice positions; windows straddling one are never matched.

    Returns
    -------
    MatchSet
    """
    q = np.asarray(q, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    if len(q) > len(t):
        raise InvalidArgumentError(
            f"motif of length {len(q)} is longer than series of length {len(t)}")
    d = distance_profile(q, t)
    if boundaries:
        d = np.where(boundary_mask(len(t), len(q), boundaries), d, np.inf)
    threshold = match_threshold(d)
    return MatchSet(tuple(select_matches(d, len(q), threshold)), threshold)


def mean_match_distance(q, t, boundaries=None):
    """Mean distance over the matches of `q` in `t`."""
    return float(np.mean([dist for _, dist in match(q, t, boundaries).entries]))
