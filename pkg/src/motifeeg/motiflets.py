"""k-Motiflet discovery with learned occurrence count and motif length.

A k-Motiflet is a set of k non-overlapping windows of length l whose maximum
pairwise z-normalized distance (the extent) is minimal. The approximate
search pairs every window (the core) with its k-1 nearest non-overlapping
neighbours and keeps the tightest set; the extent function EF(k) and its
elbows drive the choice of k, the area under EF drives the choice of l.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import InvalidArgumentError, ResourceLimitError
from .ts_core import normalized_windows

log = logging.getLogger(__name__)

DEFAULT_K_MAX = 20
DEFAULT_ALPHA = 2.0
ELBOW_NOISE_FLOOR = 1e-9
EXACT_BUDGET = 2_000_000


@dataclass(frozen=True)
class MotifletSet:
    """Start positions of a motiflet, its window length and extent.

    For approximate results the first index is the core window, followed by
    its neighbours in order of discovery.
    """

    indices: tuple
    length: int
    extent: float

    @property
    def k(self):
        return len(self.indices)


@dataclass
class ElbowAnalysis:
    ef: np.ndarray
    motiflets: list
    elbows: list = field(default_factory=list)

    @property
    def k_max(self):
        return len(self.ef) + 1


@dataclass(frozen=True)
class Motif:
    """A subsequence extracted from one subject's band series."""

    id: str
    subject: str
    channel: str
    band: str
    start: int
    length: int
    k: int
    values: tuple

    def to_dict(self):
        return {
            "id": self.id,
            "subject": self.subject,
            "channel": self.channel,
            "band": self.band,
            "start": self.start,
            "length_samples": self.length,
            "k": self.k,
            "values": list(self.values),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            id=str(d["id"]),
            subject=str(d["subject"]),
            channel=str(d["channel"]),
            band=str(d["band"]),
            start=int(d["start"]),
            length=int(d["length_samples"]),
            k=int(d["k"]),
            values=tuple(float(v) for v in d["values"]),
        )


def motif_id(band, channel, subject, length, k, start):
    return f"{band}-{channel}-{subject}-l{length:04d}-k{k:02d}-s{start:07d}"


# --------------------------------------------------------------------------
# numba kernels


@njit(cache=True, nogil=True)
def _pair_dist(z, deg, i, j):
    m = z.shape[1]
    if deg[i] or deg[j]:
        if deg[i] and deg[j]:
            return 0.0
        return np.sqrt(2.0 * m)
    s = 0.0
    for p in range(m):
        d = z[i, p] - z[j, p]
        s += d * d
    return np.sqrt(s)


@njit(cache=True, nogil=True)
def _set_extent(z, deg, idx, k, upper):
    """Max pairwise distance of ``idx[:k]``; abandons with inf above `upper`."""
    ext = 0.0
    for a in range(k - 1):
        for b in range(a + 1, k):
            d = _pair_dist(z, deg, idx[a], idx[b])
            if d > ext:
                ext = d
                if ext > upper:
                    return np.inf
    return ext


@njit(cache=True, nogil=True)
def _knn_table(t, z, deg, valid, m, k_max):
    """Greedy non-overlapping nearest neighbours of every window.

    Row distances come from the running dot-product recurrence; the returned
    bounds are exact: ``bound[i, r]`` is the largest exact distance between
    core i and its first r+1 members.
    """
    n_w = z.shape[0]
    tc = t - t.mean()
    mu = np.empty(n_w)
    sd = np.empty(n_w)
    for i in range(n_w):
        s = 0.0
        for p in range(m):
            s += tc[i + p]
        mu[i] = s / m
        s = 0.0
        for p in range(m):
            d = tc[i + p] - mu[i]
            s += d * d
        sd[i] = np.sqrt(s / m)

    first = np.empty(n_w)
    for j in range(n_w):
        s = 0.0
        for p in range(m):
            s += tc[p] * tc[j + p]
        first[j] = s
    qt = first.copy()

    knn = np.full((n_w, k_max), -1, dtype=np.int64)
    bound = np.full((n_w, k_max), np.inf)
    row = np.empty(n_w)
    two_m = 2.0 * m
    for i in range(n_w):
        if i > 0:
            for j in range(n_w - 1, 0, -1):
                qt[j] = qt[j - 1] - tc[i - 1] * tc[j - 1] + tc[i + m - 1] * tc[j + m - 1]
            qt[0] = first[i]
        if not valid[i]:
            continue
        for j in range(n_w):
            if not valid[j]:
                row[j] = np.inf
            elif deg[i] or deg[j]:
                row[j] = 0.0 if (deg[i] and deg[j]) else np.sqrt(two_m)
            else:
                c = (qt[j] - m * mu[i] * mu[j]) / (m * sd[i] * sd[j])
                if c > 1.0:
                    c = 1.0
                elif c < -1.0:
                    c = -1.0
                row[j] = np.sqrt(two_m * (1.0 - c))
        row[i] = -1.0  # the core always comes first
        worst = 0.0
        for r in range(k_max):
            best = np.inf
            pos = -1
            for j in range(n_w):
                if row[j] < best:
                    best = row[j]
                    pos = j
            if pos < 0:
                break
            knn[i, r] = pos
            d = _pair_dist(z, deg, i, pos)
            if d > worst:
                worst = d
            bound[i, r] = worst
            lo = pos - (m - 1) // 2
            hi = pos + (m - 1) // 2
            if lo < 0:
                lo = 0
            if hi > n_w - 1:
                hi = n_w - 1
            for j in range(lo, hi + 1):
                row[j] = np.inf
    return knn, bound


@njit(cache=True, nogil=True)
def _best_core(z, deg, knn, bound_k, order, k):
    """Scan cores by increasing lower bound; return (core, extent)."""
    best = np.inf
    best_core = -1
    for c in order:
        b = bound_k[c]
        if b == np.inf or b > best:
            break
        ext = _set_extent(z, deg, knn[c], k, best)
        if ext < best or (ext == best and c < best_core):
            best = ext
            best_core = c
    return best_core, best


@njit(cache=True, nogil=True)
def _distance_matrix(z, deg):
    n_w = z.shape[0]
    out = np.zeros((n_w, n_w))
    for i in range(n_w):
        for j in range(i + 1, n_w):
            d = _pair_dist(z, deg, i, j)
            out[i, j] = d
            out[j, i] = d
    return out


@njit(cache=True, nogil=True)
def _exact_search(dist, pos, k, m):
    """Branch-and-bound over all k-subsets in lexicographic order."""
    n = len(pos)
    best = np.inf
    best_set = np.full(k, -1, dtype=np.int64)
    sel = np.zeros(k, dtype=np.int64)
    run = np.zeros(k + 1)
    d = 0
    sel[0] = -1
    while d >= 0:
        sel[d] += 1
        if sel[d] > n - (k - d):
            d -= 1
            continue
        j = sel[d]
        ok = True
        mx = run[d]
        for a in range(d):
            i = sel[a]
            if 2 * (pos[j] - pos[i]) < m:
                ok = False
                break
            v = dist[i, j]
            if v > mx:
                mx = v
        if not ok or mx >= best:
            continue
        run[d + 1] = mx
        if d == k - 1:
            best = mx
            best_set[:] = sel
            continue
        sel[d + 1] = j
        d += 1
    return best_set, best


# --------------------------------------------------------------------------
# public API


def _prepare(t, l, valid=None):
    t = np.ascontiguousarray(t, dtype=np.float64)
    if t.ndim != 1:
        raise InvalidArgumentError("series must be one-dimensional")
    if not 2 <= l <= len(t):
        raise InvalidArgumentError(f"motif length {l} must lie in [2, {len(t)}]")
    z, deg = normalized_windows(t, l)
    if valid is None:
        valid = np.ones(len(z), dtype=np.bool_)
    else:
        valid = np.ascontiguousarray(valid, dtype=np.bool_)
        if valid.shape != (len(z),):
            raise InvalidArgumentError("valid-window mask has the wrong length")
    return t, z, deg, valid


def boundary_mask(n, l, boundaries):
    """Valid-window mask excluding windows that straddle a segment boundary.

    A boundary b is the index of the first sample after a splice, so window
    ``[i, i+l)`` is invalid when ``i < b < i + l``.
    """
    valid = np.ones(n - l + 1, dtype=bool)
    for b in boundaries or ():
        lo = max(0, b - l + 1)
        hi = min(n - l + 1, b)
        valid[lo:hi] = False
    return valid


def extent(t, indices, l):
    """Maximum pairwise z-normalized distance among windows at `indices`."""
    indices = np.asarray(indices, dtype=np.int64)
    if len(indices) < 2:
        raise InvalidArgumentError("extent needs at least two windows")
    t, z, deg, _ = _prepare(t, l)
    if indices.min() < 0 or indices.max() >= len(z):
        raise InvalidArgumentError("window index out of range")
    return float(_set_extent(z, deg, indices, len(indices), np.inf))


class _Search:
    """Cached neighbour table for one (series, length) pair."""

    def __init__(self, t, l, k_max, valid=None):
        self.t, self.z, self.deg, self.valid = _prepare(t, l, valid)
        self.l = l
        self.k_max = k_max
        self.knn, self.bound = _knn_table(
            self.t, self.z, self.deg, self.valid, l, k_max)

    def best(self, k):
        bound_k = self.bound[:, k - 1]
        order = np.argsort(bound_k, kind="mergesort")
        core, ext = _best_core(self.z, self.deg, self.knn, bound_k, order, k)
        if core < 0:
            return None
        return MotifletSet(tuple(int(i) for i in self.knn[core, :k]), self.l, float(ext))


def approx_k_motiflet(t, l, k, valid=None):
    """Approximate k-Motiflet of windows of length `l`.

    Parameters
    ----------
    t : array-like
        The series.
    l : int
        Window length.
    k : int
        Number of occurrences, at least 2.
    valid : array-like of bool, optional
        Windows that may take part (e.g. those not crossing a splice).

    Returns
    -------
    MotifletSet
    """
    if k < 2:
        raise InvalidArgumentError("k must be at least 2")
    result = _Search(t, l, k, valid).best(k)
    if result is None:
        raise InvalidArgumentError(
            f"series too short for {k} non-overlapping windows of length {l}")
    return result


def exact_k_motiflet(t, l, k, valid=None, budget=EXACT_BUDGET):
    """Exhaustive minimum-extent k-Motiflet; meant as a test oracle.

    Among equal extents the lexicographically smallest index set wins.
    Raises ResourceLimitError if there are more than `budget` subsets.
    """
    if k < 2:
        raise InvalidArgumentError("k must be at least 2")
    t, z, deg, valid = _prepare(t, l, valid)
    pos = np.flatnonzero(valid).astype(np.int64)
    if math.comb(len(pos), k) > budget:
        raise ResourceLimitError(
            f"{math.comb(len(pos), k)} subsets exceed the budget of {budget}")
    sub = np.ascontiguousarray(z[pos])
    dist = _distance_matrix(sub, deg[pos])
    best_set, best = _exact_search(dist, pos, k, l)
    if best_set[0] < 0:
        raise InvalidArgumentError(
            f"series too short for {k} non-overlapping windows of length {l}")
    indices = pos[best_set]
    return MotifletSet(tuple(int(i) for i in indices), l,
                       float(_set_extent(z, deg, indices, k, np.inf)))


def extent_function(t, l, k_max=DEFAULT_K_MAX, valid=None):
    """EF(k) for k = 2..k_max with the motiflet found for each k.

    EF is made non-decreasing with a running maximum. If fewer than k_max
    non-overlapping windows fit, the curve stops at the largest feasible k.
    """
    if k_max < 2:
        raise InvalidArgumentError("k_max must be at least 2")
    search = _Search(t, l, k_max, valid)
    ef, sets = [], []
    for k in range(2, k_max + 1):
        found = search.best(k)
        if found is None:
            break
        ef.append(found.extent)
        sets.append(found)
    if not ef:
        raise InvalidArgumentError(
            f"series too short for two non-overlapping windows of length {l}")
    return ElbowAnalysis(np.maximum.accumulate(np.array(ef)), sets)


def find_elbows(ef, alpha=DEFAULT_ALPHA):
    """k values after which the extent function jumps.

    `ef` holds EF(2), EF(3), ... . k is an elbow when
    ``EF(k+1) - EF(k) > alpha * (EF(k) - EF(k-1))``; both differences are
    floored at ``ELBOW_NOISE_FLOOR`` so flat stretches cannot yield elbows
    on their own.
    """
    ef = np.asarray(ef, dtype=np.float64)
    if len(ef) < 3:
        raise InvalidArgumentError("need EF values for at least three k")
    diffs = np.maximum(np.diff(ef), ELBOW_NOISE_FLOOR)
    # diffs[i] = EF(i+3) - EF(i+2); k = i + 3 compares diffs[i+1] with diffs[i]
    hits = np.flatnonzero(diffs[1:] > alpha * diffs[:-1])
    return [int(i) + 3 for i in hits]


def search_elbows(t, l, k_max=DEFAULT_K_MAX, alpha=DEFAULT_ALPHA, valid=None):
    """Extent function plus its elbow points."""
    analysis = extent_function(t, l, k_max, valid)
    if len(analysis.ef) >= 3:
        analysis.elbows = find_elbows(analysis.ef, alpha)
    return analysis


def au_ef(ef):
    """Normalized area under the extent function, in [0, 1].

    The curve is scaled by its maximum and integrated with the trapezoid
    rule over k = 2..k_max, then divided by ``k_max - 2``.
    """
    ef = np.asarray(ef, dtype=np.float64)
    if len(ef) < 2:
        raise InvalidArgumentError("need EF values for at least two k")
    top = ef.max()
    if top <= 0:
        return 0.0
    y = ef / top
    return float(np.sum(0.5 * (y[1:] + y[:-1])) / (len(ef) - 1))


def find_best_motif_length(t, lengths, k_max=DEFAULT_K_MAX, valid_fn=None):
    """Candidate length with the smallest AU_EF (ties: the shortest).

    Lengths that do not fit at least three non-overlapping windows are
    skipped. `valid_fn`, if given, maps a length to a valid-window mask.
    """
    best_l, best_score = None, np.inf
    n = len(t)
    for l in sorted(set(int(x) for x in lengths)):
        if l < 2 or l > n:
            continue
        valid = valid_fn(l) if valid_fn else None
        try:
            analysis = extent_function(t, l, k_max, valid)
        except InvalidArgumentError:
            continue
        if len(analysis.ef) < 2:
            continue
        score = au_ef(analysis.ef)
        if score < best_score:
            best_l, best_score = l, score
    if best_l is None:
        raise InvalidArgumentError("no candidate motif length fits the series")
    return best_l


def length_grid(rate, low_s=0.2, high_s=8.0, count=12, min_samples=3):
    """Geometric grid of motif lengths in samples, duplicates removed."""
    secs = np.geomspace(low_s, high_s, count)
    samples = np.maximum(np.round(secs * rate).astype(int), min_samples)
    return sorted(set(int(s) for s in samples))


def _discover_series(series, boundaries, lengths, k_max, alpha):
    n = len(series)
    usable = [l for l in lengths if 2 <= l <= n]
    if not usable:
        return None, None

    def valid_fn(l):
        return boundary_mask(n, l, boundaries) if boundaries else None

    l = find_best_motif_length(series, usable, k_max, valid_fn)
    analysis = search_elbows(series, l, k_max, alpha, valid_fn(l))
    return l, analysis


def extract_motifs(dataset, band, lengths, k_max=DEFAULT_K_MAX,
                   alpha=DEFAULT_ALPHA, threads=1):
    """Discover motifs in every channel of every subject.

    For each (channel, subject) series the motif length is chosen by AU_EF,
    and one motif is emitted per elbow k: the window at the first index of
    that k's motiflet.

    Parameters
    ----------
    dataset : list of SubjectRecord
        Recordings already reduced to `band`.
    band : str or BandSpec
        Band name (or spec) used to annotate motifs.
    lengths : list of int
        Candidate motif lengths in samples.

    Returns
    -------
    list of Motif
        Sorted by (channel index, subject index, length, k).
    """
    if not dataset:
        raise InvalidArgumentError("dataset is empty")
    band_name = getattr(band, "name", band)
    channels = list(dataset[0].recording.channels)
    for rec in dataset:
        if list(rec.recording.channels) != channels:
            raise InvalidArgumentError(
                f"subject {rec.id} has channels {rec.recording.channels}, expected {channels}")
    min_len = min(lengths)

    items = [(ci, si) for ci in range(len(channels)) for si in range(len(dataset))]

    def work(item):
        ci, si = item
        rec = dataset[si]
        series = rec.recording.data[ci]
        if len(series) < min_len:
            log.warning("skipping %s/%s: %d samples < shortest length %d",
                        rec.id, channels[ci], len(series), min_len)
            return item, None, None
        l, analysis = _discover_series(series, rec.recording.boundaries, lengths, k_max, alpha)
        return item, l, analysis

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, items))
    else:
        results = [work(item) for item in items]

    motifs = []
    processed = 0
    for (ci, si), l, analysis in results:
        if analysis is None:
            continue
        processed += 1
        rec = dataset[si]
        series = rec.recording.data[ci]
        for k in analysis.elbows:
            motiflet = analysis.motiflets[k - 2]
            start = motiflet.indices[0]
            motifs.append(Motif(
                id=motif_id(band_name, channels[ci], rec.id, l, k, start),
                subject=rec.id,
                channel=channels[ci],
                band=band_name,
                start=start,
                length=l,
                k=k,
                values=tuple(float(v) for v in series[start:start + l]),
            ))
    if processed == 0:
        raise InvalidArgumentError("every series is shorter than the shortest motif length")
    order = {(c, s): (ci, si) for ci, c in enumerate(channels)
             for si, s in enumerate(r.id for r in dataset)}
    motifs.sort(key=lambda mo: (*order[(mo.channel, mo.subject)], mo.length, mo.k))
    return motifs
