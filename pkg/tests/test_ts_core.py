import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from motifeeg.errors import InvalidArgumentError
from motifeeg.ts_core import (distance_profile, pairwise_distance_matrix, sliding_mean_std,
                              trivial_match, z_normalize)


def naive_profile(q, t):
    """O(nm) oracle with the same flat-window conventions."""
    m = len(q)
    out = []
    for i in range(len(t) - m + 1):
        w = t[i:i + m]
        qf, wf = q.std() < 1e-8, w.std() < 1e-8
        if qf and wf:
            out.append(0.0)
        elif qf or wf:
            out.append(np.sqrt(2 * m))
        else:
            zq = (q - q.mean()) / q.std()
            zw = (w - w.mean()) / w.std()
            out.append(np.sqrt(np.sum((zq - zw) ** 2)))
    return np.array(out)


def test_z_normalize_examples():
    np.testing.assert_allclose(z_normalize([0, 1, 0]), [-0.70710678, 1.41421356, -0.70710678],
                               atol=1e-7)
    assert np.array_equal(z_normalize([5, 5, 5]), [0, 0, 0])
    x = z_normalize(np.random.default_rng(0).normal(size=50))
    np.testing.assert_allclose(z_normalize(x), x, atol=1e-9)


def test_z_normalize_empty():
    with pytest.raises(InvalidArgumentError):
        z_normalize([])


def test_sliding_mean_std_examples():
    means, stds = sliding_mean_std([1, 2, 3, 4], 2)
    np.testing.assert_allclose(means, [1.5, 2.5, 3.5])
    assert np.all(sliding_mean_std(np.full(10, 3.0), 4)[1] == 0)
    with pytest.raises(InvalidArgumentError):
        sliding_mean_std([1, 2], 3)


def test_sliding_mean_std_matches_loop():
    t = np.random.default_rng(1).normal(size=200) + 50
    means, stds = sliding_mean_std(t, 16)
    for i in range(len(means)):
        w = t[i:i + 16]
        assert abs(means[i] - w.mean()) < 1e-9
        assert abs(stds[i] - w.std()) < 1e-9


def test_profile_examples():
    rng = np.random.default_rng(2)
    t = rng.normal(size=64)
    assert distance_profile(t[:8], t)[0] < 1e-6
    assert distance_profile([0, 1, 0], [0, 2, 0])[0] < 1e-7
    q = rng.normal(size=8)
    np.testing.assert_allclose(distance_profile(q, t), naive_profile(q, t), atol=1e-6)
    with pytest.raises(InvalidArgumentError):
        distance_profile(np.ones(10), np.ones(5))


@pytest.mark.parametrize("m", [2, 31, 32, 33, 128])
def test_fft_and_direct_paths_agree(m):
    rng = np.random.default_rng(m)
    t = rng.normal(size=400)
    q = rng.normal(size=m)
    direct = distance_profile(q, t, method="direct")
    fft = distance_profile(q, t, method="fft")
    np.testing.assert_allclose(fft, direct, atol=1e-6)
    np.testing.assert_allclose(direct, naive_profile(q, t), atol=1e-6)


def test_flat_windows():
    t = np.concatenate([np.zeros(10), np.random.default_rng(3).normal(size=10)])
    d = distance_profile(np.arange(4.0), t)
    assert np.allclose(d[:7], np.sqrt(8))
    d = distance_profile(np.zeros(4), t)
    assert np.allclose(d[:7], 0) and np.allclose(d[10:], np.sqrt(8))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.01, 100), st.floats(-1e3, 1e3))
def test_profile_affine_invariant(seed, a, b):
    rng = np.random.default_rng(seed)
    t = rng.normal(size=100)
    q = rng.normal(size=12)
    np.testing.assert_allclose(distance_profile(a * q + b, t), distance_profile(q, t), atol=1e-6)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 40))
def test_profile_bounded(seed, m):
    rng = np.random.default_rng(seed)
    d = distance_profile(rng.normal(size=m), rng.normal(size=120))
    assert np.all(d >= 0) and np.all(d <= 2 * np.sqrt(m) + 1e-9)


def test_pairwise_matrix():
    rng = np.random.default_rng(4)
    t = rng.normal(size=80)
    pm = pairwise_distance_matrix(t, 10)
    d = pm.distances
    assert np.array_equal(d, d.T)
    assert np.all(np.diag(d) == 0)
    for i in range(0, d.shape[0], 7):
        np.testing.assert_allclose(d[i], distance_profile(t[i:i + 10], t), atol=1e-6)
    i, j = np.indices(d.shape)
    assert np.array_equal(pm.excluded, 2 * np.abs(i - j) < 10)
    with pytest.raises(InvalidArgumentError):
        pairwise_distance_matrix(t, 81)


def test_pairwise_periodic():
    t = np.sin(2 * np.pi * np.arange(200) / 25)
    d = pairwise_distance_matrix(t, 25).distances
    assert d[0, 25] < 1e-6 and d[10, 60] < 1e-6


def test_triangle_inequality():
    rng = np.random.default_rng(5)
    d = pairwise_distance_matrix(rng.normal(size=150), 12).distances
    for _ in range(500):
        a, b, c = rng.integers(0, d.shape[0], 3)
        assert d[a, c] <= d[a, b] + d[b, c] + 1e-9


def test_trivial_match_rule():
    assert trivial_match(0, 4, 10) and not trivial_match(0, 5, 10)
    assert trivial_match(0, 4, 9) and not trivial_match(0, 5, 9)
