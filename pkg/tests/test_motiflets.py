import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from motifeeg.errors import InvalidArgumentError, ResourceLimitError
from motifeeg.motiflets import (Motif, approx_k_motiflet, au_ef, boundary_mask,
                                exact_k_motiflet, extent, extent_function, extract_motifs,
                                find_best_motif_length, find_elbows, length_grid, motif_id)
from motifeeg.signal_prep import Recording, SubjectRecord
from motifeeg.store import read_motifs, write_motifs
from motifeeg.ts_core import pairwise_distance_matrix, z_normalize
from planted import planted_series


def naive_extent(t, idx, l):
    z = [z_normalize(t[i:i + l]) for i in idx]
    return max(np.linalg.norm(a - b) for a, b in itertools.combinations(z, 2))


def brute_force_motiflet(t, l, k):
    """Exhaustive search over all non-overlapping k-subsets (tiny inputs only)."""
    best, best_set = np.inf, None
    for combo in itertools.combinations(range(len(t) - l + 1), k):
        if any(2 * abs(a - b) < l for a, b in itertools.combinations(combo, 2)):
            continue
        e = naive_extent(t, combo, l)
        if e < best - 1e-12:
            best, best_set = e, combo
    return best_set, best


def test_extent_examples():
    t = np.random.default_rng(0).normal(size=60)
    t[30:38] = 2 * t[0:8] + 5
    assert extent(t, [0, 30], 8) < 1e-6
    idx = [3, 17, 29, 44]
    assert abs(extent(t, idx, 8) - naive_extent(t, idx, 8)) < 1e-9
    assert extent(t, idx, 8) == extent(t, idx[::-1], 8)
    with pytest.raises(InvalidArgumentError):
        extent(t, [3], 8)


def test_pair_case_is_matrix_minimum():
    t = np.random.default_rng(1).normal(size=80)
    pm = pairwise_distance_matrix(t, 6)
    d = np.where(pm.excluded, np.inf, pm.distances)
    result = approx_k_motiflet(t, 6, 2)
    assert abs(result.extent - d.min()) < 1e-9
    exact = exact_k_motiflet(t, 6, 2)
    assert abs(exact.extent - d.min()) < 1e-9


def test_exact_matches_brute_force():
    for seed in range(5):
        t = np.random.default_rng(seed).normal(size=24)
        exact = exact_k_motiflet(t, 4, 3)
        ref_set, ref = brute_force_motiflet(t, 4, 3)
        assert abs(exact.extent - ref) < 1e-9
        assert exact.indices == ref_set


def test_planted_recovery():
    t, starts, _ = planted_series(3, n=400, m=10, occurrences=4, noise=0.05)
    approx = approx_k_motiflet(t, 10, 4)
    assert sorted(approx.indices) == starts
    assert approx.extent < extent(t, [starts[0], starts[1], starts[2], starts[3] + 40], 10)


def test_approx_at_least_exact_random():
    for seed in range(10):
        t = np.random.default_rng(100 + seed).normal(size=50)
        for k in (2, 3):
            assert approx_k_motiflet(t, 6, k).extent >= exact_k_motiflet(t, 6, k).extent - 1e-12


def test_exact_budget():
    t = np.random.default_rng(0).normal(size=400)
    with pytest.raises(ResourceLimitError):
        exact_k_motiflet(t, 5, 4, budget=1000)


def test_series_too_short():
    with pytest.raises(InvalidArgumentError):
        approx_k_motiflet(np.arange(10.0), 8, 3)


def test_constant_series_zero_extent():
    assert approx_k_motiflet(np.ones(50), 5, 3).extent == 0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(3, 12), st.integers(2, 6))
def test_motiflet_invariants(seed, l, k):
    t = np.random.default_rng(seed).normal(size=120)
    result = approx_k_motiflet(t, l, k)
    assert result.k == k == len(set(result.indices))
    for a, b in itertools.combinations(result.indices, 2):
        assert 2 * abs(a - b) >= l
    assert abs(result.extent - naive_extent(t, result.indices, l)) < 1e-9


def test_valid_mask_respected():
    t, starts, _ = planted_series(4, n=400, m=10, occurrences=4)
    valid = boundary_mask(len(t), 10, [starts[0] + 5])
    result = approx_k_motiflet(t, 10, 3, valid)
    assert starts[0] not in result.indices
    assert all(valid[i] for i in result.indices)


def test_boundary_mask():
    mask = boundary_mask(10, 3, [5])
    assert mask.tolist() == [True, True, True, False, False, True, True, True]


def test_extent_function_shape():
    t, _, _ = planted_series(5, occurrences=5)
    analysis = extent_function(t, 20, 12)
    assert len(analysis.ef) == 11
    assert np.all(np.diff(analysis.ef) >= 0)
    assert len(extent_function(t, 20, 2).ef) == 1
    with pytest.raises(InvalidArgumentError):
        extent_function(t, 20, 1)


def test_extent_function_truncates():
    t = np.random.default_rng(0).normal(size=100)
    ef = extent_function(t, 20, 20).ef
    assert 2 <= len(ef) <= 8  # at most 9 windows fit 10 apart


def test_find_elbows_examples():
    assert find_elbows([1, 1.1, 1.2, 5.0, 5.1]) == [4]
    assert find_elbows(np.arange(10.0)) == []
    assert find_elbows([0, 0, 0, 0, 5, 5.1]) == [5]
    with pytest.raises(InvalidArgumentError):
        find_elbows([1, 2])


def test_planted_jump():
    t, _, _ = planted_series(6, occurrences=5)
    ef = extent_function(t, 20, 12).ef
    jumps = np.diff(ef)
    assert np.argmax(jumps) + 2 == 5  # EF(5) -> EF(6)


def test_au_ef_examples():
    assert au_ef([3, 3, 3, 3]) == 1.0
    assert au_ef([0, 1]) == 0.5
    assert au_ef([0, 0, 0]) == 0.0
    flat = np.linspace(1, 5, 10)
    early = np.array([1, 1.1, 1.2, 5, 5, 5, 5, 5, 5, 5])
    late = np.array([1, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 5])
    assert au_ef(late) < au_ef(flat) < au_ef(early)
    with pytest.raises(InvalidArgumentError):
        au_ef([1])


def test_best_length_single_and_affine():
    t, _, _ = planted_series(7, occurrences=10, pattern=np.linspace(-2, 2, 20))
    assert find_best_motif_length(t, [20], 10) == 20
    a = find_best_motif_length(t, [10, 20, 40], 10)
    assert find_best_motif_length(3 * t - 7, [10, 20, 40], 10) == a


def test_length_grid():
    assert length_grid(24) == [5, 7, 9, 13, 18, 26, 36, 50, 70, 98, 137, 192]
    assert length_grid(4)[0] == 3


def _dataset(seeds):
    recs = []
    for i, seed in enumerate(seeds):
        t, starts, pattern = planted_series(seed, n=500, m=20, occurrences=5, noise=0.05,
                                            pattern=3 * np.sin(np.linspace(0, 3 * np.pi, 20)))
        recs.append((SubjectRecord(f"s{i}", Recording(["c0"], t[None], 24.0), i % 2), starts))
    return recs


def test_extract_motifs_planted():
    pairs = _dataset([1, 2])
    motifs = extract_motifs([r for r, _ in pairs], "alpha", [10, 20, 40], k_max=10)
    for rec, starts in pairs:
        mine = [m for m in motifs if m.subject == rec.id]
        assert mine
        # the emitted window lies inside one planted copy
        assert any(s <= m.start and m.start + m.length <= s + 20 for m in mine for s in starts)
        for m in mine:
            assert len(m.values) == m.length
            series = rec.recording.data[0]
            assert np.array_equal(m.values, series[m.start:m.start + m.length])
            assert m.id == motif_id("alpha", "c0", rec.id, m.length, m.k, m.start)


def test_extract_motifs_fixed_length_hits_plants():
    pairs = _dataset([1, 2])
    motifs = extract_motifs([r for r, _ in pairs], "alpha", [20], k_max=10)
    for rec, starts in pairs:
        assert any(m.k == 5 and m.start in starts for m in motifs if m.subject == rec.id)


def test_extract_motifs_order_and_threads(tmp_path):
    recs = [r for r, _ in _dataset([3, 4, 5])]
    one = extract_motifs(recs, "alpha", [10, 20], k_max=8)
    two = extract_motifs(recs, "alpha", [10, 20], k_max=8, threads=3)
    assert one == two
    write_motifs(one, tmp_path / "m.jsonl")
    assert read_motifs(tmp_path / "m.jsonl") == one
    for line in open(tmp_path / "m.jsonl"):
        assert set(json.loads(line)) == {"id", "subject", "channel", "band", "start",
                                         "length_samples", "k", "values"}


def test_extract_motifs_errors():
    rec = SubjectRecord("a", Recording(["c0"], np.zeros((1, 5)), 24.0), 0)
    with pytest.raises(InvalidArgumentError):
        extract_motifs([rec], "alpha", [10])
    with pytest.raises(InvalidArgumentError):
        extract_motifs([], "alpha", [10])


def test_motif_dict_round_trip():
    m = Motif("x", "s", "c", "alpha", 3, 4, 5, (0.1, 0.2, 0.3, 0.4))
    assert Motif.from_dict(m.to_dict()) == m
