import logging
import math

import numpy as np
import pytest

from motifeeg.errors import InvalidArgumentError
from motifeeg.matching import mean_match_distance
from motifeeg.motiflets import Motif
from motifeeg.selection import (ScoredMotif, difference_score, lowest_mean, score_motifs,
                                select_balanced)
from motifeeg.signal_prep import Recording, SubjectRecord
from motifeeg.store import read_scored_motifs, write_scored_motifs

M = 20
SPECIFIC = 3 * np.sin(np.linspace(0, 4 * np.pi, M))
COMMON = 3 * np.sign(np.sin(np.linspace(0, 2 * np.pi, M) + 0.3))


def planted_dataset(seed, per_class=4, n=600):
    """Class 1 carries SPECIFIC; everyone carries COMMON."""
    rng = np.random.default_rng(seed)
    recs = []
    for label in (0, 1):
        for i in range(per_class):
            t = rng.normal(size=n)
            for p in (40, 240, 440):
                t[p:p + M] = COMMON + 0.1 * rng.normal(size=M)
            if label:
                for p in (120, 320, 520):
                    t[p:p + M] = SPECIFIC + 0.1 * rng.normal(size=M)
            recs.append(SubjectRecord(f"c{label}s{i}", Recording(["Pz"], t, 24.0), label,
                                      "f" if i % 2 else "m"))
    return recs


def motif_of(values, subject="c1s0", start=0, mid="x"):
    return Motif(mid, subject, "Pz", "alpha", start, len(values), 3, tuple(map(float, values)))


def test_lowest_mean():
    assert lowest_mean([4, 1, 3, 2], 0.5) == 1.5
    assert lowest_mean([4, 1, 3, 2], 1.0) == 2.5
    assert lowest_mean([4, 1, 3], 0.5) == 2.0  # ceil(1.5) = 2 values: 1, 3
    assert lowest_mean([7, 5], 0.01) == 5  # at least one


def test_class_specific_beats_common():
    data = planted_dataset(0)
    spec = difference_score(motif_of(SPECIFIC), data)
    common = difference_score(motif_of(COMMON), data)
    assert spec > 1.0
    assert spec > 10 * common


def test_identical_classes_score_zero():
    rng = np.random.default_rng(1)
    series = [rng.normal(size=300) for _ in range(3)]
    data = [SubjectRecord(f"{lab}{i}", Recording(["Pz"], s, 24.0), lab)
            for lab in (0, 1) for i, s in enumerate(series)]
    assert difference_score(motif_of(series[0][10:30]), data) == 0.0


def test_matches_direct_computation():
    data = planted_dataset(2, per_class=3)
    mo = motif_of(SPECIFIC)
    means = {0: [], 1: []}
    for rec in data:
        means[rec.label].append(mean_match_distance(SPECIFIC, rec.recording.data[0]))
    for pct in (0.3, 0.5, 1.0):
        k = math.ceil(pct * 3)
        ref = abs(np.mean(sorted(means[0])[:k]) - np.mean(sorted(means[1])[:k]))
        assert abs(difference_score(mo, data, pct) - ref) < 1e-12
    assert difference_score(mo, data, 1.0) == pytest.approx(abs(np.mean(means[0]) - np.mean(means[1])))


def test_symmetry_and_affine_invariance():
    data = planted_dataset(3, per_class=3)
    mo = motif_of(SPECIFIC)
    base = difference_score(mo, data)
    swapped = [SubjectRecord(r.id, r.recording, 1 - r.label) for r in data]
    assert difference_score(mo, swapped) == pytest.approx(base, abs=1e-12)
    scaled = [SubjectRecord(r.id, Recording(["Pz"], 5 * r.recording.data - 2, 24.0), r.label)
              for r in data]
    assert difference_score(mo, scaled) == pytest.approx(base, abs=1e-6)


def test_difference_score_errors():
    data = planted_dataset(4, per_class=2)
    with pytest.raises(InvalidArgumentError):
        difference_score(motif_of(SPECIFIC), data, 0.0)
    with pytest.raises(InvalidArgumentError):
        difference_score(motif_of(SPECIFIC), [r for r in data if r.label == 1])
    other = Motif("y", "c1s0", "Fz", "alpha", 0, M, 3, tuple(SPECIFIC))
    with pytest.raises(InvalidArgumentError):
        difference_score(other, data)


def test_score_motifs_order_and_threads():
    data = planted_dataset(5, per_class=2)
    motifs = [motif_of(SPECIFIC, "c1s1", mid="b"), motif_of(COMMON, "c0s0", mid="a")]
    scored = score_motifs(motifs, data)
    assert [s.motif.id for s in scored] == ["a", "b"]
    assert [s.source_class for s in scored] == [0, 1]
    assert [s.source_group for s in scored] == ["m", "f"]
    assert score_motifs(motifs, data, threads=2) == scored
    with pytest.raises(InvalidArgumentError):
        score_motifs([motif_of(SPECIFIC, "nobody")], data)


def scored_set(seed=0, n=30):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        mo = motif_of([0.0, 1.0], mid=f"m{i:03d}")
        out.append(ScoredMotif(mo, float(rng.integers(0, 5)), i % 2, "fm"[i % 3 == 0]))
    return out


def test_select_balanced_cells():
    scored = scored_set()
    kept = select_balanced(scored, 3)
    cells = {}
    for sm in kept:
        cells.setdefault((sm.source_class, sm.source_group), []).append(sm)
    assert len(cells) == 4 and all(len(v) == 3 for v in cells.values())
    for cell, members in cells.items():
        rest = [s for s in scored if (s.source_class, s.source_group) == cell and s not in members]
        assert min(s.difference_score for s in members) >= max(s.difference_score for s in rest)
    assert len(select_balanced(scored, 20)) == len(scored)


def test_select_balanced_tie_break():
    a = ScoredMotif(motif_of([0.0, 1.0], mid="b"), 1.0, 0)
    b = ScoredMotif(motif_of([0.0, 1.0], mid="a"), 1.0, 0)
    assert select_balanced([a, b], 1) == [b]


def test_select_balanced_monotone():
    scored = scored_set(7)
    prev = set()
    for n in range(1, 12):
        cur = {s.motif.id for s in select_balanced(scored, n)}
        assert prev <= cur
        prev = cur


def test_select_balanced_warns_small_cell(caplog):
    with caplog.at_level(logging.WARNING):
        select_balanced(scored_set(n=4), 20)
    assert "has only" in caplog.text


def test_scored_jsonl_round_trip(tmp_path):
    scored = scored_set(n=5)
    write_scored_motifs(scored, tmp_path / "s.jsonl")
    assert read_scored_motifs(tmp_path / "s.jsonl") == scored
