"""Ranking motifs by how well they separate the two classes."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .matching import mean_match_distance
from .motiflets import Motif

log = logging.getLogger(__name__)

DEFAULT_PERCENTAGE = 0.5
DEFAULT_N_PER_CELL = 20


@dataclass(frozen=True)
class ScoredMotif:
    motif: Motif
    difference_score: float
    source_class: int
    source_group: str = "none"

    def to_dict(self):
        d = self.motif.to_dict()
        d.update(difference_score=self.difference_score,
                 source_class=self.source_class,
                 source_group=self.source_group)
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(Motif.from_dict(d), float(d["difference_score"]),
                   int(d["source_class"]), str(d["source_group"]))


def lowest_mean(values, percentage):
    """Mean of the lowest ``ceil(percentage * len(values))`` values (at least one)."""
    values = np.sort(np.asarray(values, dtype=np.float64))
    count = max(1, math.ceil(percentage * len(values) - 1e-12))
    return float(values[:count].mean())


def class_match_distances(motif, dataset):
    """Mean match distance of `motif` in each subject, grouped by label.

    Only the channel the motif came from is searched.
    """
    per_class = {0: [], 1: []}
    for rec in dataset:
        if motif.channel not in rec.recording.channels:
            raise InvalidArgumentError(
                f"subject {rec.id} has no channel {motif.channel!r} (motif {motif.id})")
        series = rec.recording.channel(motif.channel)
        per_class[rec.label].append(
            mean_match_distance(motif.values, series, rec.recording.boundaries))
    return per_class


def difference_score(motif, dataset, percentage=DEFAULT_PERCENTAGE):
    """Absolute gap between the classes' best mean match distances.

    For every subject the motif is matched against the subject's series on
    the motif's channel of origin. Per class, the lowest `percentage` of
    those mean distances are averaged.
    """
    if not 0 < percentage <= 1:
        raise InvalidArgumentError(f"percentage must lie in (0, 1], got {percentage}")
    labels = {rec.label for rec in dataset}
    if labels != {0, 1}:
        raise InvalidArgumentError("difference score needs subjects of both classes")
    per_class = class_match_distances(motif, dataset)
    return abs(lowest_mean(per_class[0], percentage) - lowest_mean(per_class[1], percentage))


def score_motifs(motifs, dataset, percentage=DEFAULT_PERCENTAGE, threads=1):
    """Difference scores for all motifs, returned in motif-id order."""
    by_id = {rec.id: rec for rec in dataset}

    def work(motif):
        src = by_id.get(motif.subject)
        if src is None:
            raise InvalidArgumentError(f"motif {motif.id} comes from unknown subject {motif.subject}")
        return ScoredMotif(motif, difference_score(motif, dataset, percentage),
                           src.label, src.group)

    ordered = sorted(motifs, key=lambda mo: mo.id)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(work, ordered))
    return [work(mo) for mo in ordered]


def select_balanced(scored, n_per_cell=DEFAULT_N_PER_CELL):
    """Keep the `n_per_cell` best motifs of every (class, group) cell.

    Within a cell motifs are ranked by descending difference score, ties by
    ascending id. The result is ordered by cell, then rank.
    """
    cells = {}
    for sm in scored:
        cells.setdefault((sm.source_class, sm.source_group), []).append(sm)
    kept = []
    for cell in sorted(cells):
        members = sorted(cells[cell], key=lambda sm: (-sm.difference_score, sm.motif.id))
        if len(members) < n_per_cell:
            log.warning("cell class=%s group=%s has only %d motifs (wanted %d)",
                        cell[0], cell[1], len(members), n_per_cell)
        kept.extend(members[:n_per_cell])
    return kept
