"""Subjects x motifs matrix of mean closest-match distances."""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .matching import mean_match_distance


@dataclass(eq=False)
class FeatureMatrix:
    rows: list
    cols: list
    values: np.ndarray
    labels: np.ndarray
    groups: list

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64).reshape(len(self.rows), len(self.cols))
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if not len(self.rows) == len(self.labels) == len(self.groups):
            raise InvalidArgumentError("rows, labels and groups differ in length")

    def subset(self, cols):
        """Matrix restricted to the given column ids, in that order."""
        idx = [self.cols.index(c) for c in cols]
        return FeatureMatrix(list(self.rows), list(cols), self.values[:, idx],
                             self.labels.copy(), list(self.groups))


def build_feature_matrix(dataset, motifs, band=None):
    """Entry (i, j) is the mean match distance of motif j in subject i.

    `motifs` may hold Motif or ScoredMotif objects; columns follow motif-id
    order, rows follow `dataset` order. `band`, if given, must match every
    motif's band.
    """
    motifs = sorted((getattr(m, "motif", m) for m in motifs), key=lambda mo: mo.id)
    band_name = getattr(band, "name", band)
    values = np.zeros((len(dataset), len(motifs)))
    for j, mo in enumerate(motifs):
        if band_name is not None and mo.band != band_name:
            raise InvalidArgumentError(f"motif {mo.id} belongs to band {mo.band}, not {band_name}")
        for i, rec in enumerate(dataset):
            if mo.channel not in rec.recording.channels:
                raise InvalidArgumentError(
                    f"subject {rec.id} has no channel {mo.channel!r} needed by motif {mo.id}")
            values[i, j] = mean_match_distance(
                mo.values, rec.recording.channel(mo.channel), rec.recording.boundaries)
    return FeatureMatrix([rec.id for rec in dataset], [mo.id for mo in motifs], values,
                         [rec.label for rec in dataset], [rec.group for rec in dataset])


def write_feature_csv(fm, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["subject", "label", "group", *fm.cols])
        for sid, label, group, row in zip(fm.rows, fm.labels, fm.groups, fm.values):
            writer.writerow([sid, int(label), group, *(repr(float(v)) for v in row)])


def read_feature_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:3] != ["subject", "label", "group"]:
            raise InvalidArgumentError(f"{path}: unexpected header {header[:3]}")
        rows, labels, groups, values = [], [], [], []
        for rec in reader:
            rows.append(rec[0])
            labels.append(int(rec[1]))
            groups.append(rec[2])
            values.append([float(v) for v in rec[3:]])
    return FeatureMatrix(rows, header[3:], np.array(values).reshape(len(rows), len(header) - 3),
                         labels, groups)
