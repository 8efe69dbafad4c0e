"""Synthetic two-class EEG-like datasets with planted motif families.

Every subject gets white background noise on each channel. Class-1
subjects additionally carry copies of a class-specific burst on one
channel; optionally every subject carries a second, common burst family
on another channel. Plant positions are written to ``ground_truth.json``.
"""

import json
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import InvalidArgumentError
from ..signal_prep import Recording, write_recording_csv
from .manifest import ManifestEntry, write_manifest


@dataclass
class SynthSpec:
    n_per_class: int = 10
    channels: tuple = ("Fz", "Cz", "Pz")
    rate: float = 96.0
    duration_s: float = 40.0
    noise: float = 1.0
    amplitude: float = 3.0
    motif_s: float = 1.5
    occurrences: int = 10
    signal_channel: str = "Pz"
    common_channel: str = "Fz"
    common_occurrences: int = 4
    margin_s: float = 2.0
    align: int = 4
    additive: bool = True
    seed: int = 0
    groups: tuple = field(default=("none",))

    def validate(self):
        if self.n_per_class < 2:
            raise InvalidArgumentError("need at least 2 subjects per class")
        for ch in (self.signal_channel, self.common_channel):
            if ch is not None and ch not in self.channels:
                raise InvalidArgumentError(f"channel {ch!r} not in {self.channels}")
        return self


def burst(rate, seconds, f0, f1):
    """Hann-windowed linear chirp from `f0` to `f1` Hz."""
    n = int(round(seconds * rate))
    t = np.arange(n) / rate
    phase = 2 * np.pi * (f0 * t + 0.5 * (f1 - f0) / seconds * t * t)
    return np.hanning(n) * np.sin(phase)


def class_template(spec):
    return spec.amplitude * burst(spec.rate, spec.motif_s, 8.5, 10.5)


def common_template(spec):
    return spec.amplitude * burst(spec.rate, spec.motif_s, 10.5, 8.5)


def plant_positions(rng, n, width, count, margin, align):
    """`count` non-overlapping starts in ``[margin, n - margin - width]``,
    multiples of `align`, with at least one `width` of gap between copies."""
    slot = 2 * width
    slot += (-slot) % align
    n_slots = (n - 2 * margin - width) // slot
    if n_slots < count:
        raise InvalidArgumentError(f"recording too short for {count} plants of {width} samples")
    chosen = np.sort(rng.choice(n_slots, count, replace=False))
    first = margin + (-margin) % align
    return [int(first + s * slot) for s in chosen]


def _plant(row, start, tmpl, spec, rng):
    """Add `tmpl` onto the background, or overwrite the background with it
    plus a little noise so that the copy's extent is sharply defined."""
    seg = row[start:start + len(tmpl)]
    if spec.additive:
        seg += tmpl
    else:
        seg[:] = tmpl + 0.1 * spec.noise * rng.standard_normal(len(tmpl))


def generate_synthetic_dataset(out_dir, spec=None):
    """Write recordings, a manifest and ground truth under `out_dir`.

    Returns the manifest path.
    """
    spec = (spec or SynthSpec()).validate()
    os.makedirs(os.path.join(out_dir, "recordings"), exist_ok=True)
    rng = np.random.default_rng(spec.seed)
    n = int(round(spec.duration_s * spec.rate))
    margin = int(round(spec.margin_s * spec.rate))
    tmpl_a, tmpl_b = class_template(spec), common_template(spec)
    width = len(tmpl_a)
    sig_ch = spec.channels.index(spec.signal_channel)

    entries, truth = [], {}
    for label in (0, 1):
        for i in range(spec.n_per_class):
            sid = f"s{label}{i:02d}"
            group = spec.groups[i % len(spec.groups)]
            data = spec.noise * rng.standard_normal((len(spec.channels), n))
            plants = {}
            if label == 1:
                pos = plant_positions(rng, n, width, spec.occurrences, margin, spec.align)
                for p in pos:
                    _plant(data[sig_ch], p, tmpl_a, spec, rng)
                plants["class_specific"] = {"channel": spec.signal_channel, "starts": pos}
            if spec.common_channel is not None and spec.common_occurrences > 0:
                ch = spec.channels.index(spec.common_channel)
                pos = plant_positions(rng, n, width, spec.common_occurrences, margin, spec.align)
                for p in pos:
                    _plant(data[ch], p, tmpl_b, spec, rng)
                plants["common"] = {"channel": spec.common_channel, "starts": pos}
            path = os.path.join(out_dir, "recordings", f"{sid}.csv")
            write_recording_csv(Recording(spec.channels, data, spec.rate), path)
            entries.append(ManifestEntry(sid, path, spec.rate, label, group))
            truth[sid] = {"label": label, "plants": plants}

    manifest = os.path.join(out_dir, "manifest.csv")
    write_manifest(entries, manifest)
    with open(os.path.join(out_dir, "ground_truth.json"), "w") as fh:
        json.dump({"spec": asdict(spec), "length_samples": width, "rate": spec.rate,
                   "subjects": truth}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def raw_to_band_index(raw, rate, decimate, trim_s, window_s, removed, band_rate):
    """Map a raw sample index to the band-series index after preprocessing.

    Returns None when the sample was trimmed or lies in a removed (or the
    dropped trailing) artifact window.
    """
    prep_rate = rate / decimate
    idx = raw / decimate - int(round(trim_s * prep_rate))
    width = int(round(window_s * prep_rate))
    if idx < 0:
        return None
    w = int(idx // width)
    if w in removed:
        return None
    idx -= sum(1 for r in removed if r < w) * width
    return int(round(idx * band_rate / prep_rate))
