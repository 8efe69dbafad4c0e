"""EEG preprocessing: decimation, trimming, re-referencing, filtering,
artifact-window rejection and per-band extraction."""

import csv
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.signal import butter, sosfiltfilt

from .errors import EmptyRecordingError, InvalidArgumentError

FILTER_ORDER = 4


@dataclass(eq=False)
class Recording:
    """Multichannel signal sampled at `rate` Hz.

    ``data`` has shape (channels, samples). ``boundaries`` lists sample
    indices where non-contiguous segments were spliced together (index of
    the first sample after each splice).
    """

    channels: tuple
    data: np.ndarray
    rate: float
    boundaries: tuple = field(default=())

    def __post_init__(self):
        self.channels = tuple(str(c) for c in self.channels)
        self.data = np.atleast_2d(np.asarray(self.data, dtype=np.float64))
        if self.data.shape[0] != len(self.channels):
            raise InvalidArgumentError(
                f"{len(self.channels)} channel names for {self.data.shape[0]} data rows")
        if len(set(self.channels)) != len(self.channels):
            raise InvalidArgumentError(f"duplicate channel names in {self.channels}")
        if self.data.shape[1] < 1:
            raise InvalidArgumentError("recording has no samples")
        if not self.rate > 0:
            raise InvalidArgumentError(f"sampling rate must be positive, got {self.rate}")
        self.boundaries = tuple(int(b) for b in self.boundaries)

    @property
    def n_samples(self):
        return self.data.shape[1]

    def channel(self, name):
        try:
            return self.data[self.channels.index(name)]
        except ValueError:
            raise InvalidArgumentError(f"channel {name!r} not in {self.channels}") from None


@dataclass(frozen=True)
class BandSpec:
    name: str
    low: float
    high: float
    target_rate: float

    def __post_init__(self):
        if not 0 < self.low < self.high:
            raise InvalidArgumentError(f"band {self.name}: need 0 < low < high")
        if self.target_rate < 2 * self.high:
            raise InvalidArgumentError(
                f"band {self.name}: target rate {self.target_rate} below 2*high")


@dataclass(eq=False)
class SubjectRecord:
    """A recording with its class label (0/1), optional group and metadata."""

    id: str
    recording: Recording
    label: int
    group: str = "none"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.label not in (0, 1):
            raise InvalidArgumentError(f"subject {self.id}: label must be 0 or 1")


THETA = BandSpec("theta", 4.0, 8.0, 16.0)
ALPHA = BandSpec("alpha", 8.0, 12.0, 24.0)
BETA = BandSpec("beta", 12.0, 30.0, 60.0)
DEFAULT_BANDS = (THETA, ALPHA, BETA)


def decimate(rec, factor):
    """Keep every `factor`-th sample, starting with the first."""
    factor = int(factor)
    if factor < 1:
        raise InvalidArgumentError(f"decimation factor must be >= 1, got {factor}")
    if factor == 1:
        return rec
    return Recording(
        rec.channels, rec.data[:, ::factor], rec.rate / factor,
        tuple(sorted({-(-b // factor) for b in rec.boundaries})))


def trim_edges(rec, seconds):
    """Drop ``round(seconds * rate)`` samples from both ends."""
    if seconds < 0:
        raise InvalidArgumentError("trim length must be non-negative")
    cut = int(round(seconds * rec.rate))
    if 2 * cut >= rec.n_samples:
        raise InvalidArgumentError(
            f"recording of {rec.n_samples / rec.rate:.3f} s is too short to trim {seconds} s per side")
    if cut == 0:
        return rec
    bounds = tuple(b - cut for b in rec.boundaries if cut < b < rec.n_samples - cut)
    return Recording(rec.channels, rec.data[:, cut:rec.n_samples - cut], rec.rate, bounds)


def average_reference(rec):
    """Subtract the cross-channel mean from every channel at every sample."""
    if len(rec.channels) < 2:
        raise InvalidArgumentError("average reference needs at least two channels")
    return replace(rec, data=rec.data - rec.data.mean(axis=0, keepdims=True))


def bandpass(rec, low, high, order=FILTER_ORDER):
    """Zero-phase Butterworth bandpass between `low` and `high` Hz."""
    nyq = rec.rate / 2
    if not 0 < low < high:
        raise InvalidArgumentError(f"invalid band [{low}, {high}]")
    if high >= nyq:
        raise InvalidArgumentError(f"upper edge {high} Hz is not below Nyquist ({nyq} Hz)")
    sos = butter(order, [low, high], btype="bandpass", fs=rec.rate, output="sos")
    # sosfiltfilt pads with an odd extension; very short inputs get a shorter pad
    padlen = min(3 * (2 * len(sos) + 1), rec.n_samples - 1)
    return replace(rec, data=sosfiltfilt(sos, rec.data, axis=1, padlen=padlen))


def reject_artifact_windows(rec, window_s=2.0, power_z=3.0):
    """Remove non-overlapping windows that carry high-power artifacts.

    Each channel's windows get a mean-square power; a window is removed from
    every channel when, in any channel, its power exceeds that channel's
    mean + ``power_z`` * std of window powers. The trailing partial window is
    always dropped. ``power_z = inf`` disables rejection (but still drops the
    partial window).

    Returns
    -------
    Recording, list of int
        The spliced recording, with new boundaries at each splice, and the
        indices of removed windows.
    """
    width = int(round(window_s * rec.rate))
    if width < 1:
        raise InvalidArgumentError("artifact window shorter than one sample")
    n_win = rec.n_samples // width
    if n_win == 0:
        raise EmptyRecordingError("recording is shorter than one artifact window")
    blocks = rec.data[:, :n_win * width].reshape(len(rec.channels), n_win, width)
    power = (blocks * blocks).mean(axis=2)
    if np.isinf(power_z):
        bad = np.zeros(n_win, dtype=bool)
    else:
        limit = power.mean(axis=1, keepdims=True) + power_z * power.std(axis=1, keepdims=True)
        bad = (power > limit).any(axis=0)
    removed = [int(i) for i in np.flatnonzero(bad)]
    keep = np.flatnonzero(~bad)
    if len(keep) == 0:
        raise EmptyRecordingError("artifact rejection removed every window")

    data = blocks[:, keep, :].reshape(len(rec.channels), -1)
    # splices from this pass plus surviving earlier ones
    new_start = {int(w): i * width for i, w in enumerate(keep)}
    bounds = set()
    for i in range(1, len(keep)):
        if keep[i] != keep[i - 1] + 1:
            bounds.add(i * width)
    for b in rec.boundaries:
        w, off = divmod(b, width)
        if w in new_start and off:
            bounds.add(new_start[w] + off)
        elif w in new_start and w - 1 in new_start:
            bounds.add(new_start[w])
    return Recording(rec.channels, data, rec.rate, tuple(sorted(bounds))), removed


def resample(rec, target_rate):
    """Resample to `target_rate`: sample picking for integer ratios, linear
    interpolation otherwise."""
    ratio = rec.rate / target_rate
    if ratio < 1:
        raise InvalidArgumentError("upsampling is not supported")
    if abs(ratio - round(ratio)) < 1e-9:
        out = decimate(rec, int(round(ratio)))
        return replace(out, rate=float(target_rate))
    n_out = int(np.floor((rec.n_samples - 1) / ratio)) + 1
    src = np.arange(rec.n_samples) / rec.rate
    dst = np.arange(n_out) / target_rate
    data = np.vstack([np.interp(dst, src, ch) for ch in rec.data])
    bounds = tuple(sorted({int(np.ceil(b / ratio)) for b in rec.boundaries}))
    return Recording(rec.channels, data, float(target_rate), bounds)


def extract_band(rec, band):
    """Bandpass to `band` and resample to its target rate."""
    return resample(bandpass(rec, band.low, band.high), band.target_rate)


def preprocess(rec, decimate_factor=4, trim_s=30.0, band_edges=(1.0, 40.0),
               window_s=2.0, power_z=3.0):
    """Broadband chain: decimate, trim, average reference, bandpass, reject.

    Returns the cleaned recording and the removed artifact-window indices.
    """
    rec = decimate(rec, decimate_factor)
    rec = trim_edges(rec, trim_s)
    rec = average_reference(rec)
    rec = bandpass(rec, *band_edges)
    return reject_artifact_windows(rec, window_s, power_z)


def read_recording_csv(path, rate):
    """Read a recording: header row of channel names, one sample per row."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InvalidArgumentError(f"{path}: empty file") from None
        rows = [[float(v) for v in row] for row in reader if row]
    if not rows:
        raise InvalidArgumentError(f"{path}: no samples")
    data = np.asarray(rows, dtype=np.float64)
    if data.shape[1] != len(header):
        raise InvalidArgumentError(f"{path}: {len(header)} names for {data.shape[1]} columns")
    return Recording(tuple(h.strip() for h in header), data.T, float(rate))


def write_recording_csv(rec, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(rec.channels)
        for row in rec.data.T:
            writer.writerow([repr(float(v)) for v in row])
