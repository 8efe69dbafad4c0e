"""Dataset manifest: one row per subject, labels explicit or derived from
questionnaire scores."""

import csv
import json
import os
from dataclasses import dataclass, field

from ..errors import ConfigError, InvalidArgumentError

COLUMNS = ("id", "path", "rate_hz", "group", "label", "baseline_score", "followup_score")
SCORE_RANGE = (0.0, 60.0)


def derive_label(baseline, followup):
    """1 (responder) iff the follow-up score is at most half the baseline."""
    for name, v in (("baseline", baseline), ("followup", followup)):
        if not SCORE_RANGE[0] <= v <= SCORE_RANGE[1]:
            raise InvalidArgumentError(f"{name} score {v} outside {SCORE_RANGE}")
    return int(followup <= 0.5 * baseline)


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    path: str
    rate: float
    label: int
    group: str = "none"
    baseline_score: float = None
    followup_score: float = None
    meta: dict = field(default_factory=dict, compare=False)


def _opt_float(row, key, where):
    raw = (row.get(key) or "").strip()
    if not raw:
        return None
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{where}: {key} {raw!r} is not a number") from None


def read_manifest(path, check_files=True):
    """Load a manifest CSV and its optional ``<path>.json`` sidecar.

    Recording paths are resolved relative to the manifest's directory. The
    sidecar maps subject ids to extra metadata dicts.
    """
    base = os.path.dirname(os.path.abspath(path))
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            missing = {"id", "path", "rate_hz"} - set(reader.fieldnames or ())
            if missing:
                raise ConfigError(f"{path}: missing columns {sorted(missing)}")
            rows = list(reader)
    except OSError as exc:
        raise ConfigError(f"cannot read manifest: {exc}") from None

    sidecar = {}
    if os.path.exists(path + ".json"):
        with open(path + ".json") as fh:
            try:
                sidecar = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}.json: {exc}") from None

    entries, seen = [], set()
    for lineno, row in enumerate(rows, 2):
        where = f"{path}:{lineno}"
        sid = (row.get("id") or "").strip()
        if not sid:
            raise ConfigError(f"{where}: empty id")
        if sid in seen:
            raise ConfigError(f"{where}: duplicate id {sid!r}")
        seen.add(sid)
        rec_path = os.path.join(base, row["path"].strip())
        if check_files and not os.path.isfile(rec_path):
            raise ConfigError(f"{where}: recording {rec_path} not found")
        rate = _opt_float(row, "rate_hz", where)
        if rate is None or rate <= 0:
            raise ConfigError(f"{where}: rate_hz must be positive")
        label = _opt_float(row, "label", where)
        base_s = _opt_float(row, "baseline_score", where)
        follow_s = _opt_float(row, "followup_score", where)
        has_pair = base_s is not None and follow_s is not None
        if (label is None) == (not has_pair):
            raise ConfigError(f"{where}: give either a label or a baseline/followup score pair")
        if (base_s is None) != (follow_s is None):
            raise ConfigError(f"{where}: incomplete score pair")
        if label is None:
            try:
                label = derive_label(base_s, follow_s)
            except InvalidArgumentError as exc:
                raise ConfigError(f"{where}: {exc}") from None
        elif label not in (0, 1):
            raise ConfigError(f"{where}: label must be 0 or 1")
        group = (row.get("group") or "").strip() or "none"
        entries.append(ManifestEntry(sid, rec_path, rate, int(label), group, base_s,
                                     follow_s, dict(sidecar.get(sid, {}))))
    if not entries:
        raise ConfigError(f"{path}: no subjects")
    return entries


def write_manifest(entries, path):
    """Write entries with paths relative to the manifest directory."""
    base = os.path.dirname(os.path.abspath(path))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for e in entries:
            has_pair = e.baseline_score is not None
            w.writerow([e.id, os.path.relpath(e.path, base), repr(float(e.rate)), e.group,
                        "" if has_pair else e.label,
                        repr(e.baseline_score) if has_pair else "",
                        repr(e.followup_score) if has_pair else ""])
    meta = {e.id: e.meta for e in entries if e.meta}
    if meta:
        with open(path + ".json", "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
