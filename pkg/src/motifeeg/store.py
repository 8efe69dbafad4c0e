"""JSON-lines persistence for motifs and scored motifs."""

import json

from .errors import InvalidArgumentError
from .motiflets import Motif
from .selection import ScoredMotif


def _write(items, path):
    with open(path, "w") as fh:
        for item in items:
            fh.write(json.dumps(item.to_dict(), sort_keys=True))
            fh.write("\n")


def _read(path, cls):
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(cls.from_dict(json.loads(line)))
            except (KeyError, ValueError, TypeError) as exc:
                raise InvalidArgumentError(f"{path}:{lineno}: bad record ({exc})") from None
    return out


def write_motifs(motifs, path):
    _write(motifs, path)


def read_motifs(path):
    return _read(path, Motif)


def write_scored_motifs(scored, path):
    _write(scored, path)


def read_scored_motifs(path):
    return _read(path, ScoredMotif)
