"""Run configuration loaded from TOML and validated up front."""

import sys
from dataclasses import dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..classify.estimators import KINDS, PAPER_GRIDS, check_params, expand_grid
from ..errors import ConfigError, InvalidArgumentError
from ..motiflets import length_grid
from ..signal_prep import DEFAULT_BANDS, BandSpec

BUILTIN_BANDS = {b.name: b for b in DEFAULT_BANDS}


@dataclass
class PrepConfig:
    decimate: int = 4
    trim_s: float = 30.0
    band_low: float = 1.0
    band_high: float = 40.0
    window_s: float = 2.0
    power_z: float = 3.0


@dataclass
class DiscoveryConfig:
    length_low_s: float = 0.2
    length_high_s: float = 8.0
    length_count: int = 12
    k_max: int = 20
    alpha: float = 2.0

    def lengths(self, rate):
        return length_grid(rate, self.length_low_s, self.length_high_s, self.length_count)


@dataclass
class ClassifyConfig:
    folds: int = 5
    rfe_k: int = 8
    rfe_estimator: str = "logistic"
    rfe_params: dict = field(default_factory=lambda: {"C": 1.0, "penalty": "l2"})
    grid: dict = field(default_factory=lambda: {"tree": dict(PAPER_GRIDS["tree"])})
    permutations: int = 5


@dataclass
class RunConfig:
    bands: list = field(default_factory=lambda: list(DEFAULT_BANDS))
    prep: PrepConfig = field(default_factory=PrepConfig)
    discovery: DiscoveryConfig = field(default_factory=DiscoveryConfig)
    percentage: float = 0.5
    n_per_cell: int = 20
    classify: ClassifyConfig = field(default_factory=ClassifyConfig)
    seed: int = 0
    threads: int = 1

    def band(self, name):
        for b in self.bands:
            if b.name == name:
                return b
        raise ConfigError(f"band {name!r} is not configured ({[b.name for b in self.bands]})")

    def validate(self):
        p, d, c = self.prep, self.discovery, self.classify
        checks = [
            (p.decimate >= 1, "preprocess.decimate must be >= 1"),
            (p.trim_s >= 0, "preprocess.trim_s must be >= 0"),
            (0 < p.band_low < p.band_high, "preprocess band edges need 0 < low < high"),
            (p.window_s > 0, "preprocess.window_s must be positive"),
            (p.power_z > 0, "preprocess.power_z must be positive"),
            (0 < d.length_low_s <= d.length_high_s, "discovery lengths need 0 < low <= high"),
            (d.length_count >= 1, "discovery.length_count must be >= 1"),
            (d.k_max >= 3, "discovery.k_max must be >= 3"),
            (d.alpha > 0, "discovery.alpha must be positive"),
            (0 < self.percentage <= 1, "selection.percentage must lie in (0, 1]"),
            (self.n_per_cell >= 1, "selection.n_per_cell must be >= 1"),
            (c.folds >= 2, "classify.folds must be >= 2"),
            (c.rfe_k >= 1, "classify.rfe_k must be >= 1"),
            (c.permutations >= 0, "classify.permutations must be >= 0"),
            (self.threads >= 1, "threads must be >= 1"),
            (len(self.bands) >= 1, "at least one band is required"),
            (len({b.name for b in self.bands}) == len(self.bands), "duplicate band names"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)
        try:
            check_params(c.rfe_estimator, c.rfe_params)
            for kind, grid in c.grid.items():
                if not expand_grid(kind, grid):
                    raise ConfigError(f"classify.grid.{kind} is empty")
        except InvalidArgumentError as exc:
            raise ConfigError(str(exc)) from None
        if not c.grid:
            raise ConfigError("classify.grid is empty")
        return self


def _section(raw, name, cls):
    data = raw.get(name, {})
    if not isinstance(data, dict):
        raise ConfigError(f"[{name}] must be a table")
    known = set(cls.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown keys in [{name}]: {sorted(unknown)}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigError(f"[{name}]: {exc}") from None


def config_from_dict(raw):
    """Build a RunConfig from parsed TOML.

    Bands are listed by name in ``bands``; names other than theta, alpha
    and beta need a ``[band.<name>]`` table with low, high and target_rate.
    """
    top = {"bands", "band", "preprocess", "discovery", "selection", "classify", "seed", "threads"}
    unknown = set(raw) - top
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    custom = raw.get("band", {})
    bands = []
    for name in raw.get("bands", [b.name for b in DEFAULT_BANDS]):
        try:
            if name in custom:
                spec = custom[name]
                bands.append(BandSpec(name, float(spec["low"]), float(spec["high"]),
                                      float(spec["target_rate"])))
            elif name in BUILTIN_BANDS:
                bands.append(BUILTIN_BANDS[name])
            else:
                raise ConfigError(f"unknown band {name!r}")
        except (KeyError, InvalidArgumentError) as exc:
            raise ConfigError(f"band {name!r}: {exc}") from None

    sel = raw.get("selection", {})
    unknown = set(sel) - {"percentage", "n_per_cell"}
    if unknown:
        raise ConfigError(f"unknown keys in [selection]: {sorted(unknown)}")

    cls_raw = dict(raw.get("classify", {}))
    grid = cls_raw.pop("grid", None)
    classify = _section({"classify": cls_raw}, "classify", ClassifyConfig)
    if grid is not None:
        bad = set(grid) - set(KINDS)
        if bad:
            raise ConfigError(f"unknown estimator kinds in classify.grid: {sorted(bad)}")
        classify.grid = {k: dict(v) for k, v in grid.items()}

    cfg = RunConfig(
        bands=bands,
        prep=_section(raw, "preprocess", PrepConfig),
        discovery=_section(raw, "discovery", DiscoveryConfig),
        percentage=float(sel.get("percentage", 0.5)),
        n_per_cell=int(sel.get("n_per_cell", 20)),
        classify=classify,
        seed=int(raw.get("seed", 0)),
        threads=int(raw.get("threads", 1)),
    )
    return cfg.validate()


def load_config(path=None):
    """Read and validate a TOML config; ``None`` gives the defaults."""
    if path is None:
        return RunConfig().validate()
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_dict(raw)
