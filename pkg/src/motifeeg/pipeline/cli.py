"""Command-line entry point."""

import argparse
import logging
import os
import sys
import traceback

from ..errors import ConfigError, MotifError
from .config import load_config
from .runner import STAGES, Run, StageError, run_pipeline, run_stage
from .synth import SynthSpec, generate_synthetic_dataset

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_INTERNAL = 0, 2, 3, 4

SYNTH_CONFIG = """\
# Settings for the bundled synthetic dataset (raw rate 96 Hz).
bands = ["alpha"]
seed = {seed}

[preprocess]
decimate = 1
trim_s = 1.0
power_z = 5.0

[discovery]
k_max = 20

[selection]
percentage = 0.5
n_per_cell = 20

[classify]
folds = 5
rfe_k = 8
"""


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run configuration (defaults if omitted)")
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument("--band", action="append",
                        help="restrict to this band (repeatable); default: all configured")
    common.add_argument("--out-dir", default="out", help="artifact directory (default: out)")
    common.add_argument("--threads", type=int, help="worker threads (default: from config)")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")

    parser = argparse.ArgumentParser(
        prog="motifeeg", description="Motif discovery and classification for EEG recordings.")
    sub = parser.add_subparsers(dest="command", required=True)
    for stage in (*STAGES, "pipeline"):
        p = sub.add_parser(stage, parents=[common],
                           help="run all stages" if stage == "pipeline" else f"run the {stage} stage")
        p.add_argument("--manifest", required=True, help="dataset manifest CSV")
    p = sub.add_parser("synth", parents=[common], help="write the synthetic demo dataset")
    p.add_argument("--subjects-per-class", type=int, default=10)
    p.add_argument("--noise", type=float, default=1.0, help="background noise std")
    return parser


def _synth(args):
    seed = 0 if args.seed is None else args.seed
    spec = SynthSpec(n_per_class=args.subjects_per_class, noise=args.noise, seed=seed)
    manifest = generate_synthetic_dataset(args.out_dir, spec)
    with open(os.path.join(args.out_dir, "config.toml"), "w") as fh:
        fh.write(SYNTH_CONFIG.format(seed=seed))
    logging.getLogger("motifeeg").info("stage=synth subjects=%d manifest=%s",
                                       2 * spec.n_per_class, manifest)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(stream=sys.stderr, format="%(message)s",
                        level=logging.DEBUG if args.verbose else logging.INFO)
    stage = args.command
    try:
        if stage == "synth":
            _synth(args)
            return EXIT_OK
        stage = "config"
        config = load_config(args.config)
        if args.threads is not None and args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        stage = "manifest"
        run = Run(args.manifest, config, args.out_dir, args.band, args.threads, args.seed)
        stage = args.command
        if stage == "pipeline":
            run_pipeline(run)
        else:
            run_stage(run, stage)
    except StageError as exc:
        print(f"error [{exc.stage}]: {exc.cause}", file=sys.stderr)
        if isinstance(exc.cause, ConfigError):
            return EXIT_CONFIG
        return EXIT_DATA
    except ConfigError as exc:
        print(f"error [{stage}]: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (MotifError, ValueError, OSError) as exc:
        print(f"error [{stage}]: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001 - last-resort exit code
        traceback.print_exc()
        print(f"internal error [{stage}]: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK
