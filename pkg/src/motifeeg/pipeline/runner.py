"""Stage-by-stage orchestration. Every stage reads its inputs from and
writes its outputs to the output directory, so any stage can be rerun on
cached artifacts."""

import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..classify.estimators import fit_estimator
from ..classify.lda import fisher_projection
from ..classify.rfe import rfe
from ..classify.validation import _as_candidates, grid_search, stratified_kfold_cv
from ..errors import InvalidArgumentError, MotifError
from ..features import build_feature_matrix, read_feature_csv, write_feature_csv
from ..motiflets import extract_motifs
from ..selection import score_motifs, select_balanced
from ..signal_prep import (Recording, SubjectRecord, extract_band, preprocess,
                           read_recording_csv, write_recording_csv)
from ..store import read_motifs, read_scored_motifs, write_motifs, write_scored_motifs
from .manifest import read_manifest

log = logging.getLogger("motifeeg")

STAGES = ("preprocess", "discover", "score", "select", "features", "train", "evaluate")


class StageError(Exception):
    """Wraps the error that aborted a stage."""

    def __init__(self, stage, cause):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


class Run:
    """Manifest, config and output directory shared by all stages."""

    def __init__(self, manifest_path, config, out_dir, bands=None, threads=None, seed=None):
        self.entries = read_manifest(manifest_path)
        self.config = config
        self.out_dir = out_dir
        self.threads = threads or config.threads
        self.seed = config.seed if seed is None else seed
        self.bands = [config.band(b) for b in bands] if bands else list(config.bands)
        os.makedirs(out_dir, exist_ok=True)

    def path(self, *parts):
        return os.path.join(self.out_dir, *parts)

    def map(self, fn, items):
        if self.threads > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                return list(pool.map(fn, items))
        return [fn(x) for x in items]


def _json_dump(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _require(path, stage):
    if not os.path.exists(path):
        raise InvalidArgumentError(f"{path} is missing; run the {stage} stage first")
    return path


def stage_preprocess(run):
    """Clean every recording and write one CSV per (band, subject)."""
    p = run.config.prep

    def work(entry):
        rec = read_recording_csv(entry.path, entry.rate)
        try:
            clean, removed = preprocess(rec, p.decimate, p.trim_s, (p.band_low, p.band_high),
                                        p.window_s, p.power_z)
        except InvalidArgumentError as exc:
            raise InvalidArgumentError(f"subject {entry.id}: {exc}") from None
        out = {"removed_windows": removed, "prep_rate": clean.rate, "bands": {}}
        for band in run.bands:
            b = extract_band(clean, band)
            write_recording_csv(b, run.path("prep", band.name, f"{entry.id}.csv"))
            out["bands"][band.name] = {"rate": b.rate, "n_samples": b.n_samples,
                                       "boundaries": list(b.boundaries)}
        return entry.id, out

    for band in run.bands:
        os.makedirs(run.path("prep", band.name), exist_ok=True)
    index_path = run.path("prep", "index.json")
    index = {}
    if os.path.exists(index_path):
        with open(index_path) as fh:
            index = json.load(fh)
    for sid, info in run.map(work, run.entries):
        prev = index.get(sid, {}).get("bands", {})
        info["bands"] = {**prev, **info["bands"]}
        index[sid] = info
    _json_dump(index, index_path)
    return {"subjects": len(run.entries),
            "removed_windows": sum(len(v["removed_windows"]) for v in index.values())}


def load_band_dataset(run, band):
    """SubjectRecords of the preprocessed `band` series, in manifest order."""
    with open(_require(run.path("prep", "index.json"), "preprocess")) as fh:
        index = json.load(fh)
    dataset = []
    for e in run.entries:
        info = index.get(e.id, {}).get("bands", {}).get(band.name)
        if info is None:
            raise InvalidArgumentError(f"no preprocessed {band.name} series for {e.id}")
        rec = read_recording_csv(run.path("prep", band.name, f"{e.id}.csv"), info["rate"])
        rec = Recording(rec.channels, rec.data, rec.rate, info["boundaries"])
        dataset.append(SubjectRecord(e.id, rec, e.label, e.group, e.meta))
    return dataset


def stage_discover(run):
    d = run.config.discovery
    motifs = []
    for band in run.bands:
        dataset = load_band_dataset(run, band)
        lengths = d.lengths(band.target_rate)
        motifs.extend(extract_motifs(dataset, band, lengths, d.k_max, d.alpha, run.threads))
    write_motifs(motifs, run.path("motifs.jsonl"))
    return {"motifs": len(motifs)}


def _by_band(items, band):
    return [x for x in items if getattr(x, "motif", x).band == band.name]


def stage_score(run):
    motifs = read_motifs(_require(run.path("motifs.jsonl"), "discover"))
    scored = []
    for band in run.bands:
        dataset = load_band_dataset(run, band)
        scored.extend(score_motifs(_by_band(motifs, band), dataset, run.config.percentage,
                                   run.threads))
    scored.sort(key=lambda s: s.motif.id)
    write_scored_motifs(scored, run.path("scored_motifs.jsonl"))
    return {"scored": len(scored)}


def stage_select(run):
    scored = read_scored_motifs(_require(run.path("scored_motifs.jsonl"), "score"))
    kept = []
    for band in run.bands:
        kept.extend(select_balanced(_by_band(scored, band), run.config.n_per_cell))
    write_scored_motifs(kept, run.path("selected_motifs.jsonl"))
    return {"selected": len(kept)}


def stage_features(run):
    selected = read_scored_motifs(_require(run.path("selected_motifs.jsonl"), "select"))
    shapes = {}
    for band in run.bands:
        fm = build_feature_matrix(load_band_dataset(run, band), _by_band(selected, band), band)
        write_feature_csv(fm, run.path(f"features_{band.name}.csv"))
        shapes[band.name] = f"{len(fm.rows)}x{len(fm.cols)}"
    return shapes


def _load_features(run, band):
    fm = read_feature_csv(_require(run.path(f"features_{band.name}.csv"), "features"))
    if not fm.cols:
        raise InvalidArgumentError(f"band {band.name}: no motifs were selected")
    return fm


def model_to_dict(model):
    kind = type(model).__name__
    if kind == "DecisionTreeModel":
        return {"type": "tree", "criterion": model.criterion, "max_depth": model.max_depth,
                "feature": model.feature.tolist(),
                "threshold": [None if np.isnan(t) else float(t) for t in model.threshold],
                "left": model.left.tolist(), "right": model.right.tolist(),
                "value": model.value.tolist(), "importances": model.importances.tolist()}
    if kind == "RandomForestModel":
        return {"type": "forest", "seeds": model.seeds,
                "trees": [model_to_dict(t) for t in model.trees]}
    return {"type": "logistic", "penalty": model.penalty, "C": model.C,
            "weights": model.weights.tolist(), "bias": model.bias, "mean": model.mean.tolist(),
            "scale": model.scale.tolist(), "n_iter": model.n_iter, "converged": model.converged}


def stage_train(run):
    """RFE plus grid search on all subjects, then a final interpretable model."""
    c = run.config.classify
    out = {}
    for band in run.bands:
        fm = _load_features(run, band)
        X, y = fm.values, fm.labels
        cols = list(range(len(fm.cols)))
        if c.rfe_k < len(cols):
            cols = rfe(X, y, c.rfe_estimator, c.rfe_params, c.rfe_k, run.seed).selected
        candidates = _as_candidates(c.grid)
        folds = min(c.folds, int(np.bincount(y, minlength=2).min()))
        if folds < 2:
            raise InvalidArgumentError(f"band {band.name}: each class needs at least 2 subjects")
        (kind, params), scores = grid_search(X[:, cols], y, fm.groups, candidates, folds, run.seed)
        model = fit_estimator(kind, params, X[:, cols], y, run.seed)
        _json_dump({"band": band.name, "kind": kind, "params": params,
                    "selected_features": [fm.cols[i] for i in cols],
                    "grid": [{"kind": k, "params": p, "mean_val_f1": s}
                             for (k, p), s in zip(candidates, scores)],
                    "model": model_to_dict(model)},
                   run.path(f"model_{band.name}.json"))
        out[band.name] = kind
    return out


def stage_evaluate(run):
    """Outer CV report, label-permutation baseline and Fisher projection."""
    c = run.config.classify
    out = {}
    for band in run.bands:
        fm = _load_features(run, band)

        def cv(labels):
            return stratified_kfold_cv(fm.values, labels, fm.groups, c.folds, c.grid, run.seed,
                                       c.rfe_k, (c.rfe_estimator, c.rfe_params), fm.cols,
                                       run.threads)

        report = cv(fm.labels)
        report.extra.update(band=band.name, n_subjects=len(fm.rows), n_features=len(fm.cols),
                            percentage=run.config.percentage, n_per_cell=run.config.n_per_cell,
                            training_scores="refit on each outer training fold")
        if c.permutations:
            # several shuffles: a single one is a noisy estimate of the null level
            rng = np.random.default_rng(run.seed)
            runs = [cv(rng.permutation(fm.labels)).means for _ in range(c.permutations)]
            report.extra["permutation_baseline"] = {
                "n_permutations": c.permutations, "runs": runs,
                "means": {k: float(np.mean([r[k] for r in runs])) for k in runs[0]}}
        report.write_json(run.path(f"report_{band.name}.json"))
        report.write_fold_csv(run.path(f"folds_{band.name}.csv"))

        model_path = run.path(f"model_{band.name}.json")
        cols = fm.cols
        if os.path.exists(model_path):
            with open(model_path) as fh:
                cols = json.load(fh)["selected_features"]
        proj = fisher_projection(fm.subset(cols).values, fm.labels)
        with open(run.path(f"fisher_{band.name}.csv"), "w") as fh:
            fh.write("subject,label,group,projection\n")
            for sid, lab, grp, v in zip(fm.rows, fm.labels, fm.groups, proj):
                fh.write(f"{sid},{lab},{grp},{float(v)!r}\n")
        out[band.name] = round(report.means["val_f1"], 4)
    return out


STAGE_FUNCS = dict(zip(STAGES, (stage_preprocess, stage_discover, stage_score, stage_select,
                                stage_features, stage_train, stage_evaluate)))


def run_stage(run, stage):
    """Run one stage, logging a single summary line; errors become StageError."""
    t0 = time.perf_counter()
    try:
        counts = STAGE_FUNCS[stage](run)
    except (MotifError, ValueError, OSError) as exc:
        raise StageError(stage, exc) from exc
    fields = " ".join(f"{k}={v}" for k, v in sorted(counts.items()))
    log.info("stage=%s bands=%s seconds=%.2f %s", stage, ",".join(b.name for b in run.bands),
             time.perf_counter() - t0, fields)
    return counts


def run_pipeline(run, stages=STAGES):
    for stage in stages:
        run_stage(run, stage)
    return {b.name: run.path(f"report_{b.name}.json") for b in run.bands}
