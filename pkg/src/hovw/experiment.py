"""Cross-validated evaluation of HoVW retrieval and the global Zernike baseline."""

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import HovwError, InvalidParameterError, TrainingError
from .metrics import RECALL_GRID, average_precision, f1_score, precision_recall_curve
from .pipeline import DEFAULT_MIN_AREA, analyze_dataset, train_model
from .retrieval import query_analysis, query_baseline_zm_analysis

log = logging.getLogger(__name__)

HOVW = "hovw"
ZM = "zm"


def stratified_folds(labels, folds=10, seed=0):
    """Fold id per item; each class is spread so its per-fold counts differ by at most 1.

    Classes start at a rotating fold so overall fold sizes stay balanced too.
    """
    if folds < 2:
        raise InvalidParameterError("need at least 2 folds")
    labels = list(labels)
    rng = np.random.default_rng(seed)
    out = np.full(len(labels), -1, dtype=np.int64)
    start = 0
    for cls in sorted({lab for lab in labels if lab is not None}):
        members = np.array([i for i, lab in enumerate(labels) if lab == cls])
        members = members[rng.permutation(len(members))]
        for pos, i in enumerate(members):
            out[i] = (start + pos) % folds
        start = (start + len(members)) % folds
    return out


@dataclass
class EvalReport:
    method: str
    k: int
    bandwidth: float
    seed: int
    folds: int
    fold_precision: np.ndarray  # folds x grid, mean over that fold's queries
    fold_ap: list = field(default_factory=list)  # per-fold lists of query APs
    failures: dict = field(default_factory=dict)

    @property
    def precision(self):
        """Pointwise mean of the per-fold curves."""
        return self.fold_precision.mean(axis=0)

    @property
    def map(self):
        aps = [a for fold in self.fold_ap for a in fold]
        return math.fsum(aps) / len(aps) if aps else 0.0

    @property
    def precision_at_full_recall(self):
        return float(self.precision[-1])

    @property
    def f1(self):
        return f1_score(self.precision_at_full_recall)

    @property
    def f1_fold_mean(self):
        """F1 computed per fold, then averaged."""
        return float(np.mean([f1_score(p) for p in self.fold_precision[:, -1]]))

    @property
    def n_queries(self):
        return sum(len(f) for f in self.fold_ap)


def _evaluate_queries(rank_fn, queries, index_labels, labels_of):
    curves, aps = [], []
    for q in queries:
        ranked = rank_fn(q)
        cls = labels_of[q.image_id]
        rel = [labels_of[i] == cls for i in ranked]
        n_rel = sum(1 for lab in index_labels if lab == cls)
        curves.append(precision_recall_curve(rel, n_rel))
        aps.append(average_precision(rel))
    return np.mean(curves, axis=0), aps


def cross_validate(dataset, k, bandwidth, seed=0, folds=10, config=None, min_area=DEFAULT_MIN_AREA,
                   standardize=True, analyses=None, baseline=True):
    """10-fold style evaluation; returns ``{method: EvalReport}``.

    Each fold trains on the other folds, indexes those training images and
    queries every held-out image against the whole index.
    """
    data = dataset.categorized()
    failures = {}
    if analyses is None:
        analyses, failures = analyze_dataset(data, config, min_area)
    items = [it for it in data.items if it.image_id in analyses]
    labels_of = {it.image_id: it.label for it in items}
    fold_of = dict(zip(labels_of, stratified_folds([it.label for it in items], folds, seed)))
    reports = {HOVW: EvalReport(HOVW, k, bandwidth, seed, folds, np.zeros((folds, len(RECALL_GRID))))}
    if baseline:
        reports[ZM] = EvalReport(ZM, k, bandwidth, seed, folds, np.zeros((folds, len(RECALL_GRID))))
    for f in range(folds):
        train = data.subset([i for i, it in enumerate(data.items)
                             if it.image_id in fold_of and fold_of[it.image_id] != f])
        test = [analyses[it.image_id] for it in items if fold_of[it.image_id] == f]
        try:
            model = train_model(train, k, bandwidth, seed=seed, config=config, min_area=min_area,
                                standardize=standardize, analyses=analyses)
        except HovwError as exc:
            raise TrainingError(f"fold {f}, k={k}, h={bandwidth}: {exc}",
                                getattr(exc, "failures", None)) from exc
        index = model.index
        index_labels = [labels_of[e.image_id] for e in index.entries]
        n_all = len(index)
        curve, aps = _evaluate_queries(
            lambda q: query_analysis(index, model, q, n_all).image_ids, test, index_labels, labels_of)
        reports[HOVW].fold_precision[f] = curve
        reports[HOVW].fold_ap.append(aps)
        if baseline:
            curve, aps = _evaluate_queries(
                lambda q: query_baseline_zm_analysis(index, q, n_all).image_ids, test, index_labels, labels_of)
            reports[ZM].fold_precision[f] = curve
            reports[ZM].fold_ap.append(aps)
        log.info("fold %d/%d done: %d queries", f + 1, folds, len(test))
    for r in reports.values():
        r.failures = dict(failures)
    return reports


def run_experiment(dataset, grid, seed=0, folds=10, config=None, min_area=DEFAULT_MIN_AREA,
                   standardize=True, baseline=True):
    """Cross-validate every ``(k, bandwidth)`` of ``grid``; image analysis is shared across cells."""
    data = dataset.categorized()
    analyses, failures = analyze_dataset(data, config, min_area)
    out = []
    for k, h in grid:
        reports = cross_validate(data, k, h, seed, folds, config, min_area, standardize, analyses,
                                 baseline=baseline)
        for r in reports.values():
            r.failures = dict(failures)
        out.append(reports)
    return out


def write_reports(reports, directory, stem="report"):
    """Summary CSV (one row per method and grid cell) plus a long-format curve file."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    flat = [r for cell in reports for r in (cell.values() if isinstance(cell, dict) else [cell])]
    summary = directory / f"{stem}.csv"
    with open(summary, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["method", "k", "bandwidth", "seed", "folds", "queries", "map",
                    "precision_at_full_recall", "f1", "f1_fold_mean"]
                   + [f"p@{r:.2f}" for r in RECALL_GRID])
        for r in flat:
            w.writerow([r.method, r.k, r.bandwidth, r.seed, r.folds, r.n_queries, f"{r.map:.6f}",
                        f"{r.precision_at_full_recall:.6f}", f"{r.f1:.6f}", f"{r.f1_fold_mean:.6f}"]
                       + [f"{p:.6f}" for p in r.precision])
    long = directory / f"{stem}_curves.csv"
    with open(long, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["method", "k", "bandwidth", "recall", "precision", "fold"])
        for r in flat:
            for f, row in enumerate(r.fold_precision):
                for rec, p in zip(RECALL_GRID, row):
                    w.writerow([r.method, r.k, r.bandwidth, f"{rec:.2f}", f"{p:.6f}", f])
            for rec, p in zip(RECALL_GRID, r.precision):
                w.writerow([r.method, r.k, r.bandwidth, f"{rec:.2f}", f"{p:.6f}", "mean"])
    return summary, long


def interior_maximum(xs, ys):
    """``x`` at the largest ``y`` when that maximum lies strictly inside the range, else ``None``.

    ``xs`` must be sorted; ties go to the smallest ``x``.
    """
    ys = list(ys)
    if len(ys) < 3:
        return None
    i = max(range(len(ys)), key=lambda j: (ys[j], -j))
    return xs[i] if 0 < i < len(ys) - 1 else None


def write_sweep(reports, directory, stem="sweep"):
    """MAP per grid cell, one row per (k, bandwidth), for MAP-vs-k and MAP-vs-h plots."""
    path = Path(directory) / f"{stem}_map.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "bandwidth", "method", "map", "f1", "precision_at_full_recall"])
        for cell in reports:
            for r in cell.values():
                w.writerow([r.k, r.bandwidth, r.method, f"{r.map:.6f}", f"{r.f1:.6f}",
                            f"{r.precision_at_full_recall:.6f}"])
    return path
