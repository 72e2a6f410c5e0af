"""Stratified cross-validation, confusion matrices and report files.

Folds are dealt per class: each class's instances are shuffled with the
seeded generator and assigned round-robin, so per-class counts differ by at
most one across folds.  The confusion matrix pools all folds and is keyed by
the canonical class order; accuracy is reported to four decimals.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import InfeasibleError, TrainingError
from .ingest import Dataset
from .labels import CLASS_NAMES, N_CLASSES

SUMMARY_CSV = "summary.csv"
CONFUSION_CSV = "confusion.csv"
HEATMAP_CSV = "heatmap.csv"


@dataclass(frozen=True)
class FoldPlan:
    k: int
    seed: int
    assignment: np.ndarray  # fold index per instance

    def fold_indices(self, fold: int) -> tuple[np.ndarray, np.ndarray]:
        """(train indices, test indices) for one fold."""
        test = np.flatnonzero(self.assignment == fold)
        train = np.flatnonzero(self.assignment != fold)
        return train, test


def stratified_folds(y: np.ndarray | Dataset, k: int = 10, seed: int = 0) -> FoldPlan:
    """Per-class shuffled round-robin fold assignment."""
    if isinstance(y, Dataset):
        y = y.y
    y = np.asarray(y)
    if k < 2:
        raise InfeasibleError(f"fold count must be >= 2, got {k}")
    if len(y) == 0:
        raise InfeasibleError("cannot fold an empty dataset")
    rng = np.random.default_rng(seed)
    assignment = np.empty(len(y), dtype=np.int64)
    offset = 0  # carried across classes to balance fold sizes
    for c in range(N_CLASSES):
        idx = np.flatnonzero(y == c)
        if len(idx) == 0:
            continue
        idx = idx[rng.permutation(len(idx))]
        assignment[idx] = (offset + np.arange(len(idx))) % k
        offset = (offset + len(idx)) % k
    return FoldPlan(k=k, seed=seed, assignment=assignment)


def confusion_matrix(actual: np.ndarray, predicted: np.ndarray) -> np.ndarray:
    """12x12 count matrix, rows actual, columns predicted, canonical order."""
    actual = np.asarray(actual, dtype=np.int64)
    predicted = np.asarray(predicted, dtype=np.int64)
    m = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    np.add.at(m, (actual, predicted), 1)
    return m


@dataclass
class EvalReport:
    accuracy: float                 # percent, trace/total of the pooled matrix
    fold_accuracies: list[float]    # percent per fold
    matrix: np.ndarray
    n: int
    metadata: dict = field(default_factory=dict)

    @property
    def accuracy_text(self) -> str:
        return f"{self.accuracy:.4f} %"


def cross_validate(
    train_fn: Callable[[Dataset], object],
    ds: Dataset,
    plan: FoldPlan,
    metadata: dict | None = None,
) -> EvalReport:
    """Train on k-1 folds, score the held-out fold, pool one confusion matrix.

    ``train_fn`` returns a model exposing ``predict(X) -> class codes``.
    Tree size and leaf count are recorded from the last fold's model when the
    model exposes them.
    """
    matrix = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    fold_accuracies = []
    meta = dict(metadata or {})
    for fold in range(plan.k):
        train_idx, test_idx = plan.fold_indices(fold)
        if len(test_idx) == 0:
            fold_accuracies.append(0.0)
            continue
        sub = Dataset(ds.attributes, ds.X[train_idx], ds.y[train_idx])
        try:
            model = train_fn(sub)
        except Exception as e:  # noqa: BLE001 - deliberately annotated with the fold
            raise TrainingError(fold, e) from e
        pred = model.predict(ds.X[test_idx])
        actual = ds.y[test_idx]
        matrix += confusion_matrix(actual, pred)
        fold_accuracies.append(100.0 * float((pred == actual).sum()) / len(test_idx))
        if hasattr(model, "size"):
            meta["tree_size"] = model.size()
            meta["leaves"] = model.leaf_count()
    total = int(matrix.sum())
    accuracy = 100.0 * float(np.trace(matrix)) / total if total else 0.0
    return EvalReport(
        accuracy=accuracy,
        fold_accuracies=fold_accuracies,
        matrix=matrix,
        n=total,
        metadata=meta,
    )


def write_confusion_csv(matrix: np.ndarray, path: str | Path) -> None:
    """Appendix-style 12x12 layout: header row and one row per actual class."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["class"] + list(CLASS_NAMES))
        for i, name in enumerate(CLASS_NAMES):
            writer.writerow([name] + [int(v) for v in matrix[i]])


def write_heatmap_csv(matrix: np.ndarray, path: str | Path) -> None:
    """Row-normalized matrix for plotting; empty classes give zero rows."""
    sums = matrix.sum(axis=1, keepdims=True).astype(float)
    norm = np.divide(matrix, sums, out=np.zeros(matrix.shape, dtype=float), where=sums > 0)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["class"] + list(CLASS_NAMES))
        for i, name in enumerate(CLASS_NAMES):
            writer.writerow([name] + [f"{v:.6f}" for v in norm[i]])


def write_summary_csv(report: EvalReport, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["key", "value"])
        for key in sorted(report.metadata):
            writer.writerow([key, report.metadata[key]])
        writer.writerow(["instances", report.n])
        writer.writerow(["accuracy_percent", f"{report.accuracy:.4f}"])
        for i, acc in enumerate(report.fold_accuracies):
            writer.writerow([f"fold_{i}_accuracy_percent", f"{acc:.4f}"])


def export_report(report: EvalReport, out_dir: str | Path) -> list[Path]:
    """Write summary, confusion and heatmap CSVs; returns the file paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / SUMMARY_CSV, out / CONFUSION_CSV, out / HEATMAP_CSV]
    write_summary_csv(report, paths[0])
    write_confusion_csv(report.matrix, paths[1])
    write_heatmap_csv(report.matrix, paths[2])
    return paths
