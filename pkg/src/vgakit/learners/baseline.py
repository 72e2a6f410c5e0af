"""The two simplest classifiers: majority class and one-attribute rules.

OneR builds a frequency-table rule per attribute and keeps the attribute
with the least total training error.  Numeric attributes are discretized
greedily on the sorted values: a new interval opens when the running
majority class changes and the current interval already holds the minimum
bucket size; adjacent intervals that agree on the class are merged.  Rule
lists render in the classic text form ("< threshold -> Class") with a
"(N/M instances correct)" trailer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import InfeasibleError
from ..ingest import Dataset
from ..labels import CLASS_ORDER, N_CLASSES


@dataclass(frozen=True)
class ZeroRModel:
    """Constant prediction of the training majority class."""

    class_code: int
    proportion: float

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.full(len(X), self.class_code, dtype=np.int64)

    def to_json(self) -> str:
        return json.dumps(
            {
                "model": "zeror",
                "class": CLASS_ORDER[self.class_code].name,
                "proportion": self.proportion,
            },
            indent=2,
        )


def train_zeror(ds: Dataset) -> ZeroRModel:
    if len(ds) == 0:
        raise InfeasibleError("cannot train on an empty dataset")
    counts = np.bincount(ds.y, minlength=N_CLASSES)
    code = int(np.argmax(counts))  # ties resolve to the first class in canonical order
    return ZeroRModel(class_code=code, proportion=float(counts[code]) / len(ds))


@dataclass(frozen=True)
class OneRModel:
    """Single-attribute rule list.

    Numeric rules: ``classes[i]`` applies when value < ``thresholds[i]``,
    the final class when value >= the last threshold.  Nominal rules map
    each attribute value code to a class; unseen codes fall back to the
    training majority.
    """

    attribute: str
    attribute_index: int
    kind: str                               # "numeric" | "nominal"
    thresholds: tuple[float, ...] = ()
    classes: tuple[int, ...] = ()
    value_classes: dict[int, int] = field(default_factory=dict)
    value_names: tuple[str, ...] = ()
    fallback_class: int = 0
    train_correct: int = 0
    train_total: int = 0

    def predict(self, X: np.ndarray) -> np.ndarray:
        col = X[:, self.attribute_index]
        if self.kind == "numeric":
            idx = np.searchsorted(np.array(self.thresholds), col, side="right")
            return np.array(self.classes, dtype=np.int64)[idx]
        out = np.full(len(col), self.fallback_class, dtype=np.int64)
        for code, cls in self.value_classes.items():
            out[col.astype(np.int64) == code] = cls
        return out

    def rule_lines(self) -> list[str]:
        """Rule text in the classic dump format."""
        lines = [f"{self.attribute}:"]
        if self.kind == "numeric":
            if not self.thresholds:
                lines.append(f"< inf -> {CLASS_ORDER[self.classes[0]].token}")
            else:
                for thr, cls in zip(self.thresholds, self.classes[:-1]):
                    lines.append(f"< {thr!r} -> {CLASS_ORDER[cls].token}")
                lines.append(f">= {self.thresholds[-1]!r} -> {CLASS_ORDER[self.classes[-1]].token}")
        else:
            for code in sorted(self.value_classes):
                lines.append(f"{self.value_names[code]} -> {CLASS_ORDER[self.value_classes[code]].token}")
        lines.append(f"({self.train_correct}/{self.train_total} instances correct)")
        return lines

    def to_json(self) -> str:
        return json.dumps(
            {
                "model": "oner",
                "attribute": self.attribute,
                "kind": self.kind,
                "thresholds": list(self.thresholds),
                "classes": [CLASS_ORDER[c].name for c in self.classes],
                "value_classes": {
                    self.value_names[k]: CLASS_ORDER[v].name for k, v in self.value_classes.items()
                },
                "train_correct": self.train_correct,
                "train_total": self.train_total,
            },
            indent=2,
        )


def _majority(counts: np.ndarray) -> int:
    return int(np.argmax(counts))


def _numeric_rule(values: np.ndarray, y: np.ndarray, min_bucket: int):
    """Greedy class-run discretization of one numeric attribute.

    Returns (thresholds, interval classes, correct count).  Equal values can
    never be split across intervals.
    """
    order = np.argsort(values, kind="stable")
    v = values[order]
    c = y[order]
    intervals: list[tuple[np.ndarray, float, float]] = []  # (class counts, first v, last v)
    counts = np.zeros(N_CLASSES, dtype=np.int64)
    counts[c[0]] = 1
    first_v = last_v = v[0]
    size = 1
    for i in range(1, len(v)):
        majority = _majority(counts)
        if size >= min_bucket and c[i] != majority and v[i] > last_v:
            intervals.append((counts, first_v, last_v))
            counts = np.zeros(N_CLASSES, dtype=np.int64)
            first_v = v[i]
            size = 0
        counts[c[i]] += 1
        last_v = v[i]
        size += 1
    intervals.append((counts, first_v, last_v))

    # merge adjacent intervals that elect the same class
    merged: list[tuple[np.ndarray, float, float]] = []
    for counts, fv, lv in intervals:
        if merged and _majority(merged[-1][0]) == _majority(counts):
            prev, pfv, _ = merged[-1]
            merged[-1] = (prev + counts, pfv, lv)
        else:
            merged.append((counts, fv, lv))

    classes = tuple(_majority(cnt) for cnt, _, _ in merged)
    thresholds = tuple(
        (merged[i][2] + merged[i + 1][1]) / 2.0 for i in range(len(merged) - 1)
    )
    correct = int(sum(cnt[_majority(cnt)] for cnt, _, _ in merged))
    return thresholds, classes, correct


def train_oner(ds: Dataset, min_bucket: int = 6) -> OneRModel:
    """Pick the attribute whose one-level rule makes the fewest training errors."""
    if len(ds) == 0:
        raise InfeasibleError("cannot train on an empty dataset")
    if min_bucket < 1:
        raise InfeasibleError(f"min_bucket must be >= 1, got {min_bucket}")
    best: OneRModel | None = None
    global_majority = _majority(np.bincount(ds.y, minlength=N_CLASSES))
    for j, attr in enumerate(ds.attributes):
        col = ds.X[:, j]
        if attr.kind == "numeric":
            thresholds, classes, correct = _numeric_rule(col, ds.y, min_bucket)
            model = OneRModel(
                attribute=attr.name,
                attribute_index=j,
                kind="numeric",
                thresholds=thresholds,
                classes=classes,
                fallback_class=global_majority,
                train_correct=correct,
                train_total=len(ds),
            )
        else:
            codes = col.astype(np.int64)
            correct = 0
            value_classes: dict[int, int] = {}
            for code in range(len(attr.values)):
                mask = codes == code
                if not mask.any():
                    continue
                counts = np.bincount(ds.y[mask], minlength=N_CLASSES)
                cls = _majority(counts)
                value_classes[code] = cls
                correct += int(counts[cls])
            model = OneRModel(
                attribute=attr.name,
                attribute_index=j,
                kind="nominal",
                value_classes=value_classes,
                value_names=attr.values,
                fallback_class=global_majority,
                train_correct=correct,
                train_total=len(ds),
            )
        if best is None or model.train_correct > best.train_correct:
            best = model  # strict > keeps the first attribute on ties
    return best
