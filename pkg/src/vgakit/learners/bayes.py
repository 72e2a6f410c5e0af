"""Naive Bayes under the attribute-independence assumption.

Numeric attributes get per-class Gaussian densities (standard deviation
floored at 1e-6 of the attribute's range to survive constant columns);
nominal attributes get Laplace-smoothed frequency tables, so unseen values
score small but never zero.  Priors are plain class frequencies.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from ..errors import InfeasibleError, SchemaError
from ..ingest import Dataset
from ..labels import CLASS_ORDER, N_CLASSES

_SD_FLOOR_FRACTION = 1e-6


@dataclass(frozen=True)
class NaiveBayesModel:
    priors: np.ndarray                 # (n_classes,)
    kinds: tuple[str, ...]             # per attribute
    gauss_mean: np.ndarray             # (n_classes, m); 0 where not numeric
    gauss_sd: np.ndarray               # (n_classes, m); floored
    tables: dict[int, np.ndarray]      # attr index -> (n_classes, n_values) probs
    attribute_names: tuple[str, ...]
    mode: str

    def log_scores(self, X: np.ndarray) -> np.ndarray:
        """Per-class log prior + log likelihood for each instance (n, n_classes)."""
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        n = len(X)
        with np.errstate(divide="ignore"):
            out = np.tile(np.log(self.priors), (n, 1))
        for j, kind in enumerate(self.kinds):
            if kind == "numeric":
                mu = self.gauss_mean[:, j]
                sd = self.gauss_sd[:, j]
                v = X[:, j][:, None]
                out += -0.5 * math.log(2 * math.pi) - np.log(sd) - ((v - mu) ** 2) / (2 * sd**2)
            else:
                codes = X[:, j].astype(np.int64)
                table = self.tables[j]
                codes = np.clip(codes, 0, table.shape[1] - 1)
                out += np.log(table[:, codes]).T
        return out

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.log_scores(X), axis=1).astype(np.int64)

    def to_json(self) -> str:
        return json.dumps(
            {
                "model": "naive_bayes",
                "mode": self.mode,
                "attributes": list(self.attribute_names),
                "priors": {CLASS_ORDER[i].name: p for i, p in enumerate(self.priors.tolist())},
                "gauss_mean": self.gauss_mean.tolist(),
                "gauss_sd": self.gauss_sd.tolist(),
                "tables": {str(j): t.tolist() for j, t in self.tables.items()},
            },
            indent=2,
        )


def train_naive_bayes(ds: Dataset, mode: str = "gaussian") -> NaiveBayesModel:
    """Fit priors and per-class distributions.

    ``gaussian`` fits numeric attributes with normal densities and nominal
    ones with frequency tables; ``prebinned-nominal`` requires an already
    discretized dataset and refuses numeric attributes.
    """
    if mode not in ("gaussian", "prebinned-nominal"):
        raise SchemaError(f"unknown naive Bayes mode {mode!r}")
    if len(ds) == 0:
        raise InfeasibleError("cannot train on an empty dataset")
    if mode == "prebinned-nominal":
        numeric = [a.name for a in ds.attributes if a.kind == "numeric"]
        if numeric:
            raise SchemaError(
                f"prebinned-nominal mode needs nominal attributes; numeric: {', '.join(numeric)}"
            )
    n, m = ds.X.shape
    counts = np.bincount(ds.y, minlength=N_CLASSES).astype(float)
    priors = counts / n
    gauss_mean = np.zeros((N_CLASSES, m))
    gauss_sd = np.ones((N_CLASSES, m))
    tables: dict[int, np.ndarray] = {}
    kinds = tuple(a.kind for a in ds.attributes)
    for j, attr in enumerate(ds.attributes):
        col = ds.X[:, j]
        if attr.kind == "numeric":
            rng = float(col.max() - col.min())
            floor = _SD_FLOOR_FRACTION * rng if rng > 0 else _SD_FLOOR_FRACTION
            for c in range(N_CLASSES):
                sel = col[ds.y == c]
                if len(sel):
                    gauss_mean[c, j] = sel.mean()
                    gauss_sd[c, j] = max(float(sel.std()), floor)
                else:
                    gauss_sd[c, j] = floor
        else:
            nv = len(attr.values)
            table = np.ones((N_CLASSES, nv))  # Laplace smoothing
            codes = col.astype(np.int64)
            for c in range(N_CLASSES):
                sel = codes[ds.y == c]
                table[c] += np.bincount(sel, minlength=nv)
                table[c] /= len(sel) + nv
            tables[j] = table
    return NaiveBayesModel(
        priors=priors,
        kinds=kinds,
        gauss_mean=gauss_mean,
        gauss_sd=gauss_sd,
        tables=tables,
        attribute_names=tuple(a.name for a in ds.attributes),
        mode=mode,
    )


def nb_predict(model: NaiveBayesModel, instance: np.ndarray) -> tuple[int, np.ndarray]:
    """Most probable class and the normalized per-class probabilities.

    Ties resolve to the first class in canonical order; classes absent from
    training have zero probability.
    """
    ls = model.log_scores(np.asarray(instance, dtype=float))[0]
    finite = np.isfinite(ls)
    scores = np.zeros(N_CLASSES)
    if finite.any():
        shifted = ls[finite] - ls[finite].max()
        e = np.exp(shifted)
        scores[finite] = e / e.sum()
    return int(np.argmax(ls)), scores
