"""Dataset treatments: equal-width discretization and PCA.

PCA runs on the covariance of centered, unscaled data by default (a flag
standardizes first); components are ordered by explained variance and
sign-fixed so the largest-magnitude loading is nonnegative, which makes
fitted models comparable across runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InfeasibleError, SchemaError
from .ingest import Attribute, Dataset


@dataclass(frozen=True)
class BinningFilter:
    """Equal-width bins over one numeric attribute.

    Intervals are left-closed right-open, except the last which is closed;
    a constant attribute degenerates to a single bin.
    """

    attribute: str
    edges: np.ndarray      # n_bins + 1 ascending edge values
    values: tuple[str, ...]

    @property
    def n_bins(self) -> int:
        return len(self.values)

    def assign(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        idx = np.searchsorted(self.edges, v, side="right") - 1
        return np.clip(idx, 0, self.n_bins - 1)

    def apply(self, ds: Dataset) -> Dataset:
        """Replace the attribute with its binned nominal version."""
        j = ds.attribute_index(self.attribute)
        if ds.attributes[j].kind != "numeric":
            raise SchemaError(f"attribute {self.attribute!r} is not numeric")
        codes = self.assign(ds.X[:, j]).astype(np.float64)
        attrs = list(ds.attributes)
        attrs[j] = Attribute(self.attribute, "nominal", self.values)
        X = ds.X.copy()
        X[:, j] = codes
        return Dataset(tuple(attrs), X, ds.y.copy())


def equal_width_bins(ds: Dataset, attribute: str, n: int = 10) -> BinningFilter:
    j = ds.attribute_index(attribute)
    if ds.attributes[j].kind != "numeric":
        raise SchemaError(f"attribute {attribute!r} is not numeric")
    if len(ds) == 0:
        raise InfeasibleError("cannot bin an empty dataset")
    if n < 1:
        raise InfeasibleError(f"bin count must be >= 1, got {n}")
    col = ds.X[:, j]
    lo, hi = float(col.min()), float(col.max())
    if lo == hi:
        edges = np.array([lo, hi])
        return BinningFilter(attribute, edges, (f"[{lo!r},{hi!r}]",))
    edges = np.linspace(lo, hi, n + 1)
    labels = []
    for i in range(n):
        close = "]" if i == n - 1 else ")"
        labels.append(f"[{edges[i]!r},{edges[i+1]!r}{close}")
    return BinningFilter(attribute, edges, tuple(labels))


def bin_all_numeric(ds: Dataset, n: int = 10) -> tuple[Dataset, list[BinningFilter]]:
    """Discretize every numeric attribute with equal-width bins."""
    filters = []
    out = ds
    for a in ds.attributes:
        if a.kind == "numeric":
            f = equal_width_bins(out, a.name, n)
            out = f.apply(out)
            filters.append(f)
    return out, filters


@dataclass(frozen=True)
class PCAModel:
    """Fitted principal components: means, loadings and variance accounting."""

    attribute_names: tuple[str, ...]
    means: np.ndarray            # (m,)
    components: np.ndarray       # (retained, m) orthonormal rows
    variance_shares: np.ndarray  # (retained,) fraction of total variance
    eigenvalues: np.ndarray      # (retained,)
    total_variance: float
    standardized: bool
    scales: np.ndarray           # (m,) ones when not standardized

    @property
    def retained(self) -> int:
        return len(self.components)

    def to_json(self) -> str:
        return json.dumps(
            {
                "model": "pca",
                "attributes": list(self.attribute_names),
                "means": self.means.tolist(),
                "components": self.components.tolist(),
                "variance_shares": self.variance_shares.tolist(),
                "eigenvalues": self.eigenvalues.tolist(),
                "total_variance": self.total_variance,
                "standardized": self.standardized,
                "scales": self.scales.tolist(),
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "PCAModel":
        d = json.loads(text)
        if d.get("model") != "pca":
            raise SchemaError("not a PCA model file")
        return cls(
            attribute_names=tuple(d["attributes"]),
            means=np.array(d["means"]),
            components=np.array(d["components"]),
            variance_shares=np.array(d["variance_shares"]),
            eigenvalues=np.array(d["eigenvalues"]),
            total_variance=float(d["total_variance"]),
            standardized=bool(d["standardized"]),
            scales=np.array(d["scales"]),
        )

    @classmethod
    def load(cls, path: str | Path) -> "PCAModel":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")


def pca_fit(
    ds: Dataset,
    variance_target: float | None = None,
    component_count: int | None = None,
    standardize: bool = False,
) -> PCAModel:
    """Principal components of the covariance, ordered by explained variance.

    Stops at ``component_count`` when given, otherwise at the smallest count
    reaching ``variance_target`` (default 0.95).
    """
    for a in ds.attributes:
        if a.kind != "numeric":
            raise SchemaError(f"PCA needs numeric attributes; {a.name!r} is nominal")
    n, m = ds.X.shape
    if n < 2:
        raise InfeasibleError(f"PCA needs at least 2 instances, got {n}")
    if variance_target is None and component_count is None:
        variance_target = 0.95
    means = ds.X.mean(axis=0)
    Xc = ds.X - means
    if standardize:
        scales = Xc.std(axis=0, ddof=1)
        scales[scales == 0.0] = 1.0
        Xc = Xc / scales
    else:
        scales = np.ones(m)
    cov = (Xc.T @ Xc) / (n - 1)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1]
    evals = np.clip(evals[order], 0.0, None)
    comps = evecs[:, order].T
    # deterministic sign: largest-magnitude loading nonnegative
    for row in comps:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    total = float(evals.sum())
    shares = evals / total if total > 0 else np.zeros(m)
    if component_count is not None:
        r = max(1, min(component_count, m))
    else:
        r = int(np.searchsorted(np.cumsum(shares), variance_target) + 1)
        r = max(1, min(r, m))
    return PCAModel(
        attribute_names=tuple(a.name for a in ds.attributes),
        means=means,
        components=comps[:r].copy(),
        variance_shares=shares[:r].copy(),
        eigenvalues=evals[:r].copy(),
        total_variance=total,
        standardized=standardize,
        scales=scales,
    )


def pca_transform(model: PCAModel, X) -> np.ndarray:
    """Project instances onto the retained components."""
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    if X.shape[1] != len(model.attribute_names):
        raise SchemaError(
            f"instance has {X.shape[1]} attributes, model expects {len(model.attribute_names)}"
        )
    Z = ((X - model.means) / model.scales) @ model.components.T
    return Z[0] if single else Z
