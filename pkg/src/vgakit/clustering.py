"""K-means and self-organizing map with classes-to-clusters evaluation.

Attributes are standardized to zero mean and unit variance by default
before clustering: raw visibility measures differ by orders of magnitude
and the node count would otherwise dominate every distance.

K-means seeds its centroids from k random instances and runs Lloyd
iterations.  The monitored objective is the quantity the update step
actually minimizes (sum of squared distances for the Euclidean metric with
mean updates, sum of absolute distances for Manhattan with per-coordinate
median updates) and is asserted nonincreasing every iteration.  An emptied
cluster is reseeded to the instance farthest from its assigned centroid.

The SOM trains online: per presented instance the best-matching unit is
found by Euclidean distance and every unit within the current radius moves
toward the input by (learning rate) x (Gaussian neighborhood impact); both
schedules decay linearly over the epochs and never reach zero.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError, NumericError, SchemaError
from .ingest import Dataset
from .labels import N_CLASSES

EUCLIDEAN = "euclidean"
MANHATTAN = "manhattan"


def _standardize_params(X: np.ndarray, enabled: bool) -> tuple[np.ndarray, np.ndarray]:
    m = X.shape[1]
    if not enabled:
        return np.zeros(m), np.ones(m)
    means = X.mean(axis=0)
    scales = X.std(axis=0)
    scales[scales == 0.0] = 1.0
    return means, scales


def _distances(X: np.ndarray, centroids: np.ndarray, metric: str) -> np.ndarray:
    """(n, k) distance matrix; squared Euclidean to match the update step.

    Computed in row chunks so n x k x m never materializes at corpus scale.
    """
    n = len(X)
    k, m = centroids.shape
    out = np.empty((n, k))
    chunk = max(1, (1 << 22) // max(1, k * m))
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        d = X[lo:hi, None, :] - centroids[None, :, :]
        if metric == EUCLIDEAN:
            out[lo:hi] = (d * d).sum(axis=2)
        else:
            out[lo:hi] = np.abs(d).sum(axis=2)
    return out


@dataclass
class KMeansModel:
    centroids: np.ndarray          # (k, m) in the standardized space
    metric: str
    iterations: int
    objective: float               # monitored (squared for euclidean)
    within_distance_sum: float     # plain sum of metric distances
    seed: int
    means: np.ndarray
    scales: np.ndarray
    standardized: bool

    @property
    def k(self) -> int:
        return len(self.centroids)

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.means) / self.scales

    def assign(self, X: np.ndarray) -> np.ndarray:
        Z = self.transform(np.atleast_2d(np.asarray(X, dtype=float)))
        return np.argmin(_distances(Z, self.centroids, self.metric), axis=1).astype(np.int64)

    def to_json(self) -> str:
        return json.dumps(
            {
                "model": "kmeans",
                "metric": self.metric,
                "k": self.k,
                "seed": self.seed,
                "iterations": self.iterations,
                "objective": self.objective,
                "within_distance_sum": self.within_distance_sum,
                "standardized": self.standardized,
                "centroids": self.centroids.tolist(),
                "means": self.means.tolist(),
                "scales": self.scales.tolist(),
            },
            indent=2,
        )


def kmeans_fit(
    ds: Dataset,
    k: int,
    metric: str = EUCLIDEAN,
    seed: int = 0,
    max_iter: int = 100,
    standardize: bool = True,
) -> KMeansModel:
    """Lloyd iterations until the assignment stabilizes or max_iter."""
    if metric not in (EUCLIDEAN, MANHATTAN):
        raise SchemaError(f"unknown metric {metric!r}")
    n = len(ds)
    if k < 1:
        raise InfeasibleError(f"k must be >= 1, got {k}")
    if k > n:
        raise InfeasibleError(f"k={k} exceeds the instance count {n}")
    means, scales = _standardize_params(ds.X, standardize)
    Z = (ds.X - means) / scales
    rng = np.random.default_rng(seed)
    centroids = Z[rng.permutation(n)[:k]].copy()

    assignment = np.full(n, -1, dtype=np.int64)
    prev_objective = np.inf
    iterations = 0
    for _ in range(max_iter):
        dist = _distances(Z, centroids, metric)
        new_assignment = np.argmin(dist, axis=1).astype(np.int64)
        point_dist = dist[np.arange(n), new_assignment]
        # reseed empty clusters to the farthest instance from its centroid
        present = np.bincount(new_assignment, minlength=k)
        for empty in np.flatnonzero(present == 0):
            far = int(np.argmax(point_dist))
            new_assignment[far] = empty
            point_dist[far] = 0.0
            present = np.bincount(new_assignment, minlength=k)
        objective = float(point_dist.sum())
        if objective > prev_objective + 1e-9 * max(1.0, abs(prev_objective)):
            raise NumericError(
                f"k-means objective increased: {prev_objective} -> {objective}"
            )
        prev_objective = objective
        iterations += 1
        if np.array_equal(new_assignment, assignment):
            break
        assignment = new_assignment
        for c in range(k):
            member = Z[assignment == c]
            centroids[c] = member.mean(axis=0) if metric == EUCLIDEAN else np.median(member, axis=0)

    dist = _distances(Z, centroids, metric)
    point_dist = dist[np.arange(n), assignment]
    plain = float(np.sqrt(point_dist).sum()) if metric == EUCLIDEAN else float(point_dist.sum())
    return KMeansModel(
        centroids=centroids,
        metric=metric,
        iterations=iterations,
        objective=prev_objective,
        within_distance_sum=plain,
        seed=seed,
        means=means,
        scales=scales,
        standardized=standardize,
    )


def kmeans_assign(model: KMeansModel, instance: np.ndarray) -> int:
    """Nearest centroid; ties resolve to the lowest cluster index."""
    return int(model.assign(np.asarray(instance, dtype=float)[None, :])[0])


@dataclass
class SOMLattice:
    width: int
    height: int
    weights: np.ndarray            # (height*width, m), row-major units
    epochs: int
    seed: int
    initial_rate: float
    initial_radius: float
    means: np.ndarray
    scales: np.ndarray
    standardized: bool
    quantization_error_initial: float = 0.0
    quantization_error_final: float = 0.0

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.means) / self.scales

    def bmu(self, Z: np.ndarray) -> np.ndarray:
        """Best-matching unit per instance; row-major lowest index on ties."""
        return np.argmin(_distances(Z, self.weights, EUCLIDEAN), axis=1).astype(np.int64)

    def map_batch(self, X: np.ndarray) -> np.ndarray:
        return self.bmu(self.transform(np.atleast_2d(X)))

    def quantization_error(self, Z: np.ndarray) -> float:
        d2 = _distances(Z, self.weights, EUCLIDEAN)
        return float(np.sqrt(d2.min(axis=1)).mean())

    def to_json(self) -> str:
        return json.dumps(
            {
                "model": "som",
                "width": self.width,
                "height": self.height,
                "epochs": self.epochs,
                "seed": self.seed,
                "initial_rate": self.initial_rate,
                "initial_radius": self.initial_radius,
                "standardized": self.standardized,
                "quantization_error_initial": self.quantization_error_initial,
                "quantization_error_final": self.quantization_error_final,
                "weights": self.weights.tolist(),
                "means": self.means.tolist(),
                "scales": self.scales.tolist(),
            },
            indent=2,
        )


def som_fit(
    ds: Dataset,
    width: int,
    height: int,
    epochs: int,
    seed: int = 0,
    initial_rate: float = 0.5,
    initial_radius: float | None = None,
    standardize: bool = True,
) -> SOMLattice:
    """Online SOM training with linear rate and radius decay."""
    if width < 1 or height < 1:
        raise InfeasibleError(f"lattice {width}x{height} invalid")
    if epochs < 1:
        raise InfeasibleError(f"epochs must be >= 1, got {epochs}")
    n = len(ds)
    if n == 0:
        raise InfeasibleError("cannot fit a SOM on an empty dataset")
    means, scales = _standardize_params(ds.X, standardize)
    Z = (ds.X - means) / scales
    rng = np.random.default_rng(seed)
    units = width * height
    weights = Z[rng.integers(0, n, size=units)].astype(float).copy()
    if initial_radius is None:
        initial_radius = max(width, height) / 2.0

    uy, ux = np.divmod(np.arange(units), width)
    lattice = np.column_stack([ux, uy]).astype(float)

    som = SOMLattice(
        width=width,
        height=height,
        weights=weights,
        epochs=epochs,
        seed=seed,
        initial_rate=initial_rate,
        initial_radius=initial_radius,
        means=means,
        scales=scales,
        standardized=standardize,
    )
    som.quantization_error_initial = som.quantization_error(Z)

    for epoch in range(epochs):
        decay = 1.0 - epoch / epochs  # stays positive on the last epoch
        rate = initial_rate * decay
        radius = initial_radius * decay
        sigma2 = 2.0 * radius * radius
        order = rng.permutation(n)
        for i in order:
            x = Z[i]
            d2 = ((weights - x) ** 2).sum(axis=1)
            win = int(np.argmin(d2))
            ld2 = ((lattice - lattice[win]) ** 2).sum(axis=1)
            within = ld2 <= radius * radius
            impact = np.exp(-ld2[within] / sigma2)
            weights[within] += rate * impact[:, None] * (x - weights[within])

    som.quantization_error_final = som.quantization_error(Z)
    return som


def som_map(lattice: SOMLattice, instance: np.ndarray) -> tuple[int, int]:
    """Lattice coordinate (row, col) of the best-matching unit."""
    unit = int(lattice.map_batch(np.asarray(instance, dtype=float)[None, :])[0])
    return unit // lattice.width, unit % lattice.width


def classes_to_clusters(
    assignments: np.ndarray, labels: np.ndarray, n_clusters: int
) -> tuple[np.ndarray, float, np.ndarray, np.ndarray]:
    """Majority-label evaluation of a clustering.

    Returns (cluster -> class map, accuracy, 12x12 confusion matrix keyed by
    actual x mapped class, and the raw class x cluster count table).
    """
    assignments = np.asarray(assignments, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if len(assignments) != len(labels):
        raise SchemaError("assignments and labels differ in length")
    table = np.zeros((N_CLASSES, n_clusters), dtype=np.int64)
    np.add.at(table, (labels, assignments), 1)
    mapping = np.argmax(table, axis=0).astype(np.int64)  # ties -> canonical order
    predicted = mapping[assignments]
    correct = int((predicted == labels).sum())
    accuracy = correct / len(labels) if len(labels) else 0.0
    from .evaluation import confusion_matrix

    return mapping, accuracy, confusion_matrix(labels, predicted), table
