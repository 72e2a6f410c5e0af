"""Visibility graph analysis of floor plans with a learning pipeline.

The package computes per-cell visibility measures over discretized plans
(connectivity, isovist moments, visual mean depth, entropies and three
integration normalizations) and feeds them through attribute selection,
PCA, four supervised learners and two clusterers with stratified
cross-validation reports.
"""

__version__ = "0.1.0"

from .grid import FloorPlanGrid, read_grid, write_grid
from .labels import CLASS_ORDER, LabelMap, UsageClass, bundled_label_map
from .measures import MeasureRecord, compute_all_measures
from .visibility import VisibilityGraph, build_visibility_graph

__all__ = [
    "FloorPlanGrid",
    "VisibilityGraph",
    "MeasureRecord",
    "UsageClass",
    "LabelMap",
    "CLASS_ORDER",
    "build_visibility_graph",
    "compute_all_measures",
    "bundled_label_map",
    "read_grid",
    "write_grid",
    "__version__",
]
