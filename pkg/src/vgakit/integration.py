"""Reference graphs and mean-depth normalization.

Mean depth is size-biased, so it is normalized against the mean depth of a
reference graph grown to the same node count.  Three reference families are
supported (matching the HH, P-value and Tekl integration columns):

* diamond: level widths 1,2,4,...,2^m,...,4,2,1 with complete bipartite
  wiring between adjacent levels, rooted at the apex;
* corner grid: a square lattice rooted at a corner, whose BFS layers grow
  as an arithmetic sequence along the diagonals;
* bipartite: the complete bipartite graph on floor(k/2) and ceil(k/2).

Diamond and corner-grid totals rarely hit k exactly, so nodes are removed
one at a time from the widest level (ties resolved toward the level farthest
from the root, never emptying a level) or from the farthest diagonal.  All
reference quantities are computed constructively, by BFS on the grown graph;
no closed-form normalization tables are used.

Normalization goes through relative asymmetry RA = 2(MD-1)/(k-2):
integration = RA_ref / RA_node = (MD_ref - 1)/(MD_node - 1).  A node with
MD = 1 sees everything and has zero asymmetry; it gets the largest finite
float as a sentinel so study tables stay rectangular.
"""

from __future__ import annotations

import math
import sys
from collections import deque
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .errors import InfeasibleError, NumericError

#: Emitted for nodes whose mean depth is exactly 1 (zero relative asymmetry).
INTEGRATION_SENTINEL = sys.float_info.max

#: Above this node count the mean depth is taken from the level structure
#: instead of a materialized edge list (identical by construction; the two
#: paths are cross-checked in the tests).
MATERIALIZE_LIMIT = 2048


class ReferenceGraphKind(Enum):
    DIAMOND_HH = "diamond"
    CORNER_GRID_P = "corner-grid"
    BIPARTITE_TEKL = "bipartite"


def diamond_levels(k: int) -> list[int]:
    """Level widths of the k-node diamond, apex (root) first."""
    if k < 2:
        raise InfeasibleError(f"reference graph needs k >= 2, got {k}")
    m = 0
    while 3 * 2**m - 2 < k:
        m += 1
    widths = [2**min(i, 2 * m - i) for i in range(2 * m + 1)]
    excess = sum(widths) - k
    for _ in range(excess):
        if max(widths) > 1:
            widest = max(widths)
            # remove from the widest level, preferring the one farthest from the root
            idx = max(i for i, w in enumerate(widths) if w == widest)
            widths[idx] -= 1
        else:
            widths.pop()  # all levels at width 1: drop the level farthest out
    return widths


def corner_grid_cells(k: int) -> list[tuple[int, int]]:
    """Cells of the k-node corner-rooted square lattice, root (0,0) first.

    The smallest n x n lattice with n*n >= k is truncated by dropping cells
    from the farthest diagonal (largest x+y, then largest x).
    """
    if k < 2:
        raise InfeasibleError(f"reference graph needs k >= 2, got {k}")
    n = 1
    while n * n < k:
        n += 1
    cells = [(x, y) for y in range(n) for x in range(n)]
    cells.sort(key=lambda c: (c[0] + c[1], c[0]))
    return cells[:k]


def bipartite_sides(k: int) -> tuple[int, int]:
    if k < 2:
        raise InfeasibleError(f"reference graph needs k >= 2, got {k}")
    return k // 2, k - k // 2


@dataclass
class ReferenceGraph:
    """A materialized reference graph: adjacency lists plus the marked root."""

    kind: ReferenceGraphKind
    k: int
    neighbors: list[np.ndarray]
    root: int

    def edge_count(self) -> int:
        return sum(len(a) for a in self.neighbors) // 2

    def bfs_depths(self, source: int) -> np.ndarray:
        dist = np.full(self.k, -1, dtype=np.int64)
        dist[source] = 0
        q = deque([source])
        while q:
            u = q.popleft()
            for v in self.neighbors[u]:
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    q.append(int(v))
        return dist

    def mean_depth_from(self, source: int) -> float:
        dist = self.bfs_depths(source)
        others = dist[dist > 0]
        if len(others) != self.k - 1:
            raise NumericError(f"{self.kind.value} reference graph is not connected")
        return float(others.sum()) / (self.k - 1)

    def average_mean_depth(self) -> float:
        return sum(self.mean_depth_from(s) for s in range(self.k)) / self.k


def build_reference_graph(kind: ReferenceGraphKind, k: int) -> ReferenceGraph:
    if kind is ReferenceGraphKind.DIAMOND_HH:
        widths = diamond_levels(k)
        starts = np.cumsum([0] + widths)
        neighbors: list[list[int]] = [[] for _ in range(k)]
        for lev in range(len(widths) - 1):
            a = range(starts[lev], starts[lev + 1])
            b = range(starts[lev + 1], starts[lev + 2])
            for u in a:
                for v in b:
                    neighbors[u].append(v)
                    neighbors[v].append(u)
        root = 0
    elif kind is ReferenceGraphKind.CORNER_GRID_P:
        cells = corner_grid_cells(k)
        index = {c: i for i, c in enumerate(cells)}
        neighbors = [[] for _ in range(k)]
        for (x, y), i in index.items():
            for nx, ny in ((x + 1, y), (x, y + 1)):
                j = index.get((nx, ny))
                if j is not None:
                    neighbors[i].append(j)
                    neighbors[j].append(i)
        root = index[(0, 0)]
    elif kind is ReferenceGraphKind.BIPARTITE_TEKL:
        a, b = bipartite_sides(k)
        neighbors = [[] for _ in range(k)]
        for u in range(a):
            for v in range(a, k):
                neighbors[u].append(v)
                neighbors[v].append(u)
        root = 0
    else:
        raise InfeasibleError(f"unknown reference graph kind {kind!r}")
    arrays = [np.array(sorted(adj), dtype=np.int64) for adj in neighbors]
    return ReferenceGraph(kind=kind, k=k, neighbors=arrays, root=root)


def _diamond_root_md_from_levels(k: int) -> float:
    # adjacent levels are completely wired, so BFS depth equals level index
    widths = diamond_levels(k)
    total = sum(d * w for d, w in enumerate(widths))
    return total / (k - 1)


def _corner_root_md(k: int) -> float:
    cells = corner_grid_cells(k)
    index = {c: i for i, c in enumerate(cells)}
    dist = {(0, 0): 0}
    q = deque([(0, 0)])
    while q:
        x, y = q.popleft()
        for nxt in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if nxt in index and nxt not in dist:
                dist[nxt] = dist[(x, y)] + 1
                q.append(nxt)
    if len(dist) != k:
        raise NumericError("corner reference grid is not connected")
    return sum(dist.values()) / (k - 1)


def _bipartite_average_md_from_sides(k: int) -> float:
    # two completely wired sides: a node reaches the far side at depth 1 and
    # the rest of its own side at depth 2
    a, b = bipartite_sides(k)
    md_a = (b + 2 * (a - 1)) / (k - 1)
    md_b = (a + 2 * (b - 1)) / (k - 1)
    return (a * md_a + b * md_b) / k


@lru_cache(maxsize=None)
def reference_mean_depth(kind: ReferenceGraphKind, k: int) -> float:
    """Reference mean depth for normalization; memoized per (kind, k).

    Diamond and corner grid use the root node's mean depth; the bipartite
    reference uses the graph-average mean depth (it has no marked root).
    """
    if k < 2:
        raise InfeasibleError(f"reference mean depth needs k >= 2, got {k}")
    if k <= MATERIALIZE_LIMIT:
        g = build_reference_graph(kind, k)
        if kind is ReferenceGraphKind.BIPARTITE_TEKL:
            # sides are interchangeable, so one BFS per side gives the average
            a, b = bipartite_sides(k)
            return (a * g.mean_depth_from(0) + b * g.mean_depth_from(a)) / k
        return g.mean_depth_from(g.root)
    if kind is ReferenceGraphKind.DIAMOND_HH:
        return _diamond_root_md_from_levels(k)
    if kind is ReferenceGraphKind.CORNER_GRID_P:
        return _corner_root_md(k)
    return _bipartite_average_md_from_sides(k)


def relative_asymmetry(mean_depth: float, k: int) -> float:
    if k < 3:
        raise NumericError(f"relative asymmetry needs k >= 3, got {k}")
    return 2.0 * (mean_depth - 1.0) / (k - 2)


def integration(mean_depth: float, k: int, kind: ReferenceGraphKind) -> float:
    """Normalized integration: RA of the reference root over RA of the node."""
    if k < 3:
        raise NumericError(f"integration needs k >= 3, got {k}")
    if mean_depth < 1.0:
        raise NumericError(f"mean depth {mean_depth} < 1 is not a valid depth average")
    if mean_depth == 1.0:
        return INTEGRATION_SENTINEL
    return (reference_mean_depth(kind, k) - 1.0) / (mean_depth - 1.0)


STUDY_FILES = (
    "depth_vs_node_count.csv",
    "integration_vs_depth.csv",
    "log_integration_vs_log_depth.csv",
    "reciprocal_integration_vs_depth.csv",
    "integration_summary.csv",
)

_SUMMARY_COLUMNS = (
    "visual_mean_depth",
    "integration_pvalue",
    "integration_tekl",
    "integration_hh",
)


def _ln(v: float) -> str:
    # a zero integration (3-node corner reference) logs as -inf, still parseable
    return repr(math.log(v)) if v > 0 else "-inf"


def _recip(v: float) -> str:
    return repr(1.0 / v) if v != 0 else "inf"


def integration_study(records, out_dir) -> dict[str, dict[str, float]]:
    """Emit the integration study series and summary for a measures table.

    Four per-node series (depth vs node count, the three integrations
    against depth, their natural logs, and their reciprocals) plus a summary
    of min/max/mean/sd/variance per column.  Rows at the sentinel (mean
    depth exactly 1) are flagged in the series and excluded from the
    summary; isolated nodes (mean depth below 1) are skipped entirely.

    Returns the summary as {column: {statistic: value}}.
    """
    import csv
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = [r for r in records if r.visual_mean_depth >= 1.0]

    def sentinel(r) -> bool:
        return (
            r.visual_mean_depth == 1.0
            or r.integration_tekl == INTEGRATION_SENTINEL
            or r.integration_hh == INTEGRATION_SENTINEL
            or r.integration_pvalue == INTEGRATION_SENTINEL
        )

    def write(name: str, header: list[str], body) -> None:
        with open(out / name, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(body)

    write(
        STUDY_FILES[0],
        ["visual_node_count", "visual_mean_depth"],
        ([repr(float(r.visual_node_count)), repr(r.visual_mean_depth)] for r in rows),
    )
    write(
        STUDY_FILES[1],
        ["visual_mean_depth", "integration_hh", "integration_pvalue", "integration_tekl", "sentinel"],
        (
            [
                repr(r.visual_mean_depth),
                repr(r.integration_hh),
                repr(r.integration_pvalue),
                repr(r.integration_tekl),
                "1" if sentinel(r) else "0",
            ]
            for r in rows
        ),
    )
    write(
        STUDY_FILES[2],
        [
            "ln_visual_mean_depth",
            "ln_integration_hh",
            "ln_integration_pvalue",
            "ln_integration_tekl",
            "sentinel",
        ],
        (
            [
                _ln(r.visual_mean_depth),
                _ln(r.integration_hh),
                _ln(r.integration_pvalue),
                _ln(r.integration_tekl),
                "1" if sentinel(r) else "0",
            ]
            for r in rows
        ),
    )
    write(
        STUDY_FILES[3],
        [
            "visual_mean_depth",
            "reciprocal_integration_hh",
            "reciprocal_integration_pvalue",
            "reciprocal_integration_tekl",
            "sentinel",
        ],
        (
            [
                repr(r.visual_mean_depth),
                _recip(r.integration_hh),
                _recip(r.integration_pvalue),
                _recip(r.integration_tekl),
                "1" if sentinel(r) else "0",
            ]
            for r in rows
        ),
    )

    clean = [r for r in rows if not sentinel(r)]
    summary: dict[str, dict[str, float]] = {}
    for col in _SUMMARY_COLUMNS:
        vals = np.array([getattr(r, col) for r in clean], dtype=float)
        if len(vals):
            summary[col] = {
                "minimum": float(vals.min()),
                "maximum": float(vals.max()),
                "mean": float(vals.mean()),
                "standard_deviation": float(vals.std(ddof=1)) if len(vals) > 1 else 0.0,
                "variance": float(vals.var(ddof=1)) if len(vals) > 1 else 0.0,
            }
        else:
            summary[col] = {
                s: 0.0 for s in ("minimum", "maximum", "mean", "standard_deviation", "variance")
            }
    with open(out / STUDY_FILES[4], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["statistic"] + list(_SUMMARY_COLUMNS))
        for stat in ("minimum", "maximum", "mean", "standard_deviation", "variance"):
            w.writerow([stat] + [repr(summary[c][stat]) for c in _SUMMARY_COLUMNS])
    return summary
