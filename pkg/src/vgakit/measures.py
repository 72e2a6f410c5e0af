"""Per-node visibility measures.

Global measures (mean depth, both entropies, integration) come from
breadth-first search over the visibility adjacency; local measures
(connectivity, isovist moments) from the direct neighborhood.  Distances for
the moments are metric, center to center, in metres.

Entropies use the natural logarithm.  Point depth entropy is the Shannon
entropy of a node's depth-frequency distribution p_d; relativized entropy
weighs each frequency against a Poisson reference q_d = L^d e^{-L} / d! with
L the node's mean depth, summed as  -sum p_d ln(p_d / q_d)  which makes the
value negative (a sign-corrected divergence form is available via a flag).

On disconnected plans every depth-based measure is computed inside the
node's connected component; the number of reachable peers is reported per
node so downstream consumers can tell the cases apart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from .errors import NumericError
from .grid import FloorPlanGrid
from .integration import INTEGRATION_SENTINEL, ReferenceGraphKind, integration
from .visibility import (
    DEFAULT_CORNER_RULE,
    VisibilityGraph,
    _popcount,
    _U0,
    _U1,
    build_visibility_graph,
)


@dataclass
class DepthHistogram:
    """Distribution of BFS depths from one node to its reachable peers."""

    node: int
    counts: np.ndarray          # counts[d] = nodes at depth d; counts[0] == 0
    reachable_count: int
    unreachable: np.ndarray     # node indices in other components
    d_max: int

    def frequencies(self) -> np.ndarray:
        """p_d for d = 0..d_max; zero where no nodes sit at that depth."""
        if self.reachable_count == 0:
            return np.zeros_like(self.counts, dtype=float)
        return self.counts / self.reachable_count

    def mean(self) -> float:
        if self.reachable_count == 0:
            raise NumericError(f"node {self.node} reaches no other node; mean depth undefined")
        depths = np.arange(len(self.counts))
        return float((depths * self.counts).sum()) / self.reachable_count

    def poisson_reference(self) -> np.ndarray:
        """q_d for d = 0..d_max at the node's mean depth."""
        L = self.mean()
        d = np.arange(len(self.counts), dtype=float)
        logq = d * math.log(L) - L - np.array([math.lgamma(x + 1.0) for x in d])
        return np.exp(logq)


def visual_depths(g: VisibilityGraph, node: int) -> DepthHistogram:
    """BFS depth histogram of one node; unreachable peers reported separately."""
    if not 0 <= node < g.k:
        raise NumericError(f"node {node} not in graph of {g.k} nodes")
    dist = np.full(g.k, -1, dtype=np.int64)
    dist[node] = 0
    frontier = np.array([node], dtype=np.int64)
    d = 0
    while len(frontier):
        d += 1
        nxt = np.unique(np.concatenate([g.neighbors(int(u)) for u in frontier]))
        nxt = nxt[dist[nxt] < 0]
        dist[nxt] = d
        frontier = nxt
    reachable = dist > 0
    d_max = int(dist.max()) if reachable.any() else 0
    counts = np.bincount(dist[reachable], minlength=d_max + 1) if d_max else np.zeros(1, np.int64)
    return DepthHistogram(
        node=node,
        counts=counts.astype(np.int64),
        reachable_count=int(reachable.sum()),
        unreachable=np.flatnonzero(dist < 0),
        d_max=d_max,
    )


def mean_depth(h: DepthHistogram) -> float:
    """Average shortest visibility path to every reachable node, in steps."""
    return h.mean()


def connectivity(g: VisibilityGraph, node: int) -> int:
    """Count of directly visible nodes (degree in the visibility graph)."""
    return g.degree(node)


def _neighbor_distances(g: VisibilityGraph, node: int) -> np.ndarray:
    nbr = g.neighbors(node)
    delta = (g.coords[nbr] - g.coords[node]).astype(float)
    return np.hypot(delta[:, 0], delta[:, 1]) * g.cell_size


def point_first_moment(g: VisibilityGraph, node: int) -> float:
    """Sum of metric distances to every directly visible node (metres)."""
    return float(_neighbor_distances(g, node).sum())


def point_second_moment(g: VisibilityGraph, node: int) -> float:
    """Sum of squared metric distances to every directly visible node (metres^2)."""
    return float((_neighbor_distances(g, node) ** 2).sum())


def point_depth_entropy(h: DepthHistogram) -> float:
    """Shannon entropy of the depth frequencies, natural log."""
    if h.reachable_count == 0:
        return 0.0
    out = 0.0
    for d in range(1, h.d_max + 1):
        c = h.counts[d]
        if c:
            p = c / h.reachable_count
            out -= p * math.log(p)
    return out


def relativized_entropy(h: DepthHistogram, sign_corrected: bool = False) -> float:
    """Depth entropy relativized against the Poisson expectation.

    The printed form  -sum p_d ln(p_d/q_d)  is the default; pass
    ``sign_corrected=True`` for the positive divergence orientation.
    """
    if h.reachable_count == 0:
        return 0.0
    L = h.mean()
    out = 0.0
    for d in range(1, h.d_max + 1):
        c = h.counts[d]
        if c:
            p = c / h.reachable_count
            logq = d * math.log(L) - L - math.lgamma(d + 1.0)
            out -= p * (math.log(p) - logq)
    return -out if sign_corrected else out


@njit(cache=True, parallel=True)
def _bfs_stats(bits, rowptr, rownz, k, depth_sum, reach, dmax, entropy, rel_entropy):
    """All-sources BFS over the packed adjacency, one output slot per source.

    Layer-synchronous expansion on bit rows; a layer is grown top-down (union
    of frontier rows, cheap while the frontier is small) or bottom-up (probe
    each unvisited row against the frontier mask, cheap once most nodes are
    visited).  Results are independent per source, so the parallel schedule
    cannot change them.
    """
    words = bits.shape[1]
    avg_nz = rowptr[k] // k + 1
    tailmask = ~_U0 if (k & 63) == 0 else (_U1 << np.uint64(k & 63)) - _U1
    for s in prange(k):
        visited = np.zeros(words, np.uint64)
        frontier = np.zeros(words, np.uint64)
        nxt = np.zeros(words, np.uint64)
        fwords = np.empty(words, np.int64)
        hist = np.empty(k + 1, np.int64)
        visited[s >> 6] |= _U1 << np.uint64(s & 63)
        for w in range(words):
            frontier[w] = bits[s, w]
        d = 1
        dm = 0
        total = np.int64(0)
        cnt = np.int64(0)
        unvisited = k - 1
        while True:
            c = np.int64(0)
            nf = 0
            for w in range(words):
                nw = frontier[w] & ~visited[w]
                frontier[w] = nw
                if nw != _U0:
                    visited[w] |= nw
                    c += _popcount(nw)
                    fwords[nf] = w
                    nf += 1
            if c == 0:
                break
            hist[d] = c
            dm = d
            cnt += c
            total += d * c
            unvisited -= c
            if unvisited == 0:
                break
            for w in range(words):
                nxt[w] = _U0
            if c * avg_nz <= unvisited * 4:
                # top-down: union the adjacency rows of the frontier
                for wi in range(nf):
                    w = fwords[wi]
                    m = frontier[w]
                    while m != _U0:
                        b = m & (~m + _U1)
                        v = (w << 6) + _popcount(b - _U1)
                        m ^= b
                        for p in range(rowptr[v], rowptr[v + 1]):
                            w2 = rownz[p]
                            nxt[w2] |= bits[v, w2]
            else:
                # bottom-up: an unvisited node joins the next layer if its row
                # intersects the frontier; probe words near its own id first
                # (node ids are row-major, neighborhoods are spatially local)
                for w in range(words):
                    m = ~visited[w]
                    if w == words - 1:
                        m &= tailmask
                    while m != _U0:
                        b = m & (~m + _U1)
                        v = (w << 6) + _popcount(b - _U1)
                        m ^= b
                        lo = rowptr[v]
                        hi = rowptr[v + 1]
                        lo2 = lo
                        hi2 = hi
                        target = w - 4
                        while lo2 < hi2:
                            mid = (lo2 + hi2) >> 1
                            if rownz[mid] < target:
                                lo2 = mid + 1
                            else:
                                hi2 = mid
                        hit = False
                        for p in range(lo2, hi):
                            w2 = rownz[p]
                            if bits[v, w2] & frontier[w2] != _U0:
                                hit = True
                                break
                        if not hit:
                            for p in range(lo, lo2):
                                w2 = rownz[p]
                                if bits[v, w2] & frontier[w2] != _U0:
                                    hit = True
                                    break
                        if hit:
                            nxt[w] |= b
            t = frontier
            frontier = nxt
            nxt = t
            d += 1
        depth_sum[s] = total
        reach[s] = cnt
        dmax[s] = dm
        ent = 0.0
        rent = 0.0
        if cnt > 0:
            L = total / cnt
            lnL = math.log(L)
            for dd in range(1, dm + 1):
                cd = hist[dd]
                if cd > 0:
                    p = cd / cnt
                    lnp = math.log(p)
                    ent -= p * lnp
                    logq = dd * lnL - L - math.lgamma(dd + 1.0)
                    rent -= p * (lnp - logq)
        entropy[s] = ent
        rel_entropy[s] = rent


def depth_statistics(g: VisibilityGraph) -> dict[str, np.ndarray]:
    """Batched per-node depth statistics for a whole plan."""
    rowptr, rownz = g.row_words()
    depth_sum = np.zeros(g.k, np.int64)
    reach = np.zeros(g.k, np.int64)
    dmax = np.zeros(g.k, np.int64)
    entropy = np.zeros(g.k, np.float64)
    rel_entropy = np.zeros(g.k, np.float64)
    _bfs_stats(g.bits, rowptr, rownz, g.k, depth_sum, reach, dmax, entropy, rel_entropy)
    return {
        "depth_sum": depth_sum,
        "reachable_count": reach,
        "d_max": dmax,
        "visual_entropy": entropy,
        "relativized_entropy": rel_entropy,
    }


def adjacency_lists(g: VisibilityGraph) -> tuple[np.ndarray, np.ndarray]:
    """Unpack the bit matrix to CSR (indptr, indices), neighbor ids ascending."""
    deg = g.degrees()
    indptr = np.zeros(g.k + 1, dtype=np.int64)
    np.cumsum(deg, out=indptr[1:])
    indices = np.empty(indptr[-1], dtype=np.int64)
    chunk = max(1, (1 << 22) // max(1, g.bits.shape[1] * 64))
    for lo in range(0, g.k, chunk):
        hi = min(lo + chunk, g.k)
        sub = np.unpackbits(g.bits[lo:hi].view(np.uint8), axis=1, bitorder="little")[:, : g.k]
        rows, cols = np.nonzero(sub)
        indices[indptr[lo] : indptr[hi]] = cols
    return indptr, indices


@dataclass
class MeasureRecord:
    """One node's attribute vector: the ten VGA measures plus bookkeeping."""

    x: int
    y: int
    label: str
    visual_node_count: int
    connectivity: int
    point_first_moment: float
    point_second_moment: float
    visual_mean_depth: float
    integration_tekl: float
    integration_hh: float
    integration_pvalue: float
    visual_entropy: float
    relativized_entropy: float
    reachable_count: int


def compute_all_measures(
    grid: FloorPlanGrid,
    corner_rule: str = DEFAULT_CORNER_RULE,
    graph: VisibilityGraph | None = None,
) -> list[MeasureRecord]:
    """Every measure for every open cell, ordered by (y, x).

    Integration is normalized against reference graphs sized to the node's
    connected component; nodes in components smaller than three (or with
    mean depth exactly 1) get the integration sentinel value.
    """
    g = graph if graph is not None else build_visibility_graph(grid, corner_rule)
    stats = depth_statistics(g)
    deg = g.degrees()
    indptr, indices = adjacency_lists(g)

    delta = (g.coords[indices] - np.repeat(g.coords, np.diff(indptr), axis=0)).astype(float)
    dists = np.hypot(delta[:, 0], delta[:, 1]) * g.cell_size
    zero = np.zeros(1)
    first = np.add.reduceat(np.concatenate([dists, zero]), indptr[:-1])
    second = np.add.reduceat(np.concatenate([dists**2, zero]), indptr[:-1])
    first[deg == 0] = 0.0
    second[deg == 0] = 0.0

    reach = stats["reachable_count"]
    md = np.where(reach > 0, stats["depth_sum"] / np.maximum(reach, 1), 0.0)
    comp_size = reach + 1

    kinds = (
        ("integration_tekl", ReferenceGraphKind.BIPARTITE_TEKL),
        ("integration_hh", ReferenceGraphKind.DIAMOND_HH),
        ("integration_pvalue", ReferenceGraphKind.CORNER_GRID_P),
    )
    integ = {name: np.empty(g.k) for name, _ in kinds}
    for i in range(g.k):
        c = int(comp_size[i])
        for name, kind in kinds:
            if c < 3 or md[i] <= 1.0:
                integ[name][i] = INTEGRATION_SENTINEL
            else:
                integ[name][i] = integration(float(md[i]), c, kind)

    records = []
    k = g.k
    for i in range(k):
        x, y = int(g.coords[i, 0]), int(g.coords[i, 1])
        records.append(
            MeasureRecord(
                x=x,
                y=y,
                label=grid.label_at(x, y),
                visual_node_count=k,
                connectivity=int(deg[i]),
                point_first_moment=float(first[i]),
                point_second_moment=float(second[i]),
                visual_mean_depth=float(md[i]),
                integration_tekl=float(integ["integration_tekl"][i]),
                integration_hh=float(integ["integration_hh"][i]),
                integration_pvalue=float(integ["integration_pvalue"][i]),
                visual_entropy=float(stats["visual_entropy"][i]),
                relativized_entropy=float(stats["relativized_entropy"][i]),
                reachable_count=int(reach[i]),
            )
        )
    return records
