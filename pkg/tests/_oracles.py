"""Independent brute-force implementations used to check the production code.

Everything here deliberately takes a different route from the package:
visibility by exact segment-vs-square geometry (separating axes over integer
coordinates, plus a Fraction-based clipping variant), depths via scipy's
graph machinery or plain dict BFS, measures recomputed from first principles
with math/mpmath.
"""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path


def oracle_adjacency(grid, conservative=True) -> np.ndarray:
    """Dense boolean visibility matrix via segment-square intersection tests.

    A sight line is blocked when the center-to-center segment meets the
    closed square of any blocked cell (conservative rule).  All coordinates
    are doubled so centers and corners are integers and the separating-axis
    test is exact.
    """
    ys, xs = np.nonzero(grid.open_mask)
    coords = np.column_stack([xs, ys]).astype(np.int64)
    k = len(coords)
    bys, bxs = np.nonzero(~grid.open_mask)
    if len(bxs) == 0:
        out = np.ones((k, k), dtype=bool)
        np.fill_diagonal(out, False)
        return out
    sq_x = 2 * bxs.astype(np.int64)   # squares span [sq_x, sq_x+2] x [sq_y, sq_y+2]
    sq_y = 2 * bys.astype(np.int64)

    centers = 2 * coords + 1
    iu, ju = np.triu_indices(k, 1)
    out = np.zeros((k, k), dtype=bool)
    chunk = max(1, 4_000_000 // max(1, len(bxs)))
    for lo in range(0, len(iu), chunk):
        hi = min(lo + chunk, len(iu))
        A = centers[iu[lo:hi]][:, None, :]
        B = centers[ju[lo:hi]][:, None, :]
        D = B - A
        xlo = np.minimum(A[..., 0], B[..., 0])
        xhi = np.maximum(A[..., 0], B[..., 0])
        ylo = np.minimum(A[..., 1], B[..., 1])
        yhi = np.maximum(A[..., 1], B[..., 1])
        ox = (sq_x[None, :] <= xhi) & (sq_x[None, :] + 2 >= xlo)
        oy = (sq_y[None, :] <= yhi) & (sq_y[None, :] + 2 >= ylo)
        smin = None
        smax = None
        for dx in (0, 2):
            for dy in (0, 2):
                s = D[..., 0] * (sq_y[None, :] + dy - A[..., 1]) - D[..., 1] * (
                    sq_x[None, :] + dx - A[..., 0]
                )
                smin = s if smin is None else np.minimum(smin, s)
                smax = s if smax is None else np.maximum(smax, s)
        if conservative:
            straddle = (smin <= 0) & (smax >= 0)
        else:
            straddle = (smin < 0) & (smax > 0)
        hit = (ox & oy & straddle).any(axis=1)
        vis = ~hit
        out[iu[lo:hi], ju[lo:hi]] = vis
        out[ju[lo:hi], iu[lo:hi]] = vis
    return out


def clip_crossed_cells(grid, a_xy, b_xy, conservative=True) -> set[tuple[int, int]]:
    """Cells whose square the open segment between two cell centers meets.

    Exact rational Liang-Barsky clipping; the permissive variant keeps only
    cells whose interior the segment crosses (positive-length clip).
    """
    ax, ay = a_xy
    bx, by = b_xy
    A = (Fraction(2 * ax + 1), Fraction(2 * ay + 1))
    D = (Fraction(2 * (bx - ax)), Fraction(2 * (by - ay)))
    crossed = set()
    for cy in range(grid.height):
        for cx in range(grid.width):
            t0, t1 = Fraction(0), Fraction(1)
            ok = True
            for axis, (lo, hi) in enumerate(((2 * cx, 2 * cx + 2), (2 * cy, 2 * cy + 2))):
                p, q = D[axis], A[axis]
                if p == 0:
                    if not (lo <= q <= hi):
                        ok = False
                        break
                else:
                    ta = (lo - q) / p
                    tb = (hi - q) / p
                    if ta > tb:
                        ta, tb = tb, ta
                    t0 = max(t0, ta)
                    t1 = min(t1, tb)
                    if t0 > t1:
                        ok = False
                        break
            if not ok:
                continue
            if conservative:
                if t0 <= t1:
                    crossed.add((cx, cy))
            else:
                if t1 > t0:
                    crossed.add((cx, cy))
    return crossed


def oracle_depths(adjacency: np.ndarray) -> np.ndarray:
    """All-pairs BFS depths through scipy; unreachable pairs are -1."""
    sparse = csr_matrix(adjacency.astype(np.int8))
    d = shortest_path(sparse, method="D", unweighted=True)
    d[np.isinf(d)] = -1
    return d.astype(np.int64)


def oracle_measures(grid, adjacency: np.ndarray) -> list[dict]:
    """Every spec measure recomputed per node from the oracle adjacency."""
    ys, xs = np.nonzero(grid.open_mask)
    coords = np.column_stack([xs, ys]).astype(float)
    depths = oracle_depths(adjacency)
    k = len(coords)
    out = []
    for i in range(k):
        nbr = np.flatnonzero(adjacency[i])
        delta = coords[nbr] - coords[i]
        dist = [math.hypot(dx, dy) * grid.cell_size for dx, dy in delta]
        row = depths[i]
        reach = row[row > 0]
        record = {
            "connectivity": len(nbr),
            "point_first_moment": math.fsum(dist),
            "point_second_moment": math.fsum(d * d for d in dist),
            "reachable_count": len(reach),
        }
        if len(reach):
            counts = np.bincount(reach)
            L = reach.sum() / len(reach)
            record["visual_mean_depth"] = L
            ent = 0.0
            rel = 0.0
            for d in range(1, len(counts)):
                c = counts[d]
                if c:
                    p = c / len(reach)
                    ent -= p * math.log(p)
                    lq = d * math.log(L) - L - math.lgamma(d + 1)
                    rel -= p * (math.log(p) - lq)
            record["visual_entropy"] = ent
            record["relativized_entropy"] = rel
        else:
            record["visual_mean_depth"] = 0.0
            record["visual_entropy"] = 0.0
            record["relativized_entropy"] = 0.0
        out.append(record)
    return out


def mp_relativized_entropy(counts: dict[int, int]) -> float:
    """High-precision relativized entropy from a depth histogram."""
    total = sum(counts.values())
    L = mpmath.mpf(sum(d * c for d, c in counts.items())) / total
    acc = mpmath.mpf(0)
    for d, c in sorted(counts.items()):
        p = mpmath.mpf(c) / total
        q = L**d * mpmath.e ** (-L) / mpmath.factorial(d)
        acc -= p * mpmath.log(p / q)
    return float(acc)


def mp_point_depth_entropy(counts: dict[int, int]) -> float:
    total = sum(counts.values())
    acc = mpmath.mpf(0)
    for _, c in sorted(counts.items()):
        p = mpmath.mpf(c) / total
        acc -= p * mpmath.log(p)
    return float(acc)


def random_grid(rng: np.random.Generator, max_side: int = 20, max_block=0.4):
    """Random rectangular grid with random blockage; at least one open cell."""
    from vgakit.grid import FloorPlanGrid

    w = int(rng.integers(3, max_side + 1))
    h = int(rng.integers(3, max_side + 1))
    frac = float(rng.uniform(0.0, max_block))
    mask = rng.random((h, w)) >= frac
    if not mask.any():
        mask[int(rng.integers(h)), int(rng.integers(w))] = True
    return FloorPlanGrid(w, h, 0.45, mask, {})


def rep_prune_oracle(tree, X_val, y_val):
    """Optimal bottom-up pruning by dynamic programming over subtrees.

    Returns the minimal validation error achievable by replacing subtrees
    with their majority leaves, preferring the pruned (smaller) tree on
    ties, together with the pruned node count.
    """
    import numpy as np

    def best(node, idx):
        leaf_err = int((y_val[idx] != node.class_code).sum())
        if node.is_leaf:
            return leaf_err, 1
        children = []
        if node.branches is not None:
            codes = X_val[idx, node.attr_index].astype(np.int64)
            for c in sorted(node.branches):
                children.append((node.branches[c], idx[codes == c]))
        else:
            mask = X_val[idx, node.attr_index] <= node.threshold
            children = [(node.left, idx[mask]), (node.right, idx[~mask])]
        sub_err = 0
        sub_size = 1
        for child, cidx in children:
            e, s = best(child, cidx)
            sub_err += e
            sub_size += s
        if leaf_err <= sub_err:
            return leaf_err, 1
        return sub_err, sub_size

    return best(tree.root, np.arange(len(y_val)))
