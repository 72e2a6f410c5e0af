"""Seeded synthetic office layouts.

The generator carves a double-loaded corridor scheme: horizontal primary
corridors with room bands above and below, vertical secondary corridors
tying the blocks together, one door per room.  Every draw comes from one
seeded generator, so a seed fully determines the grid.

``plant_geometry_signal`` relabels the open cells so that usage class is a
known function of the cell's visual mean depth quantile (shallow cells read
as circulation and open work areas, deep pockets as storage), mixed with
uniform label noise controlled by ``strength``.  This gives pipeline tests
a ground truth with a tunable geometry-to-usage link.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleError
from .grid import FloorPlanGrid
from .labels import MISSING_LABEL, UsageClass
from .measures import depth_statistics
from .visibility import build_visibility_graph

#: Representative raw label per class, used when writing synthetic plans.
RAW_LABEL_OF_CLASS: dict[UsageClass, str] = {
    UsageClass.G1: "WRKSP-OPN",
    UsageClass.G2: "WRKSP-CEL",
    UsageClass.G3: "MTG-BKB",
    UsageClass.G4: "OTHFCL-STO",
    UsageClass.G5: "OTHFCL-CAN-SIT",
    UsageClass.G6: "OTHFCL-CAN-KTN",
    UsageClass.G7: "OTHFCL-PRC",
    UsageClass.G8: "OTHFCL-REC",
    UsageClass.G9: "OTHFCL-GYM",
    UsageClass.G10: "CIRC-PRI",
    UsageClass.G11: MISSING_LABEL,
    UsageClass.EXCLUDE: "OTHFCL-STO-LOW",
}

#: Shallow-to-deep class bands for the planted signal, with office-like
#: proportions.  Circulation and reception sit nearest the corridors, open
#: work areas in the middle ground, storage and excluded spaces deepest.
DEPTH_SIGNAL_BANDS: tuple[tuple[UsageClass, float], ...] = (
    (UsageClass.G10, 0.200),
    (UsageClass.G8, 0.018),
    (UsageClass.G1, 0.369),
    (UsageClass.G5, 0.046),
    (UsageClass.G3, 0.122),
    (UsageClass.G2, 0.098),
    (UsageClass.G6, 0.013),
    (UsageClass.G7, 0.010),
    (UsageClass.G11, 0.054),
    (UsageClass.G9, 0.002),
    (UsageClass.G4, 0.047),
    (UsageClass.EXCLUDE, 0.020),
)

_ROOM_CLASS_POOL = (
    (UsageClass.G1, 0.34),
    (UsageClass.G2, 0.12),
    (UsageClass.G3, 0.14),
    (UsageClass.G4, 0.08),
    (UsageClass.G5, 0.07),
    (UsageClass.G6, 0.04),
    (UsageClass.G7, 0.05),
    (UsageClass.G8, 0.05),
    (UsageClass.G9, 0.03),
    (UsageClass.EXCLUDE, 0.08),
)


@dataclass(frozen=True)
class Room:
    x0: int
    y0: int
    x1: int  # exclusive
    y1: int  # exclusive
    label: str


@dataclass
class LayoutSpec:
    """Explicit layout: rooms plus corridors on a fixed canvas."""

    width: int
    height: int
    rooms: list[Room]
    corridors: list[tuple[int, int, int, int]]  # (x0, y0, x1, y1) exclusive
    cell_size: float = 0.45
    seed: int = 0
    doors: list[tuple[int, int]] = field(default_factory=list)

    def validate(self) -> None:
        occupied = np.zeros((self.height, self.width), dtype=bool)
        for r in self.rooms:
            if not (0 <= r.x0 < r.x1 <= self.width and 0 <= r.y0 < r.y1 <= self.height):
                raise InfeasibleError(f"room {r} outside the {self.width}x{self.height} canvas")
            if occupied[r.y0 : r.y1, r.x0 : r.x1].any():
                raise InfeasibleError(f"room {r} overlaps another room")
            occupied[r.y0 : r.y1, r.x0 : r.x1] = True


def build_grid(spec: LayoutSpec) -> FloorPlanGrid:
    """Materialize an explicit spec; rooms must be reachable via corridors."""
    spec.validate()
    open_mask = np.zeros((spec.height, spec.width), dtype=bool)
    labels: dict[tuple[int, int], str] = {}
    for x0, y0, x1, y1 in spec.corridors:
        open_mask[y0:y1, x0:x1] = True
        for y in range(y0, y1):
            for x in range(x0, x1):
                labels[(x, y)] = "CIRC-PRI"
    for r in spec.rooms:
        open_mask[r.y0 : r.y1, r.x0 : r.x1] = True
        for y in range(r.y0, r.y1):
            for x in range(r.x0, r.x1):
                labels[(x, y)] = r.label
    for x, y in spec.doors:
        open_mask[y, x] = True
        labels.setdefault((x, y), "CIRC-PRI")
    grid = FloorPlanGrid(spec.width, spec.height, spec.cell_size, open_mask, labels)
    _require_connected(grid)
    return grid


def _require_connected(grid: FloorPlanGrid) -> None:
    ys, xs = np.nonzero(grid.open_mask)
    start = (int(xs[0]), int(ys[0]))
    seen = {start}
    q = deque([start])
    while q:
        x, y = q.popleft()
        for nx, ny in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if (
                0 <= nx < grid.width
                and 0 <= ny < grid.height
                and grid.open_mask[ny, nx]
                and (nx, ny) not in seen
            ):
                seen.add((nx, ny))
                q.append((nx, ny))
    if len(seen) != len(xs):
        raise InfeasibleError("layout is not connected: some rooms are unreachable")


def _draw_class(rng: np.random.Generator) -> UsageClass:
    classes = [c for c, _ in _ROOM_CLASS_POOL]
    weights = np.array([w for _, w in _ROOM_CLASS_POOL])
    return classes[int(rng.choice(len(classes), p=weights / weights.sum()))]


def generate_office(seed: int, target_cells: int = 2000, cell_size: float = 0.45) -> FloorPlanGrid:
    """Random office layout with roughly ``target_cells`` open cells."""
    if target_cells < 60:
        raise InfeasibleError(f"target_cells must be >= 60, got {target_cells}")

    def build(width: int) -> FloorPlanGrid:
        rng = np.random.default_rng(seed)
        room_depth = int(rng.integers(6, 11))
        corridor_w = int(rng.integers(2, 4))
        rows_per_block = 2 * room_depth + corridor_w + 2
        open_per_col = corridor_w + 2 * room_depth * 0.85
        blocks = max(1, round(np.sqrt(target_cells / (open_per_col * 1.3 * (rows_per_block + 1)))))
        width = max(24, width)
        height = 1 + blocks * (rows_per_block + 1)

        blocked = np.ones((height, width), dtype=bool)
        labels: dict[tuple[int, int], str] = {}
        for b in range(blocks):
            y0 = 1 + b * (rows_per_block + 1)
            wall_top = y0 + room_depth
            corridor0 = wall_top + 1
            wall_bot = corridor0 + corridor_w
            for cy in range(corridor0, corridor0 + corridor_w):
                for cx in range(1, width - 1):
                    blocked[cy, cx] = False
                    labels[(cx, cy)] = "CIRC-PRI"
            for band_y0, band_y1, wall_y in (
                (y0, wall_top, wall_top),
                (wall_bot + 1, wall_bot + 1 + room_depth, wall_bot),
            ):
                x = 1
                while x < width - 1:
                    w_room = int(rng.integers(5, 13))
                    x1 = min(x + w_room, width - 1)
                    if width - 1 - x1 < 5:
                        x1 = width - 1
                    label = RAW_LABEL_OF_CLASS[_draw_class(rng)]
                    for yy in range(band_y0, band_y1):
                        for xx in range(x, x1):
                            blocked[yy, xx] = False
                            if label != MISSING_LABEL:
                                labels[(xx, yy)] = label
                    door_x = int(rng.integers(x, x1))
                    blocked[wall_y, door_x] = False
                    if label != MISSING_LABEL:
                        labels[(door_x, wall_y)] = label
                    x = x1 + 1
        # vertical secondary corridors tie the blocks together
        n_vert = max(1, (width - 8) // 36)
        for i in range(n_vert):
            vx = 4 + int(round((i + 0.5) * (width - 8) / n_vert))
            vx = min(vx, width - 4)
            for vy in range(1, height - 1):
                for dx in (0, 1):
                    blocked[vy, vx + dx] = False
                    labels.pop((vx + dx, vy), None)  # unlabeled: secondary circulation
        open_mask = ~blocked
        labels = {c: l for c, l in labels.items() if open_mask[c[1], c[0]]}
        return FloorPlanGrid(width, height, cell_size, open_mask, labels)

    rng0 = np.random.default_rng(seed)
    room_depth = int(rng0.integers(6, 11))
    corridor_w = int(rng0.integers(2, 4))
    rows_per_block = 2 * room_depth + corridor_w + 2
    open_per_col = corridor_w + 2 * room_depth * 0.85
    blocks = max(1, round(np.sqrt(target_cells / (open_per_col * 1.3 * (rows_per_block + 1)))))
    width = max(24, round(target_cells / (blocks * open_per_col)))

    grid = build(width)
    actual = grid.node_count()
    if abs(actual - target_cells) / target_cells > 0.1:
        width = max(24, round(width * target_cells / actual))
        grid = build(width)
    _require_connected(grid)
    return grid


def plant_geometry_signal(grid: FloorPlanGrid, strength: float, seed: int = 0) -> FloorPlanGrid:
    """Relabel open cells so class tracks mean-depth quantiles.

    With probability ``strength`` a cell takes the class of its depth band;
    otherwise a uniformly random class.  ``strength=1`` is a deterministic
    function of the depth quantiles, ``strength=0`` pure noise.
    """
    if not 0.0 <= strength <= 1.0:
        raise InfeasibleError(f"strength must be within [0,1], got {strength}")
    g = build_visibility_graph(grid)
    stats = depth_statistics(g)
    reach = stats["reachable_count"]
    md = np.where(reach > 0, stats["depth_sum"] / np.maximum(reach, 1), 0.0)

    k = g.k
    order = np.argsort(md, kind="stable")
    ranks = np.empty(k, dtype=np.int64)
    ranks[order] = np.arange(k)
    proportions = np.array([w for _, w in DEPTH_SIGNAL_BANDS])
    boundaries = np.cumsum(proportions / proportions.sum()) * k
    band_classes = [c for c, _ in DEPTH_SIGNAL_BANDS]
    band_of = np.searchsorted(boundaries, ranks, side="right")
    band_of = np.clip(band_of, 0, len(band_classes) - 1)

    rng = np.random.default_rng(seed)
    all_classes = list(UsageClass)
    labels: dict[tuple[int, int], str] = {}
    for i in range(k):
        x, y = int(g.coords[i, 0]), int(g.coords[i, 1])
        if rng.random() < strength:
            cls = band_classes[band_of[i]]
        else:
            cls = all_classes[int(rng.integers(len(all_classes)))]
        raw = RAW_LABEL_OF_CLASS[cls]
        if raw != MISSING_LABEL:
            labels[(x, y)] = raw
    return FloorPlanGrid(grid.width, grid.height, grid.cell_size, grid.open_mask.copy(), labels)
