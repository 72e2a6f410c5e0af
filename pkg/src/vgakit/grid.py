"""Floor plan occupancy grid and its text serialization.

A plan is a raster of square cells (default 0.45 m).  Cells are either
blocked or open; open cells may carry a raw usage label.  The text format is

    width height cell_size
    <height rows of characters>

with ``#`` blocked, ``.`` open-unlabeled and letter codes bound to raw labels
through a sidecar legend CSV (``char,label``).  Row 0 of the file is y = 0.
"""

from __future__ import annotations

import csv
import string
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InfeasibleError, ParseError
from .labels import MISSING_LABEL

LEGEND_SUFFIX = ".legend.csv"

# characters available for label codes, assigned in sorted-label order
_CODE_CHARS = string.ascii_uppercase + string.ascii_lowercase


@dataclass
class FloorPlanGrid:
    """Occupancy raster plus optional per-cell raw usage labels."""

    width: int
    height: int
    cell_size: float = 0.45
    open_mask: np.ndarray = field(default=None)  # bool, shape (height, width)
    labels: dict[tuple[int, int], str] = field(default_factory=dict)

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise InfeasibleError(f"grid extent {self.width}x{self.height} invalid")
        if self.cell_size <= 0:
            raise InfeasibleError(f"cell size {self.cell_size} must be positive")
        if self.open_mask is None:
            self.open_mask = np.zeros((self.height, self.width), dtype=bool)
        self.open_mask = np.asarray(self.open_mask, dtype=bool)
        if self.open_mask.shape != (self.height, self.width):
            raise InfeasibleError("open_mask shape does not match grid extent")
        if not self.open_mask.any():
            raise InfeasibleError("grid has no open cells")
        for (x, y), label in self.labels.items():
            if not (0 <= x < self.width and 0 <= y < self.height):
                raise InfeasibleError(f"label at ({x},{y}) outside grid")
            if not self.open_mask[y, x]:
                raise InfeasibleError(f"label {label!r} at blocked cell ({x},{y})")

    @property
    def blocked(self) -> np.ndarray:
        return ~self.open_mask

    def open_cells(self) -> np.ndarray:
        """Open cell coordinates as an (k, 2) array of (x, y), ordered by (y, x)."""
        ys, xs = np.nonzero(self.open_mask)
        return np.column_stack([xs, ys]).astype(np.int64)

    def label_at(self, x: int, y: int) -> str:
        """Raw label of an open cell; unlabeled cells read as the missing marker."""
        return self.labels.get((x, y), MISSING_LABEL)

    def node_count(self) -> int:
        return int(self.open_mask.sum())


def grid_to_text(grid: FloorPlanGrid) -> tuple[str, dict[str, str]]:
    """Render a grid to the text format; returns (text, legend char->label)."""
    distinct = sorted(set(grid.labels.values()))
    if len(distinct) > len(_CODE_CHARS):
        raise InfeasibleError(f"too many distinct labels ({len(distinct)}) for the text format")
    code_of = {label: _CODE_CHARS[i] for i, label in enumerate(distinct)}
    lines = [f"{grid.width} {grid.height} {grid.cell_size!r}"]
    for y in range(grid.height):
        row = []
        for x in range(grid.width):
            if not grid.open_mask[y, x]:
                row.append("#")
            else:
                label = grid.labels.get((x, y))
                row.append("." if label is None else code_of[label])
        lines.append("".join(row))
    legend = {ch: label for label, ch in code_of.items()}
    return "\n".join(lines) + "\n", legend


def grid_from_text(text: str, legend: dict[str, str] | None = None) -> FloorPlanGrid:
    legend = legend or {}
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty grid file")
    head = lines[0].split()
    if len(head) != 3:
        raise ParseError(f"grid header must be 'width height cell_size', got {lines[0]!r}")
    try:
        width, height = int(head[0]), int(head[1])
        cell_size = float(head[2])
    except ValueError as e:
        raise ParseError(f"bad grid header: {e}") from None
    body = lines[1:]
    if len(body) != height:
        raise ParseError(f"grid body has {len(body)} rows, header says {height}")
    open_mask = np.zeros((height, width), dtype=bool)
    labels: dict[tuple[int, int], str] = {}
    for y, row in enumerate(body):
        if len(row) != width:
            raise ParseError(f"grid row {y} has {len(row)} cells, header says {width}")
        for x, ch in enumerate(row):
            if ch == "#":
                continue
            open_mask[y, x] = True
            if ch == ".":
                continue
            if ch not in legend:
                raise ParseError(f"grid row {y}: character {ch!r} missing from legend")
            labels[(x, y)] = legend[ch]
    return FloorPlanGrid(width, height, cell_size, open_mask, labels)


def write_grid(grid: FloorPlanGrid, path: str | Path) -> None:
    """Write grid text plus its sidecar legend (only when labels exist)."""
    path = Path(path)
    text, legend = grid_to_text(grid)
    path.write_text(text, encoding="utf-8")
    if legend:
        legend_path = path.with_suffix(LEGEND_SUFFIX)
        with open(legend_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["char", "label"])
            for ch in sorted(legend):
                writer.writerow([ch, legend[ch]])


def read_grid(path: str | Path) -> FloorPlanGrid:
    path = Path(path)
    legend: dict[str, str] = {}
    legend_path = path.with_suffix(LEGEND_SUFFIX)
    if legend_path.exists():
        with open(legend_path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ["char", "label"]:
                raise ParseError(f"{legend_path}: legend header must be char,label")
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != 2 or len(row[0]) != 1:
                    raise ParseError(f"{legend_path}:{lineno}: expected single char and label")
                legend[row[0]] = row[1]
    try:
        return grid_from_text(path.read_text(encoding="utf-8"), legend)
    except ParseError as e:
        raise ParseError(f"{path}: {e}") from None
