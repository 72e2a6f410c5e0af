"""Plan record parsing, label grouping and dataset assembly.

A plan file is a 17-column CSV (UTF-8, header row, '.' decimal separator):
seven layout-specific columns (ref, x, y, accommodation label and polygon,
team and team polygon) and the ten visibility measures.  Plans produced by
the vga command on a disconnected layout carry one optional extra column,
``reachable_count``, which is tolerated and ignored here.

Grouping maps each raw accommodation label to one of the twelve usage
classes; the missing-value marker groups into G11 (secondary circulation).
Unknown labels are errors, never a silent class.
"""

from __future__ import annotations

import csv
import io
import math
from collections import deque
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ParseError, SchemaError
from .labels import CLASS_ORDER, LabelMap, UsageClass, bundled_label_map
from .measures import MeasureRecord

#: The ten VGA attribute columns, in canonical order.
VGA_ATTRIBUTES: tuple[str, ...] = (
    "visual_node_count",
    "connectivity",
    "point_first_moment",
    "point_second_moment",
    "visual_mean_depth",
    "integration_tekl",
    "integration_hh",
    "integration_pvalue",
    "visual_entropy",
    "relativized_entropy",
)

#: The eight-attribute subset: the full ten minus the HH and P-value columns.
SUBSET8_ATTRIBUTES: tuple[str, ...] = tuple(
    a for a in VGA_ATTRIBUTES if a not in ("integration_hh", "integration_pvalue")
)

PLAN_COLUMNS: tuple[str, ...] = (
    "ref",
    "x",
    "y",
    "accommodation",
    "accommodation_poly",
    "team",
    "team_poly",
) + VGA_ATTRIBUTES

OPTIONAL_PLAN_COLUMNS: tuple[str, ...] = ("reachable_count",)

_INT_COLUMNS = ("x", "y")


@dataclass(frozen=True)
class PlanRecord:
    """One grid unit of a plan: identity, labels and the ten measures."""

    ref: str
    x: int
    y: int
    accommodation: str
    accommodation_poly: str
    team: str
    team_poly: str
    visual_node_count: float
    connectivity: float
    point_first_moment: float
    point_second_moment: float
    visual_mean_depth: float
    integration_tekl: float
    integration_hh: float
    integration_pvalue: float
    visual_entropy: float
    relativized_entropy: float
    reachable_count: int | None = None


def parse_plan_csv(source: str | io.TextIOBase) -> list[PlanRecord]:
    """Parse a plan CSV into records, validating the 17-column schema."""
    if isinstance(source, str):
        source = io.StringIO(source)
    reader = csv.reader(source)
    header = next(reader, None)
    if header is None:
        raise SchemaError("plan CSV has no header row")
    known = set(PLAN_COLUMNS) | set(OPTIONAL_PLAN_COLUMNS)
    missing = [c for c in PLAN_COLUMNS if c not in header]
    extra = [c for c in header if c not in known]
    if missing:
        raise SchemaError(f"plan CSV is missing column(s): {', '.join(missing)}")
    if extra:
        raise SchemaError(f"plan CSV has unknown column(s): {', '.join(extra)}")
    if len(set(header)) != len(header):
        raise SchemaError("plan CSV has duplicate columns")
    pos = {name: header.index(name) for name in header}
    has_reach = "reachable_count" in pos

    records: list[PlanRecord] = []
    seen_xy: set[tuple[int, int]] = set()
    for rownum, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise SchemaError(f"row {rownum}: expected {len(header)} columns, got {len(row)}")
        values: dict[str, object] = {}
        for name in PLAN_COLUMNS:
            cell = row[pos[name]]
            if name in _INT_COLUMNS:
                try:
                    values[name] = int(cell)
                except ValueError:
                    raise ParseError(f"row {rownum}: column {name} must be an integer, got {cell!r}") from None
            elif name in VGA_ATTRIBUTES:
                try:
                    v = float(cell)
                except ValueError:
                    raise ParseError(f"row {rownum}: column {name} must be numeric, got {cell!r}") from None
                if math.isnan(v):
                    raise ParseError(f"row {rownum}: column {name} is missing (NaN)")
                values[name] = v
            else:
                values[name] = cell
        if has_reach:
            try:
                values["reachable_count"] = int(row[pos["reachable_count"]])
            except ValueError:
                raise ParseError(f"row {rownum}: reachable_count must be an integer") from None
        xy = (values["x"], values["y"])
        if xy in seen_xy:
            raise SchemaError(f"row {rownum}: duplicate cell coordinates {xy}")
        seen_xy.add(xy)
        records.append(PlanRecord(**values))
    return records


def _format_value(name: str, record: PlanRecord) -> str:
    v = getattr(record, name)
    if name in _INT_COLUMNS or name == "reachable_count":
        return str(int(v))
    if name in VGA_ATTRIBUTES:
        return repr(float(v))
    return str(v)


def serialize_plan_csv(records: Sequence[PlanRecord], sink: io.TextIOBase | None = None) -> str | None:
    """Write records in canonical column order; floats keep full precision.

    The reachable_count column is appended only when present on the records
    (all or none), which keeps connected plans at exactly 17 columns.
    """
    with_reach = [r.reachable_count is not None for r in records]
    if any(with_reach) and not all(with_reach):
        raise SchemaError("records mix present and absent reachable_count")
    columns = PLAN_COLUMNS + (OPTIONAL_PLAN_COLUMNS if records and with_reach[0] else ())
    own = sink is None
    out = sink or io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for r in records:
        writer.writerow([_format_value(c, r) for c in columns])
    if own:
        return out.getvalue()
    return None


def read_plan_csv(path: str | Path) -> list[PlanRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        return parse_plan_csv(fh)


def write_plan_csv(records: Sequence[PlanRecord], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        serialize_plan_csv(records, fh)


def group_label(raw: str, label_map: LabelMap | None = None) -> UsageClass:
    """Deterministic raw-label to class mapping; unknown labels raise."""
    return (label_map or bundled_label_map()).lookup(raw)


def measures_to_plan_records(
    measure_records: Sequence[MeasureRecord], plan_id: str = "plan"
) -> list[PlanRecord]:
    """Adapt computed measures to the plan schema.

    Polygon ids are derived from 4-connected regions of equal raw label;
    team columns have no source in the grid format and are filled with NA.
    Reachable counts are attached only when the plan is disconnected.
    """
    label_of = {(m.x, m.y): m.label for m in measure_records}
    region_of: dict[tuple[int, int], int] = {}
    n_regions = 0
    for m in measure_records:
        cell = (m.x, m.y)
        if cell in region_of:
            continue
        region = n_regions
        n_regions += 1
        q = deque([cell])
        region_of[cell] = region
        while q:
            cx, cy = q.popleft()
            for nxt in ((cx + 1, cy), (cx - 1, cy), (cx, cy + 1), (cx, cy - 1)):
                if nxt not in region_of and label_of.get(nxt) == label_of[cell]:
                    region_of[nxt] = region
                    q.append(nxt)

    k = len(measure_records)
    disconnected = any(m.reachable_count != k - 1 for m in measure_records)
    out = []
    for m in measure_records:
        out.append(
            PlanRecord(
                ref=f"{plan_id}:{m.x}:{m.y}",
                x=m.x,
                y=m.y,
                accommodation=m.label,
                accommodation_poly=f"{plan_id}:P{region_of[(m.x, m.y)]}",
                team="NA",
                team_poly="NA",
                visual_node_count=float(m.visual_node_count),
                connectivity=float(m.connectivity),
                point_first_moment=m.point_first_moment,
                point_second_moment=m.point_second_moment,
                visual_mean_depth=m.visual_mean_depth,
                integration_tekl=m.integration_tekl,
                integration_hh=m.integration_hh,
                integration_pvalue=m.integration_pvalue,
                visual_entropy=m.visual_entropy,
                relativized_entropy=m.relativized_entropy,
                reachable_count=m.reachable_count if disconnected else None,
            )
        )
    return out


@dataclass(frozen=True)
class Attribute:
    """Dataset column: numeric, or nominal with a fixed value vocabulary."""

    name: str
    kind: str                      # "numeric" | "nominal"
    values: tuple[str, ...] = ()   # nominal vocabulary, index = stored code

    def __post_init__(self):
        if self.kind not in ("numeric", "nominal"):
            raise SchemaError(f"attribute {self.name}: unknown kind {self.kind!r}")
        if self.kind == "nominal" and not self.values:
            raise SchemaError(f"attribute {self.name}: nominal attribute needs values")


@dataclass
class Dataset:
    """Instance table: attribute matrix plus the class column.

    Numeric attributes store their value; nominal attributes store an index
    into the attribute's value vocabulary.  The class column stores indices
    into the canonical class order.
    """

    attributes: tuple[Attribute, ...]
    X: np.ndarray   # (n, m) float64
    y: np.ndarray   # (n,) int64 class codes

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.X.ndim != 2 or self.X.shape[1] != len(self.attributes):
            raise SchemaError("dataset matrix does not match the attribute schema")
        if len(self.y) != len(self.X):
            raise SchemaError("class column length does not match the instance count")
        if np.isnan(self.X).any():
            raise SchemaError("dataset contains missing values")

    def __len__(self) -> int:
        return len(self.X)

    @property
    def n_attributes(self) -> int:
        return len(self.attributes)

    def attribute_index(self, name: str) -> int:
        for i, a in enumerate(self.attributes):
            if a.name == name:
                return i
        raise SchemaError(f"unknown attribute {name!r}")

    def column(self, name: str) -> np.ndarray:
        return self.X[:, self.attribute_index(name)]

    def classes_present(self) -> list[UsageClass]:
        return [CLASS_ORDER[c] for c in sorted(set(self.y.tolist()))]


def dataset_from_records(
    records: Sequence[PlanRecord], label_map: LabelMap | None = None
) -> Dataset:
    """Build the full instance table; the class comes from the grouped label."""
    if not records:
        raise SchemaError("no records to build a dataset from")
    label_map = label_map or bundled_label_map()
    nominal_cols = ("ref", "accommodation_poly", "team", "team_poly")
    attrs: list[Attribute] = []
    columns: list[np.ndarray] = []
    for name in ("ref", "x", "y", "accommodation_poly", "team", "team_poly") + VGA_ATTRIBUTES:
        raw = [getattr(r, name) for r in records]
        if name in nominal_cols:
            vocab = tuple(sorted(set(raw)))
            code = {v: i for i, v in enumerate(vocab)}
            attrs.append(Attribute(name, "nominal", vocab))
            columns.append(np.array([code[v] for v in raw], dtype=np.float64))
        else:
            attrs.append(Attribute(name, "numeric"))
            columns.append(np.array(raw, dtype=np.float64))
    y = np.array(
        [group_label(r.accommodation, label_map).index for r in records], dtype=np.int64
    )
    return Dataset(tuple(attrs), np.column_stack(columns), y)


def select_attributes(ds: Dataset, preset, pca_model=None) -> Dataset:
    """Project the dataset onto an attribute preset.

    ``full10`` keeps the ten VGA attributes, ``subset8`` drops the HH and
    P-value integrations, ``pca`` projects through a fitted model, and an
    explicit list selects by name.  Rows and the class column are untouched.
    """
    if preset == "pca":
        if pca_model is None:
            raise SchemaError("preset 'pca' needs a fitted PCA model")
        from .transforms import pca_transform

        base = select_attributes(ds, list(pca_model.attribute_names))
        Z = pca_transform(pca_model, base.X)
        attrs = tuple(Attribute(f"pc{i+1}", "numeric") for i in range(Z.shape[1]))
        return Dataset(attrs, Z, ds.y.copy())
    if preset == "full10":
        names = list(VGA_ATTRIBUTES)
    elif preset == "subset8":
        names = list(SUBSET8_ATTRIBUTES)
    elif isinstance(preset, (list, tuple)):
        names = list(preset)
        if not names:
            raise SchemaError("explicit attribute list is empty")
    else:
        raise SchemaError(f"unknown attribute preset {preset!r}")
    idx = [ds.attribute_index(n) for n in names]
    attrs = tuple(ds.attributes[i] for i in idx)
    return Dataset(attrs, ds.X[:, idx].copy(), ds.y.copy())


def write_dataset_csv(ds: Dataset, path: str | Path) -> None:
    """Dataset file: one column per attribute plus a final class column."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([a.name for a in ds.attributes] + ["class"])
        for i in range(len(ds)):
            row = []
            for j, a in enumerate(ds.attributes):
                row.append(a.values[int(ds.X[i, j])] if a.kind == "nominal" else repr(ds.X[i, j]))
            row.append(CLASS_ORDER[ds.y[i]].name)
            writer.writerow(row)


def read_dataset_csv(path: str | Path) -> Dataset:
    """Read a dataset file written by :func:`write_dataset_csv` (numeric attributes)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[-1] != "class":
            raise SchemaError(f"{path}: dataset file must end with a class column")
        names = header[:-1]
        X_rows: list[list[float]] = []
        y: list[int] = []
        class_code = {c.name: i for i, c in enumerate(CLASS_ORDER)}
        for rownum, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise SchemaError(f"{path}:{rownum}: expected {len(header)} columns")
            try:
                X_rows.append([float(v) for v in row[:-1]])
            except ValueError as e:
                raise ParseError(f"{path}:{rownum}: {e}") from None
            if row[-1] not in class_code:
                raise SchemaError(f"{path}:{rownum}: unknown class {row[-1]!r}")
            y.append(class_code[row[-1]])
    if not X_rows:
        raise SchemaError(f"{path}: dataset file has no instances")
    attrs = tuple(Attribute(n, "numeric") for n in names)
    return Dataset(attrs, np.array(X_rows), np.array(y))
