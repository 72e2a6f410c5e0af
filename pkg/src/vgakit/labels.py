"""Usage classes and the raw-label grouping table.

The twelve grouped classes have a fixed canonical order (G1..G11, EXCLUDE)
that every confusion matrix, report and tie-break in the package uses.  The
grouping of raw survey labels into classes ships as a bundled CSV asset and
can be overridden with a user file of the same two-column shape.
"""

from __future__ import annotations

import csv
from enum import Enum
from importlib import resources
from pathlib import Path

from .errors import SchemaError

#: Marker used in plan files for units with no recorded usage label.
MISSING_LABEL = "?"


class UsageClass(Enum):
    """Grouped usage class; enum order is the canonical report order."""

    G1 = "Open_Workspaces"
    G2 = "Cellular_Workspaces"
    G3 = "Meeting_Spaces"
    G4 = "Storage_Facilities"
    G5 = "Kitchen/Tea_Seating"
    G6 = "Kitchen/Tea_Service"
    G7 = "Print/Copy_Facilities"
    G8 = "Reception"
    G9 = "Extra_Facilities"
    G10 = "Primary_Circulation"
    G11 = "Secondary_Circulation"
    EXCLUDE = "EXCLUDE"

    @property
    def display(self) -> str:
        return self.value

    @property
    def token(self) -> str:
        """Rule/report token, e.g. ``G10:Primary_Circulation``."""
        if self is UsageClass.EXCLUDE:
            return "EXCLUDE"
        return f"{self.name}:{self.value}"

    @property
    def index(self) -> int:
        return CLASS_ORDER.index(self)


CLASS_ORDER: tuple[UsageClass, ...] = tuple(UsageClass)
N_CLASSES = len(CLASS_ORDER)
CLASS_NAMES: tuple[str, ...] = tuple(c.name for c in CLASS_ORDER)


def class_by_name(name: str) -> UsageClass:
    try:
        return UsageClass[name]
    except KeyError:
        raise SchemaError(f"unknown usage class {name!r}") from None


class LabelMap:
    """Total mapping from raw usage labels to grouped classes.

    Unknown labels raise rather than falling into a silent catch-all class.
    """

    def __init__(self, mapping: dict[str, UsageClass]):
        if not mapping:
            raise SchemaError("label map is empty")
        self._mapping = dict(mapping)

    def __len__(self) -> int:
        return len(self._mapping)

    def __contains__(self, raw: str) -> bool:
        return raw in self._mapping

    def lookup(self, raw: str) -> UsageClass:
        try:
            return self._mapping[raw]
        except KeyError:
            raise SchemaError(f"unknown label {raw!r}: not in the label map") from None

    def items(self):
        return self._mapping.items()

    @classmethod
    def from_csv(cls, path: str | Path) -> "LabelMap":
        with open(path, newline="", encoding="utf-8") as fh:
            return cls._read(fh, str(path))

    @classmethod
    def _read(cls, fh, source: str) -> "LabelMap":
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["raw_label", "class"]:
            raise SchemaError(f"{source}: label map header must be raw_label,class")
        mapping: dict[str, UsageClass] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise SchemaError(f"{source}:{lineno}: expected 2 columns, got {len(row)}")
            raw, cls_name = row
            if raw in mapping:
                raise SchemaError(f"{source}:{lineno}: duplicate label {raw!r}")
            mapping[raw] = class_by_name(cls_name)
        return cls(mapping)


def bundled_label_map() -> LabelMap:
    """The grouping table shipped with the package."""
    ref = resources.files("vgakit.data").joinpath("label_map.csv")
    with ref.open("r", encoding="utf-8", newline="") as fh:
        return LabelMap._read(fh, "bundled label_map.csv")
