"""Matplotlib renderings of the report CSVs.

The pipeline commands emit delimited files; the ``report`` command turns
them into figures written next to the CSVs: confusion heatmaps, the four
integration study scatter plots, and cluster tables.  Everything renders
through the Agg backend, no display required.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import ParseError
from .labels import CLASS_NAMES

_STUDY_SERIES = {
    "depth_vs_node_count.csv": ("visual_node_count", "Visual mean depth vs node count"),
    "integration_vs_depth.csv": ("integration", "Integration vs visual mean depth"),
    "log_integration_vs_log_depth.csv": ("ln integration", "Log integration vs log mean depth"),
    "reciprocal_integration_vs_depth.csv": ("1 / integration", "Reciprocal integration vs visual mean depth"),
}


def _read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(f"{path}: empty CSV")
    return rows[0], rows[1:]


def render_matrix_heatmap(csv_path: str | Path, out_path: str | Path, title: str) -> Path:
    """Class-by-class heatmap of a confusion or normalized-heatmap CSV."""
    csv_path = Path(csv_path)
    header, rows = _read_csv(csv_path)
    data = np.array([[float(v) for v in row[1:]] for row in rows])
    fig, ax = plt.subplots(figsize=(7.5, 6.5))
    im = ax.imshow(data, cmap="viridis")
    ax.set_xticks(range(len(header) - 1), header[1:], rotation=90, fontsize=7)
    ax.set_yticks(range(len(rows)), [r[0] for r in rows], fontsize=7)
    ax.set_xlabel("predicted")
    ax.set_ylabel("actual")
    ax.set_title(title)
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def render_study_figure(csv_path: str | Path, out_path: str | Path) -> Path:
    """Scatter plot of one study series (x column first, then y columns)."""
    csv_path = Path(csv_path)
    header, rows = _read_csv(csv_path)
    ycols = [h for h in header[1:] if h != "sentinel"]
    has_flag = "sentinel" in header
    keep = [r for r in rows if not (has_flag and r[header.index("sentinel")] == "1")]
    x = np.array([float(r[0]) for r in keep])
    fig, ax = plt.subplots(figsize=(7, 5))
    for name in ycols:
        j = header.index(name)
        y = np.array([float(r[j]) for r in keep])
        ax.scatter(x, y, s=4, alpha=0.5, label=name)
    ax.set_xlabel(header[0])
    ylabel, title = _STUDY_SERIES.get(csv_path.name, (", ".join(ycols), csv_path.stem))
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    if len(ycols) > 1:
        ax.legend(markerscale=3, fontsize=8)
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def render_cluster_table(csv_path: str | Path, out_path: str | Path) -> Path:
    """Heatmap of the class x cluster count table."""
    csv_path = Path(csv_path)
    header, rows = _read_csv(csv_path)
    data = np.array([[float(v) for v in row[1:]] for row in rows])
    fig, ax = plt.subplots(figsize=(7.5, 6))
    im = ax.imshow(data, cmap="magma", aspect="auto")
    ax.set_xticks(range(len(header) - 1), header[1:], rotation=90, fontsize=7)
    ax.set_yticks(range(len(rows)), [r[0] for r in rows], fontsize=7)
    ax.set_xlabel("cluster")
    ax.set_ylabel("actual class")
    ax.set_title("Instances per class and cluster")
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def render_report_directory(directory: str | Path) -> list[Path]:
    """Render every recognized CSV in a report directory to a PNG alongside."""
    directory = Path(directory)
    produced: list[Path] = []
    for name, title in (
        ("confusion.csv", "Confusion matrix"),
        ("heatmap.csv", "Confusion heatmap (row-normalized)"),
    ):
        p = directory / name
        if p.exists():
            produced.append(render_matrix_heatmap(p, p.with_suffix(".png"), title))
    for name in _STUDY_SERIES:
        p = directory / name
        if p.exists():
            produced.append(render_study_figure(p, p.with_suffix(".png")))
    p = directory / "cluster_table.csv"
    if p.exists():
        produced.append(render_cluster_table(p, p.with_suffix(".png")))
    return produced
