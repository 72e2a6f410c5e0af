"""Shared fixtures.

The synthetic corpus (six layouts, 500 to 20000 open cells, planted
geometry-to-usage signal) is expensive to analyze, so it is computed once
per session and shared by the integration study, learner and acceptance
tests.
"""

from __future__ import annotations

import numpy as np
import pytest

from vgakit.grid import FloorPlanGrid, grid_from_text
from vgakit.ingest import dataset_from_records, measures_to_plan_records, select_attributes
from vgakit.measures import compute_all_measures
from vgakit.synth import generate_office, plant_geometry_signal

CORPUS_SIZES = (500, 1500, 4000, 8000, 14000, 20000)
CORPUS_SEED = 20150901
SIGNAL_STRENGTH = 0.85


@pytest.fixture
def open3x3() -> FloorPlanGrid:
    return grid_from_text("3 3 0.45\n...\n...\n...\n")


@pytest.fixture
def plus_shape() -> FloorPlanGrid:
    return grid_from_text("3 3 0.45\n#.#\n...\n#.#\n")


@pytest.fixture
def corridor1x5() -> FloorPlanGrid:
    return grid_from_text("5 1 0.45\n.....\n")


@pytest.fixture(scope="session")
def corpus_grids() -> list[FloorPlanGrid]:
    grids = []
    for i, size in enumerate(CORPUS_SIZES):
        grid = generate_office(CORPUS_SEED + i, target_cells=size)
        grids.append(plant_geometry_signal(grid, SIGNAL_STRENGTH, seed=CORPUS_SEED + i))
    return grids


@pytest.fixture(scope="session")
def corpus_records(corpus_grids):
    records = []
    for i, grid in enumerate(corpus_grids):
        measures = compute_all_measures(grid)
        records.extend(measures_to_plan_records(measures, plan_id=f"office_{i:02d}"))
    return records


@pytest.fixture(scope="session")
def corpus_dataset(corpus_records):
    ds = dataset_from_records(corpus_records)
    return select_attributes(ds, "full10")
