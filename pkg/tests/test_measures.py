"""Per-node measures: closed-form examples, oracle equivalence, invariants."""

import math

import numpy as np
import pytest

from vgakit.errors import NumericError
from vgakit.grid import FloorPlanGrid, grid_from_text
from vgakit.measures import (
    compute_all_measures,
    connectivity,
    depth_statistics,
    mean_depth,
    point_depth_entropy,
    point_first_moment,
    point_second_moment,
    relativized_entropy,
    visual_depths,
)
from vgakit.visibility import build_visibility_graph

from _oracles import (
    mp_point_depth_entropy,
    mp_relativized_entropy,
    oracle_adjacency,
    oracle_measures,
    random_grid,
)


def test_complete_graph_depths(open3x3):
    g = build_visibility_graph(open3x3)
    h = visual_depths(g, 0)
    assert h.reachable_count == 8
    assert h.d_max == 1
    assert h.counts[1] == 8
    assert mean_depth(h) == 1.0
    assert point_depth_entropy(h) == 0.0


def test_plus_shape_arm_depths(plus_shape):
    g = build_visibility_graph(plus_shape)
    arm = g.node_index(1, 0)
    h = visual_depths(g, arm)
    # center and the opposite arm at depth 1, side arms at depth 2
    assert h.counts[1] == 2 and h.counts[2] == 2
    assert (h.counts[1] * 1 + h.counts[2] * 2) == 6
    assert mean_depth(h) == 6 / 4
    assert point_depth_entropy(h) == pytest.approx(math.log(2), abs=1e-12)


def test_two_component_grid_reports_unreachable():
    grid = grid_from_text("3 1 0.45\n.#.\n")
    g = build_visibility_graph(grid)
    h = visual_depths(g, 0)
    assert h.reachable_count == 0
    assert len(h.unreachable) == 1
    with pytest.raises(NumericError):
        mean_depth(h)


def test_connectivity_examples(open3x3, plus_shape):
    g = build_visibility_graph(open3x3)
    assert connectivity(g, 4) == 8
    gp = build_visibility_graph(plus_shape)
    assert connectivity(gp, gp.node_index(1, 0)) == 2
    single = build_visibility_graph(grid_from_text("1 1 0.45\n.\n"))
    assert connectivity(single, 0) == 0


def test_first_moment_corridor_end():
    grid = grid_from_text("3 1 0.45\n...\n")
    g = build_visibility_graph(grid)
    end = g.node_index(0, 0)
    assert point_first_moment(g, end) == pytest.approx(0.45 + 0.90, abs=1e-12)
    assert point_second_moment(g, end) == pytest.approx(0.45**2 + 0.90**2, abs=1e-12)


def test_first_moment_open_center(open3x3):
    g = build_visibility_graph(open3x3)
    center = g.node_index(1, 1)
    expected = 4 * 0.45 + 4 * 0.45 * math.sqrt(2)
    assert point_first_moment(g, center) == pytest.approx(expected, abs=1e-12)


def test_second_moment_elongation():
    # same connectivity, but a corridor spreads its isovist farther
    corridor = grid_from_text("20 1 0.45\n" + "." * 20 + "\n")
    block = grid_from_text("5 4 0.45\n" + "\n".join(["....."] * 4) + "\n")
    gc = build_visibility_graph(corridor)
    gb = build_visibility_graph(block)
    assert gc.degree(0) == gb.degree(gb.node_index(0, 0)) == 19
    assert point_second_moment(gc, 0) > point_second_moment(gb, gb.node_index(0, 0))


def test_relativized_entropy_complete_graph(open3x3):
    g = build_visibility_graph(open3x3)
    h = visual_depths(g, 0)
    # single depth term: p=1, L=1, q = e^-1, so the printed sum equals -1
    assert relativized_entropy(h) == pytest.approx(-1.0, abs=1e-12)
    assert relativized_entropy(h, sign_corrected=True) == pytest.approx(1.0, abs=1e-12)


def test_relativized_entropy_plus_arm_matches_mpmath(plus_shape):
    g = build_visibility_graph(plus_shape)
    arm = g.node_index(1, 0)
    h = visual_depths(g, arm)
    expected = mp_relativized_entropy({1: 2, 2: 2})
    assert relativized_entropy(h) == pytest.approx(expected, abs=1e-12)
    assert point_depth_entropy(h) == pytest.approx(mp_point_depth_entropy({1: 2, 2: 2}), abs=1e-12)


def test_uniform_depth_distribution_entropy():
    # a 1x5 corridor end cell sees everything: p_1 = 1; compare a snake with
    # uniform two-depth histogram against ln m
    grid = grid_from_text("3 3 0.45\n..#\n#..\n###\n")
    g = build_visibility_graph(grid)
    for node in range(g.k):
        h = visual_depths(g, node)
        m = int((h.counts[1:] > 0).sum())
        assert 0.0 <= point_depth_entropy(h) <= math.log(max(m, 1)) + 1e-12


def test_all_measures_3x3_symmetry(open3x3):
    records = compute_all_measures(open3x3)
    assert len(records) == 9
    assert all(r.visual_mean_depth == 1.0 for r in records)
    assert all(r.connectivity == 8 for r in records)
    assert all(r.visual_entropy == 0.0 for r in records)
    # moments split into center / edge / corner symmetry groups
    center = [r for r in records if (r.x, r.y) == (1, 1)][0]
    corners = [r for r in records if (r.x + r.y) % 2 == 0 and (r.x, r.y) != (1, 1)]
    assert len({round(r.point_first_moment, 12) for r in corners}) == 1
    assert center.point_first_moment < corners[0].point_first_moment


def test_batched_stats_match_single_node_api(plus_shape):
    g = build_visibility_graph(plus_shape)
    stats = depth_statistics(g)
    for node in range(g.k):
        h = visual_depths(g, node)
        assert stats["reachable_count"][node] == h.reachable_count
        if h.reachable_count:
            assert stats["depth_sum"][node] == int((np.arange(len(h.counts)) * h.counts).sum())
            assert stats["visual_entropy"][node] == pytest.approx(point_depth_entropy(h), abs=1e-12)
            assert stats["relativized_entropy"][node] == pytest.approx(
                relativized_entropy(h), abs=1e-12
            )


def test_measures_match_oracle_random_grids():
    rng = np.random.default_rng(23)
    for _ in range(15):
        grid = random_grid(rng, max_side=10)
        adjacency = oracle_adjacency(grid)
        expected = oracle_measures(grid, adjacency)
        records = compute_all_measures(grid)
        assert len(records) == len(expected)
        for rec, exp in zip(records, expected):
            assert rec.connectivity == exp["connectivity"]
            assert rec.reachable_count == exp["reachable_count"]
            assert rec.point_first_moment == pytest.approx(exp["point_first_moment"], abs=1e-9)
            assert rec.point_second_moment == pytest.approx(exp["point_second_moment"], abs=1e-9)
            assert rec.visual_mean_depth == pytest.approx(exp["visual_mean_depth"], abs=1e-9)
            assert rec.visual_entropy == pytest.approx(exp["visual_entropy"], abs=1e-9)
            assert rec.relativized_entropy == pytest.approx(exp["relativized_entropy"], abs=1e-9)


def _measure_multiset(records):
    return sorted(
        (
            r.connectivity,
            round(r.point_first_moment, 9),
            round(r.point_second_moment, 9),
            round(r.visual_mean_depth, 9),
            round(r.visual_entropy, 9),
            round(r.relativized_entropy, 9),
        )
        for r in records
    )


def test_rotation_reflection_isometry():
    rng = np.random.default_rng(5)
    for _ in range(6):
        grid = random_grid(rng, max_side=8)
        base = _measure_multiset(compute_all_measures(grid))
        for transform in (np.rot90, np.fliplr, lambda m: np.rot90(m, 2)):
            mask = transform(grid.open_mask)
            other = FloorPlanGrid(mask.shape[1], mask.shape[0], grid.cell_size, mask, {})
            assert _measure_multiset(compute_all_measures(other)) == base


def test_records_are_ordered_row_major(plus_shape):
    records = compute_all_measures(plus_shape)
    coords = [(r.y, r.x) for r in records]
    assert coords == sorted(coords)
