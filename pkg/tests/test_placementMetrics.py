import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.exceptions import ModelError
from src.placementMetrics import (
    FRONTIER_COLUMNS,
    assignMasters,
    avgCtrCtrDelay,
    avgSwCtrDelay,
    evaluatePlacement,
    placementCount,
    pointsToFrame,
    validatePlacement,
)
from src.topology import allPairsDelays
from tests.conftest import topologies


def test_quarter_placement_on_linear8(linear8Delays):
    # nodes 1 and 5 split the chain into two halves of four
    assert avgSwCtrDelay(linear8Delays, (1, 5)) == pytest.approx(1.0)
    assert avgCtrCtrDelay(linear8Delays, (1, 5)) == pytest.approx(4.0)


def test_middle_pair_on_linear8(linear8Delays):
    assert avgSwCtrDelay(linear8Delays, (3, 4)) == pytest.approx(1.5)
    assert avgCtrCtrDelay(linear8Delays, (3, 4)) == pytest.approx(1.0)


def test_single_controller(linear8Delays):
    assert avgCtrCtrDelay(linear8Delays, (0,)) == 0.0
    assert avgSwCtrDelay(linear8Delays, (0,)) == pytest.approx(3.5)


def test_every_node_a_controller(linear8Delays):
    assert avgSwCtrDelay(linear8Delays, tuple(range(8))) == 0.0


def test_master_ties_go_to_lowest_index(linear8Delays):
    # switch 2 sits halfway between controllers at 0 and 4
    masters = assignMasters(linear8Delays, (4, 0))
    assert masters[2] == 0
    masters = assignMasters(linear8Delays, (0, 4))
    assert masters[2] == 0


def test_triangle_is_symmetric(triangle):
    d = allPairsDelays(triangle)
    points = {evaluatePlacement(d, p).delays for p in itertools.combinations(range(3), 2)}
    assert points == {(1.0 / 3.0, 1.0)}


@pytest.mark.parametrize(
    "placement, message",
    [
        ((), "between 1 and"),
        ((1, 1), "share a switch"),
        ((0, 8), "outside"),
        (tuple(range(9)), "between 1 and"),
    ],
)
def test_invalid_placements(placement, message):
    with pytest.raises(ModelError, match=message):
        validatePlacement(placement, 8)


@pytest.mark.parametrize("n, c, expected", [(18, 3, 816), (11, 3, 165), (23, 3, 1771), (35, 3, 6545), (5, 5, 1)])
def test_placement_count(n, c, expected):
    assert placementCount(n, c) == expected


def test_placement_count_rejects_too_many_controllers():
    with pytest.raises(ModelError):
        placementCount(3, 4)


def test_points_to_frame_is_sorted(linear8Delays):
    points = [evaluatePlacement(linear8Delays, p) for p in [(0, 7), (3, 4), (1, 5)]]
    df = pointsToFrame(points)
    assert list(df.columns) == FRONTIER_COLUMNS
    assert list(df["placement"]) == ["1;5", "3;4", "0;7"]


@settings(max_examples=50, deadline=None)
@given(topologies(), st.data())
def test_adding_a_controller_never_hurts_sw_ctr(t, data):
    d = allPairsDelays(t)
    c = data.draw(st.integers(min_value=1, max_value=t.size - 1))
    p = tuple(data.draw(st.permutations(range(t.size)))[:c])
    extra = next(n for n in range(t.size) if n not in p)
    assert avgSwCtrDelay(d, p + (extra,)) <= avgSwCtrDelay(d, p) + 1e-12


@settings(max_examples=50, deadline=None)
@given(topologies(), st.data())
def test_metrics_ignore_placement_order(t, data):
    d = allPairsDelays(t)
    c = data.draw(st.integers(min_value=1, max_value=t.size))
    p = tuple(data.draw(st.permutations(range(t.size)))[:c])
    q = tuple(sorted(p))
    assert avgSwCtrDelay(d, p) == pytest.approx(avgSwCtrDelay(d, q))
    assert avgCtrCtrDelay(d, p) == pytest.approx(avgCtrCtrDelay(d, q))
    masters = np.asarray(p)[assignMasters(d, p)]
    np.testing.assert_allclose(d[np.arange(t.size), masters], d[:, list(p)].min(axis=1))


@settings(max_examples=40, deadline=None)
@given(topologies(maxNodes=7), st.integers(min_value=1, max_value=3), st.integers(min_value=2, max_value=9))
def test_scaling_delays_scales_both_aggregates(t, c, k):
    d = allPairsDelays(t)
    scaled = d.scaled(k)
    c = min(c, t.size)
    placements = list(itertools.combinations(range(t.size), c))
    for p in placements:
        assert avgSwCtrDelay(scaled, p) == pytest.approx(k * avgSwCtrDelay(d, p))
        assert avgCtrCtrDelay(scaled, p) == pytest.approx(k * avgCtrCtrDelay(d, p))

    # integer latencies and factors keep every comparison exact
    for metric in (avgSwCtrDelay, avgCtrCtrDelay):
        best = min(placements, key=lambda p: (metric(d, p), p))
        assert min(placements, key=lambda p: (metric(scaled, p), p)) == best
