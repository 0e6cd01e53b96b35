"""Confidence-score aggregation and the two-threshold bound gate."""

import math

import pytest

from lcpa.uncertainty import (
    DEFAULT_HIGH_CONFIDENCE_BOUNDS,
    DEFAULT_LOW_CONFIDENCE_BOUNDS,
    DEFAULT_THRESHOLDS,
    ConfidenceReport,
    aggregate_confidence,
    assign_bounds,
    bounds_for_users,
    load_confidence_csv,
)


def test_aggregate_statistics():
    scores = [0.2, 0.8, 0.5, 0.9]
    assert aggregate_confidence(scores, "mean") == pytest.approx(0.6)
    assert aggregate_confidence(scores, "median") == 0.5  # lower middle
    assert aggregate_confidence(scores, "min") == 0.2
    assert aggregate_confidence([0.999] * 8, "min") == 0.999
    assert aggregate_confidence([0.274, 0.9], "min") == 0.274


def test_aggregate_singleton_is_identity():
    for method in ("mean", "median", "min"):
        assert aggregate_confidence([0.42], method) == 0.42


def test_aggregate_validation():
    with pytest.raises(ValueError, match="nonempty"):
        aggregate_confidence([], "mean")
    with pytest.raises(ValueError, match="out of"):
        aggregate_confidence([0.5, 1.2], "mean")
    with pytest.raises(ValueError, match="unknown aggregation"):
        aggregate_confidence([0.5], "mode")


def test_confidence_report_carries_aggregate():
    rep = ConfidenceReport.from_scores(3, [0.4, 0.6], "mean")
    assert rep.user == 3
    assert rep.scores == (0.4, 0.6)
    assert rep.aggregate == pytest.approx(0.5)


def test_gate_maps_documented_examples():
    assert assign_bounds(0.999) == (0.0, 10.0)
    assert assign_bounds(0.274) == (100.0, 10000.0)
    assert assign_bounds(0.7) == (0.0, math.inf)


def test_gate_thresholds_are_strict():
    hi, lo = DEFAULT_THRESHOLDS
    assert assign_bounds(hi) == (0.0, math.inf)   # exactly at hi: middle band
    assert assign_bounds(lo) == (0.0, math.inf)   # exactly at lo: middle band
    assert assign_bounds(hi + 1e-12) == DEFAULT_HIGH_CONFIDENCE_BOUNDS
    assert assign_bounds(lo - 1e-12) == DEFAULT_LOW_CONFIDENCE_BOUNDS


def test_gate_is_a_two_step_function():
    grid = [i / 1000 for i in range(1001)]
    bands = [assign_bounds(x) for x in grid]
    lowers = [b[0] for b in bands]
    for a, b in zip(lowers, lowers[1:]):
        assert b <= a  # raising confidence never raises the guaranteed floor
    for lo_z, hi_z in bands:
        assert lo_z <= hi_z
    # exactly three regimes, switching at the documented thresholds
    assert sorted(set(bands)) == sorted(
        {DEFAULT_LOW_CONFIDENCE_BOUNDS, (0.0, math.inf),
         DEFAULT_HIGH_CONFIDENCE_BOUNDS})
    switches = [x for x, b1, b2 in zip(grid[1:], bands, bands[1:]) if b1 != b2]
    assert switches == [0.5, 0.901]  # strict < lo, strict > hi


def test_gate_custom_presets_and_validation():
    got = assign_bounds(0.95, thresholds=(0.8, 0.3),
                        high_confidence=(5.0, 50.0))
    assert got == (5.0, 50.0)
    with pytest.raises(ValueError, match="lo < hi"):
        assign_bounds(0.5, thresholds=(0.4, 0.6))
    with pytest.raises(ValueError, match="preset bounds"):
        assign_bounds(0.95, high_confidence=(10.0, 5.0))


def test_csv_loading_groups_by_user():
    text = "user_id,sample_id,score\n1,1,0.95\n1,2,0.99\n2,1,0.30\n"
    got = load_confidence_csv(text)
    assert got == {0: [0.95, 0.99], 1: [0.30]}


def test_csv_loading_errors():
    with pytest.raises(ValueError, match="no confidence rows"):
        load_confidence_csv("user_id,sample_id,score\n")
    with pytest.raises(ValueError, match="needs user_id"):
        load_confidence_csv("1,1\n")
    with pytest.raises(ValueError, match="user_id must be"):
        load_confidence_csv("0,1,0.5\n")
    with pytest.raises(ValueError, match="out of"):
        load_confidence_csv("1,1,1.5\n")


def test_bounds_for_users_fills_missing_users():
    scores = {0: [0.95, 0.99], 2: [0.2, 0.3]}
    got = bounds_for_users(3, scores, method="mean")
    assert got[0] == (0.0, 10.0)
    assert got[1] == (0.0, math.inf)
    assert got[2] == DEFAULT_LOW_CONFIDENCE_BOUNDS


def test_bounds_for_users_respects_method():
    scores = {0: [0.95, 0.4]}  # mean 0.675 -> middle; min 0.4 -> floor preset
    assert bounds_for_users(1, scores, "mean")[0] == (0.0, math.inf)
    assert bounds_for_users(1, scores, "min")[0] == DEFAULT_LOW_CONFIDENCE_BOUNDS


def test_end_to_end_csv_to_bounds():
    text = "1,1,0.999\n1,2,0.999\n2,1,0.274\n2,2,0.9\n"
    scores = load_confidence_csv(text)
    got = bounds_for_users(2, scores, method="min")
    assert got == ((0.0, 10.0), (100.0, 10000.0))
