"""Confidence-driven sample-count bounds for non-identically-distributed data.

When users hold data the current model is already confident about, more of
their samples add little; when a user's data surprises the model, that user
deserves a guaranteed sample count.  This module turns per-sample
prediction-confidence scores into per-user (Z_min, Z_max) bounds through a
two-threshold gate.  Producing the scores themselves is a classifier
concern and stays out of scope; they arrive as plain numbers in [0, 1],
typically from a CSV with columns user_id, sample_id, score.
"""

from __future__ import annotations

import csv
import io
import math
import statistics
from dataclasses import dataclass

__all__ = [
    "ConfidenceReport",
    "aggregate_confidence",
    "assign_bounds",
    "load_confidence_csv",
    "bounds_for_users",
    "DEFAULT_THRESHOLDS",
    "DEFAULT_LOW_CONFIDENCE_BOUNDS",
    "DEFAULT_HIGH_CONFIDENCE_BOUNDS",
]

DEFAULT_THRESHOLDS = (0.9, 0.5)
DEFAULT_LOW_CONFIDENCE_BOUNDS = (100.0, 10000.0)
DEFAULT_HIGH_CONFIDENCE_BOUNDS = (0.0, 10.0)


def _validate_scores(scores) -> list:
    vals = [float(s) for s in scores]
    if not vals:
        raise ValueError("confidence scores must be nonempty")
    for s in vals:
        if not (0.0 <= s <= 1.0):
            raise ValueError(f"confidence score out of [0, 1]: {s}")
    return vals


def aggregate_confidence(scores, method: str = "mean") -> float:
    """Collapse a user's scores to one statistic: mean, median, or min.

    The median of an even count is the lower middle element, so the
    aggregate is always one of the observed scores for median and min.
    """
    vals = _validate_scores(scores)
    if method == "mean":
        return statistics.fmean(vals)
    if method == "median":
        return statistics.median_low(vals)
    if method == "min":
        return min(vals)
    raise ValueError(f"unknown aggregation method: {method!r}")


@dataclass(frozen=True)
class ConfidenceReport:
    """One user's scores and their aggregate under a chosen statistic."""

    user: int
    scores: tuple
    aggregate: float

    @classmethod
    def from_scores(cls, user: int, scores, method: str = "mean") -> "ConfidenceReport":
        vals = _validate_scores(scores)
        return cls(user=user, scores=tuple(vals),
                   aggregate=aggregate_confidence(vals, method))


def assign_bounds(
    aggregate: float,
    thresholds: tuple = DEFAULT_THRESHOLDS,
    low_confidence: tuple = DEFAULT_LOW_CONFIDENCE_BOUNDS,
    high_confidence: tuple = DEFAULT_HIGH_CONFIDENCE_BOUNDS,
) -> tuple:
    """Map an aggregate confidence to a (Z_min, Z_max) sample-count band.

    Above the high threshold the user's contribution is capped (the model
    already handles their data); below the low threshold a minimum count is
    guaranteed; in between the user is unconstrained.
    """
    hi, lo = thresholds
    if not lo < hi:
        raise ValueError("thresholds must satisfy lo < hi")
    for z_min, z_max in (low_confidence, high_confidence):
        if not (0 <= z_min <= z_max):
            raise ValueError("preset bounds must satisfy 0 <= Z_min <= Z_max")
    if aggregate > hi:
        return (float(high_confidence[0]), float(high_confidence[1]))
    if aggregate < lo:
        return (float(low_confidence[0]), float(low_confidence[1]))
    return (0.0, math.inf)


def load_confidence_csv(text: str) -> dict:
    """Parse user_id, sample_id, score rows into per-user score lists.

    A header row is skipped if present; user ids are 1-based in the file
    and returned 0-based.  Sample ids only order the rows and are ignored.
    """
    out: dict = {}
    reader = csv.reader(io.StringIO(text))
    for row in reader:
        if not row or not row[0].strip():
            continue
        first = row[0].strip()
        if not first.lstrip("+-").replace(".", "", 1).isdigit():
            continue
        if len(row) < 3:
            raise ValueError(f"confidence row needs user_id, sample_id, score: {row}")
        user = int(first) - 1
        if user < 0:
            raise ValueError(f"user_id must be >= 1: {first}")
        out.setdefault(user, []).append(float(row[2]))
    if not out:
        raise ValueError("no confidence rows found")
    for scores in out.values():
        _validate_scores(scores)
    return out


def bounds_for_users(
    num_users: int,
    scores_by_user: dict,
    method: str = "mean",
    thresholds: tuple = DEFAULT_THRESHOLDS,
    low_confidence: tuple = DEFAULT_LOW_CONFIDENCE_BOUNDS,
    high_confidence: tuple = DEFAULT_HIGH_CONFIDENCE_BOUNDS,
) -> tuple:
    """Per-user (Z_min, Z_max) tuple; users without scores are unconstrained."""
    bounds = []
    for k in range(num_users):
        if k in scores_by_user:
            agg = aggregate_confidence(scores_by_user[k], method)
            bounds.append(assign_bounds(agg, thresholds, low_confidence,
                                        high_confidence))
        else:
            bounds.append((0.0, math.inf))
    return tuple(bounds)
