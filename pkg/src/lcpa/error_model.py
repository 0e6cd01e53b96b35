"""Power-law learning curves: evaluation and least-squares fitting.

The model maps a training-set size v to a classification error a*v^(-b).
Fitting minimizes the mean squared residual on raw errors over (a, b) >= 0
using a dense grid on the exponent (the scale has a closed-form optimum for
each fixed exponent) followed by damped Gauss-Newton refinement.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .scenario import ErrorModelParams

__all__ = [
    "FitPoint",
    "predict",
    "predict_weighted",
    "fit",
    "fit_mse",
    "grid_reference_mse",
    "extrapolation_check",
    "fit_points_from_csv",
]

_B_MAX = 2.0
_B_STEP = 0.001


@dataclass(frozen=True)
class FitPoint:
    """One measured (sample size, observed error) pair."""

    sample_size: float
    observed_error: float

    def __post_init__(self) -> None:
        if self.sample_size <= 0:
            raise ValueError("sample_size must be positive")
        if not (0.0 <= self.observed_error <= 1.0):
            raise ValueError("observed_error must be in [0, 1]")


def predict(params: ErrorModelParams, v: float):
    """Unweighted error estimate a*v^(-b); v may be a scalar or array."""
    varr = np.asarray(v, dtype=float)
    if np.any(varr <= 0):
        raise ValueError("sample size must be positive")
    out = params.scale * varr ** (-params.exponent)
    return out if varr.ndim else float(out)


def predict_weighted(params: ErrorModelParams, v: float):
    """Safety-weighted error estimate beta*a*v^(-b)."""
    out = params.safety * np.asarray(predict(params, v))
    return out if out.ndim else float(out)


def _as_arrays(points) -> tuple[np.ndarray, np.ndarray]:
    v = np.asarray([p.sample_size for p in points], dtype=float)
    e = np.asarray([p.observed_error for p in points], dtype=float)
    return v, e


def fit_mse(points, scale: float, exponent: float) -> float:
    """Mean squared residual of the model on the given points."""
    v, e = _as_arrays(points)
    return float(np.mean((e - scale * v ** (-exponent)) ** 2))


def _best_scale(v: np.ndarray, e: np.ndarray, b: float) -> float:
    # closed-form least-squares scale for a fixed exponent, clamped to >= 0
    basis = v ** (-b)
    denom = float(basis @ basis)
    return max(0.0, float(basis @ e) / denom)


def grid_reference_mse(points) -> float:
    """Best objective over the documented reference grid (exponent step 0.001)."""
    v, e = _as_arrays(points)
    best = np.inf
    for b in np.arange(0.0, _B_MAX + _B_STEP / 2, _B_STEP):
        a = _best_scale(v, e, b)
        mse = float(np.mean((e - a * v ** (-b)) ** 2))
        if mse < best:
            best = mse
    return best


def fit(points) -> ErrorModelParams:
    """Least-squares (a, b) for the observed error curve; safety fixed at 1.

    Requires at least two points with distinct sample sizes and a nonzero
    error somewhere.  Flat data (all errors equal) deterministically yields
    exponent 0 with the common value as the scale.
    """
    v, e = _as_arrays(points)
    if len(np.unique(v)) < 2:
        raise ValueError("need at least 2 points with distinct sample sizes")
    if np.all(e == 0.0):
        raise ValueError("all-zero errors cannot be fit")
    if np.all(e == e[0]):
        return ErrorModelParams(scale=float(e[0]), exponent=0.0, safety=1.0)

    best_b, best_a, best_mse = 0.0, float(np.mean(e)), np.inf
    for b in np.arange(0.0, _B_MAX + _B_STEP / 2, _B_STEP):
        a = _best_scale(v, e, b)
        mse = float(np.mean((e - a * v ** (-b)) ** 2))
        if mse < best_mse:
            best_b, best_a, best_mse = float(b), a, mse

    a, b = best_a, best_b
    lam = 1e-8
    logv = np.log(v)
    for _ in range(200):
        model = a * v ** (-b)
        resid = e - model
        # residual jacobian columns: d/da, d/db
        ja = -(v ** (-b))
        jb = a * logv * v ** (-b)
        grad = np.array([ja @ resid, jb @ resid]) * (2.0 / len(v))
        if np.linalg.norm(grad) <= 1e-8:
            break
        jtj = np.array([[ja @ ja, ja @ jb], [ja @ jb, jb @ jb]]) * (2.0 / len(v))
        cur = float(np.mean(resid ** 2))
        step_ok = False
        for _ in range(40):
            try:
                delta = np.linalg.solve(jtj + lam * np.eye(2), -grad)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            a_new = max(0.0, a + delta[0])
            b_new = min(max(0.0, b + delta[1]), _B_MAX)
            new = float(np.mean((e - a_new * v ** (-b_new)) ** 2))
            if new < cur:
                a, b = a_new, b_new
                lam = max(lam / 4.0, 1e-12)
                step_ok = True
                break
            lam *= 10.0
        if not step_ok:
            break
    return ErrorModelParams(scale=a, exponent=b, safety=1.0)


def extrapolation_check(params: ErrorModelParams, holdout) -> float:
    """Worst absolute residual of the fitted curve on held-out points."""
    if not holdout:
        raise ValueError("holdout must be nonempty")
    v, e = _as_arrays(holdout)
    return float(np.max(np.abs(e - params.scale * v ** (-params.exponent))))


def fit_points_from_csv(text: str) -> list[FitPoint]:
    """Parse `sample_size,error` rows; a header line is skipped if present."""
    points = []
    lead = True
    for line in io.StringIO(text):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = [tok.strip() for tok in line.split(",")]
        try:
            v_str, e_str = fields[:2]
            points.append(FitPoint(float(v_str), float(e_str)))
        except ValueError:
            if lead:  # only the first row may be a header
                lead = False
                continue
            raise ValueError(f"unparseable fit-point row: {line!r}") from None
        lead = False
    if not points:
        raise ValueError("no data rows in fit-point CSV")
    return points
