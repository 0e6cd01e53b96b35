"""Experiment runner: seeded channel draws, scheme dispatch, CSV tables.

Ties the pipeline together for reproducible comparisons: draw channels under
a fixed (seed, draw) key, allocate power under a chosen scheme, evaluate
rates, per-task sample counts, and weighted predicted errors, and emit the
results as fixed-layout CSV with 12 significant digits.

All reported errors are model predictions beta_m * a_m * v_m^(-b_m) from
the fitted learning curves, never measured accuracies of a trained
classifier; every CSV table states this in its header comment.  Outputs are
byte-deterministic in (scenario, scheme, seed, draws); wall-clock timings
live on the Allocation objects but stay out of the CSV for that reason.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import asymptotic, baselines, error_model, mirror_prox, mm_solver
from .channel import (
    GainMatrix,
    RateVector,
    composite_gains,
    draw_channels,
    expected_gains,
    rates,
    sample_counts,
)
from .scenario import Scenario, load_scenario

__all__ = [
    "Allocation",
    "SCHEMES",
    "DIAGONAL_SCHEMES",
    "run",
    "compare",
    "sweep",
    "allocations_to_csv",
    "sweep_to_csv",
]

SCHEMES = ("mm", "asymptotic", "mirror_prox", "water_filling", "max_min")
# these optimize a decoupled objective and need interference-free gains
DIAGONAL_SCHEMES = ("asymptotic", "mirror_prox", "water_filling", "max_min")
DIAG_MODES = ("expected", "realized")

_CSV_NOTE = (
    "# errors below are model predictions from fitted learning curves, "
    "not trained-classifier accuracies"
)


@dataclass(frozen=True)
class Allocation:
    """One scheme's outcome on one channel draw.

    ``sample_counts``/``sample_counts_floored`` are per-task totals with
    fractional and per-user-floored contributions respectively;
    ``predicted_errors`` are the safety-weighted curve predictions at the
    fractional counts and ``objective`` is their maximum.
    """

    scheme: str
    powers: np.ndarray
    rates: RateVector
    sample_counts: np.ndarray
    sample_counts_floored: np.ndarray
    predicted_errors: np.ndarray
    objective: float
    wall_time: float


def _load(scenario) -> Scenario:
    if isinstance(scenario, Scenario):
        return scenario
    return load_scenario(Path(scenario).read_text())


def _check_scheme(scheme: str, diag_mode: str) -> None:
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme: {scheme!r} (choose from {', '.join(SCHEMES)})")
    if diag_mode not in DIAG_MODES:
        raise ValueError(f"unknown diag-mode: {diag_mode!r} (choose expected or realized)")


def _gain_model(scenario: Scenario, scheme: str, diag_mode: str, channels) -> GainMatrix:
    """Gains the scheme optimizes over and is evaluated under."""
    if diag_mode == "expected":
        return GainMatrix.from_diagonal(expected_gains(scenario))
    gm = composite_gains(channels)
    if scheme in DIAGONAL_SCHEMES:
        return GainMatrix.from_diagonal(gm.diagonal)
    return gm


def _allocate(scheme: str, scenario: Scenario, gm: GainMatrix) -> tuple:
    t0 = time.perf_counter()
    if scheme == "mm":
        powers = mm_solver.solve(scenario, gm).powers
    elif scheme == "asymptotic":
        powers = asymptotic.solve(scenario, gm.diagonal).powers
        # the error-level bisection leaves a budget slack wider than the
        # allocation invariant; spend the budget exactly by rescaling
        total = powers.sum()
        if total > 0:
            powers = powers * (scenario.total_power / total)
        else:
            powers = np.full(scenario.num_users,
                             scenario.total_power / scenario.num_users)
    elif scheme == "mirror_prox":
        powers = mirror_prox.solve(scenario, gm.diagonal).powers
    elif scheme == "water_filling":
        powers = baselines.water_filling(gm.diagonal, scenario.noise_power,
                                         scenario.total_power)
    else:
        powers = baselines.max_min_fair(gm.diagonal, scenario.noise_power,
                                        scenario.total_power)
    return powers, time.perf_counter() - t0


def _evaluate(scheme: str, scenario: Scenario, gm: GainMatrix, powers,
              wall: float) -> Allocation:
    total = float(np.sum(powers))
    if abs(total - scenario.total_power) > 1e-8 * scenario.total_power:
        raise ValueError(
            f"scheme {scheme!r} returned powers summing to {total!r}, "
            f"budget is {scenario.total_power!r}"
        )
    rv = rates(gm, powers, scenario.noise_power)
    counts = sample_counts(rv, scenario, "continuous")
    floored = sample_counts(rv, scenario, "floored")
    predicted = np.array([
        error_model.predict_weighted(task.error_params, counts[m])
        for m, task in enumerate(scenario.tasks)
    ])
    return Allocation(
        scheme=scheme,
        powers=np.asarray(powers, dtype=float),
        rates=rv,
        sample_counts=counts,
        sample_counts_floored=floored,
        predicted_errors=predicted,
        objective=float(predicted.max()),
        wall_time=wall,
    )


def run(scenario, scheme: str, seed: int = 0, draws: int = 1,
        diag_mode: str = "expected") -> list:
    """One Allocation per independent channel draw, in draw order."""
    sc = _load(scenario)
    _check_scheme(scheme, diag_mode)
    if draws < 1:
        raise ValueError("draws must be >= 1")
    out = []
    for draw in range(draws):
        channels = draw_channels(sc, seed, draw) if diag_mode == "realized" else None
        gm = _gain_model(sc, scheme, diag_mode, channels)
        powers, wall = _allocate(scheme, sc, gm)
        out.append(_evaluate(scheme, sc, gm, powers, wall))
    return out


def compare(scenario, schemes, seed: int = 0, draws: int = 1,
            diag_mode: str = "expected") -> list:
    """(draw index, Allocation) rows, draw-major, schemes in given order."""
    schemes = list(schemes)
    if not schemes:
        raise ValueError("no schemes given")
    sc = _load(scenario)
    for scheme in schemes:
        _check_scheme(scheme, diag_mode)
    per_scheme = {s: run(sc, s, seed=seed, draws=draws, diag_mode=diag_mode)
                  for s in schemes}
    rows = []
    for draw in range(draws):
        for s in schemes:
            rows.append((draw, per_scheme[s][draw]))
    return rows


def _resize_users(sc: Scenario, k: int) -> Scenario:
    """Scale the user population, keeping group proportions contiguous."""
    if k < sc.num_tasks:
        raise ValueError(f"cannot sweep K below the task count ({sc.num_tasks})")
    sizes = [max(1, round(k * len(g) / sc.num_users)) for g in sc.groups]
    while sum(sizes) > k:
        sizes[int(np.argmax(sizes))] -= 1
    while sum(sizes) < k:
        sizes[int(np.argmin(sizes))] += 1
    groups, start = [], 0
    for size in sizes:
        groups.append(tuple(range(start, start + size)))
        start += size
    loss = tuple(sc.path_loss[i % sc.num_users] for i in range(k))
    return sc.with_updates(num_users=k, groups=tuple(groups), path_loss=loss,
                           rate_bounds=())


def _sweep_scenario(sc: Scenario, param: str, value: float) -> Scenario:
    if param == "T":
        return sc.with_updates(duration=float(value))
    if param == "N":
        return sc.with_updates(num_antennas=int(value))
    if param == "K":
        return _resize_users(sc, int(value))
    raise ValueError(f"unknown sweep parameter: {param!r} (choose T, N, or K)")


def sweep(scenario, param: str, values, schemes, seed: int = 0, draws: int = 1,
          diag_mode: str = "expected") -> list:
    """Mean objective per (parameter value, scheme); rows value-major."""
    sc = _load(scenario)
    schemes = list(schemes)
    if not schemes:
        raise ValueError("no schemes given")
    if not list(values):
        raise ValueError("no sweep values given")
    rows = []
    for value in values:
        sc_v = _sweep_scenario(sc, param, value)
        for scheme in schemes:
            allocs = run(sc_v, scheme, seed=seed, draws=draws, diag_mode=diag_mode)
            mean_obj = float(np.mean([a.objective for a in allocs]))
            mean_err = np.mean([a.predicted_errors for a in allocs], axis=0)
            rows.append((param, value, scheme, mean_obj, mean_err))
    return rows


def _fmt(value) -> str:
    return f"{value:.12g}"


def _allocation_header(sc: Scenario) -> list:
    cols = ["draw", "scheme", "objective"]
    cols += [f"predicted_error_{m + 1}" for m in range(sc.num_tasks)]
    cols += [f"samples_{m + 1}" for m in range(sc.num_tasks)]
    cols += [f"samples_floored_{m + 1}" for m in range(sc.num_tasks)]
    cols += [f"power_{k + 1}" for k in range(sc.num_users)]
    cols += [f"rate_{k + 1}" for k in range(sc.num_users)]
    return cols


def _allocation_numbers(a: Allocation) -> list:
    return ([a.objective] + list(a.predicted_errors) + list(a.sample_counts)
            + list(a.sample_counts_floored) + list(a.powers) + list(a.rates.rates))


def allocations_to_csv(rows, scenario) -> str:
    """Wide CSV for run/compare output: one line per (draw, scheme), then
    one mean summary line per scheme."""
    sc = _load(scenario)
    if rows and isinstance(rows[0], Allocation):
        rows = list(enumerate(rows))
    lines = [_CSV_NOTE, ",".join(_allocation_header(sc))]
    for draw, alloc in rows:
        lines.append(",".join([str(draw), alloc.scheme]
                              + [_fmt(x) for x in _allocation_numbers(alloc)]))
    schemes = []
    for _, alloc in rows:
        if alloc.scheme not in schemes:
            schemes.append(alloc.scheme)
    for scheme in schemes:
        stack = [_allocation_numbers(a) for _, a in rows if a.scheme == scheme]
        means = np.mean(np.asarray(stack), axis=0)
        lines.append(",".join(["mean", scheme] + [_fmt(x) for x in means]))
    return "\n".join(lines) + "\n"


def sweep_to_csv(rows) -> str:
    lines = [_CSV_NOTE]
    if rows:
        num_tasks = len(rows[0][4])
        header = ["param", "value", "scheme", "mean_objective"]
        header += [f"mean_error_{m + 1}" for m in range(num_tasks)]
        lines.append(",".join(header))
    for param, value, scheme, mean_obj, mean_err in rows:
        lines.append(",".join([param, _fmt(value), scheme, _fmt(mean_obj)]
                              + [_fmt(x) for x in mean_err]))
    return "\n".join(lines) + "\n"
