"""Closed-form learning-centric allocation for the orthogonal-channel limit.

With one user per task and diagonal gains, the minimal power achieving a
common predicted-error level mu has a closed form per user; the optimal mu
is the root of the power-budget equation, found by bisection.  At the
solution every powered user sits exactly at the common error level.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .scenario import Scenario, TaskSpec
from .trace import SolverTrace

__all__ = ["power_profile", "solve", "AsymptoticResult"]

_MU_FLOOR = 1e-12
_MU_TOL = 1e-8


@dataclass(frozen=True)
class AsymptoticResult:
    powers: np.ndarray
    mu: float
    trace: SolverTrace
    status: str  # "ok" | "budget_insufficient"


def power_profile(mu: float, task: TaskSpec, gain: float, scenario: Scenario) -> float:
    """Minimal power driving the task's weighted error down to ``mu``.

    Inverts the error curve through the rate equation for a single user on a
    clean channel; clamped at zero when historical samples alone suffice.
    """
    if mu <= 0:
        raise ValueError("error level must be positive")
    params = task.error_params
    if params.scale <= 0 or params.exponent <= 0:
        raise ValueError("power profile requires positive scale and exponent")
    if gain <= 0:
        raise ValueError("power profile requires a positive gain")
    needed = (mu / (params.safety * params.scale)) ** (-1.0 / params.exponent)
    budget = scenario.overhead_factor * scenario.bandwidth * scenario.duration
    exponent_arg = task.data_size_bits * math.log(2.0) / budget * (
        needed - task.historical_samples
    )
    if exponent_arg <= 0:
        return 0.0
    if exponent_arg > 700.0:
        return math.inf
    return scenario.noise_power / gain * math.expm1(exponent_arg)


def _validate_groups(scenario: Scenario) -> None:
    seen = set()
    for group in scenario.groups:
        if len(group) != 1:
            raise ValueError("asymptotic solver requires exactly one user per task")
        if group[0] in seen:
            raise ValueError("asymptotic solver requires disjoint task groups")
        seen.add(group[0])


def solve(scenario: Scenario, diag_gains) -> AsymptoticResult:
    """Bisect the common error level until the power budget is exhausted.

    Returns the per-user powers at the final level.  If even the worst level
    (mu = 1) cannot be funded, the allocation is scaled to the budget and the
    result is flagged ``budget_insufficient`` rather than raised.
    """
    _validate_groups(scenario)
    g = np.asarray(diag_gains, dtype=float)
    if g.shape != (scenario.num_users,):
        raise ValueError("diag_gains must have one entry per user")

    user_task = [scenario.primary_task(k) for k in range(scenario.num_users)]

    def profile(mu: float) -> np.ndarray:
        return np.asarray([
            power_profile(mu, scenario.tasks[user_task[k]], g[k], scenario)
            for k in range(scenario.num_users)
        ])

    trace = SolverTrace(("iteration", "mu", "power_slack", "wall_time"))
    t0 = time.perf_counter()
    total = scenario.total_power

    spend_at_one = float(profile(1.0).sum())
    if spend_at_one > total:
        p = profile(1.0)
        p *= total / spend_at_one
        trace.append(1, 1.0, spend_at_one - total, time.perf_counter() - t0)
        return AsymptoticResult(p, 1.0, trace, "budget_insufficient")

    lo, hi = _MU_FLOOR, 1.0
    it = 0
    while hi - lo >= _MU_TOL:
        it += 1
        mid = 0.5 * (lo + hi)
        spend = float(profile(mid).sum())
        trace.append(it, mid, spend - total, time.perf_counter() - t0)
        if spend > total:
            lo = mid  # level unaffordable, relax it
        else:
            hi = mid
    mu = hi
    return AsymptoticResult(profile(mu), mu, trace, "ok")
