"""Saddle-point solver for the diagonal-gain min-max error problem.

The min-max allocation problem is a convex-concave game between the power
vector on the budget simplex and a task-weight vector on the probability
simplex.  Entropic mirror-prox alternates a Bregman proximal step and an
extragradient (look-ahead) step, both with closed-form multiplicative
updates; cost per iteration is O(MK), which is what makes the method viable
at hundreds of users.

Iterates are kept in milliwatts internally so the sup-norm stopping
threshold operates at the scale the power reports use; inputs and outputs
are watts.  A stop candidate is accepted only when a Frank-Wolfe gap
certifies the point as a saddle; otherwise the run continues, escalates the
step size (frozen start), or restarts with a halved step size (divergence
or absorption into a suboptimal vertex).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .scenario import Scenario
from .trace import SolverTrace

__all__ = [
    "SaddleState",
    "SmoothnessConstants",
    "MirrorProxResult",
    "xi",
    "grad_xi",
    "lipschitz_constants",
    "kl_prox",
    "solve",
]

_LN2 = math.log(2.0)

_GAP_ACCEPT = 1e-4     # saddle certificate at a sup-norm stop candidate
_GAP_PERIODIC = 1e-5   # stricter certificate for the periodic early accept
_PERIOD = 200
_WILD_WINDOW = 20      # iterations at >2x the best objective
_STALL_WINDOW = 500    # iterations without a new best
_GROW_WINDOW = 50      # consecutive objective increases
_MAX_RESETS = 60
_MAX_ESCALATIONS = 30


@dataclass(frozen=True)
class SaddleState:
    """Primal powers (watts, sum P) and task weights (sum 1)."""

    p: np.ndarray
    alpha: np.ndarray


@dataclass(frozen=True)
class SmoothnessConstants:
    L1: float
    L2: float
    mu0: float


@dataclass(frozen=True)
class MirrorProxResult:
    powers: np.ndarray
    state: SaddleState
    trace: SolverTrace
    objective: float
    iterations: int
    restarts: int
    escalations: int
    flagged: bool
    eta_final: float
    wall_times: list


def _task_arrays(scenario: Scenario):
    m, k = scenario.num_tasks, scenario.num_users
    mask = np.zeros((m, k))
    for i, group in enumerate(scenario.groups):
        mask[i, list(group)] = 1.0
    a = np.array([t.error_params.scale for t in scenario.tasks])
    b = np.array([t.error_params.exponent for t in scenario.tasks])
    beta = np.array([t.error_params.safety for t in scenario.tasks])
    d = np.array([t.data_size_bits for t in scenario.tasks])
    aa = np.array([t.historical_samples for t in scenario.tasks])
    return mask, a, b, beta, d, aa


def xi(p, diag_gains, scenario: Scenario, m: int) -> float:
    """Task-m predicted error under diagonal gains (no interference)."""
    p = np.asarray(p, dtype=float)
    g = np.asarray(diag_gains, dtype=float)
    task = scenario.tasks[m]
    budget = scenario.overhead_factor * scenario.bandwidth * scenario.duration
    idx = list(scenario.groups[m])
    samples = budget / task.data_size_bits * np.sum(
        np.log2(1.0 + g[idx] * p[idx] / scenario.noise_power)
    )
    bracket = samples + task.historical_samples
    if bracket == 0.0:
        return math.inf
    return task.error_params.scale * bracket ** (-task.error_params.exponent)


def grad_xi(p, diag_gains, scenario: Scenario, m: int) -> np.ndarray:
    """Gradient of the task-m error; zero outside the task's user group."""
    p = np.asarray(p, dtype=float)
    g = np.asarray(diag_gains, dtype=float)
    task = scenario.tasks[m]
    a, b = task.error_params.scale, task.error_params.exponent
    budget = scenario.overhead_factor * scenario.bandwidth * scenario.duration
    idx = list(scenario.groups[m])
    samples = budget / task.data_size_bits * np.sum(
        np.log2(1.0 + g[idx] * p[idx] / scenario.noise_power)
    )
    bracket = samples + task.historical_samples
    out = np.zeros_like(p)
    coef = -a * b * budget / (task.data_size_bits * _LN2) * bracket ** (-b - 1.0)
    out[idx] = coef / (scenario.noise_power / g[idx] + p[idx])
    return out


def lipschitz_constants(scenario: Scenario, diag_gains, mu0: float = 0.1) -> SmoothnessConstants:
    """Saddle smoothness constants valid while the error level stays <= mu0."""
    if not (0.0 < mu0 <= 1.0):
        raise ValueError("mu0 must be in (0, 1]")
    mask, a, b, beta, d, _ = _task_arrays(scenario)
    g = np.asarray(diag_gains, dtype=float)
    budget = scenario.overhead_factor * scenario.bandwidth * scenario.duration
    sig = scenario.noise_power
    h = np.sqrt((mask * g[None, :] ** 2).sum(axis=1))
    ratio = mu0 / (beta * a)
    common = beta * a * b * budget / (d * _LN2)
    l2 = float(np.max(common * h / sig * ratio ** (1.0 + 1.0 / b)))
    # per (task, user) bound on the mixed second derivative; sig is the
    # noise power, i.e. the sigma^2 of the SINR definition
    per_mk = (
        (common / sig ** 2)[:, None]
        * (mask * g[None, :])
        * (ratio ** (1.0 + 1.0 / b))[:, None]
        * (
            g[None, :]
            + ((b + 1.0) * budget / (d * _LN2) * ratio ** (1.0 / b))[:, None] * h[:, None]
        )
    )
    l1 = float(np.max(per_mk))
    return SmoothnessConstants(L1=l1, L2=l2, mu0=mu0)


def kl_prox(base, gradient_like, step: float) -> np.ndarray:
    """Multiplicative simplex update: argmin KL(x, base) + step*<x, g>.

    The radius is inherited from ``base``.  Computed in the log domain with
    max subtraction (shift invariance makes this exact) and a tiny weight
    floor so iterates stay strictly positive.
    """
    base = np.asarray(base, dtype=float)
    if np.any(base <= 0):
        raise ValueError("kl_prox base must be strictly positive")
    r = float(base.sum())
    z = np.log(base) - step * np.asarray(gradient_like, dtype=float)
    z -= z.max()
    w = np.maximum(np.exp(z), 1e-18)
    return r * w / w.sum()


class _DiagCore:
    """Vectorized milliwatt-scale evaluation of all task errors and gradients."""

    def __init__(self, scenario: Scenario, diag_gains):
        mask, a, b, beta, d, aa = _task_arrays(scenario)
        self.mask, self.a, self.b, self.beta, self.A = mask, a, b, beta, aa
        self.P = scenario.total_power * 1e3
        self.sig = scenario.noise_power * 1e3
        g = np.asarray(diag_gains, dtype=float)
        if np.any(g <= 0):
            raise ValueError("mirror prox requires positive diagonal gains")
        budget = scenario.overhead_factor * scenario.bandwidth * scenario.duration
        self.cr = budget / d
        self.gc = a * b * budget / (d * _LN2)
        self.eq = self.sig / g
        self.K = len(g)
        self.M = len(a)

    def val_grad(self, p):
        r = np.log1p(p / self.eq) / _LN2
        br = self.cr * (self.mask @ r) + self.A
        vals = self.beta * self.a * br ** (-self.b)
        coef = -(self.beta * self.gc) * br ** (-self.b - 1.0)
        return vals, coef[:, None] * (self.mask / (self.eq + p)[None, :])

    def vals_only(self, p):
        r = np.log1p(p / self.eq) / _LN2
        br = self.cr * (self.mask @ r) + self.A
        return self.beta * self.a * br ** (-self.b)


def _fw_gap(core: _DiagCore, p, al, vals, grad) -> float:
    # linear-oracle (Frank-Wolfe) gap of each player; zero only at a saddle
    gp = al @ grad
    gap_p = (gp @ p - core.P * gp.min()) / (core.P * np.abs(gp).max() + 1e-300)
    gap_a = (vals.max() - vals @ al) / (np.abs(vals).max() + 1e-300)
    return max(gap_p, gap_a)


def solve(
    scenario: Scenario,
    diag_gains,
    eta: float | None = None,
    max_iters: int = 100_000,
    stop_tol: float = 1e-8,
) -> MirrorProxResult:
    """Run mirror-prox from the uniform point until a certified saddle stop.

    ``eta`` overrides the default step size 1e3/L2 (computed at mu0 = 0.1);
    ``stop_tol`` bounds the sup-norm iterate change in milliwatts.  On
    divergence (objective growing for 50 straight iterations, or wild or
    stalled progress at a non-saddle) the step size is halved and the run
    restarts from uniform; such runs are flagged and visible in the trace
    through the step-size column.
    """
    core = _DiagCore(scenario, diag_gains)
    if eta is None:
        eta_w = 1e3 / lipschitz_constants(scenario, diag_gains, 0.1).L2
    else:
        eta_w = float(eta)

    p = np.full(core.K, core.P / core.K)
    al = np.full(core.M, 1.0 / core.M)
    vals, grad = core.val_grad(p)
    best = vals.max()
    best_p, best_al = p.copy(), al.copy()
    trace = SolverTrace(("iteration", "dp_inf", "objective", "eta"))
    wall: list = []
    t0 = time.perf_counter()
    stall = wild = grow = restarts = escalations = 0
    prev_obj = best
    n = 0

    def reset(factor: float) -> None:
        nonlocal p, al, vals, grad, stall, wild, grow, eta_w, prev_obj
        eta_w *= factor
        p = np.full(core.K, core.P / core.K)
        al = np.full(core.M, 1.0 / core.M)
        vals, grad = core.val_grad(p)
        prev_obj = vals.max()
        stall = wild = grow = 0

    while n < max_iters:
        n += 1
        eta_mw = 1e3 * eta_w
        gp = al @ grad
        p_mid = kl_prox(p, gp, eta_mw)
        a_mid = kl_prox(al, -vals, eta_mw)
        vals_mid, grad_mid = core.val_grad(p_mid)
        p_new = kl_prox(p, a_mid @ grad_mid, eta_mw)
        a_new = kl_prox(al, -vals_mid, eta_mw)
        d = float(np.abs(p_new - p).max())
        moved = float(np.abs(p_new - core.P / core.K).max())
        p, al = p_new, a_new
        vals, grad = core.val_grad(p)
        obj = float(vals.max())
        trace.append(n, d, obj, eta_w)
        wall.append(time.perf_counter() - t0)

        grow = grow + 1 if obj > prev_obj else 0
        prev_obj = obj
        if grow >= _GROW_WINDOW and restarts + escalations < _MAX_RESETS:
            restarts += 1
            reset(0.5)
            continue

        if n % _PERIOD == 0 and _fw_gap(core, p, al, vals, grad) < _GAP_PERIODIC:
            break

        if obj < best:
            best, best_p, best_al = obj, p.copy(), al.copy()
            stall = wild = 0
        else:
            stall += 1
            wild = wild + 1 if obj > 2.0 * best else 0
            if wild >= _WILD_WINDOW or stall >= _STALL_WINDOW:
                bv, bg = core.val_grad(best_p)
                if _fw_gap(core, best_p, best_al, bv, bg) < _GAP_ACCEPT:
                    p, al = best_p, best_al
                    break
                if restarts + escalations < _MAX_RESETS:
                    restarts += 1
                    reset(0.5)
                    continue

        if d < stop_tol:
            if _fw_gap(core, p, al, vals, grad) < _GAP_ACCEPT:
                break
            if restarts + escalations < _MAX_RESETS:
                if moved < 10 * stop_tol and escalations < _MAX_ESCALATIONS:
                    escalations += 1
                    reset(8.0)
                    continue
                if obj > best * (1.0 + 1e-6):
                    restarts += 1
                    reset(0.5)
                    continue
            # certified non-saddle but still descending: keep iterating

    if core.vals_only(best_p).max() < core.vals_only(p).max():
        p, al = best_p, best_al
    objective = float(core.vals_only(p).max())
    state = SaddleState(p=p * 1e-3, alpha=al.copy())
    return MirrorProxResult(
        powers=p * 1e-3,
        state=state,
        trace=trace,
        objective=objective,
        iterations=n,
        restarts=restarts,
        escalations=escalations,
        flagged=(restarts + escalations) > 0,
        eta_final=eta_w,
        wall_times=wall,
    )
