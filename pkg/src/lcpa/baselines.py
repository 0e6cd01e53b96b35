"""Communication-centric allocators for the diagonal-gain regime.

Water-filling maximizes the sum rate; max-min fairness equalizes SNRs.
Both serve as comparison schemes for the learning-centric solvers.
"""

from __future__ import annotations

import numpy as np

__all__ = ["water_filling", "max_min_fair"]


def water_filling(diag_gains, noise: float, total_power: float) -> np.ndarray:
    """Sum-rate-optimal powers p_k = (w - noise/G_k)^+ at the common level w.

    The water level is found by bisection; the budget is met to 1e-10
    relative.  Users whose inverse channel exceeds the level get zero.
    """
    g = np.asarray(diag_gains, dtype=float)
    if np.any(g <= 0):
        raise ValueError("water filling requires positive gains")
    if total_power <= 0:
        raise ValueError("total_power must be positive")
    floors = noise / g
    lo = float(np.min(floors))            # water level with zero spend
    hi = float(np.max(floors)) + total_power  # every user active, oversubscribed
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        spend = float(np.maximum(mid - floors, 0.0).sum())
        if abs(spend - total_power) <= 1e-10 * total_power:
            lo = hi = mid
            break
        if spend > total_power:
            hi = mid
        else:
            lo = mid
    level = 0.5 * (lo + hi)
    return np.maximum(level - floors, 0.0)


def max_min_fair(diag_gains, noise: float, total_power: float) -> np.ndarray:
    """Powers proportional to inverse gains, equalizing every user's SNR."""
    g = np.asarray(diag_gains, dtype=float)
    if np.any(g <= 0):
        raise ValueError("max-min fairness requires positive gains")
    inv = noise / g
    return total_power * inv / inv.sum()
