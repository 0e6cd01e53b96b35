"""Multi-antenna uplink channel draws, combining gains, rates, sample counts.

Channels are IID complex Gaussian per user; the receiver applies maximal
ratio combining, so interference enters through the composite gains
G[k, l] = |h_k^H h_l|^2 / ||h_k||^2 with G[k, k] = ||h_k||^2.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .scenario import Scenario

__all__ = [
    "ChannelMatrix",
    "GainMatrix",
    "RateVector",
    "draw_channels",
    "composite_gains",
    "expected_gains",
    "rates",
    "sample_counts",
    "channels_to_csv",
    "channels_from_csv",
]


@dataclass(frozen=True)
class ChannelMatrix:
    """K x N complex channel vectors, one row per user."""

    vectors: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.vectors, dtype=complex)
        if v.ndim != 2:
            raise ValueError("channel matrix must be 2-D")
        if not np.all(np.isfinite(v.real)) or not np.all(np.isfinite(v.imag)):
            raise ValueError("channel entries must be finite")
        object.__setattr__(self, "vectors", v)


@dataclass(frozen=True)
class GainMatrix:
    """K x K nonnegative composite gains."""

    gains: np.ndarray

    def __post_init__(self) -> None:
        g = np.asarray(self.gains, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError("gain matrix must be square")
        if np.any(g < 0):
            raise ValueError("gains must be nonnegative")
        object.__setattr__(self, "gains", g)

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.gains)

    @classmethod
    def from_diagonal(cls, diag) -> "GainMatrix":
        return cls(np.diag(np.asarray(diag, dtype=float)))


@dataclass(frozen=True)
class RateVector:
    """Per-user spectral efficiencies in bit/s/Hz."""

    rates: np.ndarray

    def __post_init__(self) -> None:
        r = np.asarray(self.rates, dtype=float)
        if np.any(r < 0):
            raise ValueError("rates must be nonnegative")
        object.__setattr__(self, "rates", r)


def draw_channels(scenario: Scenario, seed: int, draw: int = 0) -> ChannelMatrix:
    """One channel realization, bit-reproducible from (seed, draw).

    Entries of row k are complex Gaussian with per-entry variance equal to
    the user's path-loss gain (half per real/imaginary part).  A counter-based
    generator keyed on (seed, draw) makes independent draws reproducible and
    parallelizable without shared state.
    """
    rng = np.random.Generator(np.random.Philox(key=[int(seed), int(draw)]))
    k, n = scenario.num_users, scenario.num_antennas
    std = np.sqrt(np.asarray(scenario.path_loss, dtype=float) / 2.0)[:, None]
    real = rng.standard_normal((k, n)) * std
    imag = rng.standard_normal((k, n)) * std
    return ChannelMatrix(real + 1j * imag)


def composite_gains(channels: ChannelMatrix) -> GainMatrix:
    """MRC combining gains from a channel realization."""
    h = channels.vectors
    norms = np.sum(np.abs(h) ** 2, axis=1)
    if np.any(norms == 0.0):
        raise ValueError("degenerate channel: zero-norm channel vector")
    cross = np.abs(h @ h.conj().T) ** 2
    gains = cross / norms[:, None]
    np.fill_diagonal(gains, norms)
    return GainMatrix(gains)


def expected_gains(scenario: Scenario) -> np.ndarray:
    """Mean of ||h_k||^2 over draws: antennas times path-loss gain."""
    return scenario.num_antennas * np.asarray(scenario.path_loss, dtype=float)


def rates(gains: GainMatrix, powers, noise: float) -> RateVector:
    """Per-user log2(1 + SINR) under MRC with the given power vector."""
    p = np.asarray(powers, dtype=float)
    if np.any(p < 0):
        raise ValueError("powers must be nonnegative")
    if noise <= 0:
        raise ValueError("noise power must be positive")
    g = gains.gains
    signal = np.diag(g) * p
    interference = g @ p - signal
    return RateVector(np.log2(1.0 + signal / (interference + noise)))


def sample_counts(rate_vector: RateVector, scenario: Scenario,
                  mode: str = "continuous") -> np.ndarray:
    """Per-task training-sample counts collected within the transmission window.

    Continuous mode keeps fractional per-user contributions (the solver-side
    relaxation); floored mode truncates each user's contribution to a whole
    sample before summing (the reporting convention).
    """
    if mode not in ("continuous", "floored"):
        raise ValueError(f"unknown sample-count mode: {mode}")
    r = rate_vector.rates
    budget = scenario.overhead_factor * scenario.bandwidth * scenario.duration
    out = np.empty(scenario.num_tasks)
    for m, (group, task) in enumerate(zip(scenario.groups, scenario.tasks)):
        per_user = budget * r[list(group)] / task.data_size_bits
        if mode == "floored":
            per_user = np.floor(per_user)
        out[m] = per_user.sum() + task.historical_samples
    return out


def channels_to_csv(channels: ChannelMatrix) -> str:
    """Interleaved real/imag CSV dump (test fixtures)."""
    h = channels.vectors
    flat = np.empty((h.shape[0], 2 * h.shape[1]))
    flat[:, 0::2] = h.real
    flat[:, 1::2] = h.imag
    buf = io.StringIO()
    for row in flat:
        buf.write(",".join(repr(float(x)) for x in row) + "\n")
    return buf.getvalue()


def channels_from_csv(text: str) -> ChannelMatrix:
    rows = [
        [float(tok) for tok in line.split(",")]
        for line in text.strip().splitlines()
    ]
    flat = np.asarray(rows)
    return ChannelMatrix(flat[:, 0::2] + 1j * flat[:, 1::2])
