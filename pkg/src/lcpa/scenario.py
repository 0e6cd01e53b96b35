"""Problem instances: users, tasks, radio constants, and unit conversions.

A :class:`Scenario` is the unit of experiment configuration.  It is immutable
after construction and safe to share across threads.  Scenario files are INI
text with sections ``[system]``, ``[tasks.<m>]`` and ``[bounds]``; powers are
given in dBm, path losses in dB, payload sizes in bits.
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, field, replace

__all__ = [
    "ErrorModelParams",
    "TaskSpec",
    "Scenario",
    "dbm_to_watt",
    "watt_to_dbm",
    "db_to_linear",
    "linear_to_db",
    "estimate_overhead",
    "load_scenario",
    "save_scenario",
    "default_scenario",
]


def dbm_to_watt(x: float) -> float:
    """Convert a power from dBm to watts: 10^((x-30)/10)."""
    return 10.0 ** ((x - 30.0) / 10.0)


def watt_to_dbm(x: float) -> float:
    if x <= 0:
        raise ValueError("power must be positive for dBm conversion")
    return 10.0 * math.log10(x) + 30.0


def db_to_linear(x: float) -> float:
    """Convert a dB quantity to a linear gain: 10^(x/10)."""
    return 10.0 ** (x / 10.0)


def linear_to_db(x: float) -> float:
    if x <= 0:
        raise ValueError("gain must be positive for dB conversion")
    return 10.0 * math.log10(x)


def estimate_overhead(block_reserve_fraction: float, packet_error_rate: float) -> float:
    """Effective payload fraction of the frame after control blocks and losses.

    Both arguments are fractions in [0, 1); the result is the product of the
    usable-block fraction and the packet success rate.
    """
    if not (0.0 <= block_reserve_fraction < 1.0):
        raise ValueError("block_reserve_fraction out of range [0, 1)")
    if not (0.0 <= packet_error_rate < 1.0):
        raise ValueError("packet_error_rate out of range [0, 1)")
    return (1.0 - block_reserve_fraction) * (1.0 - packet_error_rate)


@dataclass(frozen=True)
class ErrorModelParams:
    """Power-law error curve a*v^(-b) plus the multiplicative safety weight."""

    scale: float
    exponent: float
    safety: float = 1.0

    def __post_init__(self) -> None:
        if self.scale < 0:
            raise ValueError("scale must be nonnegative")
        if self.exponent < 0:
            raise ValueError("exponent must be nonnegative")
        if self.safety < 1.0:
            raise ValueError("safety weight must be >= 1")


@dataclass(frozen=True)
class TaskSpec:
    """One learning task: payload size per sample, prior data, error curve."""

    data_size_bits: float
    historical_samples: float
    error_params: ErrorModelParams

    def __post_init__(self) -> None:
        if self.data_size_bits <= 0:
            raise ValueError("data_size_bits must be positive")
        if self.historical_samples < 0:
            raise ValueError("historical_samples must be nonnegative")


@dataclass(frozen=True)
class Scenario:
    """Full problem instance.

    ``groups[m]`` lists the 0-based users feeding task ``m``; groups may
    overlap but every user must appear in at least one group.  ``rate_bounds``
    holds per-user sample-count bounds (``math.inf`` for unbounded above).
    """

    num_users: int
    num_antennas: int
    groups: tuple[tuple[int, ...], ...]
    total_power: float
    bandwidth: float
    duration: float
    overhead_factor: float
    noise_power: float
    path_loss: tuple[float, ...]
    tasks: tuple[TaskSpec, ...]
    rate_bounds: tuple[tuple[float, float], ...] = field(default=())

    @property
    def num_tasks(self) -> int:
        return len(self.tasks)

    def __post_init__(self) -> None:
        if self.num_users < 1:
            raise ValueError("num_users must be positive")
        if self.num_antennas < 1:
            raise ValueError("num_antennas must be positive")
        if not self.tasks:
            raise ValueError("at least one task required")
        if len(self.groups) != len(self.tasks):
            raise ValueError("groups and tasks must have equal length")
        if self.total_power <= 0:
            raise ValueError("total_power must be positive")
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be positive")
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        if not (0.0 < self.overhead_factor <= 1.0):
            raise ValueError("overhead_factor out of range")
        if self.noise_power <= 0:
            raise ValueError("noise_power must be positive")
        if len(self.path_loss) != self.num_users:
            raise ValueError("path_loss must have one entry per user")
        if any(g < 0 for g in self.path_loss):
            raise ValueError("path_loss must be nonnegative")
        covered = set()
        for m, group in enumerate(self.groups):
            if len(group) == 0:
                raise ValueError(f"empty group: task {m + 1}")
            for k in group:
                if not (0 <= k < self.num_users):
                    raise ValueError(f"group index out of range: task {m + 1}")
            covered.update(group)
        if covered != set(range(self.num_users)):
            missing = sorted(set(range(self.num_users)) - covered)
            raise ValueError(f"users not in any group: {missing}")
        if self.rate_bounds:
            if len(self.rate_bounds) != self.num_users:
                raise ValueError("rate_bounds must have one entry per user")
            for k, (lo, hi) in enumerate(self.rate_bounds):
                if lo < 0:
                    raise ValueError(f"rate bound Z_min negative for user {k + 1}")
                if lo > hi:
                    raise ValueError(f"rate bound Z_min > Z_max for user {k + 1}")
        else:
            object.__setattr__(
                self, "rate_bounds",
                tuple((0.0, math.inf) for _ in range(self.num_users)),
            )

    def primary_task(self, user: int) -> int:
        """Index of the first-listed task containing ``user``."""
        for m, group in enumerate(self.groups):
            if user in group:
                return m
        raise ValueError(f"user {user + 1} not in any group")

    def with_updates(self, **kwargs) -> "Scenario":
        return replace(self, **kwargs)


# Reference two-user profile: an image-classification task (high payload per
# sample, rich prior set) sharing the uplink with a lightweight-feature task.
_DEFAULTS = {
    "num_users": 2,
    "num_antennas": 10,
    "total_power": 0.02,
    "bandwidth": 180e3,
    "duration": 5.0,
    "overhead_factor": 1.0,
    "noise_power": 10.0 ** (-11.7),
    "path_loss": (1e-10, 1e-10),
    "groups": ((0,), (1,)),
    "tasks": (
        TaskSpec(6276.0, 300.0, ErrorModelParams(7.3, 0.69, 1.0)),
        TaskSpec(324.0, 200.0, ErrorModelParams(5.2, 0.72, 1.2)),
    ),
}


def default_scenario() -> Scenario:
    """The documented default profile (two users, two singleton tasks)."""
    return Scenario(**_DEFAULTS)


def _parse_floats(text: str) -> list[float]:
    return [float(tok) for tok in text.replace(",", " ").split()]


def load_scenario(source: str) -> Scenario:
    """Parse INI text into a validated Scenario.

    Missing keys fall back to the default profile; ``path_loss_db`` accepts a
    single broadcast value or one per user; unspecified bounds are (0, inf).
    """
    parser = configparser.ConfigParser()
    try:
        parser.read_string(source)
    except configparser.Error as exc:
        raise ValueError(f"scenario parse failure: {exc}") from exc

    sys_sec = parser["system"] if parser.has_section("system") else {}
    known_system = {
        "num_users", "num_antennas", "total_power_dbm", "bandwidth_hz",
        "duration_s", "overhead_factor", "noise_power_dbm", "path_loss_db",
    }
    for key in sys_sec:
        if key not in known_system:
            raise ValueError(f"unrecognized system key: {key}")
    num_users = int(sys_sec.get("num_users", _DEFAULTS["num_users"]))
    num_antennas = int(sys_sec.get("num_antennas", _DEFAULTS["num_antennas"]))
    if "total_power_dbm" in sys_sec:
        total_power = dbm_to_watt(float(sys_sec["total_power_dbm"]))
    else:
        total_power = _DEFAULTS["total_power"]
    bandwidth = float(sys_sec.get("bandwidth_hz", _DEFAULTS["bandwidth"]))
    duration = float(sys_sec.get("duration_s", _DEFAULTS["duration"]))
    overhead = float(sys_sec.get("overhead_factor", _DEFAULTS["overhead_factor"]))
    if "noise_power_dbm" in sys_sec:
        noise = dbm_to_watt(float(sys_sec["noise_power_dbm"]))
    else:
        noise = _DEFAULTS["noise_power"]
    if "path_loss_db" in sys_sec:
        losses = [db_to_linear(v) for v in _parse_floats(sys_sec["path_loss_db"])]
        if len(losses) == 1:
            losses = losses * num_users
        path_loss = tuple(losses)
    else:
        path_loss = tuple([_DEFAULTS["path_loss"][0]] * num_users)

    task_sections = sorted(
        (name for name in parser.sections() if name.startswith("tasks.")),
        key=lambda name: int(name.split(".", 1)[1]),
    )
    if task_sections:
        groups: list[tuple[int, ...]] = []
        tasks: list[TaskSpec] = []
        known_task = {"users", "data_size_bits", "historical_samples",
                      "scale", "exponent", "safety"}
        for name in task_sections:
            sec = parser[name]
            for key in sec:
                if key not in known_task:
                    raise ValueError(f"unrecognized key in {name}: {key}")
            if "users" not in sec:
                raise ValueError(f"task section {name} missing 'users'")
            users = tuple(int(tok) - 1 for tok in sec["users"].replace(",", " ").split())
            groups.append(users)
            tasks.append(
                TaskSpec(
                    data_size_bits=float(sec.get("data_size_bits", 1.0)),
                    historical_samples=float(sec.get("historical_samples", 0.0)),
                    error_params=ErrorModelParams(
                        scale=float(sec.get("scale", 1.0)),
                        exponent=float(sec.get("exponent", 0.5)),
                        safety=float(sec.get("safety", 1.0)),
                    ),
                )
            )
        groups_t = tuple(groups)
        tasks_t = tuple(tasks)
    else:
        groups_t = _DEFAULTS["groups"]
        tasks_t = _DEFAULTS["tasks"]

    bounds = [(0.0, math.inf) for _ in range(num_users)]
    if parser.has_section("bounds"):
        for key, value in parser["bounds"].items():
            if not key.startswith("user_"):
                raise ValueError(f"unrecognized bounds key: {key}")
            k = int(key.split("_", 1)[1]) - 1
            if not (0 <= k < num_users):
                raise ValueError(f"bounds user index out of range: {key}")
            lo, hi = _parse_floats(value)
            bounds[k] = (lo, hi)

    return Scenario(
        num_users=num_users,
        num_antennas=num_antennas,
        groups=groups_t,
        total_power=total_power,
        bandwidth=bandwidth,
        duration=duration,
        overhead_factor=overhead,
        noise_power=noise,
        path_loss=path_loss,
        tasks=tasks_t,
        rate_bounds=tuple(bounds),
    )


def save_scenario(scenario: Scenario) -> str:
    """Serialize to the INI schema (dBm/dB units, full float precision)."""
    parser = configparser.ConfigParser()
    parser["system"] = {
        "num_users": str(scenario.num_users),
        "num_antennas": str(scenario.num_antennas),
        "total_power_dbm": repr(watt_to_dbm(scenario.total_power)),
        "bandwidth_hz": repr(scenario.bandwidth),
        "duration_s": repr(scenario.duration),
        "overhead_factor": repr(scenario.overhead_factor),
        "noise_power_dbm": repr(watt_to_dbm(scenario.noise_power)),
        "path_loss_db": ", ".join(repr(linear_to_db(g)) for g in scenario.path_loss),
    }
    for m, (group, task) in enumerate(zip(scenario.groups, scenario.tasks)):
        parser[f"tasks.{m + 1}"] = {
            "users": ", ".join(str(k + 1) for k in group),
            "data_size_bits": repr(task.data_size_bits),
            "historical_samples": repr(task.historical_samples),
            "scale": repr(task.error_params.scale),
            "exponent": repr(task.error_params.exponent),
            "safety": repr(task.error_params.safety),
        }
    parser["bounds"] = {
        f"user_{k + 1}": f"{repr(lo)}, {repr(hi)}"
        for k, (lo, hi) in enumerate(scenario.rate_bounds)
    }
    out = io.StringIO()
    parser.write(out)
    return out.getvalue()
