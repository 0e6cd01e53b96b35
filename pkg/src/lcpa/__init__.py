"""Learning-centric power allocation for multiuser edge machine learning.

Allocates uplink transmit power so the worst predicted classification error
across learning tasks is minimized, instead of maximizing throughput or
equalizing rates.  The pipeline: simulate (or load) channels, map rates to
per-task training-sample counts, predict errors through fitted power-law
learning curves, and optimize the worst weighted prediction subject to the
power budget and optional per-user sample-count bounds.

Solvers: an interference-aware majorize-minimize loop, an entropic
mirror-prox saddle solver for the interference-free large-antenna regime,
and a closed-form bisection for the single-user-per-task asymptotic case;
water-filling and max-min fairness serve as baselines.  All reported errors
are model predictions, never measured accuracies of trained classifiers.
"""

__version__ = "1.0.0"

from . import (
    asymptotic,
    baselines,
    channel,
    error_model,
    harness,
    mirror_prox,
    mm_solver,
    scenario,
    uncertainty,
)
from .scenario import (
    ErrorModelParams,
    Scenario,
    TaskSpec,
    dbm_to_watt,
    default_scenario,
    estimate_overhead,
    load_scenario,
    save_scenario,
    watt_to_dbm,
)

__all__ = [
    "__version__",
    "asymptotic",
    "baselines",
    "channel",
    "error_model",
    "harness",
    "mirror_prox",
    "mm_solver",
    "scenario",
    "uncertainty",
    "ErrorModelParams",
    "Scenario",
    "TaskSpec",
    "dbm_to_watt",
    "watt_to_dbm",
    "default_scenario",
    "estimate_overhead",
    "load_scenario",
    "save_scenario",
]
