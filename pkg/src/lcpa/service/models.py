"""Request and response schemas for the HTTP service.

Scenarios travel as INI text (the same format the file loader reads) so a
request is self-contained; omitting the text selects the built-in two-task
reference scenario.  Responses carry both structured fields and the exact
CSV the command-line client prints, so remote and in-process runs emit
byte-identical tables.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

DiagMode = Literal["expected", "realized"]


class FitRequest(BaseModel):
    """Learning-curve fit input: inline points or CSV text (not both)."""

    points: Optional[list[tuple[float, float]]] = Field(
        default=None, description="(sample count, observed error) pairs")
    csv: Optional[str] = Field(
        default=None, description="CSV text with sample_count,error rows")


class FitResponse(BaseModel):
    scale: float
    exponent: float
    mse: float


class RunRequest(BaseModel):
    scheme: str
    scenario_ini: Optional[str] = None
    seed: int = 0
    draws: int = Field(default=1, ge=1)
    diag_mode: DiagMode = "expected"


class AllocationModel(BaseModel):
    """Serialized allocation; errors are model predictions, not measured
    accuracies of a trained classifier."""

    draw: int
    scheme: str
    powers: list[float]
    rates: list[float]
    sample_counts: list[float]
    sample_counts_floored: list[float]
    predicted_errors: list[float]
    objective: float
    wall_time: float

    @classmethod
    def from_allocation(cls, draw: int, alloc) -> "AllocationModel":
        return cls(
            draw=draw,
            scheme=alloc.scheme,
            powers=[float(x) for x in alloc.powers],
            rates=[float(x) for x in alloc.rates.rates],
            sample_counts=[float(x) for x in alloc.sample_counts],
            sample_counts_floored=[float(x) for x in alloc.sample_counts_floored],
            predicted_errors=[float(x) for x in alloc.predicted_errors],
            objective=alloc.objective,
            wall_time=alloc.wall_time,
        )


class RunResponse(BaseModel):
    allocations: list[AllocationModel]
    csv: str


class CompareRequest(BaseModel):
    schemes: list[str]
    scenario_ini: Optional[str] = None
    seed: int = 0
    draws: int = Field(default=1, ge=1)
    diag_mode: DiagMode = "expected"


class CompareResponse(BaseModel):
    allocations: list[AllocationModel]
    csv: str


class SweepRequest(BaseModel):
    param: Literal["T", "N", "K"]
    values: list[float]
    schemes: list[str]
    scenario_ini: Optional[str] = None
    seed: int = 0
    draws: int = Field(default=1, ge=1)
    diag_mode: DiagMode = "expected"


class SweepRow(BaseModel):
    param: str
    value: float
    scheme: str
    mean_objective: float
    mean_errors: list[float]


class SweepResponse(BaseModel):
    rows: list[SweepRow]
    csv: str


class HealthResponse(BaseModel):
    status: str
    version: str
