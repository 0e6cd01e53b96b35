"""HTTP facade over the allocation library.

Every endpoint is a thin wrapper: parse the request model, call the
corresponding library function, serialize.  Domain validation errors
(malformed scenarios, unknown schemes, infeasible bounds) surface as 422
responses carrying the library's message verbatim.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, error_model, harness
from ..scenario import default_scenario, load_scenario
from .models import (
    AllocationModel,
    CompareRequest,
    CompareResponse,
    FitRequest,
    FitResponse,
    HealthResponse,
    RunRequest,
    RunResponse,
    SweepRequest,
    SweepResponse,
    SweepRow,
)


def _scenario_from(ini_text):
    if ini_text is None:
        return default_scenario()
    return load_scenario(ini_text)


def create_app() -> FastAPI:
    app = FastAPI(title="lcpa", version=__version__)

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError) -> JSONResponse:
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/health", response_model=HealthResponse)
    async def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/fit", response_model=FitResponse)
    async def fit(req: FitRequest) -> FitResponse:
        if (req.points is None) == (req.csv is None):
            raise ValueError("provide exactly one of points or csv")
        if req.csv is not None:
            points = error_model.fit_points_from_csv(req.csv)
        else:
            points = [error_model.FitPoint(v, err) for v, err in req.points]
        params = error_model.fit(points)
        return FitResponse(
            scale=params.scale,
            exponent=params.exponent,
            mse=error_model.fit_mse(points, params.scale, params.exponent),
        )

    @app.post("/run", response_model=RunResponse)
    async def run(req: RunRequest) -> RunResponse:
        sc = _scenario_from(req.scenario_ini)
        allocs = harness.run(sc, req.scheme, seed=req.seed, draws=req.draws,
                             diag_mode=req.diag_mode)
        return RunResponse(
            allocations=[AllocationModel.from_allocation(i, a)
                         for i, a in enumerate(allocs)],
            csv=harness.allocations_to_csv(allocs, sc),
        )

    @app.post("/compare", response_model=CompareResponse)
    async def compare(req: CompareRequest) -> CompareResponse:
        sc = _scenario_from(req.scenario_ini)
        rows = harness.compare(sc, req.schemes, seed=req.seed, draws=req.draws,
                               diag_mode=req.diag_mode)
        return CompareResponse(
            allocations=[AllocationModel.from_allocation(d, a) for d, a in rows],
            csv=harness.allocations_to_csv(rows, sc),
        )

    @app.post("/sweep", response_model=SweepResponse)
    async def sweep(req: SweepRequest) -> SweepResponse:
        sc = _scenario_from(req.scenario_ini)
        rows = harness.sweep(sc, req.param, req.values, req.schemes,
                             seed=req.seed, draws=req.draws,
                             diag_mode=req.diag_mode)
        return SweepResponse(
            rows=[SweepRow(param=p, value=float(v), scheme=s,
                           mean_objective=obj, mean_errors=list(err))
                  for p, v, s, obj, err in rows],
            csv=harness.sweep_to_csv(rows),
        )

    return app


app = create_app()
