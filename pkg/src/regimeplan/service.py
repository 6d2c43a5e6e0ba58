"""FastAPI service exposing the pipeline.

POST /certify, /solve, /verify, /sweep take an instance document plus
options and return the full result including rendered artifact files, so
clients can persist byte-identical outputs.  Domain failures map to HTTP 400
with the CLI exit code in the payload; schema problems are FastAPI's usual
422.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import pipeline
from .errors import RegimePlanError
from .schemas import (CertifyRequest, CertifyResponse, SolveRequest,
                      SolveResponse, SweepRequest, SweepResponse,
                      VerifyRequest, VerifyResponse)

app = FastAPI(
    title="regimeplan",
    description="Two-regime stochastic production planning: certificates, "
                "elliptic solves, policy extraction, Monte Carlo verification.",
    version="0.1.0",
)


@app.exception_handler(RegimePlanError)
async def regimeplan_error_handler(request: Request, exc: RegimePlanError):
    return JSONResponse(status_code=400,
                        content={"detail": str(exc),
                                 "exit_code": exc.exit_code})


@app.get("/healthz")
def healthz():
    return {"status": "ok"}


@app.post("/certify", response_model=CertifyResponse)
def certify(req: CertifyRequest) -> CertifyResponse:
    return pipeline.run_certify(req.instance.to_instance())


@app.post("/solve", response_model=SolveResponse)
def solve(req: SolveRequest) -> SolveResponse:
    o = req.options
    return pipeline.run_solve(req.instance.to_instance(), grid=o.grid,
                              tol=o.tol, max_iter=o.max_iter)


@app.post("/verify", response_model=VerifyResponse)
def verify(req: VerifyRequest) -> VerifyResponse:
    o = req.options
    return pipeline.run_verify(req.instance.to_instance(), grid=o.grid,
                               tol=o.tol, max_iter=o.max_iter, paths=o.paths,
                               dt=o.dt, seed=o.seed,
                               record_paths=o.record_paths)


@app.post("/sweep", response_model=SweepResponse)
def sweep(req: SweepRequest) -> SweepResponse:
    o = req.options
    return pipeline.run_sweep(req.instance.to_instance(), param=o.param,
                              values=o.values, grid=o.grid, tol=o.tol,
                              max_iter=o.max_iter, paths=o.paths, dt=o.dt,
                              seed=o.seed)
