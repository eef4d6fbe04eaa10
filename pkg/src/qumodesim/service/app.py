"""FastAPI application exposing the experiment handlers."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from . import handlers, schemas


def create_app() -> FastAPI:
    app = FastAPI(
        title="qumodesim",
        version=__version__,
        description=(
            "Gaussian continuous-variable optics experiments: teleportation "
            "fidelity sweeps, conditional teleportation, interval-coded "
            "computation runs, and Wigner grids."
        ),
    )

    @app.exception_handler(ValueError)
    async def _value_error(_: Request, exc: ValueError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(name="qumodesim", version=__version__)

    @app.post("/fidelity", response_model=schemas.FidelityResponse)
    def fidelity(req: schemas.FidelityRequest):
        return handlers.run_fidelity_sweep(req)

    @app.post("/postselect", response_model=schemas.PostselectResponse)
    def postselect(req: schemas.PostselectRequest):
        return handlers.run_postselect(req)

    @app.post("/run", response_model=schemas.RunResponse)
    def run(req: schemas.RunRequest):
        return handlers.run_experiment(req)

    @app.post("/wigner", response_model=schemas.WignerResponse)
    def wigner_grid(req: schemas.WignerRequest):
        return handlers.run_wigner(req)

    return app


app = create_app()
