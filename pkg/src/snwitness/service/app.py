"""FastAPI application wrapping the core package."""
from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..errors import SnwitnessError
from . import handlers, models


def create_app() -> FastAPI:
    app = FastAPI(
        title="snwitness",
        description="Schmidt-number witness computations over JSON",
        version="0.1.0",
    )

    @app.exception_handler(SnwitnessError)
    async def _domain_error(_: Request, exc: SnwitnessError) -> JSONResponse:
        return JSONResponse(
            status_code=422,
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/fr", response_model=models.FrResponse)
    def fr(req: models.FrRequest) -> models.FrResponse:
        return handlers.handle_fr(req)

    @app.post("/verdict", response_model=models.WitnessReportModel)
    def verdict(req: models.VerdictRequest) -> models.WitnessReportModel:
        return handlers.handle_verdict(req)

    @app.post("/scan", response_model=models.ScanResponse)
    def scan(req: models.ScanRequest) -> models.ScanResponse:
        return handlers.handle_scan(req)

    @app.post("/threshold", response_model=models.ThresholdResponse)
    def threshold(req: models.ThresholdRequest) -> models.ThresholdResponse:
        return handlers.handle_threshold(req)

    @app.post("/oracle", response_model=models.OracleResponse)
    def oracle(req: models.OracleRequest) -> models.OracleResponse:
        return handlers.handle_oracle(req)

    @app.post("/schmidt", response_model=models.SchmidtResponse)
    def schmidt(req: models.SchmidtRequest) -> models.SchmidtResponse:
        return handlers.handle_schmidt(req)

    return app


app = create_app()
