"""FastAPI application exposing the experiments over HTTP.

The service is a thin wrapper: each endpoint validates its request model,
runs the corresponding experiment from the core package, and returns the
report.  Parameter problems (bad rationals, cap violations) map to 400;
request-shape problems are FastAPI's usual 422.
"""

from __future__ import annotations

from fractions import Fraction
from importlib.metadata import PackageNotFoundError, version

from fastapi import FastAPI, HTTPException

from ..experiments import (
    ParameterError,
    run_average_divergence,
    run_kernel_scans,
    run_strong_sum,
    run_variation_average,
    run_weak_divergence,
)
from ..hardy import parse_lacunary_spec
from ..stepfn import load_stepfn
from .schemas import (
    AverageDivergenceRequest,
    HealthResponse,
    KernelScansRequest,
    ReportModel,
    StrongSumRequest,
    VariationAverageRequest,
    WeakDivergenceRequest,
)

try:
    _VERSION = version("walsh-fejer")
except PackageNotFoundError:
    _VERSION = "0.0.0.dev"


def create_app() -> FastAPI:
    app = FastAPI(
        title="walsh-fejer",
        version=_VERSION,
        description="Exact Walsh-Fejér summability experiments on the dyadic group",
    )

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=_VERSION)

    @app.post("/experiments/strong-sum", response_model=ReportModel)
    def strong_sum(request: StrongSumRequest) -> ReportModel:
        with _parameter_errors():
            source = load_stepfn(request.source_stepfn) if request.source_stepfn else None
            report = run_strong_sum(
                p=Fraction(request.p),
                n_max=request.n_max,
                depth=request.depth,
                source=source,
                mode=request.mode,
                log_base=request.log_base,
            )
        return ReportModel.from_report(report)

    @app.post("/experiments/weak-divergence", response_model=ReportModel)
    def weak_divergence(request: WeakDivergenceRequest) -> ReportModel:
        with _parameter_errors():
            spec = parse_lacunary_spec(request.spec_text) if request.spec_text else None
            report = run_weak_divergence(spec=spec, k_max=request.k_max, mode=request.mode)
        return ReportModel.from_report(report)

    @app.post("/experiments/average-divergence", response_model=ReportModel)
    def average_divergence(request: AverageDivergenceRequest) -> ReportModel:
        with _parameter_errors():
            report = run_average_divergence(
                m_min=request.m_min, m_max=request.m_max, mode=request.mode
            )
        return ReportModel.from_report(report)

    @app.post("/experiments/variation-average", response_model=ReportModel)
    def variation_average(request: VariationAverageRequest) -> ReportModel:
        with _parameter_errors():
            report = run_variation_average(n_max=request.n_max, mode=request.mode)
        return ReportModel.from_report(report)

    @app.post("/experiments/kernel-scans", response_model=list[ReportModel])
    def kernel_scans(request: KernelScansRequest) -> list[ReportModel]:
        with _parameter_errors():
            reports = run_kernel_scans(n_max=request.n_max, mode=request.mode)
        return [ReportModel.from_report(r) for r in reports]

    return app


class _parameter_errors:
    """Translate core parameter and value errors into HTTP 400 responses."""

    def __enter__(self) -> None:
        return None

    def __exit__(self, exc_type, exc, tb) -> bool:
        if exc_type is not None and issubclass(exc_type, (ParameterError, ValueError)):
            raise HTTPException(status_code=400, detail=str(exc))
        return False


app = create_app()
