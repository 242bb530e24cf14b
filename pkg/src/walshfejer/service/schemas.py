"""Pydantic request/response models for the experiment service.

Numeric report cells are transported as strings so that rational values
survive the JSON boundary unchanged; ``ReportModel.to_report`` restores
the typed cells.
"""

from __future__ import annotations

from fractions import Fraction

from pydantic import BaseModel, Field, field_validator

from ..experiments import Assertion, ExperimentReport, _format_cell, _parse_cell


def _parse_positive_fraction(value: str) -> Fraction:
    try:
        q = Fraction(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational number: {value!r}") from exc
    if q <= 0:
        raise ValueError("exponent must be positive")
    return q


class StrongSumRequest(BaseModel):
    p: str = "1/4"
    n_max: int = Field(default=4096, ge=4)
    depth: int = Field(default=4, ge=1, le=16)
    source_stepfn: str | None = None
    mode: str = "exact"
    log_base: str = "2"

    @field_validator("p")
    @classmethod
    def _rational(cls, v: str) -> str:
        _parse_positive_fraction(v)
        return v


class WeakDivergenceRequest(BaseModel):
    spec_text: str | None = None
    k_max: int | None = Field(default=None, ge=1)
    mode: str = "exact"


class AverageDivergenceRequest(BaseModel):
    m_min: int = Field(default=4, ge=1)
    m_max: int = Field(default=10, ge=1)
    mode: str = "exact"


class VariationAverageRequest(BaseModel):
    n_max: int = Field(default=1 << 20, ge=8)
    mode: str = "exact"


class KernelScansRequest(BaseModel):
    n_max: int = Field(default=1 << 14, ge=16)
    mode: str = "exact"


class AssertionModel(BaseModel):
    name: str
    passed: bool
    detail: str = ""


class ReportModel(BaseModel):
    experiment: str
    mode: str
    artifact: str
    params: dict[str, str]
    columns: list[str]
    rows: list[list[str]]
    assertions: list[AssertionModel]
    summary: dict[str, str]
    passed: bool
    stepfn: str | None = None

    @classmethod
    def from_report(cls, report: ExperimentReport) -> "ReportModel":
        return cls(
            experiment=report.experiment,
            mode=report.mode,
            artifact=report.artifact,
            params=dict(report.params),
            columns=list(report.columns),
            rows=[[_format_cell(c) for c in row] for row in report.rows],
            assertions=[
                AssertionModel(name=a.name, passed=a.passed, detail=a.detail)
                for a in report.assertions
            ],
            summary=dict(report.summary),
            passed=report.passed,
            stepfn=report.stepfn,
        )

    def to_report(self) -> ExperimentReport:
        return ExperimentReport(
            experiment=self.experiment,
            mode=self.mode,
            artifact=self.artifact,
            params=dict(self.params),
            columns=list(self.columns),
            rows=[[_parse_cell(c) for c in row] for row in self.rows],
            assertions=[Assertion(a.name, a.passed, a.detail) for a in self.assertions],
            summary=dict(self.summary),
            stepfn=self.stepfn,
        )


class HealthResponse(BaseModel):
    status: str
    version: str
