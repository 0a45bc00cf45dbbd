"""Request and response models for the HTTP service.

Kraus payloads travel as the on-disk JSON dict ({"dim", "operators"}
with [re, im] entry pairs) and are validated by the strict loader so
service and file paths reject malformed input identically.
"""

from __future__ import annotations

from pydantic import BaseModel, Field

REGIME_CHOICES = ("qubit-io", "qutrit-io", "qutrit-sio")


class OperatorReport(BaseModel):
    index: int
    incoherent: bool
    strictly_incoherent: bool
    signature: list[int] | None = None
    class_index: int | None = None


class VerifyRequest(BaseModel):
    kraus: dict


class VerifyResponse(BaseModel):
    valid: bool
    dim: int
    op_count: int
    completeness_defect: float
    is_channel: bool
    all_incoherent: bool
    strictly_incoherent: bool
    operators: list[OperatorReport]
    problems: list[str] = Field(default_factory=list)


class ReduceRequest(BaseModel):
    kraus: dict
    regime: str
    force_fallback: bool = False


class GroupLogEntry(BaseModel):
    pass_index: int
    group: str
    route: str


class CertReport(BaseModel):
    input_digest: str
    regime: str
    op_count_before: int
    op_count_after: int
    bound: int
    choi_distance: float
    all_incoherent: bool
    strictly_incoherent: bool
    status: str
    log: list[GroupLogEntry]


class ReduceResponse(BaseModel):
    report: CertReport
    reduced: dict


class RegionRunRequest(BaseModel):
    t: list[float]
    kind: str = "sio"
    n_samples: int = 0
    seed: int = 0
    svg: bool = False


class RegionSummaryModel(BaseModel):
    n: int
    rejected_draws: int
    m_min: list[float] | None = None
    m_max: list[float] | None = None
    violations: dict[int, int] = Field(default_factory=dict)
    min_margin: dict[int, float] = Field(default_factory=dict)


class RegionRunResponse(BaseModel):
    csv: str
    svg: str | None = None
    summary: RegionSummaryModel


class ChoiRankRequest(BaseModel):
    kraus: dict
    tol: float = 1e-10


class ChoiRankResponse(BaseModel):
    rank: int
    dim: int
    spectrum: list[float]


class HealthResponse(BaseModel):
    status: str
    version: str
