"""FastAPI application wrapping the core library.

Status conventions: malformed payloads (bad Kraus JSON, unknown regime,
bad region parameters) return 422; inputs that parse but fail a domain
check needing a channel (for example a Choi rank request on a
non-channel set) return 400; domain outcomes such as a failed
verification or a NotReduced reduction are ordinary 200 responses with
the outcome in the body.
"""

from __future__ import annotations

import hashlib
import json

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..channel import (
    CHANNEL_DEFECT_TOL,
    choi_rank,
    choi_spectrum,
    completeness_defect,
    is_incoherent,
    is_strictly_incoherent,
    kraus_from_json_dict,
    kraus_to_json_dict,
    signature_of,
)
from ..emit import region_csv, region_svg
from ..reduction import (
    REGIME_BOUNDS,
    reduce_qubit_io,
    reduce_qutrit_io,
    reduce_qutrit_sio,
)
from ..sampler import RegionRequest, sample_region
from ..tables import QUBIT5, QUTRIT_IO39, QUTRIT_SIO15, class_of_signature
from .schemas import (
    CertReport,
    ChoiRankRequest,
    ChoiRankResponse,
    GroupLogEntry,
    HealthResponse,
    OperatorReport,
    ReduceRequest,
    ReduceResponse,
    RegionRunRequest,
    RegionRunResponse,
    RegionSummaryModel,
    VerifyRequest,
    VerifyResponse,
)

_REDUCERS = {
    "qubit-io": (reduce_qubit_io, QUBIT5),
    "qutrit-io": (reduce_qutrit_io, QUTRIT_IO39),
    "qutrit-sio": (reduce_qutrit_sio, QUTRIT_SIO15),
}


def input_digest(kraus: dict) -> str:
    blob = json.dumps(kraus, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def _parse_kraus(kraus: dict):
    try:
        return kraus_from_json_dict(kraus)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


def _classify_table(s, strict: bool) -> str | None:
    if s.dim == 2:
        return QUBIT5
    if s.dim == 3:
        return QUTRIT_SIO15 if strict else QUTRIT_IO39
    return None


def create_app() -> FastAPI:
    app = FastAPI(title="krausfold", version=__version__)

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/verify", response_model=VerifyResponse)
    def verify(req: VerifyRequest) -> VerifyResponse:
        s = _parse_kraus(req.kraus)
        defect = completeness_defect(s)
        channel = defect <= CHANNEL_DEFECT_TOL
        strict_all = all(is_strictly_incoherent(op) for op in s.ops)
        table = _classify_table(s, strict_all)
        reports = []
        problems = []
        if not channel:
            problems.append(
                f"completeness defect {defect:.3e} exceeds {CHANNEL_DEFECT_TOL:.0e}"
            )
        for i, op in enumerate(s.ops):
            inc = is_incoherent(op)
            sig = signature_of(op) if inc else None
            cls = class_of_signature(table, sig) if table and sig else None
            if not inc:
                problems.append(f"operator {i} is not incoherent")
            reports.append(
                OperatorReport(
                    index=i,
                    incoherent=inc,
                    strictly_incoherent=is_strictly_incoherent(op),
                    signature=list(sig) if sig else None,
                    class_index=cls,
                )
            )
        all_inc = all(r.incoherent for r in reports)
        return VerifyResponse(
            valid=channel and all_inc,
            dim=s.dim,
            op_count=len(s),
            completeness_defect=float(defect),
            is_channel=channel,
            all_incoherent=all_inc,
            strictly_incoherent=strict_all,
            operators=reports,
            problems=problems,
        )

    @app.post("/reduce", response_model=ReduceResponse)
    def reduce(req: ReduceRequest) -> ReduceResponse:
        if req.regime not in _REDUCERS:
            raise HTTPException(
                status_code=422,
                detail=f"unknown regime {req.regime!r}; expected one of {sorted(_REDUCERS)}",
            )
        s = _parse_kraus(req.kraus)
        reducer, regime_key = _REDUCERS[req.regime]
        try:
            outcome = reducer(s, force_fallback=req.force_fallback)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        report = CertReport(
            input_digest=input_digest(req.kraus),
            regime=req.regime,
            op_count_before=outcome.op_count_before,
            op_count_after=outcome.op_count_after,
            bound=REGIME_BOUNDS[regime_key],
            choi_distance=float(outcome.choi_distance),
            all_incoherent=outcome.all_incoherent,
            strictly_incoherent=outcome.strictly_incoherent,
            status=outcome.status,
            log=[
                GroupLogEntry(pass_index=step.pass_index, group=step.group, route=step.route)
                for step in outcome.log
            ],
        )
        return ReduceResponse(report=report, reduced=kraus_to_json_dict(outcome.result))

    @app.post("/region", response_model=RegionRunResponse)
    def region(req: RegionRunRequest) -> RegionRunResponse:
        try:
            request = RegionRequest(
                t=tuple(req.t), kind=req.kind, n_samples=req.n_samples, seed=req.seed
            )
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        points, summary = sample_region(request)
        return RegionRunResponse(
            csv=region_csv(points),
            svg=region_svg(points, request.t) if req.svg else None,
            summary=RegionSummaryModel(
                n=summary.n,
                rejected_draws=summary.rejected_draws,
                m_min=list(summary.m_min) if summary.m_min else None,
                m_max=list(summary.m_max) if summary.m_max else None,
                violations=summary.violations,
                min_margin=summary.min_margin,
            ),
        )

    @app.post("/choi-rank", response_model=ChoiRankResponse)
    def rank(req: ChoiRankRequest) -> ChoiRankResponse:
        s = _parse_kraus(req.kraus)
        try:
            r = choi_rank(s, tol=req.tol)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return ChoiRankResponse(
            rank=r, dim=s.dim, spectrum=[float(x) for x in choi_spectrum(s)]
        )

    return app
