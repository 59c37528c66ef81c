"""HTTP JSON facade over :class:`dpledger.service.QueryService`.

Endpoints: POST /query, GET /budget, GET /ledger, GET /ledger/verify,
GET /query-types, GET /report, plus POST /evaluate when this instance hosts
the dataset (so another instance may run with a remote evaluator).  Errors
are JSON objects ``{code, message}``; budget rejections additionally carry
``eps_squared_remaining``.
"""

from __future__ import annotations

import math

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .dataset import AverageOfColumn
from .errors import (
    EvaluatorUnavailableError,
    InsufficientBudgetError,
    InvalidParameterError,
    StorageError,
    UnknownQueryTypeError,
)
from .service import InlineEvaluator, QueryService


class QueryBody(BaseModel):
    query_type: str
    epsilon: float
    delta: float
    sigma: float | None = None


class EvaluateBody(BaseModel):
    query_type: str
    sigma: float
    prev_noisy: float | None = None
    sigma_min: float | None = None


def _error(status: int, code: str, message: str, **extra) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message, **extra})


def create_app(service: QueryService) -> FastAPI:
    app = FastAPI(title="dpledger", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(RequestValidationError)
    async def _on_validation(request: Request, exc: RequestValidationError):
        return _error(400, "invalid_parameter", str(exc.errors()))

    @app.exception_handler(InvalidParameterError)
    async def _on_invalid(request: Request, exc: InvalidParameterError):
        return _error(400, "invalid_parameter", str(exc))

    @app.exception_handler(UnknownQueryTypeError)
    async def _on_unknown(request: Request, exc: UnknownQueryTypeError):
        return _error(404, "unknown_query_type", str(exc))

    @app.exception_handler(InsufficientBudgetError)
    async def _on_budget(request: Request, exc: InsufficientBudgetError):
        return _error(
            409,
            "insufficient_budget",
            str(exc),
            eps_squared_remaining=exc.eps_squared_remaining,
        )

    @app.exception_handler(EvaluatorUnavailableError)
    async def _on_evaluator(request: Request, exc: EvaluatorUnavailableError):
        return _error(503, "evaluator_unavailable", str(exc))

    @app.exception_handler(StorageError)
    async def _on_storage(request: Request, exc: StorageError):
        return _error(500, "storage_error", str(exc))

    @app.post("/query")
    def post_query(body: QueryBody):
        response = service.handle_query(
            body.query_type, body.epsilon, body.delta, body.sigma
        )
        return {
            "noisy_value": response.noisy_value,
            "sigma": response.sigma,
            "case_tag": response.case_tag.kind.value,
            "reuse_ref": response.case_tag.reuse_ref,
            "eps_squared_cost": response.eps_squared_cost,
            "eps_squared_remaining": response.eps_squared_remaining,
            "record_index": response.record_index,
            "server_accessed": response.server_accessed,
        }

    @app.get("/budget")
    def get_budget():
        state = service.get_budget()
        return {
            "eps_squared_budget": state.eps_squared_budget,
            "eps_squared_remaining": state.eps_squared_remaining,
            "delta_budget": state.delta_budget,
            "epsilon_budget": math.sqrt(state.eps_squared_budget),
            "epsilon_remaining": math.sqrt(state.eps_squared_remaining),
        }

    @app.get("/ledger")
    def get_ledger(offset: int = 0, limit: int = 100):
        records = service.ledger.page(offset, limit)
        return {
            "total": len(service.ledger),
            "offset": offset,
            "records": [r.to_json_dict() for r in records],
        }

    @app.get("/ledger/verify")
    def get_verify():
        verdict = service.ledger.verify_chain()
        return {"ok": verdict.ok, "first_bad_index": verdict.first_bad_index}

    @app.get("/query-types")
    def get_query_types():
        listing = []
        for spec in service.registry.specs():
            entry = {"name": spec.name, "sensitivity": spec.sensitivity}
            if isinstance(spec.kind, AverageOfColumn):
                entry["kind"] = "average"
                entry["column"] = spec.kind.column
                entry["domain"] = [spec.kind.domain_min, spec.kind.domain_max]
            else:
                entry["kind"] = "frequency"
                entry["predicate"] = spec.kind.predicate.text
            listing.append(entry)
        return {"query_types": listing}

    @app.get("/report")
    def get_report():
        report = service.spend_report()
        return {
            "eps_squared_spent_ours": report.eps_squared_spent_ours,
            "eps_ours": report.eps_ours,
            "eps_squared_naive": report.eps_squared_naive,
            "eps_naive": report.eps_naive,
            "per_query": [
                {
                    "index": p.index,
                    "query_type": p.query_type,
                    "case_tag": p.case_tag,
                    "eps_squared_cost": p.eps_squared_cost,
                    "cum_eps_squared_ours": p.cum_eps_squared_ours,
                    "cum_eps_ours": p.cum_eps_ours,
                    "cum_eps_naive": p.cum_eps_naive,
                }
                for p in report.per_query
            ],
        }

    if isinstance(service.evaluator, InlineEvaluator):

        @app.post("/evaluate")
        def post_evaluate(body: EvaluateBody):
            generator = service.rng
            if body.prev_noisy is None:
                value = service.evaluator.fresh(body.query_type, body.sigma, generator)
            else:
                if body.sigma_min is None:
                    raise InvalidParameterError("partial evaluation needs sigma_min")
                value = service.evaluator.partial(
                    body.query_type, body.sigma, body.prev_noisy, body.sigma_min, generator
                )
            return {"noisy_value": value}

    return app
