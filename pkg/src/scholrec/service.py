"""HTTP API: the repository-plugin protocol plus feedback, events and CTR.

The exchange mirrors the embed contract: the page sends the visited item
(identifier and whatever metadata it has) and receives a ranked list of
suggestions per scope. Impressions are logged server-side at response time
so the CTR denominator stays honest even when embed assets fail; clicks
arrive from the widget through /v1/events.
"""

from __future__ import annotations

import time
import uuid
from typing import Any, Literal

from fastapi import FastAPI, Query, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, Field

from .config import AppConfig
from .corpus import ReferenceDocument, load_corpus
from .engine import Recommender, RecommendOutcome
from .enrich import enrich_store, join_indicators, read_indicators
from .errors import EmptyQueryError, ValidationError
from .evaluation import compute_ctr
from .feedback import BlacklistStore, EventLog, FeedbackEntry, InteractionEvent, utc_now_iso
from .pipeline import Scope

API_VERSION = "v1"


class ReferenceDocumentModel(BaseModel):
    model_config = ConfigDict(extra="ignore")

    id: str | None = None
    doi: str | None = None
    title: str | None = None
    authors: list[str] | None = None
    abstract: str | None = None
    year: int | None = None
    fulltext: str | None = None

    def to_reference(self) -> ReferenceDocument:
        return ReferenceDocument(
            id=self.id,
            doi=self.doi,
            title=self.title,
            authors=self.authors,
            abstract=self.abstract,
            year=self.year,
            fulltext=self.fulltext,
        )


class RecommendRequestModel(BaseModel):
    model_config = ConfigDict(extra="ignore")

    document: ReferenceDocumentModel
    scope: Literal["global", "repository"] = "global"
    repository_id: str | None = None
    limit: int = Field(default=5, ge=1, le=50)
    variant: str | None = None
    user_hash: str | None = None


class FeedbackRequestModel(BaseModel):
    model_config = ConfigDict(extra="ignore")

    reference_key: str
    recommended_id: str
    reporter_hash: str


class ServiceState:
    """Mutable service-level state: engine snapshot plus the two logs."""

    def __init__(
        self,
        config: AppConfig,
        engine: Recommender | None = None,
        events: EventLog | None = None,
    ):
        self.config = config
        self.engine = engine
        self.events = events if events is not None else EventLog(config.event_log)

    @property
    def blacklist(self) -> BlacklistStore | None:
        return self.engine.blacklist if self.engine is not None else None


def _error_response(
    status: int, code: str, message: str, field: str | None = None
) -> JSONResponse:
    body: dict[str, Any] = {"error": {"code": code, "message": message}}
    if field:
        body["error"]["field"] = field
    return JSONResponse(status_code=status, content=body)


def build_state(config: AppConfig) -> ServiceState:
    """Load corpus and indicators from the configured paths and index them."""
    if not config.corpus:
        raise ValidationError("config needs a corpus path to serve", field="corpus")
    store, _report = load_corpus(config.corpus)
    store = enrich_store(store)
    if config.indicators:
        rows, _skipped = read_indicators(config.indicators)
        store, _join = join_indicators(store, rows)
    blacklist = BlacklistStore(
        config.feedback_log, global_ban_threshold=config.global_ban_threshold
    )
    engine = Recommender.build(
        store,
        config.scoring,
        blacklist,
        exclude_own_repository=config.exclude_own_repository,
    )
    return ServiceState(config, engine=engine)


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="scholrec", version="0.1.0")
    if state.config.cors_allowlist:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=state.config.cors_allowlist,
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.exception_handler(RequestValidationError)
    async def on_request_validation(request: Request, exc: RequestValidationError):
        errors = exc.errors()
        field = ""
        message = "invalid request body"
        if errors:
            loc = [str(part) for part in errors[0].get("loc", ()) if part != "body"]
            field = ".".join(loc)
            message = errors[0].get("msg", message)
        return _error_response(400, "INVALID_REQUEST", message, field or None)

    @app.exception_handler(ValidationError)
    async def on_validation(request: Request, exc: ValidationError):
        return _error_response(400, "INVALID_REQUEST", str(exc), exc.field)

    @app.exception_handler(EmptyQueryError)
    async def on_empty_query(request: Request, exc: EmptyQueryError):
        return _error_response(422, "EMPTY_QUERY", str(exc))

    @app.get(f"/{API_VERSION}/health")
    def health() -> dict[str, Any]:
        engine = state.engine
        if engine is None:
            return {"status": "loading", "index_version": None, "doc_count": 0}
        return {
            "status": "ok",
            "index_version": engine.index.index_version,
            "doc_count": len(engine.store),
        }

    @app.post(f"/{API_VERSION}/recommend")
    def recommend(request: RecommendRequestModel) -> JSONResponse:
        engine = state.engine
        if engine is None:
            return _error_response(503, "INDEX_NOT_LOADED", "index not yet loaded")
        started = time.monotonic()

        if request.scope == "repository":
            scope = Scope.repository(request.repository_id or "")
        else:
            scope = Scope.global_scope()
        ref = request.document.to_reference()
        ref.validate()

        outcome: RecommendOutcome = engine.recommend(
            ref,
            scope,
            request.limit,
            own_repository_id=request.repository_id,
        )
        if time.monotonic() - started > state.config.recommend_timeout_seconds:
            return _error_response(503, "TIMEOUT", "recommendation timed out")

        request_id = uuid.uuid4().hex
        user_hash = request.user_hash or f"anon:{request_id}"
        now = utc_now_iso()
        for item in outcome.recommendations.items:
            state.events.record_event(
                InteractionEvent(
                    user_hash=user_hash,
                    doc_id=item.doc_id,
                    access_time=now,
                    kind="impression",
                    source_doc_id=outcome.reference_key,
                    variant=request.variant,
                )
            )
        body = {
            "items": [item.to_obj() for item in outcome.recommendations.items],
            "reference_resolved": outcome.resolved,
            "reference_key": outcome.reference_key,
            "index_version": outcome.recommendations.index_version,
            "request_id": request_id,
        }
        return JSONResponse(status_code=200, content=body)

    @app.post(f"/{API_VERSION}/feedback", status_code=204)
    def feedback(request: FeedbackRequestModel) -> Response:
        blacklist = state.blacklist
        if blacklist is None:
            return _error_response(503, "INDEX_NOT_LOADED", "service not ready")
        entry = FeedbackEntry(
            reference_key=request.reference_key,
            recommended_id=request.recommended_id,
            reported_at=utc_now_iso(),
            reporter_hash=request.reporter_hash,
        )
        blacklist.record_feedback(entry)
        return Response(status_code=204)

    @app.post(f"/{API_VERSION}/events", status_code=204)
    def events(payload: dict[str, Any]) -> Response:
        event = InteractionEvent.from_obj(payload)
        state.events.record_event(event)
        return Response(status_code=204)

    @app.get(f"/{API_VERSION}/metrics/ctr")
    def metrics_ctr(group_by: str = Query(default="item")) -> dict[str, Any]:
        return compute_ctr(state.events.events(), group_by).to_obj()

    return app


def service_from_config(config: AppConfig) -> FastAPI:
    return create_app(build_state(config))


__all__ = [
    "RecommendRequestModel",
    "ReferenceDocumentModel",
    "ServiceState",
    "build_state",
    "create_app",
    "service_from_config",
]
