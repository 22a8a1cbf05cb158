"""FastAPI wiring: routes, error mapping, settings.

Reads carry the state digest in an ``ETag`` header so clients can skip
refreshes; queries are hypothetical and never change that digest.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse

from .. import corpus as corpus_mod
from ..engine import EvalConfig, Outcome
from ..lifecycle import critical_requirements, graph_to_dot
from . import models
from .sessions import (
    ConflictError,
    ProjectSession,
    SessionStore,
    UnknownSessionError,
    ValidationError,
)


@dataclass
class ServiceSettings:
    data_dir: Path | None = None
    config: EvalConfig = field(default_factory=EvalConfig)
    cors_origins: tuple[str, ...] = ("*",)


def _state_response(session: ProjectSession) -> models.StateResponse:
    snapshot = session.snapshot()
    return models.StateResponse(
        facts=sorted(a.text() for a in snapshot.fact_set()),
        digest=snapshot.digest(),
    )


def _event_model(event) -> models.EventModel:
    return models.EventModel(**event.to_json())


def _graph_response(session: ProjectSession) -> models.GraphResponse:
    graph = session.graph()
    return models.GraphResponse(
        tasks=list(graph.tasks),
        artifacts=list(graph.artifacts),
        requires=[
            models.RequireEdgeModel(
                artifact=e.artifact, task=e.task, disjunct=e.disjunct
            )
            for e in graph.requires
        ],
        produces=[
            models.ProduceEdgeModel(
                task=e.task, artifact=e.artifact, action=e.polarity
            )
            for e in graph.produces
        ],
    )


def create_app(settings: ServiceSettings | None = None) -> FastAPI:
    settings = settings or ServiceSettings()
    store = SessionStore(settings.data_dir, settings.config)
    app = FastAPI(title="tlflow", version="0.1.0")
    app.state.store = store
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(settings.cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
        expose_headers=["ETag"],
    )

    @app.exception_handler(ValidationError)
    async def _validation_error(request: Request, exc: ValidationError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(ConflictError)
    async def _conflict_error(request: Request, exc: ConflictError):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.exception_handler(UnknownSessionError)
    async def _unknown_session(request: Request, exc: UnknownSessionError):
        return JSONResponse(
            status_code=404, content={"detail": f"unknown project {exc}"}
        )

    # ── corpus ───────────────────────────────────────────────────────

    @app.get("/corpus", response_model=list[models.CorpusSummary])
    def corpus_index():
        return [
            models.CorpusSummary(
                id=e.id, title=e.title, description=e.description
            )
            for e in corpus_mod.list_corpus()
        ]

    @app.get("/corpus/{entry_id}", response_model=models.CorpusEntryResponse)
    def corpus_entry(entry_id: str):
        try:
            entry = corpus_mod.get_corpus(entry_id)
        except corpus_mod.UnknownCorpusError:
            return JSONResponse(
                status_code=404, content={"detail": f"unknown corpus {entry_id}"}
            )
        return models.CorpusEntryResponse(
            id=entry.id,
            title=entry.title,
            description=entry.description,
            program=entry.program,
        )

    # ── projects ─────────────────────────────────────────────────────

    @app.post(
        "/projects", response_model=models.CreateProjectResponse, status_code=201
    )
    def create_project(body: models.CreateProjectRequest):
        session = store.create(body.source_dict(), body.scope)
        return models.CreateProjectResponse(
            id=session.id,
            scope=list(session.scope),
            state=_state_response(session),
            tasks=session.model.task_names(),
            artifacts=list(session.model.artifacts),
        )

    @app.get("/projects", response_model=list[models.ProjectSummary])
    def list_projects():
        return [
            models.ProjectSummary(
                id=s.id,
                source=s.source["kind"],
                scope=list(s.scope),
                created_at=s.created_at,
                events=len(s.events),
                digest=s.digest(),
            )
            for s in store.list()
        ]

    @app.get("/projects/{sid}/state", response_model=models.StateResponse)
    def get_state(sid: str, response: Response):
        session = store.get(sid)
        body = _state_response(session)
        response.headers["ETag"] = f'"{body.digest}"'
        return body

    @app.get("/projects/{sid}/enabled", response_model=models.EnabledResponse)
    def get_enabled(sid: str, response: Response):
        session = store.get(sid)
        response.headers["ETag"] = f'"{session.digest()}"'
        enabled: list[models.EnabledTaskModel] = []
        disabled: list[models.DisabledTaskModel] = []
        for status in session.task_statuses():
            critical = sorted(critical_requirements(session.model, status.atom.pred))
            if status.enabled:
                assert status.disjunct is not None
                enabled.append(
                    models.EnabledTaskModel(
                        task=status.atom.text(),
                        disjunct=status.disjunct,
                        critical=critical,
                    )
                )
            else:
                disabled.append(
                    models.DisabledTaskModel(
                        task=status.atom.text(),
                        missing=[list(m) for m in status.missing],
                        critical=critical,
                    )
                )
        return models.EnabledResponse(enabled=enabled, disabled=disabled)

    @app.get("/projects/{sid}/graph")
    def get_graph(sid: str, format: str = "json"):
        session = store.get(sid)
        if format == "dot":
            return PlainTextResponse(
                graph_to_dot(session.graph()),
                headers={"ETag": f'"{session.digest()}"'},
            )
        body = _graph_response(session)
        return JSONResponse(
            content=body.model_dump(),
            headers={"ETag": f'"{session.digest()}"'},
        )

    @app.get("/projects/{sid}/history", response_model=models.HistoryResponse)
    def get_history(sid: str, response: Response):
        session = store.get(sid)
        response.headers["ETag"] = f'"{session.digest()}"'
        return models.HistoryResponse(
            events=[_event_model(e) for e in session.history()]
        )

    @app.get("/projects/{sid}/reachable", response_model=models.ReachableResponse)
    def get_reachable(sid: str, response: Response):
        session = store.get(sid)
        response.headers["ETag"] = f'"{session.digest()}"'
        reached = session.reachable()
        if reached is None:
            return models.ReachableResponse(supported=False, reachable=[])
        return models.ReachableResponse(
            supported=True, reachable=[a.text() for a in reached]
        )

    @app.post("/projects/{sid}/query", response_model=models.QueryResponse)
    def post_query(sid: str, body: models.QueryRequest):
        session = store.get(sid)
        outcome = session.query_possible(body.goal)
        if outcome.outcome is Outcome.UNKNOWN:
            return models.QueryResponse(possible="unknown")
        if outcome.outcome is Outcome.TRUE:
            witness = outcome.witness.texts() if outcome.witness else []
            return models.QueryResponse(possible=True, witness=witness)
        return models.QueryResponse(possible=False)

    @app.post("/projects/{sid}/execute", response_model=models.MutationResponse)
    def post_execute(sid: str, body: models.ExecuteRequest):
        session = store.get(sid)
        event = session.execute_task(body.task)
        return models.MutationResponse(
            state=_state_response(session), event=_event_model(event)
        )

    @app.post("/projects/{sid}/assert", response_model=models.MutationResponse)
    def post_assert(sid: str, body: models.FactRequest):
        session = store.get(sid)
        event = session.assert_fact(body.atom)
        return models.MutationResponse(
            state=_state_response(session), event=_event_model(event)
        )

    @app.post("/projects/{sid}/retract", response_model=models.MutationResponse)
    def post_retract(sid: str, body: models.FactRequest):
        session = store.get(sid)
        event = session.retract_fact(body.atom)
        return models.MutationResponse(
            state=_state_response(session), event=_event_model(event)
        )

    @app.post("/projects/{sid}/undo", response_model=models.MutationResponse)
    def post_undo(sid: str):
        session = store.get(sid)
        event = session.undo()
        return models.MutationResponse(
            state=_state_response(session), event=_event_model(event)
        )

    @app.get("/health")
    def health():
        return {"status": "ok", "projects": len(store.list())}

    return app
