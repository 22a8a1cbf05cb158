"""Request/response schemas for the HTTP API.

Atoms, actions and goals travel as strings in the rule-language syntax
(``artifact1(car)``, ``+artifact5(car)``, ``?- possible task4(car).``),
so the wire format and the file format stay identical.
"""

from __future__ import annotations

from typing import Any, Literal, Union

from pydantic import BaseModel, Field


class TaskSpec(BaseModel):
    name: str
    arity: int = 0
    requires: list[list[str]]
    produces: list[str]


class CreateProjectRequest(BaseModel):
    """Exactly one of corpus / program / tasks selects the model source."""

    corpus: str | None = None
    program: str | None = None
    tasks: list[TaskSpec] | None = None
    scope: list[str] = Field(default_factory=list)

    def source_dict(self) -> dict[str, Any]:
        if self.corpus is not None:
            return {"corpus": self.corpus}
        if self.program is not None:
            return {"program": self.program}
        if self.tasks is not None:
            return {"tasks": [t.model_dump() for t in self.tasks]}
        return {}


class EventModel(BaseModel):
    seq: int
    timestamp: float
    kind: str
    payload: dict[str, Any]
    digest: str


class StateResponse(BaseModel):
    facts: list[str]
    digest: str


class ProjectSummary(BaseModel):
    id: str
    source: str
    scope: list[str]
    created_at: float
    events: int
    digest: str


class CreateProjectResponse(BaseModel):
    id: str
    scope: list[str]
    state: StateResponse
    tasks: list[str]
    artifacts: list[str]


class EnabledTaskModel(BaseModel):
    task: str
    disjunct: int
    critical: list[str]


class DisabledTaskModel(BaseModel):
    task: str
    missing: list[list[str]]  # unmet requirement atoms, per disjunct
    critical: list[str]


class EnabledResponse(BaseModel):
    enabled: list[EnabledTaskModel]
    disabled: list[DisabledTaskModel]


class QueryRequest(BaseModel):
    goal: str


class QueryResponse(BaseModel):
    possible: Union[bool, Literal["unknown"]]
    witness: list[str] | None = None


class ExecuteRequest(BaseModel):
    task: str


class FactRequest(BaseModel):
    atom: str


class MutationResponse(BaseModel):
    state: StateResponse
    event: EventModel


class RequireEdgeModel(BaseModel):
    artifact: str
    task: str
    disjunct: int


class ProduceEdgeModel(BaseModel):
    task: str
    artifact: str
    action: str  # "+" or "-"


class GraphResponse(BaseModel):
    tasks: list[str]
    artifacts: list[str]
    requires: list[RequireEdgeModel]
    produces: list[ProduceEdgeModel]


class HistoryResponse(BaseModel):
    events: list[EventModel]


class ReachableResponse(BaseModel):
    supported: bool  # False when the model has delete productions
    reachable: list[str]


class CorpusSummary(BaseModel):
    id: str
    title: str
    description: str


class CorpusEntryResponse(BaseModel):
    id: str
    title: str
    description: str
    program: str
