"""Project sessions: event-sourced state over one lifecycle model.

A session owns a program, its recognized model, a constant scope and the
current fact state.  Every committed change (load, execute, assert,
retract, undo) is appended to the event log; replaying the log from the
``start``-only state reproduces the session state exactly, and that
replay is also how sessions are rebuilt from their on-disk logs.

Undo moves a cursor back along the snapshot history; a later change
discards the undone tail, so the log stays append-only and linear.

Mutations on one session are serialized by a mutex; reads and queries
take it only long enough to copy the fact set, then work on the copy.
"""

from __future__ import annotations

import json
import re
import threading
import time
import uuid
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .. import corpus as corpus_mod
from .. import engine, lifecycle
from ..engine import EvalConfig, Outcome, Trace
from ..lifecycle import LifecycleError, LifecycleModel, START, START_ATOM, TaskStatus
from ..state import State
from ..syntax import (
    Action,
    Atom,
    Call,
    DELETE,
    Goal,
    INSERT,
    MODE_EXECUTE,
    ParseError,
    Program,
    goal_atoms,
    parse_action,
    parse_atom,
    parse_goal,
    parse_program,
    parse_query,
    Var,
)

_CONST_RE = re.compile(r"[a-z0-9][A-Za-z0-9_]*")


class SessionError(Exception):
    """Base class; the HTTP layer maps subclasses to status codes."""


class ValidationError(SessionError):
    """Bad payload: parse failure, unknown predicate, bad scope (422)."""


class ConflictError(SessionError):
    """Operation not applicable in the current state (409)."""


class UnknownSessionError(SessionError):
    """No session with that id (404)."""


class CorruptLogError(SessionError):
    """A persisted event log does not replay to its recorded digests."""


@dataclass(frozen=True)
class Event:
    seq: int
    timestamp: float
    kind: str  # load | execute | assert | retract | undo
    payload: dict[str, Any]
    digest: str  # state digest after the event

    def to_json(self) -> dict[str, Any]:
        return {
            "seq": self.seq,
            "timestamp": self.timestamp,
            "kind": self.kind,
            "payload": self.payload,
            "digest": self.digest,
        }


@dataclass(frozen=True)
class QueryOutcome:
    outcome: Outcome
    witness: Trace | None


def _parse_scope(scope: list[str]) -> tuple[str, ...]:
    out: list[str] = []
    for item in scope:
        if not isinstance(item, str) or not _CONST_RE.fullmatch(item):
            raise ValidationError(f"scope entry {item!r} is not a constant")
        if item not in out:
            out.append(item)
    return tuple(out)


def task_from_json(obj: dict[str, Any]) -> lifecycle.TaskDef:
    """Decode ``{name, arity, requires, produces}`` into a task definition.

    Parameters are the distinct variables of the atoms, ordered by first
    occurrence; their count must equal the declared arity.
    """
    try:
        name = obj["name"]
        arity = int(obj["arity"])
        requires = obj["requires"]
        produces = obj["produces"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"bad task object: {exc}") from exc
    try:
        requirements = tuple(
            tuple(parse_atom(text) for text in disjunct) for disjunct in requires
        )
        productions = tuple(parse_action(text) for text in produces)
    except ParseError as exc:
        raise ValidationError(f"task {name}: {exc}") from exc
    # first-occurrence parameter order over requirements, then productions
    params: list[str] = []
    for disjunct in requirements:
        for atom in disjunct:
            for term in atom.args:
                if isinstance(term, Var) and term.name not in params:
                    params.append(term.name)
    for prod in productions:
        for term in prod.atom.args:
            if isinstance(term, Var) and term.name not in params:
                params.append(term.name)
    if len(params) != arity:
        raise ValidationError(
            f"task {name}: declared arity {arity} but variables "
            f"{{{', '.join(params)}}}"
        )
    try:
        return lifecycle.TaskDef(name, tuple(params), requirements, productions)
    except LifecycleError as exc:
        raise ValidationError(str(exc)) from exc


def _load_source(source: dict[str, Any]) -> tuple[Program, dict[str, Any]]:
    """Build a program from a corpus id, raw text, or JSON task list."""
    try:
        if "corpus" in source:
            try:
                entry = corpus_mod.get_corpus(source["corpus"])
            except corpus_mod.UnknownCorpusError:
                raise ValidationError(f"unknown corpus entry {source['corpus']!r}")
            program = parse_program(entry.program, source=entry.id)
            return program, {"kind": "corpus", "corpus": entry.id}
        if "program" in source:
            program = parse_program(source["program"], source="<upload>")
            return program, {"kind": "program", "program": source["program"]}
        if "tasks" in source:
            tasks = [task_from_json(obj) for obj in source["tasks"]]
            model = lifecycle.model_from_tasks(tasks)
            program = lifecycle.compile_model(model, source="<tasks>")
            return program, {"kind": "tasks", "tasks": source["tasks"]}
    except ParseError as exc:
        raise ValidationError(str(exc)) from exc
    except LifecycleError as exc:
        raise ValidationError(str(exc)) from exc
    raise ValidationError("provide one of: corpus, program, tasks")


class ProjectSession:
    """One monitored project: program, model, scope, state, event log."""

    def __init__(
        self,
        session_id: str,
        source: dict[str, Any],
        scope: list[str] | tuple[str, ...],
        config: EvalConfig = engine.DEFAULT_CONFIG,
        log_path: Path | None = None,
    ):
        self.id = session_id
        self.config = config
        self.scope = _parse_scope(list(scope))
        program, self.source = _load_source(source)
        try:
            self.model: LifecycleModel = lifecycle.recognize_tasks(program)
        except LifecycleError as exc:
            raise ValidationError(str(exc)) from exc
        if not self.scope and any(t.arity > 0 for t in self.model.tasks):
            raise ValidationError(
                "model has parameterized tasks but the scope is empty"
            )
        self.program = program
        self.created_at = time.time()
        self.events: list[Event] = []
        self._lock = threading.Lock()
        self._log_path = log_path

        self.state = State((START_ATOM, *program.facts))
        self._history: list[tuple[Atom, ...]] = [tuple(self.state.facts())]
        self._cursor = 0
        self._mutating_seqs: list[int] = []
        self._record(
            "load",
            {
                "source": self.source["kind"],
                "facts": [f.text() for f in program.facts],
            },
            mutating=False,
        )

    # ── event plumbing ───────────────────────────────────────────────

    def _record(self, kind: str, payload: dict[str, Any], mutating: bool) -> Event:
        event = Event(
            seq=len(self.events) + 1,
            timestamp=time.time(),
            kind=kind,
            payload=payload,
            digest=self.state.digest(),
        )
        self.events.append(event)
        if mutating:
            self._history = self._history[: self._cursor + 1]
            self._mutating_seqs = self._mutating_seqs[: self._cursor]
            self._history.append(tuple(self.state.facts()))
            self._mutating_seqs.append(event.seq)
            self._cursor += 1
        if self._log_path is not None:
            with self._log_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(event.to_json()) + "\n")
        return event

    # ── validation helpers ───────────────────────────────────────────

    def _check_goal(self, goal: Goal) -> None:
        known = self.program.known_predicates()
        known.add(START)
        arities = self.program.arities()
        arities.setdefault(START, 0)
        for atom in goal_atoms(goal):
            if atom.pred not in known:
                raise ValidationError(f"unknown predicate {atom.pred}")
            if arities[atom.pred] != atom.arity:
                raise ValidationError(
                    f"predicate {atom.pred} has arity {arities[atom.pred]}, "
                    f"called with {atom.arity}"
                )

    def _parse_task_atom(self, text: str) -> Atom:
        try:
            atom = parse_atom(text.strip().rstrip("."))
        except ParseError as exc:
            raise ValidationError(str(exc)) from exc
        if not atom.is_ground():
            raise ValidationError(f"task atom {atom.text()} must be ground")
        if atom.pred not in self.model.task_names():
            raise ValidationError(f"{atom.pred} is not a task of this model")
        task = self.model.task(atom.pred)
        if atom.arity != task.arity:
            raise ValidationError(
                f"task {atom.pred} takes {task.arity} argument(s), got {atom.arity}"
            )
        return atom

    def _parse_artifact_atom(self, text: str) -> Atom:
        try:
            atom = parse_atom(text.strip().rstrip("."))
        except ParseError as exc:
            raise ValidationError(str(exc)) from exc
        if not atom.is_ground():
            raise ValidationError(f"atom {atom.text()} must be ground")
        if atom.pred == START:
            raise ValidationError(f"'{START}' is reserved and cannot be changed")
        if atom.pred not in self.model.artifacts:
            raise ValidationError(f"{atom.pred} is not an artifact of this model")
        arities = self.program.arities()
        if atom.pred in arities and arities[atom.pred] != atom.arity:
            raise ValidationError(
                f"artifact {atom.pred} has arity {arities[atom.pred]}, "
                f"got {atom.arity}"
            )
        return atom

    # ── reads: consistent snapshots ──────────────────────────────────

    def snapshot(self) -> State:
        """Copy of the current state, safe to use outside the mutex."""
        with self._lock:
            return self.state.copy()

    def state_facts(self) -> list[str]:
        return sorted(a.text() for a in self.snapshot().fact_set())

    def digest(self) -> str:
        return self.snapshot().digest()

    def task_statuses(self) -> list[TaskStatus]:
        return lifecycle.task_status(self.model, self.snapshot(), self.scope)

    def reachable(self) -> list[Atom] | None:
        """Artifacts derivable by firing tasks; None when deletes forbid it."""
        try:
            reached = lifecycle.reachable_artifacts(
                self.model, self.snapshot(), self.scope
            )
        except lifecycle.DeleteUnsupportedError:
            return None
        return sorted(reached, key=lambda a: a.text())

    def graph(self) -> lifecycle.DependencyGraph:
        return lifecycle.dependency_graph(self.model)

    def history(self) -> list[Event]:
        return list(self.events)

    # ── queries (hypothetical, never logged) ─────────────────────────

    def query_possible(self, text: str) -> QueryOutcome:
        """Evaluate a goal hypothetically; the session state never changes.

        Accepts a bare goal, ``?- goal.`` or ``?- possible goal.``; the
        committing query form is rejected here.
        """
        stripped = text.strip()
        try:
            if stripped.startswith("?-"):
                query = parse_query(stripped)
                if query.mode == MODE_EXECUTE:
                    raise ValidationError(
                        "this endpoint only checks possibility; use the "
                        "execute operation to commit"
                    )
                goal = query.goal
            else:
                goal = parse_goal(stripped.rstrip("."))
        except ParseError as exc:
            raise ValidationError(str(exc)) from exc
        self._check_goal(goal)
        result = engine.possible(self.program, self.snapshot(), goal, self.config)
        return QueryOutcome(result.outcome, result.witness)

    def plan_for(self, text: str) -> lifecycle.PlanResult:
        """Shortest task sequence establishing a goal artifact, if any."""
        try:
            atom = parse_atom(text.strip().rstrip("."))
        except ParseError as exc:
            raise ValidationError(str(exc)) from exc
        try:
            return lifecycle.plan(
                self.model, self.snapshot(), atom, self.scope, self.config
            )
        except LifecycleError as exc:
            raise ValidationError(str(exc)) from exc

    # ── mutations (serialized per session) ───────────────────────────

    def execute_task(self, text: str) -> Event:
        atom = self._parse_task_atom(text)
        with self._lock:
            result = engine.execute(self.program, self.state, Call(atom), self.config)
            if result.outcome is Outcome.FALSE:
                raise ConflictError(f"task {atom.text()} is not executable now")
            if result.outcome is Outcome.UNKNOWN:
                raise ConflictError(
                    f"task {atom.text()}: search bounds exhausted before an "
                    f"execution was found"
                )
            assert result.answer is not None
            return self._record(
                "execute",
                {"task": atom.text(), "trace": result.answer.trace.texts()},
                mutating=True,
            )

    def assert_fact(self, text: str) -> Event:
        atom = self._parse_artifact_atom(text)
        with self._lock:
            self.state.apply(Action(INSERT, atom))
            return self._record("assert", {"atom": atom.text()}, mutating=True)

    def retract_fact(self, text: str) -> Event:
        atom = self._parse_artifact_atom(text)
        with self._lock:
            self.state.apply(Action(DELETE, atom))
            return self._record("retract", {"atom": atom.text()}, mutating=True)

    def undo(self) -> Event:
        with self._lock:
            if self._cursor == 0:
                raise ConflictError("nothing to undo")
            undone_seq = self._mutating_seqs[self._cursor - 1]
            undone = self.events[undone_seq - 1]
            self._cursor -= 1
            self.state = State(self._history[self._cursor])
            return self._record(
                "undo",
                {"undone_seq": undone_seq, "undone_kind": undone.kind},
                mutating=False,
            )

    # ── replay ───────────────────────────────────────────────────────

    def replay_event(self, kind: str, payload: dict[str, Any]) -> None:
        """Apply one logged event; used for rebuilds and invariant checks."""
        if kind == "load":
            return  # construction already loaded the program facts
        if kind == "execute":
            self.execute_task(payload["task"])
        elif kind == "assert":
            self.assert_fact(payload["atom"])
        elif kind == "retract":
            self.retract_fact(payload["atom"])
        elif kind == "undo":
            self.undo()
        else:
            raise CorruptLogError(f"unknown event kind {kind!r}")


def replay_session(
    source: dict[str, Any],
    scope: list[str] | tuple[str, ...],
    events: list[dict[str, Any]],
    config: EvalConfig = engine.DEFAULT_CONFIG,
    session_id: str = "replay",
) -> ProjectSession:
    """Rebuild a session from its recorded events, verifying digests."""
    session = ProjectSession(session_id, source, scope, config)
    for record in events:
        if record["kind"] == "load":
            if session.events[0].digest != record["digest"]:
                raise CorruptLogError(f"session {session_id}: load digest mismatch")
            continue
        session.replay_event(record["kind"], record["payload"])
        latest = session.events[-1]
        if latest.digest != record["digest"]:
            raise CorruptLogError(
                f"session {session_id}: digest mismatch at event {record['seq']}"
            )
    return session


class SessionStore:
    """All live sessions, optionally persisted as one JSONL log per session."""

    def __init__(
        self,
        data_dir: Path | None = None,
        config: EvalConfig = engine.DEFAULT_CONFIG,
    ):
        self.config = config
        self.data_dir = data_dir
        self._sessions: dict[str, ProjectSession] = {}
        self._lock = threading.Lock()
        if data_dir is not None:
            data_dir.mkdir(parents=True, exist_ok=True)
            self._load_existing(data_dir)

    def _load_existing(self, data_dir: Path) -> None:
        for path in sorted(data_dir.glob("*.jsonl")):
            with path.open(encoding="utf-8") as fh:
                lines = [json.loads(line) for line in fh if line.strip()]
            if not lines or lines[0].get("kind") != "session":
                raise CorruptLogError(f"{path}: missing session header")
            header = lines[0]
            session = replay_session(
                header["source"],
                header["scope"],
                lines[1:],
                self.config,
                session_id=header["id"],
            )
            session.created_at = header["created_at"]
            session._log_path = path
            self._sessions[session.id] = session

    def create(self, source: dict[str, Any], scope: list[str]) -> ProjectSession:
        session_id = uuid.uuid4().hex[:12]
        session = ProjectSession(session_id, source, scope, self.config)
        if self.data_dir is not None:
            log_path = self.data_dir / f"{session_id}.jsonl"
            header = {
                "kind": "session",
                "id": session_id,
                "created_at": session.created_at,
                "source": session.source,
                "scope": list(session.scope),
            }
            with log_path.open("w", encoding="utf-8") as fh:
                fh.write(json.dumps(header) + "\n")
                for event in session.events:
                    fh.write(json.dumps(event.to_json()) + "\n")
            session._log_path = log_path
        with self._lock:
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> ProjectSession:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise UnknownSessionError(session_id) from None

    def list(self) -> list[ProjectSession]:
        return sorted(self._sessions.values(), key=lambda s: s.created_at)
