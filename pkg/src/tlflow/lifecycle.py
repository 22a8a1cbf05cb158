"""Life-cycle layer: tasks with requirements and productions.

A task needs all artifacts of one of its requirement disjuncts (several
disjuncts express alternatives) and, once run, inserts or deletes its
production artifacts.  Task definitions compile to one rule per disjunct
(``task(C) :- (reqs...) * +produced(C).``) and rule programs of that
shape are recognized back into definitions, so ``.tlp`` files double as
the model interchange format.

A task with no prerequisites lists the reserved nullary token ``start``
as its single requirement; project states always contain ``start``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator

from . import engine
from .engine import EvalConfig, DEFAULT_CONFIG, Outcome
from .state import State, Substitution
from .syntax import (
    Action,
    Atom,
    Call,
    Const,
    DELETE,
    Goal,
    INSERT,
    Program,
    QueryConj,
    Rule,
    Serial,
    Var,
    parse_action,
    parse_atom,
    query_conj,
    rule_text,
    serial,
)

START = "start"
START_ATOM = Atom(START)


class LifecycleError(ValueError):
    """Base class for model-layer failures."""


class RecognitionError(LifecycleError):
    """A rule does not have the requirements-then-productions task shape."""


class UnknownTaskError(LifecycleError):
    pass


class UnknownArtifactError(LifecycleError):
    pass


class DeleteUnsupportedError(LifecycleError):
    """Reachability is only defined for models without delete productions."""


class ScopeError(LifecycleError):
    """Parameterized tasks need a non-empty constant scope."""


# ── Task definitions ─────────────────────────────────────────────────


@dataclass(frozen=True)
class TaskDef:
    """One task: parameters, requirement disjuncts, productions.

    Any one disjunct fully present in the state enables the task.  Every
    parameter and every production variable must occur in each disjunct,
    so compiled rules bind all variables before an action runs; the
    ``start`` disjunct has no variables, hence start tasks take no
    parameters.
    """

    name: str
    params: tuple[str, ...]
    requirements: tuple[tuple[Atom, ...], ...]
    productions: tuple[Action, ...]

    @property
    def arity(self) -> int:
        return len(self.params)

    @property
    def is_start(self) -> bool:
        return any(d == (START_ATOM,) for d in self.requirements)

    def __post_init__(self) -> None:
        if self.name == START:
            raise LifecycleError(f"'{START}' is reserved and cannot name a task")
        if len(set(self.params)) != len(self.params):
            raise LifecycleError(f"task {self.name}: duplicate parameters")
        if not self.requirements:
            raise LifecycleError(f"task {self.name}: no requirement disjuncts")
        if not self.productions:
            raise LifecycleError(f"task {self.name}: no productions")
        seen: set[frozenset[Atom]] = set()
        for disjunct in self.requirements:
            if not disjunct:
                raise LifecycleError(f"task {self.name}: empty disjunct")
            key = frozenset(disjunct)
            if key in seen:
                raise LifecycleError(f"task {self.name}: duplicate disjunct")
            seen.add(key)
            if any(a.pred == START for a in disjunct) and disjunct != (START_ATOM,):
                raise LifecycleError(
                    f"task {self.name}: '{START}' cannot be mixed with artifacts"
                )
            bound = set().union(*(a.variables() for a in disjunct))
            needed = set(self.params)
            for prod in self.productions:
                needed |= prod.atom.variables()
            missing = needed - bound
            if missing:
                raise LifecycleError(
                    f"task {self.name}: variable {sorted(missing)[0]} is not "
                    f"bound by every requirement disjunct"
                )
        for prod in self.productions:
            if prod.atom.pred == START:
                raise LifecycleError(f"task {self.name}: cannot produce '{START}'")

    def head(self) -> Atom:
        return Atom(self.name, tuple(Var(p) for p in self.params))

    def artifact_predicates(self) -> list[str]:
        """Requirement and production predicates, first occurrence first."""
        out: list[str] = []
        for disjunct in self.requirements:
            for atom in disjunct:
                if atom.pred != START and atom.pred not in out:
                    out.append(atom.pred)
        for prod in self.productions:
            if prod.atom.pred not in out:
                out.append(prod.atom.pred)
        return out


@dataclass(frozen=True)
class LifecycleModel:
    tasks: tuple[TaskDef, ...]
    artifacts: tuple[str, ...]
    start_tasks: tuple[str, ...]

    def task(self, name: str) -> TaskDef:
        for t in self.tasks:
            if t.name == name:
                return t
        raise UnknownTaskError(f"unknown task {name}")

    def task_names(self) -> list[str]:
        return [t.name for t in self.tasks]


def model_from_tasks(tasks: list[TaskDef] | tuple[TaskDef, ...]) -> LifecycleModel:
    """Assemble and cross-validate a model from task definitions."""
    names: list[str] = []
    artifacts: list[str] = []
    for t in tasks:
        if t.name in names:
            raise LifecycleError(f"duplicate task {t.name}")
        names.append(t.name)
        for pred in t.artifact_predicates():
            if pred not in artifacts:
                artifacts.append(pred)
    clash = set(names) & set(artifacts)
    if clash:
        raise LifecycleError(
            f"{sorted(clash)[0]} is used both as a task and as an artifact"
        )
    starts = tuple(t.name for t in tasks if t.is_start)
    return LifecycleModel(tuple(tasks), tuple(artifacts), starts)


# ── Compilation to rules ─────────────────────────────────────────────


def compile_task(task: TaskDef) -> list[Rule]:
    """One rule per requirement disjunct, in disjunct order."""
    rules = []
    for disjunct in task.requirements:
        requirement: Goal = query_conj([Call(a) for a in disjunct])
        body = serial([requirement, *task.productions])
        rules.append(Rule(task.head(), body))
    return rules


def compile_model(model: LifecycleModel, source: str = "<model>") -> Program:
    rules: list[Rule] = []
    for task in model.tasks:
        rules.extend(compile_task(task))
    return Program(tuple(rules), (), source=source)


# ── Recognition of task-shaped programs ──────────────────────────────


def _body_items(body: Goal) -> tuple[Goal, ...]:
    return body.items if isinstance(body, Serial) else (body,)


def _requirement_atoms(goal: Goal, rule: Rule) -> list[Atom]:
    if isinstance(goal, Call):
        return [goal.atom]
    if isinstance(goal, QueryConj):
        atoms: list[Atom] = []
        for item in goal.items:
            if not isinstance(item, Call):
                raise RecognitionError(
                    f"rule `{rule_text(rule)}`: requirement conjunction may "
                    f"only contain atoms"
                )
            atoms.append(item.atom)
        return atoms
    raise RecognitionError(
        f"rule `{rule_text(rule)}`: expected a requirement query or action, "
        f"found an interleaving"
    )


def _split_rule(rule: Rule) -> tuple[list[Atom], list[Action]]:
    """Split a body into requirement atoms then actions, or reject it."""
    atoms: list[Atom] = []
    actions: list[Action] = []
    for item in _body_items(rule.body):
        if isinstance(item, Action):
            actions.append(item)
        elif actions:
            raise RecognitionError(
                f"rule `{rule_text(rule)}`: requirement query appears after "
                f"an action"
            )
        else:
            atoms.extend(_requirement_atoms(item, rule))
    if not atoms:
        raise RecognitionError(
            f"rule `{rule_text(rule)}`: no requirement query before the "
            f"actions (use the '{START}' token for tasks without one)"
        )
    if not actions:
        raise RecognitionError(f"rule `{rule_text(rule)}`: no productions")
    deduped: list[Atom] = []
    for a in atoms:
        if a not in deduped:
            deduped.append(a)
    return deduped, actions


def _canonical_params(rule: Rule) -> tuple[str, ...]:
    params: list[str] = []
    for t in rule.head.args:
        if not isinstance(t, Var) or t.name in params:
            raise RecognitionError(
                f"rule `{rule_text(rule)}`: head must apply distinct variables"
            )
        params.append(t.name)
    return tuple(params)


def _rename_vars(atom: Atom, mapping: dict[str, Var]) -> Atom:
    if not atom.args:
        return atom
    return Atom(
        atom.pred,
        tuple(mapping.get(t.name, t) if isinstance(t, Var) else t for t in atom.args),
    )


def recognize_tasks(program: Program) -> LifecycleModel:
    """Read a task-shaped program back into a lifecycle model.

    Rules are grouped by head predicate in first-appearance order; rule
    order within a group becomes disjunct order.  Variable names are
    aligned to the group's first rule, so alpha-variants recognize
    identically.
    """
    order: list[str] = []
    grouped: dict[str, list[Rule]] = {}
    for rule in program.rules:
        if rule.head.pred not in grouped:
            order.append(rule.head.pred)
            grouped[rule.head.pred] = []
        grouped[rule.head.pred].append(rule)

    tasks: list[TaskDef] = []
    for name in order:
        rules = grouped[name]
        params = _canonical_params(rules[0])
        requirements: list[tuple[Atom, ...]] = []
        productions: tuple[Action, ...] | None = None
        for rule in rules:
            rule_params = _canonical_params(rule)
            if len(rule_params) != len(params):
                raise RecognitionError(
                    f"rule `{rule_text(rule)}`: arity differs from the first "
                    f"rule for {name}"
                )
            rename = {old: Var(new) for old, new in zip(rule_params, params)}
            atoms, actions = _split_rule(rule)
            disjunct = tuple(_rename_vars(a, rename) for a in atoms)
            acts = tuple(
                Action(a.polarity, _rename_vars(a.atom, rename)) for a in actions
            )
            if productions is None:
                productions = acts
            elif acts != productions:
                raise RecognitionError(
                    f"rule `{rule_text(rule)}`: productions differ from the "
                    f"first rule for {name}"
                )
            requirements.append(disjunct)
        assert productions is not None
        try:
            tasks.append(TaskDef(name, params, tuple(requirements), productions))
        except LifecycleError as exc:
            raise RecognitionError(str(exc)) from exc
    try:
        return model_from_tasks(tasks)
    except LifecycleError as exc:
        raise RecognitionError(str(exc)) from exc


# ── Enabledness ──────────────────────────────────────────────────────


def _substitute(atom: Atom, binding: Substitution) -> Atom:
    if not atom.args:
        return atom
    return Atom(
        atom.pred,
        tuple(
            binding.get(t.name, t) if isinstance(t, Var) else t for t in atom.args
        ),
    )


def _disjunct_solutions(
    disjunct: tuple[Atom, ...], seed: Substitution, state: State
) -> list[Substitution]:
    """Joined bindings making every atom of the disjunct a stored fact."""
    solutions = [dict(seed)]
    for atom in disjunct:
        extended: list[Substitution] = []
        for binding in solutions:
            pattern = _substitute(atom, binding)
            for found in state.match(pattern):
                extended.append({**binding, **found})
        solutions = extended
        if not solutions:
            break
    return solutions


def instances(task: TaskDef, scope: tuple[str, ...]) -> Iterator[Atom]:
    """Ground head atoms of a task over a constant scope, in scope order."""
    if task.arity == 0:
        yield Atom(task.name)
        return
    for combo in itertools.product(scope, repeat=task.arity):
        yield Atom(task.name, tuple(Const(c) for c in combo))


def _dedup_scope(scope: list[str] | tuple[str, ...]) -> tuple[str, ...]:
    out: list[str] = []
    for c in scope:
        if c not in out:
            out.append(c)
    return tuple(out)


@dataclass(frozen=True)
class TaskStatus:
    atom: Atom
    enabled: bool
    disjunct: int | None  # index of the first satisfied disjunct
    missing: tuple[tuple[str, ...], ...]  # unmet atoms per disjunct


def task_status(
    model: LifecycleModel, state: State, scope: list[str] | tuple[str, ...]
) -> list[TaskStatus]:
    """Enabledness of every ground task instance, with per-disjunct gaps."""
    scope = _dedup_scope(scope)
    if not scope and any(t.arity > 0 for t in model.tasks):
        raise ScopeError("model has parameterized tasks but the scope is empty")
    out: list[TaskStatus] = []
    for task in model.tasks:
        for inst in instances(task, scope):
            seed: Substitution = {
                p: c
                for p, c in zip(task.params, inst.args)
                if isinstance(c, Const)
            }
            satisfied: int | None = None
            missing: list[tuple[str, ...]] = []
            for idx, disjunct in enumerate(task.requirements):
                if _disjunct_solutions(disjunct, seed, state):
                    if satisfied is None:
                        satisfied = idx
                    missing.append(())
                else:
                    unmet = []
                    for atom in disjunct:
                        pattern = _substitute(atom, seed)
                        if not state.match(pattern):
                            unmet.append(pattern.text())
                    missing.append(tuple(unmet))
            out.append(
                TaskStatus(inst, satisfied is not None, satisfied, tuple(missing))
            )
    return out


def enabled_tasks(
    model: LifecycleModel, state: State, scope: list[str] | tuple[str, ...]
) -> list[Atom]:
    """Ground task atoms with some requirement disjunct fully in the state."""
    return [s.atom for s in task_status(model, state, scope) if s.enabled]


# ── Dependency graph ─────────────────────────────────────────────────


@dataclass(frozen=True)
class RequireEdge:
    artifact: str
    task: str
    disjunct: int


@dataclass(frozen=True)
class ProduceEdge:
    task: str
    artifact: str
    polarity: str  # INSERT or DELETE


@dataclass(frozen=True)
class DependencyGraph:
    tasks: tuple[str, ...]
    artifacts: tuple[str, ...]
    requires: tuple[RequireEdge, ...]
    produces: tuple[ProduceEdge, ...]


def dependency_graph(model: LifecycleModel) -> DependencyGraph:
    """Bipartite artifact/task graph; disjunct indexes are 0-based."""
    requires: list[RequireEdge] = []
    produces: list[ProduceEdge] = []
    for task in model.tasks:
        for idx, disjunct in enumerate(task.requirements):
            for atom in disjunct:
                if atom.pred == START:
                    continue
                edge = RequireEdge(atom.pred, task.name, idx)
                if edge not in requires:
                    requires.append(edge)
        for prod in task.productions:
            edge = ProduceEdge(task.name, prod.atom.pred, prod.polarity)
            if edge not in produces:
                produces.append(edge)
    return DependencyGraph(
        tuple(model.task_names()),
        tuple(model.artifacts),
        tuple(requires),
        tuple(produces),
    )


def graph_to_dot(graph: DependencyGraph) -> str:
    """Graphviz rendering: tasks as boxes, artifacts as ellipses."""
    lines = ["digraph lifecycle {", "  rankdir=LR;"]
    for task in graph.tasks:
        lines.append(f'  "{task}" [shape=box];')
    for artifact in graph.artifacts:
        lines.append(f'  "{artifact}" [shape=ellipse];')
    for req in graph.requires:
        lines.append(f'  "{req.artifact}" -> "{req.task}" [label="{req.disjunct}"];')
    for prod in graph.produces:
        lines.append(
            f'  "{prod.task}" -> "{prod.artifact}" [label="{prod.polarity}"];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


# ── Analysis ─────────────────────────────────────────────────────────


def critical_requirements(model: LifecycleModel, task_name: str) -> set[str]:
    """Artifact predicates required no matter which disjunct is used."""
    task = model.task(task_name)
    common: set[str] | None = None
    for disjunct in task.requirements:
        preds = {a.pred for a in disjunct if a.pred != START}
        common = preds if common is None else common & preds
    return common or set()


def reachable_artifacts(
    model: LifecycleModel, state: State, scope: list[str] | tuple[str, ...]
) -> set[Atom]:
    """Every artifact fact obtainable by repeatedly firing enabled tasks.

    Only defined for delete-free models: with inserts alone the closure is
    a least fixpoint.  Models with delete productions need per-artifact
    possibility queries instead.
    """
    for task in model.tasks:
        for prod in task.productions:
            if prod.polarity == DELETE:
                raise DeleteUnsupportedError(
                    f"task {task.name} deletes {prod.atom.pred}; reachability "
                    f"needs a delete-free model"
                )
    scope = _dedup_scope(scope)
    if not scope and any(t.arity > 0 for t in model.tasks):
        raise ScopeError("model has parameterized tasks but the scope is empty")
    work = state.copy()
    changed = True
    while changed:
        changed = False
        for task in model.tasks:
            for inst in instances(task, scope):
                seed: Substitution = {
                    p: c
                    for p, c in zip(task.params, inst.args)
                    if isinstance(c, Const)
                }
                for disjunct in task.requirements:
                    for solution in _disjunct_solutions(disjunct, seed, work):
                        for prod in task.productions:
                            produced = _substitute(prod.atom, solution)
                            record = work.apply(Action(INSERT, produced))
                            changed = changed or record.effective
    artifact_preds = set(model.artifacts)
    return {a for a in work.fact_set() if a.pred in artifact_preds}


# ── Planning ─────────────────────────────────────────────────────────


@dataclass(frozen=True)
class PlanResult:
    outcome: Outcome
    tasks: tuple[Atom, ...] = ()


def plan(
    model: LifecycleModel,
    state: State,
    goal: Atom,
    scope: list[str] | tuple[str, ...],
    config: EvalConfig = DEFAULT_CONFIG,
) -> PlanResult:
    """Shortest task sequence whose in-order execution establishes the goal.

    Breadth-first over committed task firings, expanding tasks in
    declaration order and instances in scope order, so ties pick the
    earliest-declared tasks.  FALSE means the whole reachable state space
    was explored; UNKNOWN means the plan-length bound cut it off.
    """
    if goal.pred not in model.artifacts:
        raise UnknownArtifactError(f"{goal.pred} is not an artifact of the model")
    if not goal.is_ground():
        raise LifecycleError(f"plan goal {goal.text()} must be ground")
    scope = _dedup_scope(scope)
    if not scope and any(t.arity > 0 for t in model.tasks):
        raise ScopeError("model has parameterized tasks but the scope is empty")

    if goal in state:
        return PlanResult(Outcome.TRUE)

    program = compile_model(model)
    start = state.copy()
    visited = {start.fact_set()}
    frontier: list[tuple[State, tuple[Atom, ...]]] = [(start, ())]
    depth = 0
    while frontier:
        if depth >= config.max_depth:
            return PlanResult(Outcome.UNKNOWN)
        depth += 1
        nxt: list[tuple[State, tuple[Atom, ...]]] = []
        for current, path in frontier:
            for task in model.tasks:
                for inst in instances(task, scope):
                    candidate = current.copy()
                    result = engine.execute(program, candidate, Call(inst), config)
                    if result.outcome is not Outcome.TRUE:
                        continue
                    key = candidate.fact_set()
                    if key in visited:
                        continue
                    visited.add(key)
                    if goal in candidate:
                        return PlanResult(Outcome.TRUE, path + (inst,))
                    nxt.append((candidate, path + (inst,)))
        frontier = nxt
    return PlanResult(Outcome.FALSE)
