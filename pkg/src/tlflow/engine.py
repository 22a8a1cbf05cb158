"""Evaluator: executional entailment for serial-Horn goals.

Goals are run depth-first, left to right, rules in textual order, against
a mutable State.  Every update is undone on backtracking, so after an
enumeration is exhausted or closed the state holds its original value;
committing is an explicit trace replay.  Interleavings of concurrent
goals are enumerated one scheduling step at a time (a step is one action
application, one base-predicate match, or one rule expansion), left
branch first.

Search is bounded, never cut: exceeding the rule-expansion depth or the
interleaving budget marks the run as exhausted, and a goal with no
answers from an exhausted run reports UNKNOWN rather than FALSE.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Union

from .state import State
from .syntax import (
    Action,
    Atom,
    Call,
    Concurrent,
    Const,
    Goal,
    Program,
    QueryConj,
    Rule,
    Serial,
    Term,
    Var,
)

sys.setrecursionlimit(max(sys.getrecursionlimit(), 100_000))

Subst = dict[str, Term]


class EvalError(Exception):
    """Evaluation failed for a reason that is not plain goal failure."""


class NonGroundActionError(EvalError):
    """An action still contained variables when it was about to run."""


class QueryActionError(EvalError):
    """A call inside an '&' conjunction reached a state-changing action."""


@dataclass(frozen=True)
class EvalConfig:
    max_depth: int = 256
    max_answers: int = 64
    max_interleavings: int = 1024

    def __post_init__(self) -> None:
        for name in ("max_depth", "max_answers", "max_interleavings"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


DEFAULT_CONFIG = EvalConfig()


# ── Substitutions and unification ────────────────────────────────────


def walk(term: Term, subst: Subst) -> Term:
    """Resolve a term through the substitution to a constant or free var."""
    while isinstance(term, Var) and term.name in subst:
        term = subst[term.name]
    return term


def walk_atom(atom: Atom, subst: Subst) -> Atom:
    if not atom.args:
        return atom
    return Atom(atom.pred, tuple(walk(t, subst) for t in atom.args), pos=atom.pos)


def unify(a: Atom, b: Atom, subst: Subst | None = None) -> Subst | None:
    """Most general unifier of two atoms extending subst, or None."""
    if subst is None:
        subst = {}
    if a.pred != b.pred or a.arity != b.arity:
        return None
    for ta, tb in zip(a.args, b.args):
        ta, tb = walk(ta, subst), walk(tb, subst)
        if ta == tb:
            continue
        if isinstance(ta, Var):
            subst = {**subst, ta.name: tb}
        elif isinstance(tb, Var):
            subst = {**subst, tb.name: ta}
        else:
            return None
    return subst


def goal_variables(goal: Goal) -> list[str]:
    """Variable names under a goal, in first-occurrence order."""
    seen: list[str] = []

    def visit(g: Goal) -> None:
        if isinstance(g, (Call, Action)):
            for t in g.atom.args:
                if isinstance(t, Var) and t.name not in seen:
                    seen.append(t.name)
        elif isinstance(g, (Serial, QueryConj)):
            for item in g.items:
                visit(item)
        elif isinstance(g, Concurrent):
            visit(g.left)
            visit(g.right)

    visit(goal)
    return seen


def _rename_goal(goal: Goal, mapping: dict[str, Var]) -> Goal:
    if isinstance(goal, Call):
        return Call(_rename_atom(goal.atom, mapping), pos=goal.pos)
    if isinstance(goal, Action):
        return Action(goal.polarity, _rename_atom(goal.atom, mapping), pos=goal.pos)
    if isinstance(goal, Serial):
        return Serial(tuple(_rename_goal(g, mapping) for g in goal.items), pos=goal.pos)
    if isinstance(goal, QueryConj):
        return QueryConj(
            tuple(_rename_goal(g, mapping) for g in goal.items), pos=goal.pos
        )
    if isinstance(goal, Concurrent):
        return Concurrent(
            _rename_goal(goal.left, mapping),
            _rename_goal(goal.right, mapping),
            pos=goal.pos,
        )
    raise TypeError(f"unknown goal node {goal!r}")


def _rename_atom(atom: Atom, mapping: dict[str, Var]) -> Atom:
    if not atom.args:
        return atom
    return Atom(
        atom.pred,
        tuple(mapping.get(t.name, t) if isinstance(t, Var) else t for t in atom.args),
        pos=atom.pos,
    )


# ── Traces and answers ───────────────────────────────────────────────


@dataclass(frozen=True)
class TraceStep:
    action: Action  # ground
    version: int  # state version right after the action


@dataclass(frozen=True)
class Trace:
    steps: tuple[TraceStep, ...]
    initial_version: int

    def actions(self) -> list[Action]:
        return [s.action for s in self.steps]

    def texts(self) -> list[str]:
        return [s.action.text() for s in self.steps]


@dataclass(frozen=True)
class Answer:
    """One successful execution: bindings, the path taken, the end state."""

    substitution: dict[str, Const]
    trace: Trace
    final_state: frozenset[Atom]


class Outcome(Enum):
    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"  # the search gave up on a bound before deciding


@dataclass(frozen=True)
class PossibleResult:
    outcome: Outcome
    witness: Trace | None = None

    def __bool__(self) -> bool:
        return self.outcome is Outcome.TRUE


@dataclass(frozen=True)
class ExecuteResult:
    outcome: Outcome
    answer: Answer | None = None


# ── The search machine ───────────────────────────────────────────────
#
# A goal under evaluation is a process tree:
#   _NIL                     nothing left to do
#   _PGoal(goal, depth, k)   run goal, then continue with k
#   _PPar(left, right, k)    run left and right interleaved, then k
#
# Serial goals chain into _PGoal links and concurrent goals into _PPar
# nodes before choices are taken, so one configuration always exposes
# exactly its next atomic steps.


class _Nil:
    __slots__ = ()

    def __repr__(self) -> str:
        return "_NIL"


_NIL = _Nil()


@dataclass(frozen=True)
class _PGoal:
    goal: Goal
    depth: int
    next: "_Proc"


class _Budget:
    """Completed-interleaving counter shared by one concurrent node."""

    __slots__ = ("done",)

    def __init__(self) -> None:
        self.done = 0


@dataclass(frozen=True)
class _PPar:
    left: "_Proc"
    right: "_Proc"
    next: "_Proc"
    budget: _Budget = field(compare=False)


_Proc = Union[_Nil, _PGoal, _PPar]


@dataclass(frozen=True)
class _Choice:
    """One atomic step: successor process, extended bindings, optional action."""

    next: _Proc
    subst: Subst
    action: Action | None = None


class _Search:
    def __init__(self, program: Program, state: State, config: EvalConfig):
        self.program = program
        self.state = state
        self.config = config
        self.defined = program.defined_predicates()
        self.trace: list[TraceStep] = []
        self.exhausted = False
        self.in_query = False
        self._fresh = 0

    # ── structural rewriting ─────────────────────────────────────────

    def _normalize(self, proc: _Proc) -> _Proc:
        while True:
            if isinstance(proc, _PGoal):
                g = proc.goal
                if isinstance(g, Serial):
                    k = proc.next
                    for item in reversed(g.items):
                        k = _PGoal(item, proc.depth, k)
                    proc = k
                    continue
                if isinstance(g, Concurrent):
                    proc = _PPar(
                        _PGoal(g.left, proc.depth, _NIL),
                        _PGoal(g.right, proc.depth, _NIL),
                        proc.next,
                        _Budget(),
                    )
                    continue
                return proc
            if isinstance(proc, _PPar):
                left = self._normalize(proc.left)
                right = self._normalize(proc.right)
                if left is _NIL and right is _NIL:
                    proc.budget.done += 1
                    proc = proc.next
                    continue
                if left is not proc.left or right is not proc.right:
                    proc = _PPar(left, right, proc.next, proc.budget)
                return proc
            return proc  # _NIL

    # ── step enumeration ─────────────────────────────────────────────

    def _choices(self, proc: _Proc, subst: Subst) -> list[_Choice]:
        if isinstance(proc, _Nil):
            return []
        if isinstance(proc, _PPar):
            if proc.budget.done >= self.config.max_interleavings:
                self.exhausted = True
                return []
            out = [
                _Choice(_PPar(ch.next, proc.right, proc.next, proc.budget),
                        ch.subst, ch.action)
                for ch in self._choices(proc.left, subst)
            ]
            out.extend(
                _Choice(_PPar(proc.left, ch.next, proc.next, proc.budget),
                        ch.subst, ch.action)
                for ch in self._choices(proc.right, subst)
            )
            return out

        goal, depth, k = proc.goal, proc.depth, proc.next
        if isinstance(goal, Call):
            pattern = walk_atom(goal.atom, subst)
            if pattern.pred in self.defined:
                if depth >= self.config.max_depth:
                    self.exhausted = True
                    return []
                out = []
                for rule in self.program.rules_for(pattern.pred):
                    head, body = self._rename(rule)
                    extended = unify(pattern, head, subst)
                    if extended is not None:
                        out.append(_Choice(_PGoal(body, depth + 1, k), extended))
                return out
            out = []
            for fact in self.state.facts_for(pattern.pred):
                extended = unify(pattern, fact, subst)
                if extended is not None:
                    out.append(_Choice(k, extended))
            return out

        if isinstance(goal, Action):
            if self.in_query:
                raise QueryActionError(
                    f"action {goal.text()} reached inside an '&' conjunction"
                )
            grounded = walk_atom(goal.atom, subst)
            if not grounded.is_ground():
                raise NonGroundActionError(
                    f"action {goal.polarity}{grounded.text()} is not ground"
                )
            return [_Choice(k, subst, Action(goal.polarity, grounded))]

        if isinstance(goal, QueryConj):
            # all conjuncts hold at the current state: resolved as one step,
            # read-only (any action reached in a resolving rule is an error)
            chain: _Proc = _NIL
            for item in reversed(goal.items):
                chain = _PGoal(item, depth, chain)
            was_query = self.in_query
            self.in_query = True
            try:
                results = list(self._run(chain, subst))
            finally:
                self.in_query = was_query
            return [_Choice(k, extended) for extended in results]

        raise TypeError(f"unnormalized goal node {goal!r}")

    def _rename(self, rule: Rule) -> tuple[Atom, Goal]:
        self._fresh += 1
        names = set(rule.head.variables())
        names.update(v for a in _atoms_of(rule.body) for v in a.variables())
        mapping = {n: Var(f"{n}@{self._fresh}") for n in names}
        return _rename_atom(rule.head, mapping), _rename_goal(rule.body, mapping)

    # ── depth-first enumeration ──────────────────────────────────────

    def _run(self, proc: _Proc, subst: Subst) -> Iterator[Subst]:
        proc = self._normalize(proc)
        if isinstance(proc, _Nil):
            yield subst
            return
        for choice in self._choices(proc, subst):
            if choice.action is not None:
                record = self.state.apply(choice.action)
                self.trace.append(TraceStep(choice.action, self.state.version))
                try:
                    yield from self._run(choice.next, choice.subst)
                finally:
                    self.trace.pop()
                    self.state.revert(record)
            else:
                yield from self._run(choice.next, choice.subst)

    def answers(self, goal: Goal) -> Iterator[Answer]:
        query_vars = goal_variables(goal)
        initial_version = self.state.version
        produced = 0
        runner = self._run(_PGoal(goal, 0, _NIL), {})
        try:
            for subst in runner:
                bindings: dict[str, Const] = {}
                for name in query_vars:
                    value = walk(Var(name), subst)
                    if not isinstance(value, Const):
                        raise EvalError(f"answer leaves {name} unbound")
                    bindings[name] = value
                yield Answer(
                    bindings,
                    Trace(tuple(self.trace), initial_version),
                    self.state.fact_set(),
                )
                produced += 1
                if produced >= self.config.max_answers:
                    return
        finally:
            runner.close()


def _atoms_of(goal: Goal) -> Iterator[Atom]:
    if isinstance(goal, (Call, Action)):
        yield goal.atom
    elif isinstance(goal, (Serial, QueryConj)):
        for g in goal.items:
            yield from _atoms_of(g)
    elif isinstance(goal, Concurrent):
        yield from _atoms_of(goal.left)
        yield from _atoms_of(goal.right)


# ── Public operations ────────────────────────────────────────────────


def solve(
    program: Program,
    state: State,
    goal: Goal,
    config: EvalConfig = DEFAULT_CONFIG,
) -> Iterator[Answer]:
    """Enumerate executions lazily.

    The state is threaded through the enumeration: while the generator is
    live it may hold intermediate values, and once it is exhausted or
    closed the state is back to its initial value.  Use execute() to keep
    an execution's effects.
    """
    yield from _Search(program, state, config).answers(goal)


def solve_all(
    program: Program,
    state: State,
    goal: Goal,
    config: EvalConfig = DEFAULT_CONFIG,
) -> tuple[list[Answer], bool]:
    """All answers plus whether any search bound was hit."""
    search = _Search(program, state, config)
    answers = list(search.answers(goal))
    return answers, search.exhausted


def possible(
    program: Program,
    state: State,
    goal: Goal,
    config: EvalConfig = DEFAULT_CONFIG,
) -> PossibleResult:
    """Can the goal execute from here?  Never changes the state.

    UNKNOWN means the search hit a depth or interleaving bound before
    finding an answer; it is deliberately distinct from FALSE.
    """
    search = _Search(program, state, config)
    gen = search.answers(goal)
    try:
        first = next(gen, None)
    finally:
        gen.close()
    if first is not None:
        return PossibleResult(Outcome.TRUE, first.trace)
    if search.exhausted:
        return PossibleResult(Outcome.UNKNOWN)
    return PossibleResult(Outcome.FALSE)


def execute(
    program: Program,
    state: State,
    goal: Goal,
    config: EvalConfig = DEFAULT_CONFIG,
) -> ExecuteResult:
    """Commit the first execution found; on failure the state is untouched."""
    search = _Search(program, state, config)
    gen = search.answers(goal)
    try:
        first = next(gen, None)
    finally:
        gen.close()
    if first is None:
        outcome = Outcome.UNKNOWN if search.exhausted else Outcome.FALSE
        return ExecuteResult(outcome)
    for step in first.trace.steps:
        state.apply(step.action)
    return ExecuteResult(Outcome.TRUE, first)
