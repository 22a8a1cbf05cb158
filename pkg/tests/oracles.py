"""Independent reference implementations used to cross-check the engine.

Everything here is deliberately naive: eager enumeration, explicit state
copies as frozensets, its own unification.  None of it shares evaluation
code with the package.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from tlflow.syntax import (
    Action,
    Atom,
    Call,
    Concurrent,
    Const,
    DELETE,
    Goal,
    INSERT,
    Program,
    QueryConj,
    Serial,
    Var,
    parse_program,
)

Facts = frozenset[Atom]


# ── tiny standalone unification ──────────────────────────────────────


def o_walk(term, subst):
    while isinstance(term, Var) and term.name in subst:
        term = subst[term.name]
    return term


def o_unify(a: Atom, b: Atom, subst):
    if a.pred != b.pred or len(a.args) != len(b.args):
        return None
    for ta, tb in zip(a.args, b.args):
        ta, tb = o_walk(ta, subst), o_walk(tb, subst)
        if ta == tb:
            continue
        if isinstance(ta, Var):
            subst = {**subst, ta.name: tb}
        elif isinstance(tb, Var):
            subst = {**subst, tb.name: ta}
        else:
            return None
    return subst


def o_subst_atom(atom: Atom, subst) -> Atom:
    return Atom(atom.pred, tuple(o_walk(t, subst) for t in atom.args))


@dataclass
class OracleRun:
    """Holds the exhaustion flag and the rename counter for one evaluation."""

    max_depth: int
    exhausted: bool = False
    fresh: int = 0


def _o_rename(goal: Goal, mapping) -> Goal:
    if isinstance(goal, Call):
        return Call(_o_rename_atom(goal.atom, mapping))
    if isinstance(goal, Action):
        return Action(goal.polarity, _o_rename_atom(goal.atom, mapping))
    if isinstance(goal, Serial):
        return Serial(tuple(_o_rename(g, mapping) for g in goal.items))
    if isinstance(goal, QueryConj):
        return QueryConj(tuple(_o_rename(g, mapping) for g in goal.items))
    if isinstance(goal, Concurrent):
        return Concurrent(_o_rename(goal.left, mapping), _o_rename(goal.right, mapping))
    raise TypeError(goal)


def _o_rename_atom(atom: Atom, mapping) -> Atom:
    return Atom(
        atom.pred,
        tuple(mapping.get(t.name, t) if isinstance(t, Var) else t for t in atom.args),
    )


def oracle_paths(
    program: Program,
    facts: Facts,
    goal: Goal,
    subst,
    depth: int,
    run: OracleRun,
):
    """Yield every (bindings, final facts) pair for a goal, by naive recursion."""
    defined = {r.head.pred for r in program.rules}

    if isinstance(goal, Call):
        pattern = o_subst_atom(goal.atom, subst)
        if pattern.pred in defined:
            if depth >= run.max_depth:
                run.exhausted = True
                return
            for rule in program.rules:
                if rule.head.pred != pattern.pred:
                    continue
                run.fresh += 1
                names = set(rule.head.variables())
                for a in _goal_atoms(rule.body):
                    names |= a.variables()
                mapping = {n: Var(f"{n}~{run.fresh}") for n in names}
                head = _o_rename_atom(rule.head, mapping)
                body = _o_rename(rule.body, mapping)
                extended = o_unify(pattern, head, subst)
                if extended is None:
                    continue
                yield from oracle_paths(program, facts, body, extended, depth + 1, run)
            return
        for fact in facts:
            extended = o_unify(pattern, fact, subst)
            if extended is not None:
                yield (extended, facts)
        return

    if isinstance(goal, Action):
        atom = o_subst_atom(goal.atom, subst)
        assert atom.is_ground(), "oracle inputs keep actions ground"
        if goal.polarity == INSERT:
            yield (subst, facts | {atom})
        else:
            yield (subst, facts - {atom})
        return

    if isinstance(goal, Serial):

        def chain(items, s, f):
            if not items:
                yield (s, f)
                return
            for s2, f2 in oracle_paths(program, f, items[0], s, depth, run):
                yield from chain(items[1:], s2, f2)

        yield from chain(list(goal.items), subst, facts)
        return

    if isinstance(goal, QueryConj):

        def conj(items, s):
            if not items:
                yield (s, facts)
                return
            for s2, f2 in oracle_paths(program, facts, items[0], s, depth, run):
                assert f2 == facts, "query conjunction must not change state"
                yield from conj(items[1:], s2)

        yield from conj(list(goal.items), subst)
        return

    raise NotImplementedError("oracle covers the serial fragment only")


def _goal_atoms(goal: Goal):
    if isinstance(goal, (Call, Action)):
        yield goal.atom
    elif isinstance(goal, (Serial, QueryConj)):
        for g in goal.items:
            yield from _goal_atoms(g)
    elif isinstance(goal, Concurrent):
        yield from _goal_atoms(goal.left)
        yield from _goal_atoms(goal.right)


def oracle_possible(
    program: Program, facts: Facts, goal: Goal, max_depth: int
) -> str:
    """'true', 'false' or 'unknown', mirroring the engine's outcome split."""
    run = OracleRun(max_depth=max_depth)
    for _ in oracle_paths(program, facts, goal, {}, 0, run):
        return "true"
    return "unknown" if run.exhausted else "false"


# ── interleaving order oracle ────────────────────────────────────────


def merge_orders(left: list, right: list) -> list[list]:
    """All merges of two sequences, left-branch-first at every step."""
    if not left:
        return [list(right)]
    if not right:
        return [list(left)]
    first = [[left[0], *m] for m in merge_orders(left[1:], right)]
    second = [[right[0], *m] for m in merge_orders(left, right[1:])]
    return first + second


# ── plan oracle: BFS over task firings ───────────────────────────────


def bfs_plan(model, facts: Facts, goal: Atom, scope: tuple[str, ...]):
    """Shortest firing sequence reaching the goal, ties by declaration order.

    Firing commits the first satisfied disjunct's productions, like the
    engine's first-answer rule.  Returns a list of ground task atoms, or
    None when the goal is unreachable.
    """
    import itertools

    if goal in facts:
        return []

    def ground_instances(task):
        if task.arity == 0:
            yield Atom(task.name), {}
            return
        for combo in itertools.product(scope, repeat=task.arity):
            consts = tuple(Const(c) for c in combo)
            yield Atom(task.name, consts), dict(zip(task.params, consts))

    def satisfied(disjunct, binding, current):
        solutions = [binding]
        for atom in disjunct:
            nxt = []
            for b in solutions:
                pattern = o_subst_atom(atom, b)
                for fact in current:
                    extended = o_unify(pattern, fact, b)
                    if extended is not None:
                        nxt.append(extended)
            solutions = nxt
            if not solutions:
                return None
        return solutions[0]

    def fire(task, binding, current):
        for disjunct in task.requirements:
            solution = satisfied(disjunct, binding, current)
            if solution is None:
                continue
            out = set(current)
            for prod in task.productions:
                atom = o_subst_atom(prod.atom, solution)
                if prod.polarity == INSERT:
                    out.add(atom)
                else:
                    out.discard(atom)
            return frozenset(out)
        return None

    visited = {facts}
    frontier = [(facts, [])]
    while frontier:
        nxt = []
        for current, path in frontier:
            for task in model.tasks:
                for inst, binding in ground_instances(task):
                    fired = fire(task, binding, current)
                    if fired is None or fired in visited:
                        continue
                    visited.add(fired)
                    if goal in fired:
                        return path + [inst]
                    nxt.append((fired, path + [inst]))
        frontier = nxt
    return None


# ── random program generation ────────────────────────────────────────


@dataclass
class GeneratedCase:
    program: Program
    facts: Facts
    goal: Goal
    text: str = field(default="", repr=False)


class _Regenerate(Exception):
    pass


def random_case(rng: random.Random) -> GeneratedCase:
    """A random function-free program, initial facts, and a goal.

    Stays within small bounds: at most 3 constants, 4 predicates of arity
    at most 2, 6 rules with bodies of at most 4 items.  Safety holds by
    construction (action variables are drawn from earlier calls); the
    rare draw that cannot anchor a head variable is redrawn.
    """
    from tlflow.syntax import ParseError

    for _ in range(100):
        try:
            return _random_case(rng)
        except (_Regenerate, ParseError):
            continue
    raise RuntimeError("random case generation kept failing")


def _random_case(rng: random.Random) -> GeneratedCase:
    consts = ["a", "b", "c"][: rng.randint(1, 3)]
    n_preds = rng.randint(2, 4)
    preds = [f"p{i}" for i in range(n_preds)]
    arities = {p: rng.randint(0, 2) for p in preds}
    n_defined = rng.randint(1, max(1, n_preds - 1))
    defined = preds[:n_defined]
    base = preds[n_defined:]

    def base_atom(bound_vars, allow_new_var=True):
        pred = rng.choice(base) if base else rng.choice(preds)
        args = []
        for i in range(arities[pred]):
            roll = rng.random()
            if roll < 0.45 and bound_vars:
                args.append(Var(rng.choice(sorted(bound_vars))))
            elif roll < 0.75 or not allow_new_var:
                args.append(Const(rng.choice(consts)))
            else:
                args.append(Var(f"V{rng.randint(0, 2)}"))
        return Atom(pred, tuple(args))

    def ground_args(pred):
        return tuple(Const(rng.choice(consts)) for _ in range(arities[pred]))

    def make_body(head_vars):
        items: list[Goal] = []
        bound: set[str] = set()
        length = rng.choice((1, 1, 2, 2, 3, 4))
        for _ in range(length):
            roll = rng.random()
            if roll < 0.5:
                # a call: base or defined
                pred = rng.choice(preds)
                args = []
                for _ in range(arities[pred]):
                    r2 = rng.random()
                    if r2 < 0.4 and head_vars:
                        args.append(Var(rng.choice(sorted(head_vars))))
                    elif r2 < 0.7:
                        args.append(Const(rng.choice(consts)))
                    else:
                        args.append(Var(f"V{rng.randint(0, 2)}"))
                atom = Atom(pred, tuple(args))
                bound |= atom.variables()
                items.append(Call(atom))
            elif roll < 0.65 and base:
                # a query conjunction of base atoms
                conj = [Call(base_atom(bound)) for _ in range(rng.randint(2, 3))]
                for c in conj:
                    bound |= c.atom.variables()
                items.append(QueryConj(tuple(conj)))
            else:
                # an action over a base predicate, variables bound earlier
                pred = rng.choice(base) if base else rng.choice(preds)
                args = []
                groundable = sorted(bound)
                for _ in range(arities[pred]):
                    if groundable and rng.random() < 0.4:
                        args.append(Var(rng.choice(groundable)))
                    else:
                        args.append(Const(rng.choice(consts)))
                polarity = INSERT if rng.random() < 0.7 else DELETE
                items.append(Action(polarity, Atom(pred, tuple(args))))
        # ensure head variables occur in some call
        missing = set(head_vars) - {
            v
            for item in items
            if isinstance(item, (Call, QueryConj))
            for a in _goal_atoms(item)
            for v in a.variables()
        }
        if missing:
            anchors = [p for p in base if arities[p] >= 1]
            if not anchors:
                raise _Regenerate
            for var in sorted(missing):
                pred = rng.choice(anchors)
                args = [Var(var)] + [
                    Const(rng.choice(consts)) for _ in range(arities[pred] - 1)
                ]
                items.insert(0, Call(Atom(pred, tuple(args))))
        return items

    rules_text: list[str] = []
    from tlflow.syntax import Rule, rule_text, serial

    rules = []
    for _ in range(rng.randint(1, 6)):
        head_pred = rng.choice(defined)
        n_vars = arities[head_pred]
        head_vars = [f"X{i}" for i in range(n_vars)]
        head = Atom(head_pred, tuple(Var(v) for v in head_vars))
        items = make_body(head_vars)
        if not items:
            items = [Call(base_atom(set()))]
        rules.append(Rule(head, serial(items)))

    rules_text = [rule_text(r) for r in rules]
    program = parse_program("\n".join(rules_text), source="<random>")

    fact_pool = [
        Atom(p, ground_args(p)) for p in base for _ in range(rng.randint(0, 3))
    ]
    facts = frozenset(rng.sample(fact_pool, k=rng.randint(0, len(fact_pool)))
                      if fact_pool else [])

    goal_pred = rng.choice(defined)
    goal_args = []
    for _ in range(arities[goal_pred]):
        if rng.random() < 0.7:
            goal_args.append(Const(rng.choice(consts)))
        else:
            goal_args.append(Var("Q0"))
    goal = Call(Atom(goal_pred, tuple(goal_args)))
    return GeneratedCase(program, facts, goal, "\n".join(rules_text))
