"""Rule language front end: AST, lexer, parser, validator, pretty-printer.

The language is a serial-Horn rule dialect for state-changing workflows:

    task2(C) :- artifact1(C) * +artifact3(C).
    task1(C) :- (artifact1(C) & artifact3(C)) * +artifact2(C).
    ?- possible task4(car).

Connectives, tightest first: prefix ``+``/``-`` (insert/delete a fact),
``&`` (conjunctive query, all conjuncts checked at one state), ``*``
(sequencing: run left, then right), ``|`` (interleaved execution).  All
binary operators are left-associative.  ``%`` starts a line comment and
``.`` terminates every clause and query.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Union


# ── Source positions and errors ──────────────────────────────────────


@dataclass(frozen=True)
class Pos:
    """1-based line/column of a token in the source text."""

    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


class ParseError(Exception):
    """Lexical, syntactic, or load-time validation failure."""

    def __init__(self, message: str, pos: Pos, expected: str | None = None):
        self.message = message
        self.pos = pos
        self.expected = expected
        suffix = f" (expected {expected})" if expected else ""
        super().__init__(f"{pos}: {message}{suffix}")


# ── Terms and atoms ──────────────────────────────────────────────────


@dataclass(frozen=True)
class Const:
    """A constant: starts with a lowercase letter or digit."""

    name: str
    pos: Pos | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    """A variable: starts with an uppercase letter or underscore."""

    name: str
    pos: Pos | None = field(default=None, compare=False, repr=False)


Term = Union[Const, Var]


@dataclass(frozen=True)
class Atom:
    """A predicate applied to constants/variables; terms are function-free."""

    pred: str
    args: tuple[Term, ...] = ()
    pos: Pos | None = field(default=None, compare=False, repr=False)

    @property
    def arity(self) -> int:
        return len(self.args)

    def is_ground(self) -> bool:
        return all(isinstance(t, Const) for t in self.args)

    def variables(self) -> set[str]:
        return {t.name for t in self.args if isinstance(t, Var)}

    def text(self) -> str:
        if not self.args:
            return self.pred
        return f"{self.pred}({', '.join(t.name for t in self.args)})"


INSERT = "+"
DELETE = "-"


@dataclass(frozen=True)
class Action:
    """Elementary update: insert (+) or delete (-) one fact."""

    polarity: str  # INSERT or DELETE
    atom: Atom
    pos: Pos | None = field(default=None, compare=False, repr=False)

    def text(self) -> str:
        return f"{self.polarity}{self.atom.text()}"


# ── Goals ────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class Call:
    """Invoke a predicate: a state query if base, a rule body if defined."""

    atom: Atom
    pos: Pos | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Serial:
    """Run the items left to right, each starting where the previous ended."""

    items: tuple[Goal, ...]
    pos: Pos | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if len(self.items) < 2:
            raise ValueError("Serial needs at least two items; use serial()")


@dataclass(frozen=True)
class QueryConj:
    """Check all items at the same state; no item may change it."""

    items: tuple[Goal, ...]
    pos: Pos | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if len(self.items) < 2:
            raise ValueError("QueryConj needs at least two items; use query_conj()")


@dataclass(frozen=True)
class Concurrent:
    """Execute both sides in an interleaved fashion."""

    left: Goal
    right: Goal
    pos: Pos | None = field(default=None, compare=False, repr=False)


Goal = Union[Call, Action, Serial, QueryConj, Concurrent]


def serial(items: list[Goal] | tuple[Goal, ...], pos: Pos | None = None) -> Goal:
    """Sequence goals, flattening nested sequences and collapsing singletons."""
    flat: list[Goal] = []
    for g in items:
        if isinstance(g, Serial):
            flat.extend(g.items)
        else:
            flat.append(g)
    if not flat:
        raise ValueError("empty serial sequence")
    if len(flat) == 1:
        return flat[0]
    return Serial(tuple(flat), pos=pos)


def query_conj(items: list[Goal] | tuple[Goal, ...], pos: Pos | None = None) -> Goal:
    """Conjoin query goals, flattening nested conjunctions and singletons."""
    flat: list[Goal] = []
    for g in items:
        if isinstance(g, QueryConj):
            flat.extend(g.items)
        else:
            flat.append(g)
    if not flat:
        raise ValueError("empty query conjunction")
    if len(flat) == 1:
        return flat[0]
    return QueryConj(tuple(flat), pos=pos)


def goal_actions(goal: Goal) -> Iterator[Action]:
    """Yield every syntactic action beneath a goal."""
    if isinstance(goal, Action):
        yield goal
    elif isinstance(goal, (Serial, QueryConj)):
        for g in goal.items:
            yield from goal_actions(g)
    elif isinstance(goal, Concurrent):
        yield from goal_actions(goal.left)
        yield from goal_actions(goal.right)


def goal_atoms(goal: Goal) -> Iterator[Atom]:
    """Yield every atom beneath a goal (calls and action targets)."""
    if isinstance(goal, Call):
        yield goal.atom
    elif isinstance(goal, Action):
        yield goal.atom
    elif isinstance(goal, (Serial, QueryConj)):
        for g in goal.items:
            yield from goal_atoms(g)
    elif isinstance(goal, Concurrent):
        yield from goal_atoms(goal.left)
        yield from goal_atoms(goal.right)


# ── Rules, programs, queries ─────────────────────────────────────────


@dataclass(frozen=True)
class Rule:
    head: Atom
    body: Goal
    pos: Pos | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Program:
    """An ordered rule base plus ground facts, validated at load time."""

    rules: tuple[Rule, ...] = ()
    facts: tuple[Atom, ...] = ()
    source: str = "<string>"

    def defined_predicates(self) -> set[str]:
        return {r.head.pred for r in self.rules}

    def known_predicates(self) -> set[str]:
        preds = {f.pred for f in self.facts}
        for r in self.rules:
            preds.add(r.head.pred)
            preds.update(a.pred for a in goal_atoms(r.body))
        return preds

    def arities(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for f in self.facts:
            out.setdefault(f.pred, f.arity)
        for r in self.rules:
            out.setdefault(r.head.pred, r.head.arity)
            for a in goal_atoms(r.body):
                out.setdefault(a.pred, a.arity)
        return out

    def rules_for(self, pred: str) -> list[Rule]:
        return [r for r in self.rules if r.head.pred == pred]


MODE_POSSIBLE = "possible"
MODE_EXECUTE = "execute"


@dataclass(frozen=True)
class Query:
    mode: str  # MODE_POSSIBLE or MODE_EXECUTE
    goal: Goal
    pos: Pos | None = field(default=None, compare=False, repr=False)


# ── Lexer ────────────────────────────────────────────────────────────

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>%[^\n]*)
  | (?P<turnstile>:-)
  | (?P<query>\?-)
  | (?P<const>[a-z0-9][A-Za-z0-9_]*)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<punct>[().,*&|+\-])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "const" | "var" | literal punctuation | ":-" | "?-" | "eof"
    value: str
    pos: Pos


def tokenize(text: str) -> list[Token]:
    """Split source text into tokens, tracking line/column."""
    tokens: list[Token] = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None:
            raise ParseError(f"unexpected character {text[i]!r}", Pos(line, col))
        lexeme = m.group(0)
        pos = Pos(line, col)
        if m.lastgroup == "const":
            tokens.append(Token("const", lexeme, pos))
        elif m.lastgroup == "var":
            tokens.append(Token("var", lexeme, pos))
        elif m.lastgroup == "turnstile":
            tokens.append(Token(":-", lexeme, pos))
        elif m.lastgroup == "query":
            tokens.append(Token("?-", lexeme, pos))
        elif m.lastgroup == "punct":
            tokens.append(Token(lexeme, lexeme, pos))
        # whitespace and comments are skipped
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        i = m.end()
    tokens.append(Token("eof", "", Pos(line, col)))
    return tokens


# ── Parser ───────────────────────────────────────────────────────────


class _Parser:
    def __init__(self, text: str, source: str):
        self.tokens = tokenize(text)
        self.i = 0
        self.source = source

    def peek(self) -> Token:
        return self.tokens[self.i]

    def next(self) -> Token:
        tok = self.tokens[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def expect(self, kind: str, what: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            found = repr(tok.value) if tok.kind != "eof" else "end of input"
            raise ParseError(f"found {found}", tok.pos, expected=what)
        return self.next()

    # goal := concurrent
    # concurrent := serial ("|" serial)*          (left-associative)
    # serial := conj ("*" conj)*                  (flattened)
    # conj := primary ("&" primary)*              (flattened)
    # primary := "+" atom | "-" atom | atom | "(" goal ")"

    def goal(self) -> Goal:
        left = self.serial_level()
        while self.peek().kind == "|":
            op = self.next()
            right = self.serial_level()
            left = Concurrent(left, right, pos=op.pos)
        return left

    def serial_level(self) -> Goal:
        items = [self.conj_level()]
        pos = None
        while self.peek().kind == "*":
            tok = self.next()
            pos = pos or tok.pos
            items.append(self.conj_level())
        return serial(items, pos=pos)

    def conj_level(self) -> Goal:
        items = [self.primary()]
        pos = None
        while self.peek().kind == "&":
            tok = self.next()
            pos = pos or tok.pos
            items.append(self.primary())
        return query_conj(items, pos=pos)

    def primary(self) -> Goal:
        tok = self.peek()
        if tok.kind in (INSERT, DELETE):
            self.next()
            atom = self.atom()
            return Action(tok.kind, atom, pos=tok.pos)
        if tok.kind == "(":
            self.next()
            g = self.goal()
            self.expect(")", "')'")
            return g
        if tok.kind == "const":
            return Call(self.atom(), pos=tok.pos)
        found = repr(tok.value) if tok.kind != "eof" else "end of input"
        raise ParseError(f"found {found}", tok.pos, expected="a goal")

    def atom(self) -> Atom:
        name = self.expect("const", "a predicate name")
        args: list[Term] = []
        if self.peek().kind == "(":
            self.next()
            args.append(self.term())
            while self.peek().kind == ",":
                self.next()
                args.append(self.term())
            self.expect(")", "')' or ','")
        return Atom(name.value, tuple(args), pos=name.pos)

    def term(self) -> Term:
        tok = self.peek()
        if tok.kind == "const":
            self.next()
            return Const(tok.value, pos=tok.pos)
        if tok.kind == "var":
            self.next()
            return Var(tok.value, pos=tok.pos)
        found = repr(tok.value) if tok.kind != "eof" else "end of input"
        raise ParseError(f"found {found}", tok.pos, expected="a constant or variable")

    def clause(self) -> Rule | Atom:
        head = self.atom()
        if self.peek().kind == ".":
            self.next()
            if not head.is_ground():
                raise ParseError(
                    f"fact {head.text()} is not ground", head.pos or Pos(1, 1)
                )
            return head
        self.expect(":-", "':-' or '.'")
        body = self.goal()
        self.expect(".", "'.'")
        return Rule(head, body, pos=head.pos)

    def program(self) -> Program:
        rules: list[Rule] = []
        facts: list[Atom] = []
        while self.peek().kind != "eof":
            item = self.clause()
            if isinstance(item, Rule):
                rules.append(item)
            else:
                facts.append(item)
        return Program(tuple(rules), tuple(facts), source=self.source)

    def query(self) -> Query:
        start = self.expect("?-", "'?-'")
        mode = MODE_EXECUTE
        tok = self.peek()
        if tok.kind == "const" and tok.value == MODE_POSSIBLE:
            self.next()
            mode = MODE_POSSIBLE
        g = self.goal()
        self.expect(".", "'.'")
        self.expect("eof", "end of input")
        return Query(mode, g, pos=start.pos)


# ── Load-time validation ─────────────────────────────────────────────


def _check_arities(program: Program) -> None:
    seen: dict[str, tuple[int, Pos | None]] = {}

    def check(atom: Atom) -> None:
        prior = seen.get(atom.pred)
        if prior is None:
            seen[atom.pred] = (atom.arity, atom.pos)
        elif prior[0] != atom.arity:
            raise ParseError(
                f"predicate {atom.pred} used with arity {atom.arity}, "
                f"previously arity {prior[0]}",
                atom.pos or Pos(1, 1),
            )

    for rule in program.rules:
        check(rule.head)
        for a in goal_atoms(rule.body):
            check(a)
    for fact in program.facts:
        check(fact)


def _check_base_defined_split(program: Program) -> None:
    defined = program.defined_predicates()
    for fact in program.facts:
        if fact.pred in defined:
            raise ParseError(
                f"predicate {fact.pred} is both a rule head and a stored fact",
                fact.pos or Pos(1, 1),
            )


def _check_query_conj_pure(goal: Goal) -> None:
    if isinstance(goal, QueryConj):
        for g in goal.items:
            for act in goal_actions(g):
                raise ParseError(
                    f"action {act.text()} not allowed inside '&' conjunction",
                    act.pos or Pos(1, 1),
                )
            _check_query_conj_pure(g)
    elif isinstance(goal, Serial):
        for g in goal.items:
            _check_query_conj_pure(g)
    elif isinstance(goal, Concurrent):
        _check_query_conj_pure(goal.left)
        _check_query_conj_pure(goal.right)


def _bound_after(goal: Goal, bound: set[str]) -> set[str]:
    """Safety walk: check action groundness, return variables bound after.

    Variables become bound by appearing in a call (or query conjunction)
    position; an action may only use variables bound strictly to its left.
    Branches of an interleaving are checked against the bindings available
    before it, since their relative order is schedule-dependent.
    """
    if isinstance(goal, Call):
        return bound | goal.atom.variables()
    if isinstance(goal, Action):
        free = goal.atom.variables() - bound
        if free:
            name = sorted(free)[0]
            raise ParseError(
                f"variable {name} in action {goal.text()} is not bound by "
                f"an earlier query",
                goal.pos or Pos(1, 1),
            )
        return bound
    if isinstance(goal, (Serial, QueryConj)):
        acc = set(bound)
        for g in goal.items:
            acc = _bound_after(g, acc)
        return acc
    if isinstance(goal, Concurrent):
        left = _bound_after(goal.left, set(bound))
        right = _bound_after(goal.right, set(bound))
        return left | right
    raise TypeError(f"unknown goal node {goal!r}")


def _check_safety(rule: Rule) -> None:
    bound = _bound_after(rule.body, set())
    free = rule.head.variables() - bound
    if free:
        name = sorted(free)[0]
        raise ParseError(
            f"variable {name} in head {rule.head.text()} never occurs in a "
            f"query position of the body",
            rule.head.pos or Pos(1, 1),
        )


def validate_program(program: Program) -> Program:
    """Run all load-time checks; returns the program unchanged."""
    _check_arities(program)
    _check_base_defined_split(program)
    for rule in program.rules:
        _check_query_conj_pure(rule.body)
        _check_safety(rule)
    return program


# ── Public parse entry points ────────────────────────────────────────


def parse_program(text: str, source: str = "<string>") -> Program:
    """Parse and validate a program; raises ParseError with position."""
    return validate_program(_Parser(text, source).program())


def parse_query(text: str, source: str = "<query>") -> Query:
    """Parse a query of the form ``?- [possible] goal.``"""
    q = _Parser(text, source).query()
    _check_query_conj_pure(q.goal)
    _bound_after(q.goal, set())
    return q


def parse_goal(text: str, source: str = "<goal>") -> Goal:
    """Parse a bare goal (no ``?-`` wrapper, no terminating dot)."""
    p = _Parser(text, source)
    g = p.goal()
    p.expect("eof", "end of input")
    _check_query_conj_pure(g)
    _bound_after(g, set())
    return g


def parse_atom(text: str, source: str = "<atom>") -> Atom:
    """Parse a single atom, e.g. ``artifact1(car)``."""
    p = _Parser(text, source)
    a = p.atom()
    p.expect("eof", "end of input")
    return a


def parse_action(text: str, source: str = "<action>") -> Action:
    """Parse a signed atom, e.g. ``+artifact5(C)``."""
    p = _Parser(text, source)
    g = p.primary()
    p.expect("eof", "end of input")
    if not isinstance(g, Action):
        raise ParseError("expected a '+' or '-' action", Pos(1, 1))
    return g


def check_query_against(program: Program, query: Query | Goal) -> None:
    """Reject goals naming unknown predicates or mismatched arities."""
    goal = query.goal if isinstance(query, Query) else query
    known = program.known_predicates()
    arities = program.arities()
    for atom in goal_atoms(goal):
        if atom.pred not in known:
            raise ParseError(
                f"unknown predicate {atom.pred}", atom.pos or Pos(1, 1)
            )
        if arities[atom.pred] != atom.arity:
            raise ParseError(
                f"predicate {atom.pred} has arity {arities[atom.pred]}, "
                f"called with {atom.arity}",
                atom.pos or Pos(1, 1),
            )


# ── Pretty-printer ───────────────────────────────────────────────────


def goal_text(goal: Goal) -> str:
    """Render a goal in concrete syntax; output reparses to the same AST."""
    return _render(goal, top=True)


def _render(goal: Goal, top: bool = False) -> str:
    if isinstance(goal, Call):
        return goal.atom.text()
    if isinstance(goal, Action):
        return goal.text()
    if isinstance(goal, Serial):
        return " * ".join(_wrap(g) for g in goal.items)
    if isinstance(goal, QueryConj):
        return " & ".join(_wrap(g) for g in goal.items)
    if isinstance(goal, Concurrent):
        # left-nested interleavings reparse identically without parentheses
        left = (
            _render(goal.left)
            if isinstance(goal.left, (Call, Action, Concurrent))
            else f"({_render(goal.left)})"
        )
        right = _wrap(goal.right)
        return f"{left} | {right}"
    raise TypeError(f"unknown goal node {goal!r}")


def _wrap(goal: Goal) -> str:
    if isinstance(goal, (Call, Action)):
        return _render(goal)
    return f"({_render(goal)})"


def rule_text(rule: Rule) -> str:
    return f"{rule.head.text()} :- {goal_text(rule.body)}."


def program_text(program: Program) -> str:
    """One clause per line, facts after rules, trailing newline."""
    lines = [rule_text(r) for r in program.rules]
    lines.extend(f"{f.text()}." for f in program.facts)
    return "\n".join(lines) + ("\n" if lines else "")


def query_text(query: Query) -> str:
    keyword = "possible " if query.mode == MODE_POSSIBLE else ""
    return f"?- {keyword}{goal_text(query.goal)}."


def pretty_print(node: Program | Rule | Query | Goal | Atom | Action) -> str:
    """Canonical text for any AST node."""
    if isinstance(node, Program):
        return program_text(node)
    if isinstance(node, Rule):
        return rule_text(node)
    if isinstance(node, Query):
        return query_text(node)
    if isinstance(node, Atom):
        return node.text()
    return goal_text(node)
