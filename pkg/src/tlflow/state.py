"""Fact database: a set of ground atoms with undoable updates.

Updates are O(1) and produce an ActionRecord; reverting records in LIFO
order restores the prior value exactly, including enumeration order.
Enumeration follows insertion order of the current set (a fact deleted
and re-inserted moves to the end).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .syntax import (
    Action,
    Atom,
    Const,
    DELETE,
    INSERT,
    ParseError,
    Pos,
    Var,
    parse_program,
)

Substitution = dict[str, Const]


class NonGroundError(ValueError):
    """An action or fact contained an unbound variable."""


@dataclass(frozen=True)
class ActionRecord:
    """Undo information for one applied action."""

    action: Action
    effective: bool
    prior_seq: int | None  # sequence number of a deleted fact, for re-insertion
    prior_version: int


class State:
    """Mutable set of ground atoms with a version that counts real changes.

    A State is confined to one evaluation at a time; share by copying.
    """

    def __init__(self, facts: list[Atom] | tuple[Atom, ...] = ()):
        self._facts: dict[Atom, int] = {}
        self._by_pred: dict[str, dict[Atom, int]] = {}
        self._next_seq = 0
        self.version = 0
        for atom in facts:
            self.apply(Action(INSERT, atom))
        self.version = 0

    # ── updates ──────────────────────────────────────────────────────

    def apply(self, action: Action) -> ActionRecord:
        """Insert or delete one ground fact; no-ops do not bump the version."""
        atom = action.atom
        if not atom.is_ground():
            raise NonGroundError(f"action {action.text()} is not ground")
        prior_version = self.version
        if action.polarity == INSERT:
            if atom in self._facts:
                return ActionRecord(action, False, None, prior_version)
            seq = self._next_seq
            self._next_seq += 1
            self._facts[atom] = seq
            self._by_pred.setdefault(atom.pred, {})[atom] = seq
            self.version += 1
            return ActionRecord(action, True, None, prior_version)
        if action.polarity == DELETE:
            seq = self._facts.pop(atom, None)
            if seq is None:
                return ActionRecord(action, False, None, prior_version)
            del self._by_pred[atom.pred][atom]
            self.version += 1
            return ActionRecord(action, True, seq, prior_version)
        raise ValueError(f"unknown polarity {action.polarity!r}")

    def revert(self, record: ActionRecord) -> None:
        """Undo one record; records must be reverted in LIFO order."""
        if not record.effective:
            return
        atom = record.action.atom
        if record.action.polarity == INSERT:
            del self._facts[atom]
            del self._by_pred[atom.pred][atom]
        else:
            assert record.prior_seq is not None
            self._facts[atom] = record.prior_seq
            self._by_pred.setdefault(atom.pred, {})[atom] = record.prior_seq
        self.version = record.prior_version

    # ── queries ──────────────────────────────────────────────────────

    def __contains__(self, atom: Atom) -> bool:
        return atom in self._facts

    def __len__(self) -> int:
        return len(self._facts)

    def facts(self) -> list[Atom]:
        """All facts in insertion order."""
        return sorted(self._facts, key=self._facts.__getitem__)

    def fact_set(self) -> frozenset[Atom]:
        return frozenset(self._facts)

    def facts_for(self, pred: str) -> list[Atom]:
        """Facts of one predicate in insertion order."""
        per = self._by_pred.get(pred)
        if not per:
            return []
        return sorted(per, key=per.__getitem__)

    def match(self, pattern: Atom) -> list[Substitution]:
        """All substitutions sending the pattern to a stored fact.

        Results follow fact insertion order; repeated variables in the
        pattern must match equal constants.
        """
        out: list[Substitution] = []
        for fact in self.facts_for(pattern.pred):
            if fact.arity != pattern.arity:
                continue
            binding: Substitution = {}
            ok = True
            for pat, got in zip(pattern.args, fact.args):
                assert isinstance(got, Const)
                if isinstance(pat, Const):
                    if pat != got:
                        ok = False
                        break
                else:
                    assert isinstance(pat, Var)
                    prior = binding.get(pat.name)
                    if prior is None:
                        binding[pat.name] = got
                    elif prior != got:
                        ok = False
                        break
            if ok:
                out.append(binding)
        return out

    # ── snapshots and serialization ──────────────────────────────────

    def copy(self) -> State:
        return State(tuple(self.facts()))

    def digest(self) -> str:
        """Order-independent sha256 over the fact set."""
        lines = sorted(f"{a.text()}." for a in self._facts)
        return hashlib.sha256("\n".join(lines).encode()).hexdigest()

    def to_tlp(self) -> str:
        """One fact per line, sorted lexicographically, trailing newline."""
        lines = sorted(f"{a.text()}." for a in self._facts)
        return "\n".join(lines) + ("\n" if lines else "")

    def __repr__(self) -> str:
        return f"State({{{', '.join(a.text() for a in self.facts())}}})"


def state_from_tlp(text: str, source: str = "<facts>") -> State:
    """Load a fact snapshot; rejects rules and non-ground clauses."""
    program = parse_program(text, source)
    if program.rules:
        rule = program.rules[0]
        raise ParseError(
            f"fact file contains a rule for {rule.head.pred}",
            rule.pos or Pos(1, 1),
        )
    return State(program.facts)
