"""Core domain types: entities, atoms, literals, rules, theories.

Entities are plain strings ("Bob", "the bald eagle").  A rule uses at most
one variable, represented by the sentinel :data:`VAR`.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, NamedTuple

VAR = "?x"

#: Namespaces that may label sentences inside a theory.
THEORY_NAMESPACES = ("sent", "fact", "rule", "triple")
#: Namespaces reserved for proof intermediates.
PROOF_NAMESPACES = ("naf", "conc", "int")

_SID_RE = re.compile(r"^(sent|fact|rule|triple|naf|conc|int)([1-9][0-9]*)$")


class TheoryError(ValueError):
    """A theory violates a structural or semantic-mode constraint."""


class DuplicateId(TheoryError):
    pass


class Mode(str, enum.Enum):
    CWA = "CWA"
    OWA = "OWA"

    @classmethod
    def parse(cls, value: "str | Mode") -> "Mode":
        if isinstance(value, Mode):
            return value
        return cls(value.upper())


class TruthValue(str, enum.Enum):
    TRUE = "True"
    FALSE = "False"
    UNKNOWN = "Unknown"


@dataclass(frozen=True, order=True)
class SentenceId:
    namespace: str
    index: int

    def __post_init__(self):
        if self.namespace not in THEORY_NAMESPACES + PROOF_NAMESPACES:
            raise ValueError(f"unknown sentence namespace {self.namespace!r}")
        if self.index < 1:
            raise ValueError("sentence index must be positive")

    @classmethod
    def parse(cls, text: str) -> "SentenceId":
        m = _SID_RE.match(text)
        if not m:
            raise ValueError(f"not a sentence id: {text!r}")
        return cls(m.group(1), int(m.group(2)))

    @staticmethod
    def is_id(text: str) -> bool:
        return bool(_SID_RE.match(text))

    def __str__(self) -> str:
        return f"{self.namespace}{self.index}"


@dataclass(frozen=True, order=True)
class Atom:
    """``pred(subject)`` for attributes, ``pred(subject, object)`` for relations.

    Relation predicates are stored as the verb's base form ("chase").
    """

    pred: str
    subject: str
    object: str | None = None

    @property
    def is_relation(self) -> bool:
        return self.object is not None

    @property
    def key(self) -> tuple[str, str]:
        return ("rel" if self.is_relation else "attr", self.pred)

    @property
    def terms(self) -> tuple[str, ...]:
        return (self.subject,) if self.object is None else (self.subject, self.object)

    @property
    def is_ground(self) -> bool:
        return VAR not in self.terms

    def bind(self, value: str) -> "Atom":
        obj = self.object
        return Atom(
            self.pred,
            value if self.subject == VAR else self.subject,
            value if obj == VAR else obj,
        )


@dataclass(frozen=True, order=True)
class Literal:
    atom: Atom
    positive: bool = True

    @classmethod
    def attr(cls, subject: str, attr: str, positive: bool = True) -> "Literal":
        return cls(Atom(attr, subject), positive)

    @classmethod
    def rel(cls, verb: str, subject: str, obj: str, positive: bool = True) -> "Literal":
        return cls(Atom(verb, subject, obj), positive)

    @property
    def is_ground(self) -> bool:
        return self.atom.is_ground

    @property
    def has_var(self) -> bool:
        return not self.atom.is_ground

    def negate(self) -> "Literal":
        return Literal(self.atom, not self.positive)

    def bind(self, value: str) -> "Literal":
        return Literal(self.atom.bind(value), self.positive)

    def match(self, ground: "Literal") -> str | None | bool:
        """Unify this (possibly open) literal with a ground one.

        Returns the variable's value, ``None`` when they match without a
        variable, and ``False`` on mismatch.
        """
        if self.positive != ground.positive or self.atom.key != ground.atom.key:
            return False
        value = None
        for mine, theirs in zip(self.atom.terms, ground.atom.terms):
            if mine == VAR:
                if value is not None and value != theirs:
                    return False
                value = theirs
            elif mine != theirs:
                return False
        return value

    def __str__(self) -> str:
        # debugging aid; English rendering lives in the grammar module
        sign = "" if self.positive else "~"
        return f"{sign}{self.atom.pred}({', '.join(self.atom.terms)})"


def negate_question(q: Literal) -> Literal:
    """Flip the polarity of a ground question literal."""
    if not q.is_ground:
        raise ValueError("questions must be ground")
    return q.negate()


@dataclass(frozen=True)
class Fact:
    id: SentenceId
    literal: Literal
    text: str | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Rule:
    id: SentenceId
    conditions: tuple[Literal, ...]
    conclusion: Literal
    text: str | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "conditions", tuple(self.conditions))
        if not self.conditions:
            raise TheoryError(f"{self.id}: a rule needs at least one condition")

    @property
    def has_var(self) -> bool:
        return self.conclusion.has_var or any(c.has_var for c in self.conditions)

    def instantiate(self, value: str | None) -> tuple[tuple[Literal, ...], Literal]:
        if value is None:
            return self.conditions, self.conclusion
        return tuple(c.bind(value) for c in self.conditions), self.conclusion.bind(value)


class Signature(NamedTuple):
    entities: frozenset[str]
    attributes: frozenset[str]
    verbs: frozenset[str]


def rule_violations(rule: Rule, mode: Mode) -> list[str]:
    """Constraint violations for a single rule under ``mode``."""
    problems = []
    conclusion_var = rule.conclusion.has_var
    if mode is Mode.CWA:
        if not rule.conclusion.positive:
            problems.append(f"{rule.id}: negated conclusion under CWA")
        pos_var = any(c.has_var and c.positive for c in rule.conditions)
        neg_var = any(c.has_var and not c.positive for c in rule.conditions)
        if neg_var and not pos_var:
            problems.append(f"{rule.id}: variable occurs only in a negated condition")
        if conclusion_var and not pos_var:
            problems.append(f"{rule.id}: conclusion variable not bound by a positive condition")
    elif conclusion_var and not any(c.has_var for c in rule.conditions):
        problems.append(f"{rule.id}: conclusion variable not bound by any condition")
    return problems


@dataclass(frozen=True)
class Theory:
    facts: tuple[Fact, ...] = ()
    rules: tuple[Rule, ...] = ()
    mode: Mode = Mode.CWA

    def __post_init__(self):
        object.__setattr__(self, "facts", tuple(self.facts))
        object.__setattr__(self, "rules", tuple(self.rules))
        object.__setattr__(self, "mode", Mode.parse(self.mode))
        seen: set[SentenceId] = set()
        for s in self.sentences():
            if s.id in seen:
                raise DuplicateId(f"duplicate sentence id {s.id}")
            if s.id.namespace in PROOF_NAMESPACES:
                raise TheoryError(f"{s.id}: proof-only namespace inside a theory")
            seen.add(s.id)
        for f in self.facts:
            if not f.literal.is_ground:
                raise TheoryError(f"{f.id}: facts must be ground")
            if self.mode is Mode.CWA and not f.literal.positive:
                raise TheoryError(f"{f.id}: negated fact under CWA")
        for r in self.rules:
            problems = rule_violations(r, self.mode)
            if problems:
                raise TheoryError("; ".join(problems))

    def sentences(self) -> Iterator[Fact | Rule]:
        yield from self.facts
        yield from self.rules

    def ordered_sentences(self) -> list[Fact | Rule]:
        """Sentences in id order (the order they are listed in a context)."""
        return sorted(self.sentences(), key=lambda s: (s.id.namespace != "sent", _ns_rank(s.id), s.id.index))

    def get(self, sid: SentenceId) -> Fact | Rule | None:
        for s in self.sentences():
            if s.id == sid:
                return s
        return None

    @property
    def fact_index(self) -> dict[SentenceId, Fact]:
        return {f.id: f for f in self.facts}

    @property
    def rule_index(self) -> dict[SentenceId, Rule]:
        return {r.id: r for r in self.rules}

    def fact_literals(self) -> frozenset[Literal]:
        return frozenset(f.literal for f in self.facts)

    def next_id(self, namespace: str = "sent") -> SentenceId:
        used = [s.id.index for s in self.sentences() if s.id.namespace == namespace]
        return SentenceId(namespace, max(used, default=0) + 1)

    def with_facts(self, literals: Iterable[Literal], namespace: str = "sent") -> "Theory":
        facts = list(self.facts)
        t = self
        for lit in literals:
            facts.append(Fact(t.next_id(namespace), lit))
            t = replace(t, facts=tuple(facts))
        return t

    def with_mode(self, mode: Mode | str) -> "Theory":
        return replace(self, mode=Mode.parse(mode))


def _ns_rank(sid: SentenceId) -> int:
    # triple*/fact* listings put facts before rules
    return {"sent": 0, "triple": 1, "fact": 1, "rule": 2}[sid.namespace]


def signature_of(t: Theory) -> Signature:
    entities: set[str] = set()
    attributes: set[str] = set()
    verbs: set[str] = set()
    literals = [f.literal for f in t.facts]
    for r in t.rules:
        literals.extend(r.conditions)
        literals.append(r.conclusion)
    for lit in literals:
        a = lit.atom
        (verbs if a.is_relation else attributes).add(a.pred)
        entities.update(x for x in a.terms if x != VAR)
    return Signature(frozenset(entities), frozenset(attributes), frozenset(verbs))


def ground_literal_space(sig: Signature, positive_only: bool = False) -> list[Literal]:
    """Every ground literal over a signature, in a stable order."""
    out = []
    polarities = (True,) if positive_only else (True, False)
    ents = sorted(sig.entities)
    for e in ents:
        for a in sorted(sig.attributes):
            for p in polarities:
                out.append(Literal.attr(e, a, p))
    for v in sorted(sig.verbs):
        for s in ents:
            for o in ents:
                for p in polarities:
                    out.append(Literal.rel(v, s, o, p))
    return out


def lint(t: Theory) -> list[str]:
    """Scan for data-quality issues that the constructor tolerates.

    Reports duplicate fact literals under different ids, and re-checks the
    CWA repair constraints (negated facts/conclusions, variables occurring only
    in negated conditions) so generated batches can be audited by scan.
    """
    issues = []
    seen: dict[Literal, SentenceId] = {}
    for f in t.facts:
        if f.literal in seen:
            issues.append(f"{f.id}: duplicates {seen[f.literal]}")
        else:
            seen[f.literal] = f.id
        if t.mode is Mode.CWA and not f.literal.positive:
            issues.append(f"{f.id}: negated fact under CWA")
    for r in t.rules:
        issues.extend(rule_violations(r, t.mode))
    return issues
