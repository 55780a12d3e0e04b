"""Forward chaining under closed-world (NAF) and open-world semantics."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import networkx as nx

from .theory import (
    Literal,
    Mode,
    Rule,
    SentenceId,
    Theory,
    TruthValue,
    ground_literal_space,
    negate_question,
    signature_of,
)


class StratificationError(ValueError):
    def __init__(self, cycle: list[tuple[str, str]]):
        self.cycle = cycle
        names = " -> ".join(f"{k}:{p}" for k, p in cycle)
        super().__init__(f"negation cycle through {names}")


class InconsistentTheory(ValueError):
    def __init__(self, literal: Literal):
        self.literal = literal
        super().__init__(f"both {literal} and its negation are derivable")


class ConditionRef(NamedTuple):
    """How one rule condition was satisfied.

    kind is ``context`` (ref is the fact id), ``derived`` or ``naf``
    (ref is the ground literal).
    """

    kind: str
    ref: SentenceId | Literal
    literal: Literal


class Support(NamedTuple):
    rule: SentenceId
    conditions: tuple[ConditionRef, ...]


@dataclass(frozen=True)
class Implication:
    literal: Literal
    depth: int
    one_step_support: Support


# ---------------------------------------------------------------------------
# stratification


def dependency_graph(t: Theory) -> nx.DiGraph:
    g = nx.DiGraph()
    for r in t.rules:
        head = r.conclusion.atom.key
        g.add_node(head)
        for c in r.conditions:
            src = c.atom.key
            neg = not c.positive
            if g.has_edge(src, head):
                g[src][head]["negative"] |= neg
            else:
                g.add_edge(src, head, negative=neg)
    return g


def check_stratifiable(t: Theory) -> None:
    """Raise StratificationError (carrying the cycle) if negation is recursive."""
    g = dependency_graph(t)
    comp = {}
    for i, scc in enumerate(nx.strongly_connected_components(g)):
        for n in scc:
            comp[n] = i
    for u, v, data in sorted(g.edges(data=True)):
        if data["negative"] and comp[u] == comp[v]:
            back = nx.shortest_path(g, v, u) if u != v else [u]
            cycle = [u] + back if u != v else [u, u]
            raise StratificationError(cycle)


def strata(t: Theory) -> dict[tuple[str, str], int]:
    """Stratum number per predicate key (0 = lowest)."""
    check_stratifiable(t)
    g = dependency_graph(t)
    cond = nx.condensation(g)
    level: dict[int, int] = {}
    for c in nx.topological_sort(cond):
        best = 0
        for p in cond.predecessors(c):
            neg = any(
                g[u][v]["negative"]
                for u in cond.nodes[p]["members"]
                for v in cond.nodes[c]["members"]
                if g.has_edge(u, v)
            )
            best = max(best, level[p] + (1 if neg else 0))
        level[c] = best
    return {n: level[cond.graph["mapping"][n]] for n in g.nodes}


# ---------------------------------------------------------------------------
# matching


class _Index:
    """Known ground literals grouped by (predicate key, polarity)."""

    def __init__(self, literals: Iterable[Literal] = ()):
        self.by_key: dict[tuple, set[Literal]] = defaultdict(set)
        self.all: set[Literal] = set()
        for lit in literals:
            self.add(lit)

    def add(self, lit: Literal) -> bool:
        if lit in self.all:
            return False
        self.all.add(lit)
        self.by_key[(lit.atom.key, lit.positive)].add(lit)
        return True

    def candidates(self, pattern: Literal) -> set[Literal]:
        return self.by_key.get((pattern.atom.key, pattern.positive), set())

    def __contains__(self, lit: Literal) -> bool:
        return lit in self.all


def _binding_conditions(rule: Rule, mode: Mode) -> list[int]:
    """Indices of conditions whose matches can bind the rule variable."""
    return [
        i
        for i, c in enumerate(rule.conditions)
        if c.has_var and (c.positive or mode is Mode.OWA)
    ]


def _holds(cond: Literal, known: _Index, mode: Mode) -> bool:
    if mode is Mode.CWA and not cond.positive:
        return cond.negate() not in known
    return cond in known


def _bindings(rule: Rule, known: _Index, mode: Mode, delta: _Index | None = None) -> set[str | None]:
    """Variable values (None for ground rules) under which all conditions hold.

    With ``delta``, only instances using at least one delta literal are
    returned (semi-naive evaluation).
    """
    out: set[str | None] = set()
    if not rule.has_var or not any(c.has_var for c in rule.conditions):
        if delta is not None and not any(
            c in delta for c in rule.conditions if c.positive or mode is Mode.OWA
        ):
            return out
        if all(_holds(c, known, mode) for c in rule.conditions):
            out.add(None)
        return out
    binders = _binding_conditions(rule, mode)
    seeds: set[str] = set()
    if delta is None:
        first = rule.conditions[binders[0]]
        for lit in known.candidates(first):
            v = first.match(lit)
            if v is not False and v is not None:
                seeds.add(v)
    else:
        for i in binders:
            c = rule.conditions[i]
            for lit in delta.candidates(c):
                v = c.match(lit)
                if v is not False and v is not None:
                    seeds.add(v)
        # ground conditions in the delta re-trigger every binding
        if any(c in delta for c in rule.conditions if not c.has_var and (c.positive or mode is Mode.OWA)):
            first = rule.conditions[binders[0]]
            for lit in known.candidates(first):
                v = first.match(lit)
                if v is not False and v is not None:
                    seeds.add(v)
    for v in seeds:
        conds, _ = rule.instantiate(v)
        if all(_holds(c, known, mode) for c in conds):
            out.add(v)
    return out


def _refs(conds: tuple[Literal, ...], facts: dict[Literal, SentenceId], mode: Mode) -> tuple[ConditionRef, ...]:
    refs = []
    for c in conds:
        if mode is Mode.CWA and not c.positive:
            refs.append(ConditionRef("naf", c, c))
        elif c in facts:
            refs.append(ConditionRef("context", facts[c], c))
        else:
            refs.append(ConditionRef("derived", c, c))
    return tuple(refs)


# ---------------------------------------------------------------------------
# one step


def one_step_inferences(t: Theory) -> set[Implication]:
    """Literals derivable from the context by a single rule application.

    Under CWA a negated condition is only trusted once every rule that
    could conclude its predicate (or anything it depends on) is saturated
    in the current context.
    """
    known = _Index(t.fact_literals())
    facts = {f.literal: f.id for f in t.facts}
    raw: list[tuple[Rule, str | None]] = []
    for r in t.rules:
        for v in _bindings(r, known, t.mode):
            _, concl = r.instantiate(v)
            if concl not in known:
                raw.append((r, v))
    if t.mode is Mode.CWA and any(not c.positive for r in t.rules for c in r.conditions):
        level = strata(t)
        pending = [level[r.conclusion.atom.key] for r, _ in raw]
        lowest_pending = min(pending, default=None)

        def settled(r: Rule) -> bool:
            if lowest_pending is None:
                return True
            return all(c.positive or level.get(c.atom.key, -1) < lowest_pending for c in r.conditions)

        raw = [(r, v) for r, v in raw if settled(r)]
    out = set()
    for r, v in raw:
        conds, concl = r.instantiate(v)
        out.add(Implication(concl, 1, Support(r.id, _refs(conds, facts, t.mode))))
    return out


# ---------------------------------------------------------------------------
# closure


@dataclass
class Closure:
    theory: Theory
    known: frozenset[Literal]
    depth: dict[Literal, int]
    supports: dict[Literal, list[Support]]
    implications: dict[Literal, Implication] = field(default_factory=dict)

    @property
    def mode(self) -> Mode:
        return self.theory.mode

    def __contains__(self, lit: Literal) -> bool:
        return lit in self.known

    def truth(self, lit: Literal) -> TruthValue:
        if lit in self.known:
            return TruthValue.TRUE
        if lit.negate() in self.known:
            return TruthValue.FALSE
        if self.mode is Mode.CWA:
            return TruthValue.FALSE if lit.positive else TruthValue.TRUE
        return TruthValue.UNKNOWN

    def truth_map(self, positive_only: bool = False) -> dict[Literal, TruthValue]:
        space = ground_literal_space(signature_of(self.theory), positive_only)
        return {lit: self.truth(lit) for lit in space}

    def sorted_implications(self) -> list[Implication]:
        return sorted(self.implications.values(), key=lambda i: (i.depth, i.literal))


def _saturate(rules: list[Rule], known: _Index, mode: Mode) -> None:
    delta: _Index | None = None
    while True:
        new = _Index()
        for r in rules:
            for v in _bindings(r, known, mode, delta):
                _, concl = r.instantiate(v)
                if concl not in known:
                    new.add(concl)
        if not new.all:
            return
        for lit in new.all:
            known.add(lit)
        delta = new


def closure(t: Theory) -> Closure:
    """Least fixpoint of the theory, with per-literal supports and depths."""
    known = _Index(t.fact_literals())
    if t.mode is Mode.CWA:
        level = strata(t)
        by_level: dict[int, list[Rule]] = defaultdict(list)
        for r in t.rules:
            by_level[level[r.conclusion.atom.key]].append(r)
        for lv in sorted(by_level):
            _saturate(by_level[lv], known, t.mode)
    else:
        _saturate(list(t.rules), known, t.mode)
        for lit in known.all:
            if lit.positive and lit.negate() in known:
                raise InconsistentTheory(lit)

    facts = {f.literal: f.id for f in t.facts}
    supports: dict[Literal, list[Support]] = defaultdict(list)
    for r in t.rules:
        for v in sorted(_bindings(r, known, t.mode), key=lambda x: (x is not None, x or "")):
            conds, concl = r.instantiate(v)
            if concl in facts:
                continue
            supports[concl].append(Support(r.id, _refs(conds, facts, t.mode)))

    depth = {lit: 0 for lit in facts}
    changed = True
    while changed:
        changed = False
        for lit, sups in supports.items():
            for s in sups:
                ds = [0 if c.kind == "naf" else depth.get(c.literal) for c in s.conditions]
                if any(d is None for d in ds):
                    continue
                d = 1 + max(ds)
                if d < depth.get(lit, 1 << 30):
                    depth[lit] = d
                    changed = True

    implications = {}
    for lit, sups in supports.items():
        best = min(
            (s for s in sups if all(c.kind == "naf" or c.literal in depth for c in s.conditions)),
            key=lambda s: (
                1 + max(0 if c.kind == "naf" else depth[c.literal] for c in s.conditions),
                s.rule,
                [str(c.ref) for c in s.conditions],
            ),
        )
        implications[lit] = Implication(lit, depth[lit], best)
    return Closure(t, frozenset(known.all), depth, dict(supports), implications)


def answer(t: Theory, q: Literal, cl: Closure | None = None) -> tuple[TruthValue, int | None]:
    """Truth value of a ground question and its depth (None when unprovable)."""
    cl = cl or closure(t)
    if q in cl.known:
        return TruthValue.TRUE, cl.depth[q]
    neg = negate_question(q)
    if neg in cl.known:
        return TruthValue.FALSE, cl.depth[neg]
    return cl.truth(q), None
