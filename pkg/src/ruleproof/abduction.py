"""Single-fact abduction over open-world theories."""
from __future__ import annotations

from dataclasses import dataclass, field

from .inference import Closure, InconsistentTheory, closure
from .theory import Literal, Mode, Theory, TruthValue, ground_literal_space, signature_of


class NotUnprovable(ValueError):
    pass


@dataclass(frozen=True)
class AbductionAnswer:
    missing_facts: frozenset[Literal]
    # depth of the question once the missing fact is added
    depths: dict = field(default_factory=dict, compare=False, hash=False)

    @property
    def none_marker(self) -> bool:
        return not self.missing_facts


def candidate_space(t: Theory, positive_only: bool = False) -> set[Literal]:
    """All ground literals over the theory's signature that are not stated facts."""
    stated = t.fact_literals()
    return {lit for lit in ground_literal_space(signature_of(t), positive_only) if lit not in stated}


def _condition_keys(t: Theory) -> set[tuple]:
    return {(c.atom.key, c.positive) for r in t.rules for c in r.conditions}


def _extended_closure(t: Theory, m: Literal) -> Closure | None:
    try:
        return closure(t.with_facts([m]))
    except InconsistentTheory:
        return None


def abduce_single_fact(
    t: Theory,
    q: Literal,
    positive_only: bool = False,
    base: Closure | None = None,
) -> AbductionAnswer:
    """Every single fact whose addition makes ``q`` provable.

    Candidates whose predicate/polarity never occurs in a rule condition
    cannot enable any derivation, so only ``m == q`` could help them; ``q``
    itself is excluded, hence they are skipped without running closure.
    """
    if t.mode is not Mode.OWA:
        raise ValueError("abduction is defined for open-world theories")
    base = base or closure(t)
    if base.truth(q) is not TruthValue.UNKNOWN:
        raise NotUnprovable(f"question is already {base.truth(q).value}")
    keys = _condition_keys(t)
    found: dict[Literal, int] = {}
    for m in sorted(candidate_space(t, positive_only)):
        if m == q or (m.atom.key, m.positive) not in keys:
            continue
        cl = _extended_closure(t, m)
        if cl is not None and q in cl.known:
            found[m] = cl.depth[q]
    return AbductionAnswer(frozenset(found), found)


def abduce_all(
    t: Theory,
    questions: list[Literal],
    positive_only: bool = False,
) -> dict[Literal, AbductionAnswer]:
    """Batch form: one closure per candidate, shared by every question."""
    if t.mode is not Mode.OWA:
        raise ValueError("abduction is defined for open-world theories")
    base = closure(t)
    for q in questions:
        if base.truth(q) is not TruthValue.UNKNOWN:
            raise NotUnprovable(f"{q} is already {base.truth(q).value}")
    keys = _condition_keys(t)
    found: dict[Literal, dict[Literal, int]] = {q: {} for q in questions}
    for m in sorted(candidate_space(t, positive_only)):
        if (m.atom.key, m.positive) not in keys:
            continue
        cl = _extended_closure(t, m)
        if cl is None:
            continue
        for q in questions:
            if m != q and q in cl.known:
                found[q][m] = cl.depth[q]
    return {q: AbductionAnswer(frozenset(d), d) for q, d in found.items()}
