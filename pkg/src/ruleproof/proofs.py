"""Proof graphs: enumeration, canonical form, the linear codec, verification
and assembly of full proofs from one-step fragments.

A proof is held as a tree of :class:`ProofNode`; equal sub-proofs collapse
into one node when viewed as a graph (:meth:`ProofDag.graph`).
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, NamedTuple

from .grammar import PEOPLE, GrammarProfile, ParseError, parse_literal, profile_for, render_fact
from .inference import Closure, ConditionRef, closure, one_step_inferences
from .theory import Fact, Literal, Mode, Rule, SentenceId, Theory

DEFAULT_CAP = 5000

FACT, NAF, CONC = "fact", "naf", "conc"


class MalformedProof(ValueError):
    pass


class UnboundIntermediate(MalformedProof):
    pass


class UnknownSentenceId(MalformedProof):
    pass


class DanglingReference(ValueError):
    pass


@dataclass(frozen=True)
class ProofNode:
    kind: str  # fact | naf | conc
    literal: Literal
    sid: SentenceId | None = None  # context fact id (kind == fact)
    rule: SentenceId | None = None  # concluding rule (kind == conc)
    children: tuple["ProofNode", ...] = ()

    @classmethod
    def leaf(cls, fact: Fact) -> "ProofNode":
        return cls(FACT, fact.literal, sid=fact.id)

    @classmethod
    def naf(cls, lit: Literal) -> "ProofNode":
        return cls(NAF, lit)

    @classmethod
    def conc(cls, lit: Literal, rule: SentenceId, children: Iterable["ProofNode"]) -> "ProofNode":
        return cls(CONC, lit, rule=rule, children=tuple(children))

    @cached_property
    def depth(self) -> int:
        if self.kind != CONC:
            return 0
        return 1 + max(c.depth for c in self.children)

    @cached_property
    def key(self) -> tuple:
        return _canon(self, False)

    def walk(self) -> Iterator["ProofNode"]:
        yield self
        for c in self.children:
            yield from c.walk()

    def walk_post(self) -> Iterator["ProofNode"]:
        """Children before parents, i.e. in derivation order."""
        for c in self.children:
            yield from c.walk_post()
        yield self

    @cached_property
    def derived_literals(self) -> frozenset[Literal]:
        out = frozenset([self.literal]) if self.kind == CONC else frozenset()
        return out.union(*(c.derived_literals for c in self.children))


@dataclass(frozen=True)
class ProofDag:
    root: ProofNode

    @property
    def depth(self) -> int:
        return self.root.depth

    @property
    def conclusion(self) -> Literal:
        return self.root.literal

    def graph(self) -> tuple[dict[tuple, tuple], set[tuple[tuple, tuple]]]:
        """Alternating fact/rule graph: (node id -> label, edges).

        Fact nodes are keyed by their literal so repeated uses merge; a
        rule node is keyed by the fact it concludes.
        """
        labels: dict[tuple, tuple] = {}
        edges: set[tuple[tuple, tuple]] = set()
        for n in self.root.walk():
            fid = ("f", n.kind, n.literal)
            labels[fid] = (n.kind, str(n.sid) if n.sid else n.literal)
            if n.kind == CONC:
                rid = ("r", n.literal)
                labels[rid] = ("rule", str(n.rule))
                edges.add((rid, fid))
                for c in n.children:
                    edges.add((("f", c.kind, c.literal), rid))
        return labels, edges

    @property
    def size(self) -> int:
        return len(self.graph()[0])


class ProofList(list):
    """A list of proofs that remembers whether enumeration hit its cap."""

    truncated: bool = False


# ---------------------------------------------------------------------------
# canonical form


def _canon(node: ProofNode, skeleton: bool):
    if node.kind == FACT:
        return (0, str(node.sid))
    if node.kind == NAF:
        return (1, _lit_key(node.literal))
    if not skeleton:
        kids = tuple(sorted(c.key for c in node.children))
    else:
        kids = tuple(sorted(_canon(c, skeleton) for c in node.children))
    return (2, "" if skeleton else _lit_key(node.literal), str(node.rule), kids)


def _lit_key(lit: Literal) -> str:
    a = lit.atom
    return f"{'+' if lit.positive else '-'}{a.pred}|{a.subject}|{a.object or ''}"


def canonicalize(p: ProofDag, skeleton: bool = False):
    """Deterministic, numbering-free form; equal iff the proofs are isomorphic.

    ``skeleton`` drops the text of concluded (intermediate) facts.
    """
    return _canon(p.root, skeleton)


# ---------------------------------------------------------------------------
# enumeration


def all_proofs(t: Theory, q: Literal, cap: int = DEFAULT_CAP, cl: Closure | None = None) -> ProofList:
    """Every distinct proof of ``q`` (up to ``cap``), shortest first.

    Built bottom-up from the closure's supports; a candidate proof of a
    literal is discarded when that literal already occurs inside it.
    """
    result = ProofList()
    facts = {f.literal: f for f in t.facts}
    if q in facts:
        result.append(ProofDag(ProofNode.leaf(facts[q])))
        return result
    cl = cl or closure(t)
    if q not in cl.known:
        return result

    relevant = _relevant(q, cl)
    proofs: dict[Literal, dict[tuple, ProofNode]] = {lit: {} for lit in relevant}
    truncated: dict[Literal, bool] = {lit: False for lit in relevant}

    def options(ref: ConditionRef) -> list[ProofNode]:
        if ref.kind == "naf":
            return [ProofNode.naf(ref.literal)]
        if ref.kind == "context":
            return [ProofNode.leaf(facts[ref.literal])]
        return list(proofs[ref.literal].values())

    changed = True
    while changed:
        changed = False
        for lit in relevant:
            bucket = proofs[lit]
            for sup in cl.supports.get(lit, ()):
                if any(r.kind == "derived" and truncated[r.literal] for r in sup.conditions):
                    truncated[lit] = True
                for combo in itertools.product(*(options(r) for r in sup.conditions)):
                    if any(lit == c.literal or lit in c.derived_literals for c in combo):
                        continue
                    node = ProofNode.conc(lit, sup.rule, combo)
                    key = node.key
                    if key in bucket:
                        continue
                    if len(bucket) >= cap:
                        truncated[lit] = True
                        break
                    bucket[key] = node
                    changed = True
    found = [ProofDag(n) for n in proofs[q].values()]
    found.sort(key=lambda p: (p.size, p.depth, canonicalize(p)))
    result.extend(found)
    result.truncated = truncated[q]
    return result


def _relevant(q: Literal, cl: Closure) -> list[Literal]:
    seen, stack = {q}, [q]
    while stack:
        lit = stack.pop()
        for sup in cl.supports.get(lit, ()):
            for r in sup.conditions:
                if r.kind == "derived" and r.literal not in seen:
                    seen.add(r.literal)
                    stack.append(r.literal)
    return sorted(seen)


def shortest_proofs(ps: list[ProofDag]) -> list[ProofDag]:
    if not ps:
        raise ValueError("no proofs given")
    best = min(p.size for p in ps)
    return [p for p in ps if p.size == best]


# ---------------------------------------------------------------------------
# codec


class EncodedProof(NamedTuple):
    body: str
    bindings: tuple[tuple[str, str], ...] = ()

    def __str__(self) -> str:
        if not self.bindings:
            return self.body
        return self.body + " ; with " + " ; ".join(f"{k}: {v}" for k, v in self.bindings)


NONE = "None"

_DIALECTS = {"percent": ("%", "conc"), "percent-conc": ("%", "conc"), "at": ("@", "int"), "at-int": ("@", "int")}


def encode_proof(
    p: ProofDag | None,
    dialect: str = "percent",
    profile: GrammarProfile | None = None,
) -> EncodedProof:
    """Polish-notation encoding; intermediates are numbered in emission order."""
    if p is None:
        return EncodedProof(NONE)
    sep, prefix = _DIALECTS[dialect]
    profile = profile or profile_for(_entities(p.root))
    tokens: list[str] = []
    bindings: list[tuple[str, str]] = []
    labels: dict[tuple, str] = {}
    counters = {"conc": 0, "naf": 0}

    def label(node: ProofNode, ns: str, out_ns: str) -> tuple[str, bool]:
        key = node.key
        if key in labels:
            return labels[key], False
        counters[ns] += 1
        name = f"{out_ns}{counters[ns]}"
        labels[key] = name
        bindings.append((name, render_fact(node.literal, profile)))
        return name, True

    def emit(node: ProofNode) -> None:
        if node.kind == FACT:
            tokens.append(str(node.sid))
        elif node.kind == NAF:
            tokens.append(label(node, "naf", "naf")[0])
        else:
            name, fresh = label(node, "conc", prefix)
            if not fresh:
                tokens.append(name)
                return
            tokens.append("#")
            tokens.append(f"{node.rule}{sep}{name}")
            emit_antecedent(node.children)

    def emit_antecedent(children: tuple[ProofNode, ...]) -> None:
        tokens.extend(["&"] * (len(children) - 1))
        for c in children:
            emit(c)

    emit(p.root)
    bindings.sort(key=lambda kv: (re.sub(r"\d+$", "", kv[0]), int(re.search(r"\d+$", kv[0]).group())))
    return EncodedProof(" ".join(tokens), tuple(bindings))


def encode_step(
    rule: SentenceId,
    conditions: Iterable[SentenceId | Literal],
    profile: GrammarProfile = PEOPLE,
) -> EncodedProof:
    """One-step proof fragment, e.g. ``# sent2 sent12``.

    Literal entries are negation-as-failure assumptions.
    """
    conditions = list(conditions)
    tokens = ["#", str(rule)] + ["&"] * (len(conditions) - 1)
    bindings = []
    for c in conditions:
        if isinstance(c, Literal):
            name = f"naf{len(bindings) + 1}"
            bindings.append((name, render_fact(c, profile)))
            tokens.append(name)
        else:
            tokens.append(str(c))
    return EncodedProof(" ".join(tokens), tuple(bindings))


def _entities(node: ProofNode) -> set[str]:
    out = set()
    for n in node.walk():
        out.update(x for x in n.literal.atom.terms)
    return out


def split_encoded(s: str) -> EncodedProof:
    s = s.strip()
    if " ; with " in s:
        body, rest = s.split(" ; with ", 1)
    elif s.endswith(" ; with") or " ; with" in s and s.split(" ; with", 1)[1] == "":
        raise MalformedProof("empty with-clause")
    else:
        body, rest = s, ""
    bindings = []
    if rest:
        for part in rest.split(" ; "):
            if ":" not in part:
                raise MalformedProof(f"bad binding {part!r}")
            k, v = part.split(":", 1)
            bindings.append((k.strip(), v.strip()))
    return EncodedProof(body.strip(), tuple(bindings))


_LABEL_RE = re.compile(r"^(conc|int|naf)([1-9][0-9]*)$")


def decode_proof(
    e: EncodedProof | str,
    t: Theory,
    conclusion: Literal | None = None,
    profile: GrammarProfile | None = None,
) -> ProofDag | None:
    """Inverse of :func:`encode_proof`; returns None for ``"None"``.

    Accepts both dialects and any nesting of ``&``.  A root rule without an
    intermediate label (one-step fragments) concludes ``conclusion``, or the
    rule instantiated on its conditions when that is not given.
    """
    try:
        return _decode(e, t, conclusion, profile)
    except MalformedProof:
        raise
    except (ParseError, ValueError, IndexError, KeyError, RecursionError) as exc:
        raise MalformedProof(str(exc)) from exc


def _decode(e, t, conclusion, profile):
    if isinstance(e, str):
        if e.strip() == NONE:
            return None
        e = split_encoded(e)
    if e.body == NONE:
        return None
    profile = profile or profile_for(t)
    tokens = e.body.split()
    if not tokens:
        raise MalformedProof("empty proof")
    bindings: dict[str, Literal] = {}
    for k, v in e.bindings:
        if not _LABEL_RE.match(k):
            raise MalformedProof(f"bad binding label {k!r}")
        if k in bindings:
            raise MalformedProof(f"{k} bound twice")
        bindings[k] = parse_literal(v, profile)
    facts, rules = t.fact_index, t.rule_index
    defined: dict[str, ProofNode] = {}
    pos = 0

    def take() -> str:
        nonlocal pos
        if pos >= len(tokens):
            raise MalformedProof("proof ends early")
        tok = tokens[pos]
        pos += 1
        return tok

    def node(is_root: bool) -> ProofNode:
        tok = take()
        if tok == "#":
            head = take()
            m = re.match(r"^([a-z]+[0-9]+)(?:([%@])((?:conc|int)[1-9][0-9]*))?$", head)
            if not m:
                raise MalformedProof(f"bad rule token {head!r}")
            rid = _sid(m.group(1))
            if rid not in rules:
                raise UnknownSentenceId(f"{rid} is not a rule of the theory")
            name = m.group(3)
            if name in defined:
                raise MalformedProof(f"{name} defined twice")
            children = antecedent()
            if name:
                if name not in bindings:
                    raise UnboundIntermediate(name)
                lit = bindings[name]
            elif is_root and conclusion is not None:
                lit = conclusion
            elif is_root:
                lit = _apply(rules[rid], children, t.mode)
            else:
                raise MalformedProof(f"inner rule {rid} has no intermediate label")
            n = ProofNode.conc(lit, rid, children)
            if name:
                defined[name] = n
            return n
        if tok in ("&", "%", "@"):
            raise MalformedProof(f"unexpected {tok!r}")
        m = _LABEL_RE.match(tok)
        if m:
            if m.group(1) == "naf":
                if tok not in bindings:
                    raise UnboundIntermediate(tok)
                if bindings[tok].positive:
                    raise MalformedProof(f"{tok} must bind a negated sentence")
                return ProofNode.naf(bindings[tok])
            if tok in defined:
                return defined[tok]
            raise UnboundIntermediate(f"{tok} used before it is concluded")
        sid = _sid(tok)
        if sid in rules:
            raise MalformedProof(f"rule {sid} used as a fact")
        if sid not in facts:
            raise UnknownSentenceId(f"{sid} is not a fact of the theory")
        return ProofNode.leaf(facts[sid])

    def antecedent() -> list[ProofNode]:
        if pos < len(tokens) and tokens[pos] == "&":
            take()
            left = antecedent()
            return left + antecedent()
        return [node(False)]

    root = node(True)
    if pos != len(tokens):
        raise MalformedProof(f"trailing tokens: {' '.join(tokens[pos:])}")
    return ProofDag(root)


def _sid(tok: str) -> SentenceId:
    try:
        return SentenceId.parse(tok)
    except ValueError:
        raise MalformedProof(f"bad sentence id {tok!r}") from None


def _apply(rule: Rule, children: list[ProofNode], mode: Mode) -> Literal:
    lits = [c.literal for c in children]
    micro = Theory(
        tuple(Fact(SentenceId("sent", i + 1), l) for i, l in enumerate(lits) if l.positive or mode is Mode.OWA),
        (Rule(SentenceId("rule", 1), rule.conditions, rule.conclusion),),
        mode,
    )
    concs = {imp.literal for imp in one_step_inferences(micro)}
    if len(concs) != 1:
        raise MalformedProof(f"cannot determine what {rule.id} concludes")
    return concs.pop()


def proof_to_string(p: ProofDag | None, dialect: str = "percent", profile: GrammarProfile | None = None) -> str:
    return str(encode_proof(p, dialect, profile))


# ---------------------------------------------------------------------------
# verification


@dataclass
class VerificationReport:
    status: str  # fully-verified | partially-verified | failed
    failed_step: str | None = None
    reason: str | None = None
    unverified_naf: list[Literal] = field(default_factory=list)

    @property
    def fully_verified(self) -> bool:
        return self.status == "fully-verified"


def verify_proof(p: ProofDag, t: Theory, check_naf: bool = True, cl: Closure | None = None) -> VerificationReport:
    """Re-check every rule step on its own micro-theory.

    Each step's rule and condition facts form a tiny theory whose one-step
    inferences must include the stated conclusion.  NAF leaves need the
    whole theory; with ``check_naf=False`` they are listed as unverified.
    """
    facts, rules = t.fact_index, t.rule_index
    unverified: list[Literal] = []
    for n in p.root.walk_post():
        if n.kind == FACT:
            f = facts.get(n.sid)
            if f is None or f.literal != n.literal:
                return VerificationReport("failed", str(n.sid), "not a context fact")
        elif n.kind == NAF:
            if t.mode is Mode.OWA or n.literal.positive:
                return VerificationReport("failed", "naf", "negation-as-failure outside CWA")
            if check_naf:
                cl = cl or closure(t)
                if n.literal.negate() in cl.known:
                    return VerificationReport("failed", "naf", f"{n.literal.negate()} is provable")
            elif n.literal not in unverified:
                unverified.append(n.literal)
        else:
            rule = rules.get(n.rule)
            if rule is None:
                return VerificationReport("failed", str(n.rule), "unknown rule")
            if not _step_ok(rule, n, t.mode):
                return VerificationReport("failed", str(n.rule), "conclusion does not follow in one step")
    if unverified:
        return VerificationReport("partially-verified", unverified_naf=unverified)
    return VerificationReport("fully-verified")


def _step_ok(rule: Rule, n: ProofNode, mode: Mode) -> bool:
    cond_facts = []
    for i, c in enumerate(n.children):
        if c.kind == NAF:
            continue
        if mode is Mode.CWA and not c.literal.positive:
            return False
        cond_facts.append(Fact(SentenceId("sent", i + 1), c.literal))
    # all conditions are accounted for by the step's children
    micro_rule = Rule(SentenceId("rule", 1), rule.conditions, rule.conclusion)
    try:
        micro = Theory(tuple(dict.fromkeys(cond_facts)), (micro_rule,), mode)
    except ValueError:
        return False
    child_lits = {c.literal for c in n.children}
    for imp in one_step_inferences(micro):
        if imp.literal != n.literal:
            continue
        used = {r.literal for r in imp.one_step_support.conditions}
        if used == child_lits:
            return True
    return False


# ---------------------------------------------------------------------------
# iterative fragments


@dataclass(frozen=True)
class StepFragment:
    """A one-step inference as emitted by the iterative generator.

    ``conditions`` hold context/previous-fragment ids, or literals for
    negation-as-failure assumptions; ``id`` is the sentence id the
    implication received when appended to the context.
    """

    implication: Literal
    rule: SentenceId
    conditions: tuple[SentenceId | Literal, ...]
    id: SentenceId | None = None


def assemble_iterative_proof(chain: list[StepFragment], target: Literal, t: Theory) -> ProofDag:
    """Splice one-step fragments into a full proof of ``target``."""
    facts = t.fact_index
    by_id: dict[SentenceId, StepFragment] = {}
    for frag in chain:
        if frag.id is not None:
            by_id[frag.id] = frag
    by_lit = {frag.implication: frag for frag in chain}
    memo: dict[SentenceId, ProofNode] = {}

    def build(frag: StepFragment, stack: tuple) -> ProofNode:
        if frag.implication in stack:
            raise DanglingReference(f"fragment for {frag.implication} depends on itself")
        kids = []
        for c in frag.conditions:
            if isinstance(c, Literal):
                kids.append(ProofNode.naf(c))
            elif c in facts:
                kids.append(ProofNode.leaf(facts[c]))
            elif c in by_id:
                if c not in memo:
                    memo[c] = build(by_id[c], stack + (frag.implication,))
                kids.append(memo[c])
            else:
                raise DanglingReference(f"{c} is neither in the context nor the chain")
        return ProofNode.conc(frag.implication, frag.rule, kids)

    for f in t.facts:
        if f.literal == target:
            return ProofDag(ProofNode.leaf(f))
    if target not in by_lit:
        raise DanglingReference("target is not concluded by any fragment")
    return ProofDag(build(by_lit[target], ()))
