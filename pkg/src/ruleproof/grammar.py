"""Templated English <-> logic.

The accepted language is closed; docs/grammar.md lists the productions.
Parsing is a small recursive-descent pass over word tokens.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .theory import (
    VAR,
    Atom,
    Fact,
    Literal,
    Mode,
    Rule,
    SentenceId,
    Theory,
    signature_of,
)


class ParseError(ValueError):
    def __init__(self, message: str, offset: int = 0, expected: tuple[str, ...] = ()):
        self.offset = offset
        self.expected = tuple(expected)
        detail = f" (expected one of: {', '.join(expected)})" if expected else ""
        super().__init__(f"{message} at offset {offset}{detail}")


class UnrenderableLiteral(ValueError):
    pass


# third-person singular forms; anything else falls back to "+s"
DEFAULT_VERBS = {
    "chase": "chases",
    "eat": "eats",
    "like": "likes",
    "need": "needs",
    "see": "sees",
    "visit": "visits",
}

_VARIABLE_WORDS = {"someone", "something", "it", "they", "them"}
_RESERVED = {
    "is", "are", "not", "does", "do", "and", "then", "if", "all", "the",
    "people", "things", "a", "an",
} | _VARIABLE_WORDS

_WORD_RE = re.compile(r"\S+")
_BARE_WORD = re.compile(r"^[a-z][a-z\-]*$")


@dataclass(frozen=True)
class GrammarProfile:
    world: str = "people"  # or "animals"
    verbs: dict = field(default_factory=lambda: dict(DEFAULT_VERBS))

    @property
    def indefinite(self) -> str:
        return "someone" if self.world == "people" else "something"

    @property
    def subject_pronoun(self) -> str:
        return "they" if self.world == "people" else "it"

    @property
    def object_pronoun(self) -> str:
        return "them" if self.world == "people" else "it"

    def third_person(self, verb: str) -> str:
        if verb in self.verbs:
            return self.verbs[verb]
        if not _BARE_WORD.match(verb):
            raise UnrenderableLiteral(f"no third-person form for verb {verb!r}")
        if verb.endswith(("s", "sh", "ch", "x", "z")):
            return verb + "es"
        return verb + "s"

    def base_form(self, word: str) -> str | None:
        """Map a third-person form back to its base verb, or None."""
        for base, third in self.verbs.items():
            if word == third:
                return base
        return None


PEOPLE = GrammarProfile("people")
ANIMALS = GrammarProfile("animals")


def profile_for(theory_or_entities) -> GrammarProfile:
    if isinstance(theory_or_entities, Theory):
        entities = signature_of(theory_or_entities).entities
    else:
        entities = theory_or_entities
    return ANIMALS if any(e.startswith("the ") for e in entities) else PEOPLE


# ---------------------------------------------------------------------------
# rendering


def _entity(e: str, sentence_start: bool) -> str:
    if sentence_start and e.startswith("the "):
        return "The" + e[3:]
    return e


def render_fact(lit: Literal, profile: GrammarProfile = PEOPLE, end: str = ".") -> str:
    if not lit.is_ground:
        raise UnrenderableLiteral("facts must be ground")
    return _clause(lit, profile, {}, sentence_start=True) + end


def render_question(lit: Literal, profile: GrammarProfile = PEOPLE) -> str:
    return render_fact(lit, profile, end="?")


def _term(t: str, profile: GrammarProfile, state: dict, subject: bool, start: bool) -> tuple[str, bool]:
    """Render a term; returns (text, plural) where plural marks 'they'."""
    if t != VAR:
        return _entity(t, start), False
    if not state.get("introduced"):
        state["introduced"] = True
        return profile.indefinite, False
    if subject:
        return profile.subject_pronoun, profile.subject_pronoun == "they"
    return profile.object_pronoun, False


def _clause(lit: Literal, profile: GrammarProfile, state: dict, sentence_start: bool = False) -> str:
    a = lit.atom
    subj, plural = _term(a.subject, profile, state, subject=True, start=sentence_start)
    if not a.is_relation:
        be = "are" if plural else "is"
        neg = "" if lit.positive else " not"
        return f"{subj} {be}{neg} {a.pred}"
    obj, _ = _term(a.object, profile, state, subject=False, start=False)
    if lit.positive:
        verb = a.pred if plural else profile.third_person(a.pred)
        return f"{subj} {verb} {obj}"
    aux = "do" if plural else "does"
    profile.third_person(a.pred)  # validates the verb
    return f"{subj} {aux} not {a.pred} {obj}"


def render_rule(rule: Rule, profile: GrammarProfile = PEOPLE) -> str:
    state: dict = {}
    parts: list[str] = []
    conds = list(rule.conditions)
    i = 0
    while i < len(conds):
        c = conds[i]
        clause = _clause(c, profile, state)
        # "someone is rough and young": merge attribute runs on the variable
        if not c.atom.is_relation and c.atom.subject == VAR:
            j = i + 1
            while j < len(conds) and not conds[j].atom.is_relation and conds[j].atom.subject == VAR:
                nxt = conds[j]
                clause += " and " + ("" if nxt.positive else "not ") + nxt.atom.pred
                j += 1
            i = j
        else:
            i += 1
        parts.append(clause)
    body = " and ".join(parts)
    head = _clause(rule.conclusion, profile, state)
    return f"If {body} then {head}."


def render_sentence(s: Fact | Rule, profile: GrammarProfile = PEOPLE) -> str:
    if isinstance(s, Fact):
        return render_fact(s.literal, profile)
    return render_rule(s, profile)


def sentence_text(s: Fact | Rule, profile: GrammarProfile = PEOPLE) -> str:
    """Original surface text when known, canonical rendering otherwise."""
    return s.text if s.text is not None else render_sentence(s, profile)


def render_context(t: Theory, profile: GrammarProfile | None = None) -> str:
    profile = profile or profile_for(t)
    return " ".join(f"{s.id}: {sentence_text(s, profile)}" for s in t.ordered_sentences())


# ---------------------------------------------------------------------------
# parsing


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.words: list[tuple[str, int]] = []
        for m in _WORD_RE.finditer(text):
            w, start = m.group(), m.start()
            # split trailing punctuation into separate tokens
            trail = []
            while w and w[-1] in ".,?":
                trail.append((w[-1], start + len(w) - 1))
                w = w[:-1]
            if w:
                self.words.append((w, start))
            self.words.extend(reversed(trail))
        self.pos = 0

    def peek(self, k: int = 0) -> str | None:
        i = self.pos + k
        return self.words[i][0] if i < len(self.words) else None

    def offset(self) -> int:
        if self.pos < len(self.words):
            return self.words[self.pos][1]
        return len(self.text)

    def take(self) -> str:
        w = self.peek()
        if w is None:
            raise ParseError("unexpected end of sentence", self.offset())
        self.pos += 1
        return w

    def expect(self, *options: str) -> str:
        w = self.peek()
        if w is None or w.lower() not in options:
            raise ParseError(f"unexpected {w!r}" if w else "unexpected end of sentence", self.offset(), options)
        self.pos += 1
        return w

    def accept(self, *options: str) -> str | None:
        w = self.peek()
        if w is not None and w.lower() in options:
            self.pos += 1
            return w
        return None


class _Parser:
    def __init__(self, text: str, profile: GrammarProfile):
        self.toks = _Tokens(text)
        self.profile = profile

    def fail(self, message: str, expected: tuple[str, ...] = ()) -> ParseError:
        return ParseError(message, self.toks.offset(), expected)

    # -- lexical helpers

    def is_verb3(self, w: str | None, nxt: str | None) -> bool:
        if w is None:
            return False
        if self.profile.base_form(w):
            return True
        # unknown verb: a bare "-s" word followed by the start of a term
        return (
            _BARE_WORD.match(w) is not None
            and w.endswith("s")
            and w not in _RESERVED
            and self.starts_term(nxt)
        )

    def verb_base(self, w: str) -> str:
        base = self.profile.base_form(w)
        if base:
            return base
        if w.endswith(("sses", "shes", "ches", "xes", "zes")):
            return w[:-2]
        return w[:-1]

    @staticmethod
    def starts_term(w: str | None) -> bool:
        if w is None:
            return False
        lw = w.lower()
        return lw == "the" or lw in _VARIABLE_WORDS or (w[0].isupper() and w.isalpha() and lw not in _RESERVED)

    # -- terms

    def term(self, allow_var: bool) -> str:
        toks = self.toks
        w = toks.peek()
        if w is None:
            raise self.fail("expected a subject or object", ("the", "<Name>", "someone", "something"))
        lw = w.lower()
        if lw in _VARIABLE_WORDS:
            if not allow_var:
                raise self.fail(f"variable {w!r} outside a rule")
            toks.take()
            return VAR
        if lw == "the":
            toks.take()
            words = []
            while True:
                nxt = toks.peek()
                if nxt is None or nxt in ".,?" or nxt.lower() in _RESERVED:
                    break
                if self.is_verb3(nxt, toks.peek(1)):
                    break
                if not _BARE_WORD.match(nxt):
                    break
                words.append(toks.take())
            if not words:
                raise self.fail("expected a noun after 'the'")
            return "the " + " ".join(words)
        if w[0].isupper() and w.isalpha() and lw not in _RESERVED:
            toks.take()
            return w
        raise self.fail(f"unexpected {w!r}", ("the", "<Name>", "someone", "something"))

    def attribute(self) -> str:
        w = self.toks.peek()
        if w is None or not _BARE_WORD.match(w) or w in _RESERVED:
            raise self.fail(f"expected an attribute, got {w!r}", ("<attribute>",))
        return self.toks.take()

    # -- clauses

    def predicate(self, subject: str, allow_var: bool, allow_attr_run: bool) -> list[Literal]:
        """Everything after the subject of a clause."""
        toks = self.toks
        w = toks.peek()
        lw = (w or "").lower()
        if lw in ("is", "are"):
            toks.take()
            out = []
            positive = toks.accept("not") is None
            out.append(Literal(Atom(self.attribute(), subject), positive))
            while allow_attr_run and toks.peek() == "and" and not self.starts_term(toks.peek(1)):
                toks.take()
                positive = toks.accept("not") is None
                out.append(Literal(Atom(self.attribute(), subject), positive))
            return out
        if lw in ("does", "do"):
            toks.take()
            toks.expect("not")
            verb = toks.peek()
            if verb is None or not _BARE_WORD.match(verb) or verb in _RESERVED:
                raise self.fail("expected a verb", ("<verb>",))
            toks.take()
            obj = self.term(allow_var)
            return [Literal(Atom(verb, subject, obj), False)]
        if self.is_verb3(w, toks.peek(1)):
            toks.take()
            obj = self.term(allow_var)
            return [Literal(Atom(self.verb_base(w), subject, obj), True)]
        if subject == VAR and w and _BARE_WORD.match(w) and w not in _RESERVED and self.starts_term(toks.peek(1)):
            # plural agreement: "they chase the cat"
            toks.take()
            obj = self.term(allow_var)
            return [Literal(Atom(w, subject, obj), True)]
        raise self.fail(f"unexpected {w!r}" if w else "unexpected end of sentence", ("is", "are", "does", "<verb>"))

    def clause(self, allow_var: bool, allow_attr_run: bool) -> list[Literal]:
        subject = self.term(allow_var)
        return self.predicate(subject, allow_var, allow_attr_run)

    # -- sentences

    def sentence(self) -> tuple[list[Literal], Literal | None]:
        """Returns (conditions, conclusion); a fact has no conditions."""
        toks = self.toks
        first = toks.peek()
        if first is None:
            raise self.fail("empty sentence")
        lf = first.lower()
        if lf == "if":
            toks.take()
            conds = self.clause(True, True)
            while toks.accept("and"):
                conds.extend(self.clause(True, True))
            toks.expect("then")
            concl = self.clause(True, False)
            self.end()
            return conds, concl[0]
        if lf == "all":
            toks.take()
            return self.generic(first_adj_capital=False)
        if first[0].isupper() and first.lower() not in _RESERVED and self._looks_generic():
            return self.generic(first_adj_capital=True)
        lits = self.clause(False, False)
        self.end()
        return [], lits[0]

    def _looks_generic(self) -> bool:
        # "Big things are young." / "Rough, white people are smart."
        words = [w for w, _ in self.toks.words[self.toks.pos:]]
        for w in words:
            if w.lower() in ("people", "things"):
                return True
            if w.lower() in ("is", "does") or self.profile.base_form(w):
                return False
        return False

    def generic(self, first_adj_capital: bool) -> tuple[list[Literal], Literal]:
        toks = self.toks
        adjs = []
        w = toks.peek()
        if first_adj_capital and w is not None:
            # lower-case the leading adjective only for parsing
            toks.words[toks.pos] = (w[0].lower() + w[1:], toks.words[toks.pos][1])
        adjs.append(self.attribute())
        while toks.accept(","):
            adjs.append(self.attribute())
        toks.expect("people", "things")
        toks.expect("are")
        positive = toks.accept("not") is None
        concl = Literal(Atom(self.attribute(), VAR), positive)
        self.end()
        return [Literal(Atom(a, VAR)) for a in adjs], concl

    def end(self) -> None:
        if self.toks.accept(".", "?") is None:
            raise self.fail("expected end of sentence", (".",))
        if self.toks.peek() is not None:
            raise self.fail(f"trailing input {self.toks.peek()!r}")


def parse_sentence(s: str, sid: SentenceId | str | None = None, profile: GrammarProfile = PEOPLE) -> Fact | Rule:
    """Parse one templated sentence into a Fact or Rule.

    ``sid`` defaults to ``sent1``; the original text is kept on the result.
    """
    if sid is None:
        sid = SentenceId("sent", 1)
    elif isinstance(sid, str):
        sid = SentenceId.parse(sid)
    p = _Parser(s, profile)
    conds, concl = p.sentence()
    if not conds:
        return Fact(sid, concl, text=s.strip())
    lits = list(conds) + [concl]
    if any(l.has_var for l in lits) and not any(c.has_var for c in conds):
        raise ParseError("pronoun without an antecedent", 0)
    return Rule(sid, tuple(conds), concl, text=s.strip())


def parse_literal(s: str, profile: GrammarProfile = PEOPLE) -> Literal:
    """Parse a ground fact or question ("Charlie is not kind?")."""
    result = parse_sentence(s, profile=profile)
    if not isinstance(result, Fact):
        raise ParseError("expected a fact, got a rule", 0)
    return result.literal


_CTX_ID = re.compile(r"(?:(?<=\s)|^)((?:sent|fact|rule|triple)[1-9][0-9]*):\s")


def split_context(ctx: str) -> list[tuple[str, str]]:
    """Split "sent1: ... sent2: ..." into (id, text) pairs."""
    ctx = ctx.strip()
    if not ctx:
        return []
    matches = list(_CTX_ID.finditer(ctx))
    if not matches or matches[0].start() != 0:
        raise ParseError("context must start with a sentence id", 0, ("sent1:",))
    out = []
    for m, nxt in zip(matches, matches[1:] + [None]):
        end = nxt.start() if nxt else len(ctx)
        out.append((m.group(1), ctx[m.end():end].strip()))
    return out


def parse_context(ctx: str, mode: Mode | str = Mode.CWA, profile: GrammarProfile = PEOPLE) -> Theory:
    facts, rules = [], []
    for sid, text in split_context(ctx):
        s = parse_sentence(text, sid, profile)
        (facts if isinstance(s, Fact) else rules).append(s)
    return Theory(tuple(facts), tuple(rules), Mode.parse(mode))
