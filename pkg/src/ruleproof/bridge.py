"""Pluggable one-step generator and the iterative inference loop.

A backend is any callable taking a :class:`OneStepRequest` and returning a
:class:`OneStepResponse`.  :class:`SymbolicBackend` answers from the
inference engine; :class:`RemoteBackend` posts ``{"input": ...}`` to an HTTP
endpoint and expects ``{"output": ...}`` back.
"""
from __future__ import annotations

import json
import os
import random
import re
import time
import urllib.error
import urllib.request
from dataclasses import dataclass, field

from .grammar import GrammarProfile, ParseError, parse_context, parse_literal, profile_for, render_context, render_fact, split_context
from .inference import one_step_inferences
from .proofs import NONE, ProofDag, StepFragment, assemble_iterative_proof, encode_step, split_encoded
from .t5 import ONE_STEP_QUESTION, FormatError, T5Record, export_t5, import_t5_string
from .theory import Fact, Literal, Mode, SentenceId, Theory, TruthValue

ENV_URL = "PROOFWRITER_GENERATOR_URL"


class BridgeError(RuntimeError):
    pass


class RemoteUnavailable(BridgeError):
    pass


class MalformedResponse(BridgeError):
    pass


class UnknownIdInProof(MalformedResponse):
    pass


class IterationLimit(BridgeError):
    pass


class ContextLimit(BridgeError):
    pass


@dataclass(frozen=True)
class OneStepRequest:
    context: str
    question: str = ONE_STEP_QUESTION

    def to_t5(self) -> str:
        return export_t5(T5Record("iterative", "input", question=self.question, context=split_context(self.context)))

    @classmethod
    def from_theory(cls, t: Theory, profile: GrammarProfile | None = None) -> "OneStepRequest":
        return cls(render_context(t, profile))


@dataclass(frozen=True)
class OneStepResponse:
    answer: str
    proof: str

    @property
    def is_none(self) -> bool:
        return self.answer == NONE

    def to_t5(self) -> str:
        return export_t5(T5Record("iterative", "output", answer=self.answer, proof=self.proof))

    @classmethod
    def from_t5(cls, s: str) -> "OneStepResponse":
        try:
            rec = import_t5_string(s, task="iterative")
        except FormatError as exc:
            raise MalformedResponse(str(exc)) from exc
        if rec.side != "output":
            raise MalformedResponse("expected an output string")
        return cls(rec.answer or "", rec.proof if rec.proof is not None else NONE)


class SymbolicBackend:
    """One-step generator backed by the inference engine.

    Candidates are ordered by (rule id, condition ids); with a seed the
    order is shuffled by a private RNG, so a backend instance should drive
    a single loop.
    """

    default_max_tokens = None

    def __init__(self, mode: Mode | str = Mode.CWA, seed: int | None = None):
        self.mode = Mode.parse(mode)
        self.seed = seed
        self._rng = random.Random(seed) if seed is not None else None

    def __call__(self, req: OneStepRequest) -> OneStepResponse:
        t = parse_context(req.context, self.mode)
        profile = profile_for(t)
        cands = sorted(
            one_step_inferences(t),
            key=lambda i: (i.one_step_support.rule, [(c.kind, str(c.ref)) for c in i.one_step_support.conditions]),
        )
        if not cands:
            return OneStepResponse(NONE, NONE)
        pick = self._rng.choice(cands) if self._rng else cands[0]
        conds = [c.ref if c.kind == "context" else c.literal for c in pick.one_step_support.conditions]
        step = encode_step(pick.one_step_support.rule, conds, profile)
        return OneStepResponse(render_fact(pick.literal, profile), str(step))


class RemoteBackend:
    default_max_tokens = 512

    def __init__(self, url: str | None = None, timeout: float = 30.0, retries: int = 2):
        url = url or os.environ.get(ENV_URL)
        if not url:
            raise RemoteUnavailable(f"no generator URL given (set {ENV_URL})")
        self.url = url
        self.timeout = timeout
        self.retries = retries

    def __call__(self, req: OneStepRequest) -> OneStepResponse:
        payload = json.dumps({"input": req.to_t5()}).encode()
        last: Exception | None = None
        for attempt in range(self.retries + 1):
            try:
                http = urllib.request.Request(self.url, data=payload, headers={"Content-Type": "application/json"})
                with urllib.request.urlopen(http, timeout=self.timeout) as resp:
                    body = resp.read()
                break
            except (urllib.error.URLError, OSError) as exc:
                last = exc
                if attempt < self.retries:
                    time.sleep(0.1 * (attempt + 1))
        else:
            raise RemoteUnavailable(f"{self.url}: {last}")
        try:
            data = json.loads(body)
            out = data["output"]
            if not isinstance(out, str):
                raise TypeError("output is not a string")
        except (ValueError, KeyError, TypeError) as exc:
            raise MalformedResponse(f"bad response body: {exc}") from exc
        return OneStepResponse.from_t5(out)


_STEP_TOKEN = re.compile(r"^(?:sent|fact|rule|triple|naf)[1-9][0-9]*$")


def parse_step(resp: OneStepResponse, context_ids: set[str], profile: GrammarProfile) -> tuple[SentenceId, list[SentenceId | Literal]]:
    """Validate a one-step proof and return (rule id, conditions)."""
    try:
        enc = split_encoded(resp.proof)
    except ValueError as exc:
        raise MalformedResponse(str(exc)) from exc
    tokens = enc.body.split()
    if len(tokens) < 3 or tokens[0] != "#":
        raise MalformedResponse(f"not a one-step proof: {resp.proof!r}")
    rule_tok, rest = tokens[1], tokens[2:]
    if not _valid_conjunction(rest):
        raise MalformedResponse(f"not a one-step proof: {resp.proof!r}")
    leaves = [t for t in rest if t != "&"]
    for tok in [rule_tok] + leaves:
        if not _STEP_TOKEN.match(tok):
            raise MalformedResponse(f"unexpected token {tok!r} in one-step proof")
    bindings = dict(enc.bindings)
    for tok in [rule_tok] + leaves:
        if not tok.startswith("naf") and tok not in context_ids:
            raise UnknownIdInProof(f"{tok} is not in the context")
    conds: list[SentenceId | Literal] = []
    for tok in leaves:
        if tok.startswith("naf"):
            if tok not in bindings:
                raise MalformedResponse(f"{tok} is not bound")
            try:
                conds.append(parse_literal(bindings[tok], profile))
            except ParseError as exc:
                raise MalformedResponse(str(exc)) from exc
        else:
            conds.append(SentenceId.parse(tok))
    return SentenceId.parse(rule_tok), conds


def _valid_conjunction(tokens: list[str]) -> bool:
    pos = 0

    def ante() -> bool:
        nonlocal pos
        if pos >= len(tokens):
            return False
        tok = tokens[pos]
        pos += 1
        if tok == "&":
            return ante() and ante()
        return tok != "#"

    return ante() and pos == len(tokens)


def next_implication(req: OneStepRequest, backend) -> OneStepResponse:
    """Ask the backend for one implication and check the response's shape."""
    resp = backend(req)
    if not isinstance(resp, OneStepResponse):
        raise MalformedResponse("backend returned something other than a OneStepResponse")
    if resp.is_none:
        if resp.proof.strip() not in ("", NONE):
            raise MalformedResponse("'None' answer must pair with a 'None' proof")
        return resp
    ids = {i for i, _ in split_context(req.context)}
    parse_step(resp, ids, GrammarProfile())
    return resp


@dataclass
class LoopResult:
    answer: TruthValue
    depth: int | None
    proof: ProofDag | None
    trace: list[StepFragment] = field(default_factory=list)
    theory: Theory | None = None

    @property
    def implications(self) -> list[Literal]:
        return [f.implication for f in self.trace]


def iterate_to_fixpoint(
    t: Theory,
    backend,
    max_iterations: int = 10_000,
    max_context_tokens: int | None = None,
) -> tuple[list[StepFragment], Theory]:
    """Ask ``backend`` for one implication at a time until it answers "None".

    Returns the step fragments in generation order and the saturated theory.
    """
    if max_context_tokens is None:
        max_context_tokens = getattr(backend, "default_max_tokens", None)
    profile = profile_for(t)
    current = t
    trace: list[StepFragment] = []
    for _ in range(max_iterations):
        req = OneStepRequest.from_theory(current, profile)
        if max_context_tokens is not None and len(req.to_t5().split()) > max_context_tokens:
            raise ContextLimit(f"context exceeds {max_context_tokens} tokens after {len(trace)} steps")
        resp = next_implication(req, backend)
        if resp.is_none:
            return trace, current
        try:
            lit = parse_literal(resp.answer, profile)
        except ParseError as exc:
            raise MalformedResponse(f"unparseable implication {resp.answer!r}: {exc}") from exc
        if lit in current.fact_literals():
            raise MalformedResponse(f"{resp.answer!r} is already in the context")
        ids = {str(s.id) for s in current.sentences()}
        rule, conds = parse_step(resp, ids, profile)
        new_id = current.next_id("sent")
        trace.append(StepFragment(lit, rule, tuple(conds), new_id))
        current = Theory(current.facts + (Fact(new_id, lit, text=resp.answer),), current.rules, current.mode)
    raise IterationLimit(f"no fixpoint after {max_iterations} steps")


def answer_from_trace(t: Theory, q: Literal, trace: list[StepFragment], current: Theory | None = None) -> LoopResult:
    """Answer ``q`` from a finished trace, splicing the proof from its fragments."""
    derived = {f.implication for f in trace}
    stated = t.fact_literals()
    for target, value in ((q, TruthValue.TRUE), (q.negate(), TruthValue.FALSE)):
        if target in stated or target in derived:
            proof = assemble_iterative_proof(trace, target, t)
            return LoopResult(value, proof.depth, proof, trace, current)
    if t.mode is Mode.CWA:
        value = TruthValue.FALSE if q.positive else TruthValue.TRUE
    else:
        value = TruthValue.UNKNOWN
    return LoopResult(value, None, None, trace, current)


def run_iterative_loop(
    t: Theory,
    q: Literal,
    backend,
    max_iterations: int = 10_000,
    max_context_tokens: int | None = None,
) -> LoopResult:
    """Generate implications until the backend says "None", then answer ``q``."""
    trace, current = iterate_to_fixpoint(t, backend, max_iterations, max_context_tokens)
    return answer_from_trace(t, q, trace, current)
