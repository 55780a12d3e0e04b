"""Acceptance criteria, one ``test_criterion_*`` per item.

The conftest prints a PASS/FAILED line per criterion at the end of the run.
Criteria 1a and 1e are implemented exactly as stated and fail; the ``_adapted``
siblings check what the reference example does establish.
"""

import random
import statistics
import string
import time
import warnings
from dataclasses import dataclass, field, replace

import pytest

from ruleproof.abduction import abduce_all, abduce_single_fact
from ruleproof.bridge import OneStepRequest, SymbolicBackend, answer_from_trace, iterate_to_fixpoint
from ruleproof.datagen import GenConfig, gen_dataset, gen_theory, theory_seed
from ruleproof.grammar import ANIMALS, PEOPLE, parse_context, parse_literal, profile_for, render_context, render_fact
from ruleproof.inference import StratificationError, answer, check_stratifiable, closure
from ruleproof.metrics import f1, score_abduction, score_enumeration, score_qa
from ruleproof.proofs import (
    CONC,
    FACT,
    NAF,
    MalformedProof,
    ProofDag,
    ProofNode,
    all_proofs,
    canonicalize,
    decode_proof,
    proof_to_string,
    shortest_proofs,
    verify_proof,
)
from ruleproof.theory import Mode, TruthValue, ground_literal_space, lint, signature_of

from golden import (
    CHARLIE_CONTEXT,
    CHARLIE_PROOF,
    COW_STEP_INPUT,
    DAVE_CONTEXT,
    LION_CONTEXT,
    LION_IMPLICATIONS,
    LION_PROOF,
)
from oracles import andor_proofs, brute_force_abduction, isomorphic, naive_closure, to_andor
from randtheory import theories as random_theories

PER_MODE = 1000
RANDOM_SHARE = 600
CAP = 5000
LOOP_SEEDS = range(5)


@dataclass
class Case:
    t: object
    cl: object
    proofs: dict = field(default_factory=dict)
    unknown: list = field(default_factory=list)
    abduced: dict = field(default_factory=dict)
    source: str = "random"


def _build(mode: Mode) -> list[Case]:
    ts = [(t, "random") for t in random_theories(mode, RANDOM_SHARE, seed=2024)]
    for i in range(PER_MODE - RANDOM_SHARE):
        cfg = GenConfig(mode=mode, target_depth=i % 6)
        ts.append((gen_theory(cfg, random.Random(theory_seed(99, i)))[0], "generated"))
    cases = []
    for t, source in ts:
        cl = closure(t)
        case = Case(t, cl, source=source)
        case.proofs = {q: all_proofs(t, q, cap=CAP, cl=cl) for q in cl.known}
        if mode is Mode.OWA:
            case.unknown = [q for q in ground_literal_space(signature_of(t)) if cl.truth(q) is TruthValue.UNKNOWN]
            case.abduced = abduce_all(t, case.unknown)
        cases.append(case)
    return cases


@pytest.fixture(scope="module")
def corpus():
    start = time.perf_counter()
    built = {mode: _build(mode) for mode in (Mode.CWA, Mode.OWA)}
    return built, time.perf_counter() - start


def all_cases(corpus):
    built, _ = corpus
    return [c for mode in (Mode.CWA, Mode.OWA) for c in built[mode]]


# ---------------------------------------------------------------------------
# 1. golden examples


@pytest.fixture(scope="module")
def charlie():
    return parse_context(CHARLIE_CONTEXT)


def _answer_and_proof(t, question, dialect="percent"):
    profile = profile_for(t)
    q = parse_literal(question, profile)
    value, depth = answer(t, q)
    target = q if value is TruthValue.TRUE else q.negate()
    proofs = shortest_proofs(all_proofs(t, target))
    enc = proof_to_string(proofs[0], dialect, profile) if proofs else "None"
    return value, depth, enc


def test_criterion_1a(charlie):
    # as stated: the golden string proves "Charlie is quiet.", not "Charlie is kind."
    value, _, enc = _answer_and_proof(charlie, "Charlie is not kind?")
    assert value is TruthValue.FALSE
    assert enc == CHARLIE_PROOF


def test_criterion_1a_adapted(charlie):
    value, depth, enc = _answer_and_proof(charlie, "Charlie is not quiet?")
    assert (value, depth) == (TruthValue.FALSE, 3)
    assert enc == CHARLIE_PROOF


def test_criterion_1b():
    t = parse_context(LION_CONTEXT, Mode.OWA)
    value, depth, enc = _answer_and_proof(t, "The lion is not nice?", "at")
    assert value is TruthValue.TRUE and depth == 5
    assert enc == LION_PROOF


def test_criterion_1c():
    rec_context = COW_STEP_INPUT.split("$context$ = ", 1)[1]
    seen = {(r.answer, r.proof) for r in (SymbolicBackend(Mode.CWA, s)(OneStepRequest(rec_context)) for s in range(50))}
    assert ("The cow is rough.", "# sent2 sent12") in seen


def test_criterion_1d():
    t = parse_context(LION_CONTEXT, Mode.OWA)
    got = [render_fact(lit, ANIMALS) for lit in closure(t).implications]
    assert len(got) == 9 and set(got) == set(LION_IMPLICATIONS)


def test_criterion_1e():
    t = parse_context(DAVE_CONTEXT, Mode.OWA)
    got = {render_fact(m, PEOPLE) for m in abduce_single_fact(t, parse_literal("Dave is rough.")).missing_facts}
    assert got == {"Dave is young.", "Dave is smart."}


def test_criterion_1e_adapted():
    # exhaustive single-fact abduction also admits "Dave is white." (rule4 then rule3)
    t = parse_context(DAVE_CONTEXT, Mode.OWA)
    q = parse_literal("Dave is rough.")
    got = {render_fact(m, PEOPLE) for m in abduce_single_fact(t, q).missing_facts}
    assert {"Dave is young.", "Dave is smart."} <= got
    assert got == {render_fact(m, PEOPLE) for m in brute_force_abduction(t, q)}
    assert got - {"Dave is young.", "Dave is smart."} == {"Dave is white."}


def test_criterion_1_runtime(charlie):
    start = time.perf_counter()
    _answer_and_proof(parse_context(CHARLIE_CONTEXT), "Charlie is not quiet?")
    _answer_and_proof(parse_context(LION_CONTEXT, Mode.OWA), "The lion is not nice?", "at")
    rec_context = COW_STEP_INPUT.split("$context$ = ", 1)[1]
    for s in range(50):
        SymbolicBackend(Mode.CWA, s)(OneStepRequest(rec_context))
    closure(parse_context(LION_CONTEXT, Mode.OWA))
    abduce_single_fact(parse_context(DAVE_CONTEXT, Mode.OWA), parse_literal("Dave is rough."))
    assert time.perf_counter() - start < 1.0


# ---------------------------------------------------------------------------
# 2. oracle equivalence


@pytest.mark.slow
def test_criterion_2(corpus):
    built, build_time = corpus
    start = time.perf_counter()
    rng = random.Random(2)
    abduction_checked = 0
    for mode, cases in built.items():
        assert len(cases) >= PER_MODE
        for c in cases:
            assert len(c.t.facts) + len(c.t.rules) <= 25
            assert len(signature_of(c.t).entities) <= 6
            known, depth = naive_closure(c.t)
            assert set(c.cl.known) == known
            assert dict(c.cl.depth) == depth
            for q, ps in c.proofs.items():
                expected = andor_proofs(c.t, q, CAP)
                got = {to_andor(p) for p in ps}
                assert len(ps) == len(got) == min(len(expected), CAP)
                if ps.truncated:
                    assert len(expected) > CAP and got <= expected
                else:
                    assert got == expected
            if mode is Mode.OWA and c.unknown:
                qs = c.unknown if c.source == "random" else rng.sample(c.unknown, min(3, len(c.unknown)))
                for q in qs:
                    assert set(c.abduced[q].missing_facts) == brute_force_abduction(c.t, q)
                    abduction_checked += 1
    assert abduction_checked >= 1000
    assert build_time + (time.perf_counter() - start) < 300


# ---------------------------------------------------------------------------
# 3. codec


def _check_valid_dag(dag, t):
    ids = {str(s.id): s for s in t.sentences()}
    assert isinstance(dag, ProofDag) and isinstance(dag.root, ProofNode)
    for n in dag.root.walk():
        assert n.kind in (FACT, NAF, CONC)
        if n.kind == FACT:
            assert str(n.sid) in ids and not n.children
        elif n.kind == NAF:
            assert not n.children and not n.literal.positive
        else:
            assert str(n.rule) in ids and n.children
    verify_proof(dag, t)


_NOISE = ["#", "&", "%", "@", ";", "with", ":", "conc1", "int2", "naf1", "fact1", "rule1", "sent3", "None",
          "%conc9", "@int7", "is", "not", ".", "?", "sent99", "rule0", "=", "the"]


def _mutate(s: str, ids: list[str], rng: random.Random) -> str:
    toks = s.split(" ")
    op = rng.randrange(8)
    i = rng.randrange(len(toks))
    if op == 0 and len(toks) > 1:
        del toks[i]
    elif op == 1:
        toks.insert(i, rng.choice(_NOISE + ids))
    elif op == 2:
        toks[i] = rng.choice(_NOISE + ids)
    elif op == 3 and len(toks) > 1:
        j = rng.randrange(len(toks))
        toks[i], toks[j] = toks[j], toks[i]
    elif op == 4:
        return s[: rng.randrange(len(s) + 1)]
    elif op == 5:
        k = rng.randrange(len(s) + 1)
        return s[:k] + "".join(rng.choice(string.printable) for _ in range(rng.randint(1, 4))) + s[k:]
    elif op == 6:
        toks = toks[:i] + toks[i:][::-1]
    else:
        toks.insert(i, toks[rng.randrange(len(toks))])
    return " ".join(toks)


@pytest.mark.slow
def test_criterion_3(corpus):
    start = time.perf_counter()
    pool = []
    for c in all_cases(corpus):
        profile = profile_for(c.t)
        for q, ps in c.proofs.items():
            for p in ps:
                for dialect in ("percent", "at"):
                    enc = proof_to_string(p, dialect, profile)
                    back = decode_proof(enc, c.t, q)
                    assert isomorphic(back, p)
                    pool.append((enc, c.t))
    rng = random.Random(3)
    outcomes = {"malformed": 0, "dag": 0}
    for _ in range(10_000):
        enc, t = rng.choice(pool)
        ids = [str(s.id) for s in t.sentences()]
        bad = enc
        for _ in range(rng.randint(1, 3)):
            bad = _mutate(bad, ids, rng)
        try:
            dag = decode_proof(bad, t)
        except MalformedProof:
            outcomes["malformed"] += 1
            continue
        outcomes["dag"] += 1
        if dag is not None:
            _check_valid_dag(dag, t)
    assert outcomes["malformed"] > 0 and outcomes["dag"] > 0
    assert time.perf_counter() - start < 120


# ---------------------------------------------------------------------------
# 4. verification


def _rebuild(node, target, make):
    if node is target:
        return make(node)
    if not node.children:
        return node
    return replace(node, children=tuple(_rebuild(ch, target, make) for ch in node.children))


def _conclusion_key(lit):
    return lit.atom.pred, lit.atom.is_relation, lit.positive


@pytest.mark.slow
def test_criterion_4(corpus):
    cases = all_cases(corpus)
    for c in cases:
        for ps in c.proofs.values():
            for p in ps:
                assert verify_proof(p, c.t, cl=c.cl).fully_verified
        trace, _ = iterate_to_fixpoint(c.t, SymbolicBackend(c.t.mode, 0))
        for lit in c.cl.known:
            res = answer_from_trace(c.t, lit, trace)
            if res.proof is not None:
                assert verify_proof(res.proof, c.t).fully_verified

    rng = random.Random(4)
    flagged = 0
    for c in cases:
        rules = {r.id: r for r in c.t.rules}
        deep = [p for ps in c.proofs.values() for p in ps if p.depth >= 1]
        for p in rng.sample(deep, min(3, len(deep))):
            steps = [n for n in p.root.walk() if n.kind == CONC]
            node = rng.choice(steps)
            key = _conclusion_key(node.literal)
            # a swapped-in rule whose conclusion has another predicate cannot justify the step
            others = [r for r in rules.values() if _conclusion_key(r.conclusion) != key]
            if others:
                wrong = rng.choice(others).id
                bad = ProofDag(_rebuild(p.root, node, lambda n: replace(n, rule=wrong)))
                rep = verify_proof(bad, c.t)
                assert rep.status == "failed" and rep.failed_step == str(wrong)
                flagged += 1
            inner = [n for n in steps if n is not p.root]
            if inner:
                node = rng.choice(inner)
                decoys = [lit for lit in c.cl.known if _conclusion_key(lit) != _conclusion_key(node.literal)]
                if decoys:
                    decoy = rng.choice(sorted(decoys))
                    bad = ProofDag(_rebuild(p.root, node, lambda n: replace(n, literal=decoy)))
                    rep = verify_proof(bad, c.t)
                    assert rep.status == "failed" and rep.failed_step == str(node.rule)
                    flagged += 1
    assert flagged >= 1000


# ---------------------------------------------------------------------------
# 5. iterative loop


@pytest.mark.slow
def test_criterion_5(corpus):
    checked = 0
    for c in all_cases(corpus):
        canon = {q: {canonicalize(p): p for p in ps} for q, ps in c.proofs.items()}
        questions = ground_literal_space(signature_of(c.t))
        for seed in LOOP_SEEDS:
            # the trace does not depend on the question, so it is generated once per seed
            trace, current = iterate_to_fixpoint(c.t, SymbolicBackend(c.t.mode, seed))
            assert {f.implication for f in trace} == set(c.cl.implications)
            for q in questions:
                res = answer_from_trace(c.t, q, trace, current)
                value, depth = answer(c.t, q, c.cl)
                assert res.answer is value
                # the spliced proof follows generation order, so it may be deeper than the shallowest one
                assert (res.depth is None) == (depth is None) and (depth is None or res.depth >= depth)
                if res.proof is not None:
                    target = q if res.answer is TruthValue.TRUE else q.negate()
                    match = canon[target].get(canonicalize(res.proof))
                    assert match is not None and isomorphic(res.proof, match)
                checked += 1
    assert checked >= 2 * PER_MODE * len(LOOP_SEEDS)


# ---------------------------------------------------------------------------
# 6. dataset statistics (soft)


@pytest.mark.slow
def test_criterion_6():
    problems = []
    _, stats = gen_dataset("qa", GenConfig(mode=Mode.CWA, target_depth=5, seed=0), 1000)
    per_theory = [s["implications"] for s in stats]
    mean, top = statistics.mean(per_theory), max(per_theory)
    print(f"D5-CWA implications per theory: mean {mean:.2f} (envelope [8, 12]), max {top} (limit 25)")
    if not 8 <= mean <= 12:
        problems.append(f"D5 implication mean {mean:.2f} outside [8, 12]")
    if top > 25:
        problems.append(f"D5 implication max {top} above 25")
    ex, _ = gen_dataset("abduction", GenConfig(mode=Mode.OWA, target_depth=3, seed=0), 300)
    missing = statistics.mean(len(e["answer"]) for e in ex)
    print(f"D3 abduction missing facts per question: mean {missing:.2f} (envelope [0.7, 1.6])")
    if not 0.7 <= missing <= 1.6:
        problems.append(f"abduction mean {missing:.2f} outside [0.7, 1.6]")
    for msg in problems:
        warnings.warn(msg)


# ---------------------------------------------------------------------------
# 7. scoring


def _self_predictions(golds):
    return [{"id": g["id"], "answer": g["answer"], "proof": g["proofs"][0] if g["proofs"] else "None"} for g in golds]


def test_criterion_7():
    for mode in (Mode.CWA, Mode.OWA):
        for depth in (0, 3, 5):
            golds, _ = gen_dataset("qa", GenConfig(mode=mode, target_depth=depth, seed=depth), 15)
            for skeleton in (False, True):
                rep = score_qa(_self_predictions(golds), golds, skeleton)
                assert all(set(r.values.values()) == {1.0} for r in rep.rows)
        golds, _ = gen_dataset("enumeration", GenConfig(mode=mode, target_depth=4, seed=1), 40)
        rep = score_enumeration(_self_predictions(golds), golds)
        assert all(r.values == {"set_acc": 1.0, "f1": 1.0} for r in rep.rows)
    golds, _ = gen_dataset("abduction", GenConfig(mode=Mode.OWA, target_depth=3, seed=2), 30)
    rep = score_abduction(_self_predictions(golds), golds)
    assert rep.summary["f1"] == 1.0 and rep.summary["acc"] == 1.0
    assert all(r.values["recall"] == 1.0 for r in rep.rows)

    gold = set(LION_IMPLICATIONS)
    assert f1(set(LION_IMPLICATIONS[:8]), gold) == pytest.approx(0.941, abs=5e-4)
    assert f1(set(LION_IMPLICATIONS[:8]), gold) == pytest.approx(16 / 17, abs=1e-9)
    assert f1({"Dave is young."}, {"Dave is young.", "Dave is smart."}) == pytest.approx(2 / 3, abs=1e-9)


# ---------------------------------------------------------------------------
# 8. stratification and repairs


@pytest.mark.slow
def test_criterion_8():
    cyclic = parse_context("sent1: If Bob is not red then Bob is blue. sent2: If Bob is blue then Bob is red.")
    with pytest.raises(StratificationError) as exc:
        check_stratifiable(cyclic)
    assert {("attr", "red"), ("attr", "blue")} <= set(exc.value.cycle)

    for i in range(10_000):
        cfg = GenConfig(mode=Mode.CWA, target_depth=i % 6)
        t, _ = gen_theory(cfg, random.Random(theory_seed(8, i)))
        text = render_context(t, profile_for(t))
        reparsed = parse_context(text, Mode.CWA, profile_for(t))
        assert lint(t) == [] and lint(reparsed) == []
