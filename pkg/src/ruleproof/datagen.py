"""Seeded generation of synthetic rule theories and task datasets."""
from __future__ import annotations

import hashlib
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Any

from .abduction import abduce_all
from .grammar import ANIMALS, PEOPLE, GrammarProfile, profile_for, render_fact, render_question, sentence_text
from .inference import Closure, InconsistentTheory, StratificationError, answer, check_stratifiable, closure, strata
from .proofs import all_proofs, encode_proof, encode_step, proof_to_string
from .t5 import ENUMERATION_QUESTION, ONE_STEP_QUESTION, make_input, make_output
from .theory import (
    VAR,
    Atom,
    Fact,
    Literal,
    Mode,
    Rule,
    SentenceId,
    Theory,
    TheoryError,
    TruthValue,
    ground_literal_space,
    rule_violations,
    signature_of,
)

PEOPLE_NAMES = ["Anne", "Bob", "Charlie", "Dave", "Erin", "Fiona", "Gary", "Harry"]
ANIMAL_NAMES = ["the bald eagle", "the bear", "the cat", "the cow", "the dog", "the lion", "the mouse",
                "the rabbit", "the squirrel", "the tiger"]
ATTRIBUTES = ["big", "blue", "cold", "furry", "green", "kind", "nice", "quiet", "red", "rough", "round",
              "smart", "white", "young"]
VERBS = ["chase", "eat", "like", "need", "see", "visit"]
TASKS = ("qa", "iterative", "enumeration", "abduction")


class GenerationExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class GenConfig:
    mode: Mode = Mode.CWA
    target_depth: int = 3
    world: str | None = None  # people | animals | None (coin flip)
    entities: tuple[int, int] = (3, 4)
    attributes: tuple[int, int] = (4, 6)
    verbs: tuple[int, int] = (2, 3)
    facts: tuple[int, int] = (5, 12)
    rules: tuple[int, int] = (4, 8)
    relation_prob: float = 0.5  # animals world only
    negation_prob: float = 0.2
    variable_rule_prob: float = 0.8
    condition_weights: tuple[float, ...] = (0.45, 0.45, 0.1)  # 1, 2, 3 conditions
    chain_prob: float = 0.6
    fresh_conclusion_prob: float = 0.5
    backbone_prob: float = 0.9
    backbone_extra_condition_prob: float = 0.3
    max_implication_depth: int | None = None
    max_tries: int = 2000
    seed: int = 0
    # question sampling
    questions_per_label: int = 2
    unprovable_ratio: float = 0.4
    proof_cap: int = 5000
    dialect: str = "percent"
    abduction_questions: int = 6
    abduction_positive_only: bool = False
    abduction_answerable_share: float = 0.7
    lower_depth_mix: float = 0.2

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode.parse(self.mode))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mode"] = self.mode.value
        return d


# ---------------------------------------------------------------------------
# theories


def _rand_range(rng: random.Random, bounds: tuple[int, int]) -> int:
    return rng.randint(bounds[0], bounds[1])


class _Vocab:
    def __init__(self, cfg: GenConfig, rng: random.Random):
        self.world = cfg.world or rng.choice(["people", "animals"])
        pool = PEOPLE_NAMES if self.world == "people" else ANIMAL_NAMES
        self.entities = sorted(rng.sample(pool, _rand_range(rng, cfg.entities)))
        self.attributes = sorted(rng.sample(ATTRIBUTES, _rand_range(rng, cfg.attributes)))
        self.verbs = sorted(rng.sample(VERBS, _rand_range(rng, cfg.verbs))) if self.world == "animals" else []
        self.relation_prob = cfg.relation_prob if self.verbs else 0.0
        # predicates already stated or concluded; conditions lean towards these
        self.reachable: set[tuple[str, str]] = set()

    def atom(self, rng: random.Random, var_slot: bool = False, chain: float = 0.0, fresh: float = 0.0) -> Atom:
        """Random atom; with ``var_slot`` one argument is the rule variable.

        ``chain`` is the chance of reusing a reachable predicate, ``fresh``
        the chance of picking one that is not reachable yet.
        """
        preds = sorted(self.reachable)
        unseen = sorted({("attr", a) for a in self.attributes} | {("rel", v) for v in self.verbs} - self.reachable)
        if preds and rng.random() < chain:
            kind, pred = rng.choice(preds)
        elif unseen and rng.random() < fresh:
            kind, pred = rng.choice(unseen)
        elif rng.random() < self.relation_prob:
            kind, pred = "rel", rng.choice(self.verbs)
        else:
            kind, pred = "attr", rng.choice(self.attributes)
        if kind == "rel":
            subj, obj = rng.choice(self.entities), rng.choice(self.entities)
            if var_slot:
                if rng.random() < 0.75:
                    subj = VAR
                else:
                    obj = VAR
            return Atom(pred, subj, obj)
        return Atom(pred, VAR if var_slot else rng.choice(self.entities))


def _random_rule(sid: SentenceId, vocab: _Vocab, cfg: GenConfig, rng: random.Random) -> Rule:
    for _ in range(50):
        n = rng.choices(range(1, len(cfg.condition_weights) + 1), cfg.condition_weights)[0]
        use_var = rng.random() < cfg.variable_rule_prob
        conds: list[Literal] = []
        for i in range(n):
            var_here = use_var and (i == 0 or rng.random() < 0.7)
            negated = rng.random() < cfg.negation_prob and (i > 0 or cfg.mode is Mode.OWA)
            conds.append(Literal(vocab.atom(rng, var_here, cfg.chain_prob), not negated))
        neg_concl = cfg.mode is Mode.OWA and rng.random() < cfg.negation_prob
        concl = Literal(vocab.atom(rng, use_var and rng.random() < 0.9, fresh=cfg.fresh_conclusion_prob), not neg_concl)
        if len(set(conds)) < len(conds) or concl in conds or concl.negate() in conds:
            continue
        rule = Rule(sid, tuple(conds), concl)
        if rule_violations(rule, cfg.mode):
            continue
        vocab.reachable.add((concl.atom.key[0], concl.atom.pred))
        return rule
    raise TheoryError("could not draw a well-formed rule")


def _backbone(cfg: GenConfig, vocab: _Vocab, rng: random.Random) -> tuple[Literal, list[tuple[Literal, ...]]]:
    """A seed fact plus ``target_depth`` rules that chain from it, one step each."""
    entity = rng.choice(vocab.entities)
    preds = rng.sample(vocab.attributes, cfg.target_depth + 1)
    seed = Literal(Atom(preds[0], entity))
    chain = []
    for a, b in zip(preds, preds[1:]):
        conds = [Literal(Atom(a, VAR))]
        if rng.random() < cfg.backbone_extra_condition_prob:
            conds.append(Literal(vocab.atom(rng, rng.random() < 0.5, cfg.chain_prob), rng.random() >= cfg.negation_prob))
        chain.append((*conds, Literal(Atom(b, VAR))))
    return seed, chain


def _draw(cfg: GenConfig, rng: random.Random) -> Theory:
    vocab = _Vocab(cfg, rng)
    n_facts, n_rules = _rand_range(rng, cfg.facts), _rand_range(rng, cfg.rules)
    planted: list[tuple[Literal, ...]] = []
    seed_fact = None
    if cfg.target_depth > 0 and rng.random() < cfg.backbone_prob:
        if len(vocab.attributes) <= cfg.target_depth:
            vocab.attributes = sorted(rng.sample(ATTRIBUTES, cfg.target_depth + 1))
        seed_fact, planted = _backbone(cfg, vocab, rng)
        n_rules = max(n_rules, len(planted))
    ids = [SentenceId("sent", i) for i in range(1, n_facts + n_rules + 1)]
    rng.shuffle(ids)
    facts, seen = [], set()
    for k, sid in enumerate(ids[:n_facts]):
        for _ in range(20):
            if k == 0 and seed_fact is not None:
                lit = seed_fact
                break
            neg = cfg.mode is Mode.OWA and rng.random() < cfg.negation_prob
            lit = Literal(vocab.atom(rng), not neg)
            if lit not in seen and lit.negate() not in seen:
                break
        else:
            raise TheoryError("could not draw a fresh fact")
        seen.add(lit)
        vocab.reachable.add((lit.atom.key[0], lit.atom.pred))
        facts.append(Fact(sid, lit))
    rules = []
    for k, sid in enumerate(ids[n_facts:]):
        if k < len(planted):
            *conds, concl = planted[k]
            rule = Rule(sid, tuple(conds), concl)
            if len(set(conds)) < len(conds) or concl.negate() in conds or rule_violations(rule, cfg.mode):
                rule = Rule(sid, tuple(conds[:1]), concl)
            vocab.reachable.add(("attr", concl.atom.pred))
        else:
            rule = _random_rule(sid, vocab, cfg, rng)
        rules.append(rule)
    return Theory(tuple(sorted(facts, key=lambda f: f.id)), tuple(sorted(rules, key=lambda r: r.id)), cfg.mode)


def gen_theory(cfg: GenConfig, rng: random.Random | None = None) -> tuple[Theory, Closure]:
    """Rejection-sample a valid theory whose deepest implication reaches the target depth."""
    rng = rng or random.Random(cfg.seed)
    for _ in range(cfg.max_tries):
        try:
            t = _draw(cfg, rng)
            check_stratifiable(t)
            cl = closure(t)
        except (TheoryError, StratificationError, InconsistentTheory):
            continue
        deepest = max(cl.depth.values(), default=0)
        if deepest < cfg.target_depth:
            continue
        if cfg.max_implication_depth is not None and deepest > cfg.max_implication_depth:
            continue
        return t, cl
    raise GenerationExhausted(f"no acceptable theory after {cfg.max_tries} tries")


def theory_seed(seed: int, index: int) -> int:
    return int.from_bytes(hashlib.sha256(f"{seed}:{index}".encode()).digest()[:8], "big")


# ---------------------------------------------------------------------------
# examples


@dataclass
class DatasetExample:
    id: str
    task: str
    mode: str
    theory: list[tuple[str, str]]
    question: str
    answer: Any
    depth: Any
    proofs: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        d = asdict(self)
        d["theory"] = [{"id": i, "text": s} for i, s in self.theory]
        return d

    @classmethod
    def from_json(cls, d: dict) -> "DatasetExample":
        d = dict(d)
        d["theory"] = [(s["id"], s["text"]) for s in d["theory"]]
        return cls(**{k: d.get(k) if k != "proofs" else d.get(k, []) for k in cls.__dataclass_fields__})

    def t5_input(self) -> str:
        return make_input(self.task, self.question, self.theory)

    def t5_output(self) -> str:
        if self.task in ("enumeration", "abduction"):
            return make_output(self.task, self.answer)
        return make_output(self.task, self.answer, self.proofs[0] if self.proofs else None)


def _sentences(t: Theory, profile: GrammarProfile | None = None) -> list[tuple[str, str]]:
    profile = profile or profile_for(t)
    return [(str(s.id), sentence_text(s, profile)) for s in t.ordered_sentences()]


def gen_qa_examples(
    t: Theory,
    cfg: GenConfig,
    rng: random.Random | None = None,
    theory_id: str = "t",
    cl: Closure | None = None,
) -> list[DatasetExample]:
    """Questions balanced across truth values, each with all its proofs."""
    rng = rng or random.Random(cfg.seed)
    cl = cl or closure(t)
    profile = profile_for(t)
    pools: dict[TruthValue, dict[int | None, list[Literal]]] = {}
    for q in ground_literal_space(signature_of(t)):
        value, depth = answer(t, q, cl)
        if depth is not None and depth > cfg.target_depth:
            continue
        pools.setdefault(value, {}).setdefault(depth, []).append(q)
    labels = [TruthValue.TRUE, TruthValue.FALSE] + ([TruthValue.UNKNOWN] if t.mode is Mode.OWA else [])
    chosen: list[tuple[Literal, TruthValue, int | None]] = []
    for label in labels:
        by_depth = pools.get(label, {})
        used: set[Literal] = set()
        for _ in range(cfg.questions_per_label):
            provable = sorted(d for d in by_depth if d is not None and set(by_depth[d]) - used)
            unprovable = sorted(set(by_depth.get(None, [])) - used)
            if not provable and not unprovable:
                break
            if unprovable and (not provable or rng.random() < cfg.unprovable_ratio):
                q, d = rng.choice(unprovable), None
            else:
                d = rng.choice(provable)
                q = rng.choice(sorted(set(by_depth[d]) - used))
            used.add(q)
            chosen.append((q, label, d))
    out = []
    sents = _sentences(t, profile)
    for k, (q, label, d) in enumerate(chosen):
        proofs: list[str] = []
        if d is not None:
            target = q if label is TruthValue.TRUE else q.negate()
            proofs = [proof_to_string(p, cfg.dialect, profile) for p in all_proofs(t, target, cfg.proof_cap, cl)]
        out.append(
            DatasetExample(
                f"{theory_id}-q{k + 1}", "qa", t.mode.value, sents, render_question(q, profile),
                label.value, d, proofs,
            )
        )
    return out


def implication_order(t: Theory, cl: Closure, rng: random.Random) -> list[Literal]:
    """A random linearisation of the implications respecting proof dependencies.

    An implication follows every implication its chosen one-step support
    uses.  Under CWA, one relying on a negated condition also follows every
    implication of that condition's stratum and below, so each step is a
    valid single inference at the moment it is added.
    """
    imps = cl.implications
    deps: dict[Literal, set[Literal]] = {}
    level = strata(t) if t.mode is Mode.CWA else {}
    for lit, imp in imps.items():
        conds = imp.one_step_support.conditions
        d = {c.literal for c in conds if c.kind == "derived"}
        naf_levels = [level.get(c.literal.atom.key, -1) for c in conds if c.kind == "naf"]
        if naf_levels:
            top = max(naf_levels)
            d |= {o for o in imps if o != lit and level.get(o.atom.key, 0) <= top}
        deps[lit] = d
    order: list[Literal] = []
    done: set[Literal] = set()
    remaining = set(imps)
    while remaining:
        ready = sorted(l for l in remaining if deps[l] <= done)
        if not ready:
            raise RuntimeError("cyclic implication dependencies")
        pick = rng.choice(ready)
        order.append(pick)
        done.add(pick)
        remaining.discard(pick)
    return order


def gen_iterative_examples(
    t: Theory,
    seed: int = 0,
    theory_id: str = "t",
    cl: Closure | None = None,
) -> list[DatasetExample]:
    """k implications -> k+1 one-step examples, the last answering "None"."""
    rng = random.Random(seed)
    cl = cl or closure(t)
    profile = profile_for(t)
    order = implication_order(t, cl, rng)
    facts = list(t.facts)
    ids: dict[Literal, SentenceId] = {f.literal: f.id for f in t.facts}
    current = t
    out = []
    for k, lit in enumerate(order + [None]):
        sents = _sentences(current, profile)
        eid = f"{theory_id}-i{k + 1}"
        if lit is None:
            out.append(DatasetExample(eid, "iterative", t.mode.value, sents, ONE_STEP_QUESTION, "None", None, []))
            break
        sup = cl.implications[lit].one_step_support
        conds = [c.literal if c.kind == "naf" else ids[c.literal] for c in sup.conditions]
        step = str(encode_step(sup.rule, conds, profile))
        text = render_fact(lit, profile)
        out.append(DatasetExample(eid, "iterative", t.mode.value, sents, ONE_STEP_QUESTION, text, 1, [step]))
        new_id = current.next_id("sent")
        ids[lit] = new_id
        facts.append(Fact(new_id, lit, text=text))
        current = Theory(tuple(facts), t.rules, t.mode)
    return out


def gen_enumeration_example(t: Theory, theory_id: str = "t", cl: Closure | None = None) -> DatasetExample:
    cl = cl or closure(t)
    profile = profile_for(t)
    items = sorted((imp.depth, render_fact(imp.literal, profile)) for imp in cl.implications.values())
    return DatasetExample(
        f"{theory_id}-e", "enumeration", t.mode.value, _sentences(t, profile), ENUMERATION_QUESTION,
        [text for _, text in items], [d for d, _ in items], [],
    )


def gen_abduction_examples(
    t: Theory,
    cfg: GenConfig | None = None,
    rng: random.Random | None = None,
    theory_id: str = "t",
    cl: Closure | None = None,
    questions: list[Literal] | None = None,
) -> list[DatasetExample]:
    """Unknown-valued questions paired with every single missing fact."""
    cfg = cfg or GenConfig(mode=Mode.OWA)
    rng = rng or random.Random(cfg.seed)
    cl = cl or closure(t)
    profile = profile_for(t)
    if questions is None:
        unknown = [q for q in ground_literal_space(signature_of(t), cfg.abduction_positive_only)
                   if cl.truth(q) is TruthValue.UNKNOWN]
        answers = abduce_all(t, unknown, cfg.abduction_positive_only)
        solvable = [q for q in unknown if answers[q].missing_facts]
        unsolvable = [q for q in unknown if not answers[q].missing_facts]
        n = min(cfg.abduction_questions, len(unknown))
        n_solv = min(len(solvable), round(n * cfg.abduction_answerable_share))
        n_solv = max(n_solv, n - len(unsolvable))
        questions = sorted(rng.sample(solvable, n_solv) + rng.sample(unsolvable, n - n_solv))
    else:
        questions = [q for q in questions if cl.truth(q) is TruthValue.UNKNOWN]
        answers = abduce_all(t, questions, cfg.abduction_positive_only)
    sents = _sentences(t, profile)
    out = []
    for k, q in enumerate(questions):
        ans = answers[q]
        items = sorted((render_fact(m, profile), ans.depths[m]) for m in ans.missing_facts)
        out.append(
            DatasetExample(
                f"{theory_id}-a{k + 1}", "abduction", t.mode.value, sents, render_fact(q, profile),
                [text for text, _ in items], [d for _, d in items], [],
            )
        )
    return out


# ---------------------------------------------------------------------------
# datasets


def split_of(theory_id: str) -> str:
    """70/10/20 train/dev/test split keyed on a hash of the theory id."""
    bucket = int(hashlib.md5(theory_id.encode()).hexdigest(), 16) % 100
    return "train" if bucket < 70 else "dev" if bucket < 80 else "test"


def _theory_examples(args) -> tuple[list[dict], dict]:
    task, cfg, index = args
    seed = theory_seed(cfg.seed, index)
    rng = random.Random(seed)
    t, cl = gen_theory(cfg, rng)
    tid = f"{cfg.mode.value}-D{cfg.target_depth}-{index:05d}"
    if task == "qa":
        exs = gen_qa_examples(t, cfg, rng, tid, cl)
    elif task == "iterative":
        exs = gen_iterative_examples(t, seed, tid, cl)
    elif task == "enumeration":
        exs = [gen_enumeration_example(t, tid, cl)]
    elif task == "abduction":
        exs = gen_abduction_examples(t, cfg, rng, tid, cl)
    else:
        raise ValueError(f"unknown task {task!r}")
    stats = {"implications": len(cl.implications), "max_depth": max(cl.depth.values(), default=0)}
    return [e.to_json() | {"split": split_of(tid)} for e in exs], stats


def gen_dataset(task: str, cfg: GenConfig, n_theories: int, jobs: int = 1) -> tuple[list[dict], list[dict]]:
    """Examples for ``n_theories`` theories plus per-theory statistics.

    Each theory draws from its own seed derived from (cfg.seed, index), so
    output is identical for any ``jobs``.  For the iterative task a
    ``lower_depth_mix`` share of extra theories at depths 0-2 is appended.
    """
    work = [(task, cfg, i) for i in range(n_theories)]
    if task == "iterative" and cfg.lower_depth_mix > 0 and cfg.target_depth > 2:
        extra = round(n_theories * cfg.lower_depth_mix)
        for j in range(extra):
            low = replace(cfg, target_depth=j % 3, seed=cfg.seed + 1 + j % 3)
            work.append((task, low, n_theories + j))
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            results = list(pool.map(_theory_examples, work, chunksize=8))
    else:
        results = [_theory_examples(w) for w in work]
    examples = [e for exs, _ in results for e in exs]
    stats = [s for _, s in results]
    if task == "qa":
        examples = balance_labels(examples)
    return examples, stats


def balance_labels(examples: list[dict]) -> list[dict]:
    """Drop surplus examples so every answer label has the same count."""
    counts: dict[str, int] = {}
    for e in examples:
        counts[e["answer"]] = counts.get(e["answer"], 0) + 1
    target = min(counts.values(), default=0)
    kept, seen = [], {k: 0 for k in counts}
    for e in examples:
        if seen[e["answer"]] < target:
            kept.append(e)
            seen[e["answer"]] += 1
    return kept
