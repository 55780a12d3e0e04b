"""Scoring predictions against gold datasets, broken down by proof depth."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable

from .grammar import ParseError, parse_context, parse_literal, profile_for
from .proofs import MalformedProof, canonicalize, decode_proof, verify_proof
from .t5 import FormatError, import_t5_string
from .theory import Literal, Mode, Theory, TheoryError

ALL = "All"
NA = "N/A"


class AlignmentError(ValueError):
    pass


def normalize(s: str) -> str:
    """Trim, collapse whitespace, and make sure the sentence ends with a period."""
    s = re.sub(r"\s+", " ", s.strip())
    if s and not s.endswith("."):
        s += "."
    return s


def f1(pred: set, gold: set) -> float:
    if not pred and not gold:
        return 1.0
    tp = len(pred & gold)
    if tp == 0:
        return 0.0
    p, r = tp / len(pred), tp / len(gold)
    return 2 * p * r / (p + r)


@dataclass
class ScoreRow:
    depth: str
    count: int
    values: dict[str, float]


@dataclass
class ScoreReport:
    task: str
    rows: list[ScoreRow]
    summary: dict[str, float] = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def row(self, depth) -> ScoreRow:
        key = _depth_label(depth) if depth != ALL else ALL
        for r in self.rows:
            if r.depth == key:
                return r
        raise KeyError(depth)

    @property
    def metrics(self) -> list[str]:
        return list(self.rows[0].values) if self.rows else []

    def to_json(self) -> dict:
        return {
            "task": self.task,
            "config": self.config,
            "rows": [{"depth": r.depth, "count": r.count, **r.values} for r in self.rows],
            "summary": self.summary,
        }

    def to_text(self) -> str:
        header = ["depth", "count"] + self.metrics
        lines = [header] + [
            [r.depth, str(r.count)] + [f"{100 * r.values[m]:.1f}" for m in self.metrics] for r in self.rows
        ]
        widths = [max(len(line[i]) for line in lines) for i in range(len(header))]
        out = ["  ".join(c.rjust(w) for c, w in zip(line, widths)) for line in lines]
        out.insert(1, "  ".join("-" * w for w in widths))
        out += [f"{k}: {v:.4f}" for k, v in self.summary.items()]
        return "\n".join(out)


def _depth_label(d) -> str:
    return NA if d is None else str(d)


def _sort_key(label: str):
    return (1, 0) if label == NA else (0, int(label))


def _rows(buckets: dict[str, list[dict[str, float]]]) -> list[ScoreRow]:
    """Average per-example metric dicts within each depth bucket, plus an All row."""
    rows = []
    everything: list[dict[str, float]] = []
    for label in sorted(buckets, key=_sort_key):
        items = buckets[label]
        everything += items
        rows.append(ScoreRow(label, len(items), _mean(items)))
    rows.append(ScoreRow(ALL, len(everything), _mean(everything)))
    return rows


def _mean(items: list[dict[str, float]]) -> dict[str, float]:
    if not items:
        return {}
    return {k: sum(i[k] for i in items) / len(items) for k in items[0]}


def align(preds: Iterable[dict], golds: Iterable[dict]) -> list[tuple[dict, dict]]:
    golds = list(golds)
    by_id: dict[str, dict] = {}
    for p in preds:
        if p["id"] in by_id:
            raise AlignmentError(f"duplicate prediction id {p['id']!r}")
        by_id[p["id"]] = p
    gold_ids = [g["id"] for g in golds]
    missing = [i for i in gold_ids if i not in by_id]
    extra = sorted(set(by_id) - set(gold_ids))
    if missing or extra:
        raise AlignmentError(f"ids do not align: missing {missing[:5]}, unexpected {extra[:5]}")
    return [(by_id[g["id"]], g) for g in golds]


class _Theories:
    """Parses each distinct gold theory once."""

    def __init__(self):
        self._cache: dict[tuple, Theory] = {}

    def get(self, gold: dict) -> Theory:
        sents = tuple((s["id"], s["text"]) if isinstance(s, dict) else tuple(s) for s in gold["theory"])
        key = (gold.get("mode", "CWA"), sents)
        if key not in self._cache:
            ctx = " ".join(f"{i}: {s}" for i, s in sents)
            self._cache[key] = parse_context(ctx, Mode.parse(key[0]))
        return self._cache[key]


def _target(question: str, answer: str, t: Theory) -> Literal | None:
    try:
        q = parse_literal(question, profile_for(t))
    except ParseError:
        return None
    if answer == "True":
        return q
    if answer == "False":
        return q.negate()
    return None


def _decode(proof: str | None, t: Theory, target: Literal | None):
    """Decoded proof, None for "None", or False if it does not decode."""
    if proof is None:
        return None
    try:
        return decode_proof(proof, t, target)
    except (MalformedProof, TheoryError, ValueError):
        return False


def score_qa(preds: Iterable[dict], golds: Iterable[dict], skeleton: bool = False) -> ScoreReport:
    """Answer, proof (match-any gold) and verified-proof accuracy per gold depth.

    ``skeleton`` ignores the text of intermediate conclusions.  A verified
    prediction has the right answer and a proof that re-checks step by step
    (or no proof where gold has none).
    """
    theories = _Theories()
    buckets: dict[str, list[dict[str, float]]] = {}
    for pred, gold in align(preds, golds):
        t = theories.get(gold)
        gold_target = _target(gold["question"], gold["answer"], t)
        gold_canon = set()
        for g in gold.get("proofs") or []:
            dag = _decode(g, t, gold_target)
            if dag:
                gold_canon.add(canonicalize(dag, skeleton))
        answer_ok = str(pred.get("answer")).strip() == gold["answer"]
        pred_proof = pred.get("proof")
        dag = _decode(pred_proof if pred_proof is not None else "None", t, _target(gold["question"], str(pred.get("answer")), t))
        if dag is None:
            proof_ok = not gold_canon
            verified = answer_ok and not gold_canon
        elif dag is False:
            proof_ok = verified = False
        else:
            proof_ok = canonicalize(dag, skeleton) in gold_canon
            verified = answer_ok and verify_proof(dag, t).fully_verified
        buckets.setdefault(_depth_label(gold.get("depth")), []).append(
            {"answer_acc": float(answer_ok), "proof_acc": float(proof_ok), "verified_acc": float(verified)}
        )
    return ScoreReport("qa", _rows(buckets), config={"skeleton": skeleton})


def _sentence_set(answer) -> set[str]:
    if answer is None:
        return set()
    if isinstance(answer, str):
        if answer.strip() in ("", "None"):
            return set()
        parts = re.findall(r"[^.]+\.", answer) if " , " not in answer else answer.split(" , ")
        answer = parts
    return {normalize(a) for a in answer if a.strip() and a.strip() != "None"}


def score_enumeration(preds: Iterable[dict], golds: Iterable[dict]) -> ScoreReport:
    """Micro-averaged implication F1 and exact-set accuracy, by deepest gold implication."""
    buckets: dict[str, list[dict[str, float]]] = {}
    counts: dict[str, list[tuple[int, int, int]]] = {}
    for pred, gold in align(preds, golds):
        p, g = _sentence_set(pred.get("answer")), _sentence_set(gold["answer"])
        depths = gold.get("depth") or []
        label = str(max(depths)) if depths else "0"
        buckets.setdefault(label, []).append({"set_acc": float(p == g)})
        counts.setdefault(label, []).append((len(p & g), len(p), len(g)))
    rows = _rows(buckets)
    everything = [c for cs in counts.values() for c in cs]
    for r in rows:
        r.values["f1"] = _micro_f1(everything if r.depth == ALL else counts[r.depth])
    all_row = rows[-1]
    return ScoreReport("enumeration", rows, {"f1": all_row.values["f1"], "set_acc": all_row.values["set_acc"]})


def _micro_f1(counts: list[tuple[int, int, int]]) -> float:
    tp = sum(c[0] for c in counts)
    np_, ng = sum(c[1] for c in counts), sum(c[2] for c in counts)
    if np_ == 0 and ng == 0:
        return 1.0
    if tp == 0:
        return 0.0
    p, r = tp / np_, tp / ng
    return 2 * p * r / (p + r)


def score_abduction(preds: Iterable[dict], golds: Iterable[dict]) -> ScoreReport:
    """Per-example F1, perfect-match accuracy, and recall of gold facts by proof depth."""
    scores = []
    recall: dict[str, list[dict[str, float]]] = {}
    for pred, gold in align(preds, golds):
        p, g = _sentence_set(pred.get("answer")), _sentence_set(gold["answer"])
        s = f1(p, g)
        scores.append({"f1": s, "acc": float(s == 1.0)})
        answers = gold["answer"] if isinstance(gold["answer"], list) else sorted(g)
        depths = gold.get("depth") or [None] * len(answers)
        for fact, d in zip(answers, depths):
            recall.setdefault(_depth_label(d), []).append({"recall": float(normalize(fact) in p)})
    rows = _rows(recall)
    summary = _mean(scores) if scores else {"f1": 1.0, "acc": 1.0}
    summary["examples"] = len(scores)
    return ScoreReport("abduction", rows, summary)


def run_verification_audit(preds: Iterable[dict], golds: Iterable[dict]) -> ScoreReport:
    """Share of predicted proofs that fully verify, by gold depth.

    Predictions without a proof are not counted; undecodable ones count as
    unverified.
    """
    theories = _Theories()
    buckets: dict[str, list[dict[str, float]]] = {}
    for pred, gold in align(preds, golds):
        proof = pred.get("proof")
        if proof is None or str(proof).strip() == "None":
            continue
        t = theories.get(gold)
        dag = _decode(proof, t, _target(gold["question"], str(pred.get("answer")), t))
        ok = bool(dag) and verify_proof(dag, t).fully_verified
        buckets.setdefault(_depth_label(gold.get("depth")), []).append({"verified": float(ok)})
    return ScoreReport("verify", _rows(buckets))


def load_predictions(lines: Iterable[str], golds: list[dict], task: str) -> list[dict]:
    """Prediction records from JSONL, or raw output strings aligned by line with ``golds``."""
    preds = []
    for n, line in enumerate(lines):
        line = line.rstrip("\n")
        if not line.strip():
            continue
        if line.lstrip().startswith("{"):
            preds.append(json.loads(line))
            continue
        if n >= len(golds):
            raise AlignmentError(f"line {n + 1}: more raw predictions than gold examples")
        try:
            rec = import_t5_string(line, task=task)
        except FormatError as exc:
            raise FormatError(f"line {n + 1}: {exc}") from exc
        answer = rec.answers if task in ("enumeration", "abduction") else rec.answer
        preds.append({"id": golds[n]["id"], "answer": answer, "proof": rec.proof})
    return preds


SCORERS = {"qa": score_qa, "enumeration": score_enumeration, "abduction": score_abduction}
