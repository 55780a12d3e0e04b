"""Forward-chaining rule reasoning over templated English, with proofs.

Theories are sets of facts and rules; the library answers questions under
closed- or open-world semantics, enumerates and encodes proofs, abduces
missing facts, generates synthetic datasets and scores predictions.
"""
from .abduction import AbductionAnswer, abduce_single_fact
from .grammar import parse_context, parse_literal, parse_sentence, render_context, render_sentence
from .inference import answer, closure, one_step_inferences
from .proofs import all_proofs, canonicalize, decode_proof, encode_proof, verify_proof
from .theory import Fact, Literal, Mode, Rule, SentenceId, Theory, TruthValue

__version__ = "0.1.0"

__all__ = [
    "AbductionAnswer", "Fact", "Literal", "Mode", "Rule", "SentenceId", "Theory", "TruthValue",
    "abduce_single_fact", "all_proofs", "answer", "canonicalize", "closure", "decode_proof", "encode_proof",
    "one_step_inferences", "parse_context", "parse_literal", "parse_sentence", "render_context",
    "render_sentence", "verify_proof",
]
