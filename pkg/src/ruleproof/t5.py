"""Text-to-text string formats used for model input and output."""
from __future__ import annotations

import re
from dataclasses import dataclass

from .grammar import ParseError, parse_context, render_context, split_context
from .theory import Mode, Theory

ONE_STEP_QUESTION = "What is one single-hop inference?"
ENUMERATION_QUESTION = "What are all the inferences?"

_QA_IN = re.compile(r"^\$answer\$ ; \$proof\$ ; \$question\$ = (.*?) ; \$context\$ = ?(.*)$", re.S)
_AB_IN = re.compile(r"^\$answer\$ ; \$question\$ = (.*?) ; \$context\$ = ?(.*)$", re.S)
_PROOF_OUT = re.compile(r"^\$answer\$ = (.*?) ; \$proof\$ = (.*)$", re.S)
_PLAIN_OUT = re.compile(r"^\$answer\$ = (.*)$", re.S)


class FormatError(ValueError):
    pass


@dataclass
class T5Record:
    task: str  # qa | iterative | enumeration | abduction
    side: str  # input | output
    question: str | None = None
    context: list[tuple[str, str]] | None = None
    answer: str | None = None
    proof: str | None = None

    def theory(self, mode: Mode | str = Mode.CWA) -> Theory:
        if self.context is None:
            raise FormatError("record has no context")
        return parse_context(_join(self.context), mode)

    @property
    def answers(self) -> list[str]:
        """Answer split into sentences (enumeration) or facts (abduction)."""
        if self.answer is None or self.answer == "None":
            return []
        if self.task == "abduction":
            return [a.strip() for a in self.answer.split(" , ")]
        return [s.strip() for s in re.findall(r"[^.]+\.", self.answer)]


def _join(context: list[tuple[str, str]]) -> str:
    return " ".join(f"{i}: {s}" for i, s in context)


def _task_for(question: str) -> str:
    if question == ONE_STEP_QUESTION:
        return "iterative"
    if question == ENUMERATION_QUESTION:
        return "enumeration"
    return "qa"


def import_t5_string(s: str, task: str | None = None) -> T5Record:
    """Recognise one of the input/output templates and split it apart.

    Enumeration and abduction outputs share a template; pass ``task`` to
    disambiguate (otherwise a " , " separator means abduction).
    """
    try:
        if m := _QA_IN.match(s):
            q, ctx = m.groups()
            return T5Record(_task_for(q), "input", question=q, context=split_context(ctx))
        if m := _AB_IN.match(s):
            q, ctx = m.groups()
            return T5Record("abduction", "input", question=q, context=split_context(ctx))
    except ParseError as exc:
        raise FormatError(f"context does not split into id: sentence pairs ({exc})") from exc
    if m := _PROOF_OUT.match(s):
        a, p = m.groups()
        if task is None:
            task = "qa" if a in ("True", "False", "Unknown") else "iterative"
        return T5Record(task, "output", answer=a, proof=p)
    if m := _PLAIN_OUT.match(s):
        a = m.group(1)
        if task is None:
            task = "abduction" if " , " in a else "enumeration"
        return T5Record(task, "output", answer=a)
    raise FormatError(
        "string matches no template; expected '$answer$ ; $proof$ ; $question$ = ... ; $context$ = ...', "
        "'$answer$ ; $question$ = ... ; $context$ = ...', '$answer$ = ... ; $proof$ = ...' or '$answer$ = ...'"
    )


def export_t5(rec: T5Record) -> str:
    if rec.side == "input":
        ctx = _join(rec.context or [])
        if rec.task == "abduction":
            return f"$answer$ ; $question$ = {rec.question} ; $context$ = {ctx}"
        return f"$answer$ ; $proof$ ; $question$ = {rec.question} ; $context$ = {ctx}"
    if rec.task in ("qa", "iterative"):
        return f"$answer$ = {rec.answer} ; $proof$ = {rec.proof}"
    return f"$answer$ = {rec.answer}"


def make_input(task: str, question: str | None, theory: Theory | list[tuple[str, str]]) -> str:
    if isinstance(theory, Theory):
        context = split_context(render_context(theory))
    else:
        context = list(theory)
    if task == "iterative":
        question = ONE_STEP_QUESTION
    elif task == "enumeration":
        question = ENUMERATION_QUESTION
    return export_t5(T5Record(task, "input", question=question, context=context))


def make_output(task: str, answer, proof: str | None = None) -> str:
    if task in ("enumeration", "abduction"):
        sep = " , " if task == "abduction" else " "
        text = sep.join(answer) if answer else "None"
        return export_t5(T5Record(task, "output", answer=text))
    return export_t5(T5Record(task, "output", answer=answer, proof=proof or "None"))
