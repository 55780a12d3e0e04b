"""Command-line entry point: ``ruleproof <command> ...``."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .abduction import NotUnprovable, abduce_single_fact
from .bridge import BridgeError, RemoteBackend, SymbolicBackend, run_iterative_loop
from .datagen import GenConfig, TASKS, DatasetExample, gen_dataset
from .grammar import ParseError, parse_context, parse_literal, profile_for, render_fact, sentence_text
from .inference import InconsistentTheory, StratificationError, answer, closure
from .metrics import SCORERS, AlignmentError, load_predictions, run_verification_audit
from .proofs import DEFAULT_CAP, MalformedProof, all_proofs, decode_proof, proof_to_string, verify_proof
from .t5 import FormatError, import_t5_string
from .theory import Mode, TheoryError, TruthValue, lint

EXIT_ERROR = 1
INPUT_ERRORS = (
    OSError, FormatError, ParseError, TheoryError, MalformedProof, AlignmentError, StratificationError,
    InconsistentTheory, BridgeError, json.JSONDecodeError, KeyError,
)


def _read(path: str) -> str:
    return sys.stdin.read() if path == "-" else Path(path).read_text()


def read_theory(path: str, mode: Mode):
    """A theory from "id: sentence" text, a T5 input string, or one sentence per line."""
    text = _read(path).strip()
    if text.startswith("$answer$"):
        rec = import_t5_string(text)
        return rec.theory(mode)
    if text.split(":", 1)[0].strip().rstrip("0123456789") in ("sent", "fact", "rule", "triple"):
        return parse_context(" ".join(text.split()), mode)
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    return parse_context(" ".join(f"sent{i}: {s}" for i, s in enumerate(lines, 1)), mode)


def read_jsonl(path: str) -> list[dict]:
    out = []
    for n, line in enumerate(_read(path).splitlines(), 1):
        if line.strip():
            try:
                out.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}:{n}: {exc.msg}") from exc
    return out


def write_jsonl(path: str | None, rows: list[dict]) -> None:
    text = "".join(json.dumps(r, sort_keys=True) + "\n" for r in rows)
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def run_config(args: argparse.Namespace) -> dict:
    skip = {"func", "command"}
    return {k: (v.value if isinstance(v, Mode) else v) for k, v in sorted(vars(args).items()) if k not in skip} | {
        "command": args.command,
        "version": __version__,
    }


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps({"config": run_config(args)} | payload, indent=2, sort_keys=True))
    else:
        print(text)


def _question(args, t):
    return parse_literal(args.question, profile_for(t))


# ---------------------------------------------------------------------------
# commands


def cmd_parse(args) -> int:
    t = read_theory(args.theory, args.mode)
    profile = profile_for(t)
    sents = [{"id": str(s.id), "kind": type(s).__name__.lower(), "text": sentence_text(s, profile)}
             for s in t.ordered_sentences()]
    warnings = lint(t)
    text = "\n".join(f"{s['id']}: {s['text']}" for s in sents)
    if warnings:
        text += "\n" + "\n".join(f"warning: {w}" for w in warnings)
    _emit(args, {"sentences": sents, "warnings": warnings}, text)
    return 0


def cmd_solve(args) -> int:
    t = read_theory(args.theory, args.mode)
    q = _question(args, t)
    cl = closure(t)
    value, depth = answer(t, q, cl)
    proof = None
    if depth is not None:
        target = q if value is TruthValue.TRUE else q.negate()
        ps = all_proofs(t, target, args.proof_cap, cl)
        proof = proof_to_string(ps[0] if ps else None, args.dialect, profile_for(t))
    proof = proof or "None"
    _emit(args, {"answer": value.value, "depth": depth, "proof": proof}, f"{value.value}\n{proof}")
    return 0


def cmd_prove(args) -> int:
    t = read_theory(args.theory, args.mode)
    q = _question(args, t)
    ps = all_proofs(t, q, args.proof_cap)
    profile = profile_for(t)
    encoded = [proof_to_string(p, args.dialect, profile) for p in ps]
    text = "\n".join(encoded) if encoded else "None"
    if ps.truncated:
        text += f"\n(truncated at {args.proof_cap})"
    _emit(args, {"proofs": encoded, "truncated": ps.truncated, "depths": [p.depth for p in ps]}, text)
    return 0


def cmd_enumerate(args) -> int:
    t = read_theory(args.theory, args.mode)
    cl = closure(t)
    profile = profile_for(t)
    items = [(i.depth, render_fact(i.literal, profile)) for i in cl.sorted_implications()]
    _emit(
        args,
        {"implications": [{"text": s, "depth": d} for d, s in items]},
        "\n".join(s for _, s in items) or "None",
    )
    return 0


def cmd_abduce(args) -> int:
    t = read_theory(args.theory, Mode.OWA)
    q = _question(args, t)
    profile = profile_for(t)
    try:
        ans = abduce_single_fact(t, q, args.positive_only)
    except NotUnprovable as exc:
        _emit(args, {"missing_facts": None, "note": str(exc)}, f"not applicable: {exc}")
        return 0
    items = sorted((render_fact(m, profile), d) for m, d in ans.depths.items())
    _emit(
        args,
        {"missing_facts": [{"text": s, "depth": d} for s, d in items]},
        " , ".join(s for s, _ in items) or "None",
    )
    return 0


def cmd_iterate(args) -> int:
    t = read_theory(args.theory, args.mode)
    q = _question(args, t)
    url = args.generator_url
    backend = RemoteBackend(url, timeout=args.timeout, retries=args.retries) if url else SymbolicBackend(args.mode, args.seed)
    res = run_iterative_loop(t, q, backend, args.max_iterations, args.max_context_tokens)
    profile = profile_for(t)
    proof = proof_to_string(res.proof, args.dialect, profile)
    trace = [{"id": str(f.id), "implication": render_fact(f.implication, profile)} for f in res.trace]
    _emit(
        args,
        {"answer": res.answer.value, "depth": res.depth, "proof": proof, "trace": trace},
        f"{res.answer.value}\n{proof}",
    )
    return 0


def cmd_gen(args) -> int:
    cfg = GenConfig(
        mode=args.mode, target_depth=args.depth, seed=args.seed, proof_cap=args.proof_cap, dialect=args.dialect,
    )
    if args.world:
        cfg = replace(cfg, world=args.world)
    examples, stats = gen_dataset(args.task, cfg, args.n, args.jobs)
    write_jsonl(args.out, examples)
    if args.out and args.out != "-":
        meta = {"config": run_config(args), "generator": cfg.to_dict(), "examples": len(examples),
                "theories": len(stats)}
        Path(args.out + ".config.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_score(args) -> int:
    golds = read_jsonl(args.gold)
    task = args.task or (golds[0]["task"] if golds else "qa")
    preds = load_predictions(_read(args.predictions).splitlines(), golds, task)
    if task == "qa":
        report = SCORERS["qa"](preds, golds, args.skeleton)
    elif task in SCORERS:
        report = SCORERS[task](preds, golds)
    else:
        raise FormatError(f"no scorer for task {task!r}")
    report.config = run_config(args)
    if args.out_dir:
        from .report import plot_report

        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.txt").write_text(report.to_text() + "\n")
        (out / "report.json").write_text(json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n")
        plot_report(report, out / "report_by_depth.png")
    if args.json:
        print(json.dumps(report.to_json(), indent=2, sort_keys=True))
    else:
        print(report.to_text())
    return 0


def cmd_verify(args) -> int:
    if args.proof is not None:
        t = read_theory(args.gold, args.mode)
        conclusion = _question(args, t) if args.question else None
        try:
            dag = decode_proof(args.proof, t, conclusion)
        except MalformedProof as exc:
            _emit(args, {"status": "malformed", "reason": str(exc)}, f"malformed: {exc}")
            return 0
        if dag is None:
            _emit(args, {"status": "none"}, "None")
            return 0
        rep = verify_proof(dag, t)
        detail = f" at {rep.failed_step}: {rep.reason}" if rep.failed_step else ""
        _emit(args, {"status": rep.status, "failed_step": rep.failed_step, "reason": rep.reason},
              rep.status + detail)
        return 0
    if args.predictions is None:
        raise FormatError("verify needs --predictions with a gold file, or --proof with a theory")
    golds = read_jsonl(args.gold)
    preds = load_predictions(_read(args.predictions).splitlines(), golds, "qa")
    report = run_verification_audit(preds, golds)
    report.config = run_config(args)
    print(json.dumps(report.to_json(), indent=2, sort_keys=True) if args.json else report.to_text())
    return 0


def cmd_export_t5(args) -> int:
    rows = []
    for d in read_jsonl(args.dataset):
        ex = DatasetExample.from_json(d)
        rows.append({"id": ex.id, "input": ex.t5_input(), "output": ex.t5_output()})
    write_jsonl(args.out, rows)
    return 0


def cmd_import_t5(args) -> int:
    rows = []
    for n, d in enumerate(read_jsonl(args.file), 1):
        try:
            inp = import_t5_string(d["input"])
            task = inp.task
            out = import_t5_string(d["output"], task=task)
        except FormatError as exc:
            raise FormatError(f"{args.file}:{n}: {exc}") from exc
        rows.append({
            "id": d.get("id", f"ex{n}"), "task": task, "question": inp.question,
            "theory": [{"id": i, "text": s} for i, s in inp.context or []],
            "answer": out.answers if task in ("enumeration", "abduction") else out.answer,
            "proofs": [out.proof] if out.proof not in (None, "None") else [],
        })
    write_jsonl(args.out, rows)
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ruleproof", description="Rule reasoning with proofs over templated English.")
    p.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", type=Mode.parse, default=Mode.CWA, help="CWA or OWA (default CWA)")
    common.add_argument("--dialect", choices=["percent", "at"], default="percent")
    common.add_argument("--proof-cap", type=int, default=DEFAULT_CAP)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--json", action="store_true", help="machine-readable output with the run config")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_, theory=True, question=False):
        sp = sub.add_parser(name, parents=[common], help=help_)
        if theory:
            sp.add_argument("theory", help="context file ('-' for stdin)")
        if question:
            sp.add_argument("-q", "--question", required=True, help='e.g. "Charlie is not kind?"')
        sp.set_defaults(func=func)
        return sp

    add("parse", cmd_parse, "parse a theory and report lint warnings")
    add("solve", cmd_solve, "answer a question with its shortest proof", question=True)
    add("prove", cmd_prove, "list every proof of a fact", question=True)
    add("enumerate", cmd_enumerate, "list all implications")
    ab = add("abduce", cmd_abduce, "missing single facts that would prove a question (OWA)", question=True)
    ab.add_argument("--positive-only", action="store_true")

    it = add("iterate", cmd_iterate, "answer via repeated one-step generation", question=True)
    it.add_argument("--generator-url", default=None, help="remote one-step generator (else symbolic)")
    it.add_argument("--max-context-tokens", type=int, default=None)
    it.add_argument("--max-iterations", type=int, default=10_000)
    it.add_argument("--timeout", type=float, default=30.0)
    it.add_argument("--retries", type=int, default=2)

    g = add("gen", cmd_gen, "generate a dataset as JSONL", theory=False)
    g.add_argument("--task", choices=TASKS, default="qa")
    g.add_argument("--depth", type=int, default=3)
    g.add_argument("--n", type=int, default=100, help="number of theories")
    g.add_argument("--world", choices=["people", "animals"], default=None)
    g.add_argument("--jobs", type=int, default=1)
    g.add_argument("-o", "--out", default=None)

    s = add("score", cmd_score, "score predictions against a gold dataset", theory=False)
    s.add_argument("gold")
    s.add_argument("predictions", help="JSONL {id, answer, proof} or raw output strings, one per line")
    s.add_argument("--task", choices=sorted(SCORERS), default=None)
    s.add_argument("--skeleton", action="store_true", help="ignore intermediate conclusion text")
    s.add_argument("--out-dir", default=None, help="write report.txt, report.json and a per-depth bar chart")

    v = add("verify", cmd_verify, "verify predicted proofs step by step", theory=False)
    v.add_argument("gold", help="gold JSONL, or a theory file with --proof")
    v.add_argument("--predictions", default=None)
    v.add_argument("--proof", default=None, help="a single encoded proof to check")
    v.add_argument("-q", "--question", default=None)

    e = add("export-t5", cmd_export_t5, "dataset JSONL to {id, input, output} strings", theory=False)
    e.add_argument("dataset")
    e.add_argument("-o", "--out", default=None)

    i = add("import-t5", cmd_import_t5, "{id, input, output} strings back to dataset records", theory=False)
    i.add_argument("file")
    i.add_argument("-o", "--out", default=None)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except INPUT_ERRORS as exc:
        print(f"ruleproof {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
