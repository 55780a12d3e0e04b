import json
import subprocess
import sys

import pytest

from ruleproof.cli import main

from golden import CHARLIE_CONTEXT, CHARLIE_PROOF, DAVE_CONTEXT


@pytest.fixture
def charlie_file(tmp_path):
    p = tmp_path / "charlie.txt"
    p.write_text(CHARLIE_CONTEXT + "\n")
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_solve_text_and_json(capsys, charlie_file):
    code, out, _ = run(capsys, "solve", charlie_file, "-q", "Charlie is not quiet?")
    assert code == 0
    assert out.splitlines() == ["False", CHARLIE_PROOF]
    code, out, _ = run(capsys, "solve", charlie_file, "-q", "Charlie is not quiet?", "--json")
    d = json.loads(out)
    assert (d["answer"], d["depth"], d["proof"]) == ("False", 3, CHARLIE_PROOF)
    assert d["config"]["mode"] == "CWA" and d["config"]["command"] == "solve"


def test_sentence_per_line_input(capsys, tmp_path):
    p = tmp_path / "t.txt"
    p.write_text("Bob is big.\nIf someone is big then they are red.\n")
    _, out, _ = run(capsys, "solve", str(p), "-q", "Bob is red?", "--dialect", "at")
    assert out.splitlines() == ["True", "# sent2@int1 sent1 ; with int1: Bob is red."]


def test_abduce(capsys, tmp_path):
    p = tmp_path / "dave.txt"
    p.write_text(DAVE_CONTEXT)
    _, out, _ = run(capsys, "abduce", str(p), "--mode", "OWA", "-q", "Dave is rough.", "--json")
    assert {"Dave is young.", "Dave is smart."} <= {m["text"] for m in json.loads(out)["missing_facts"]}


def test_iterate_matches_solve(capsys, charlie_file):
    _, out, _ = run(capsys, "iterate", charlie_file, "-q", "Charlie is not quiet?", "--json")
    d = json.loads(out)
    assert (d["answer"], d["proof"]) == ("False", CHARLIE_PROOF)


def test_verify_single_proof(capsys, charlie_file):
    _, out, _ = run(capsys, "verify", charlie_file, "--proof", CHARLIE_PROOF)
    assert out.strip() == "fully-verified"
    bad = CHARLIE_PROOF.replace("rule12%conc2", "rule11%conc2")
    _, out, _ = run(capsys, "verify", charlie_file, "--proof", bad, "--json")
    assert json.loads(out)["failed_step"] == "rule11"


def test_gen_deterministic_with_config_sidecar(capsys, tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    for path, jobs in ((a, "1"), (b, "2")):
        assert run(capsys, "gen", "--task", "qa", "--depth", "2", "--n", "6", "--seed", "4", "--jobs", jobs, "-o", str(path))[0] == 0
    assert a.read_text() == b.read_text()
    cfg = json.loads((tmp_path / "a.jsonl.config.json").read_text())
    assert cfg["config"]["seed"] == 4 and cfg["generator"]["target_depth"] == 2


def test_score_self_with_figure(capsys, tmp_path):
    gold = tmp_path / "gold.jsonl"
    run(capsys, "gen", "--task", "qa", "--depth", "2", "--n", "6", "-o", str(gold))
    rows = [json.loads(line) for line in gold.read_text().splitlines()]
    preds = tmp_path / "pred.jsonl"
    preds.write_text("".join(
        json.dumps({"id": r["id"], "answer": r["answer"], "proof": r["proofs"][0] if r["proofs"] else "None"}) + "\n"
        for r in rows
    ))
    out_dir = tmp_path / "report"
    code, out, _ = run(capsys, "score", str(gold), str(preds), "--out-dir", str(out_dir), "--json")
    assert code == 0
    rep = json.loads(out)
    assert rep["rows"][-1]["depth"] == "All"
    assert all(r["answer_acc"] == r["proof_acc"] == r["verified_acc"] == 1.0 for r in rep["rows"])
    png = (out_dir / "report_by_depth.png").read_bytes()
    assert png[:8] == b"\x89PNG\r\n\x1a\n" and len(png) > 1000
    assert json.loads((out_dir / "report.json").read_text())["task"] == "qa"
    assert "All" in (out_dir / "report.txt").read_text()


def test_export_import_round_trip(capsys, tmp_path):
    gold, t5, back = tmp_path / "g.jsonl", tmp_path / "t5.jsonl", tmp_path / "back.jsonl"
    run(capsys, "gen", "--task", "iterative", "--depth", "2", "--n", "3", "-o", str(gold))
    run(capsys, "export-t5", str(gold), "-o", str(t5))
    run(capsys, "import-t5", str(t5), "-o", str(back))
    src = [json.loads(line) for line in gold.read_text().splitlines()]
    got = [json.loads(line) for line in back.read_text().splitlines()]
    assert [(g["id"], g["theory"], g["answer"], g["proofs"]) for g in got] == [
        (s["id"], s["theory"], s["answer"], s["proofs"]) for s in src
    ]


def test_bad_input_exits_nonzero(capsys, tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("Bob is big.\nIf Bob is not red then Bob is blue.\nIf Bob is blue then Bob is red.\n")
    code, _, err = run(capsys, "solve", str(p), "-q", "Bob is red?")
    assert code == 1 and "StratificationError" in err
    p.write_text("Bob is big and\n")
    code, _, err = run(capsys, "parse", str(p))
    assert code == 1 and "ParseError" in err


def test_console_entry_point(charlie_file):
    res = subprocess.run([sys.executable, "-m", "ruleproof.cli", "solve", charlie_file, "-q", "Charlie is not kind?"],
                         capture_output=True, text=True, check=True)
    assert res.stdout.splitlines()[0] == "False"
