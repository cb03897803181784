import argparse
import json
import stat

import pytest

from neuroprolog.cli import RUN_DEFAULTS, UsageError, main, resolve_run_config

from conftest import KB_ENTRY, RESOURCES, SOLVE_ENTRY, read_jsonl

# prints the value of a "% answer: N" comment, or a zero-division error
FAKE = r"""#!/bin/sh
if [ "$1" = "--version" ]; then echo "SWI-Prolog version 0.0 (fake)"; exit 0; fi
for last; do :; done
ans=$(sed -n 's/^% answer: //p' "$last")
if [ -n "$ans" ]; then echo "$ans"; exit 0; fi
echo "ERROR: $last:2: Arithmetic: evaluation error: zero_divisor" >&2
exit 1
"""


@pytest.fixture
def fake_swipl(tmp_path):
    path = tmp_path / "swipl"
    path.write_text(FAKE)
    path.chmod(path.stat().st_mode | stat.S_IEXEC)
    return str(path)


@pytest.fixture
def bench(tmp_path):
    problems = tmp_path / "problems.jsonl"
    problems.write_text("".join(json.dumps({"id": f"p{i}", "question": f"What is {i} + {i}?",
                                            "answer": f"#### {2 * i}"}) + "\n" for i in range(1, 5)))
    rows = []
    for i in range(1, 5):
        if i % 2:
            rows.append({"problem_id": f"p{i}", "attempt": 1,
                         "response": f":- initialization(main).\n% answer: {2 * i}\nmain :- halt.\n"})
        else:
            rows.append({"problem_id": f"p{i}", "attempt": 1, "response": ":- initialization(main).\nmain :- X is 1/0.\n"})
            rows.append({"problem_id": f"p{i}", "attempt": 2,
                         "response": f":- initialization(main).\n% answer: {2 * i}\nmain :- halt.\n"})
    script = tmp_path / "script.jsonl"
    script.write_text("".join(json.dumps(r) + "\n" for r in rows))
    return problems, script


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_run_writes_artifacts(tmp_path, bench, fake_swipl, capsys):
    problems, script = bench
    out = tmp_path / "out"
    code, stdout, _ = run(["run", "--problems", str(problems), "--script", str(script),
                           "--interpreter", fake_swipl, "--out", str(out)], capsys)
    assert code == 0
    for name in ("traces.jsonl", "timings.jsonl", "config.json", "report.csv", "report.md", "histogram.jsonl"):
        assert (out / name).exists()
    assert (out / "report.csv").read_text().splitlines()[1].startswith("4,0,100.00,100.00,50.00,100.00,1.50")
    assert "| problems |" in stdout


def test_record_then_replay_reproduces_traces(tmp_path, bench, fake_swipl, capsys):
    problems, script = bench
    transcript = tmp_path / "transcript.jsonl"
    common = ["--problems", str(problems), "--interpreter", fake_swipl]
    assert run(["run", *common, "--script", str(script), "--record", str(transcript),
                "--out", str(tmp_path / "a")], capsys)[0] == 0
    assert len(read_jsonl(transcript)) == 6
    assert run(["replay", *common, "--transcript", str(transcript), "--out", str(tmp_path / "b")], capsys)[0] == 0
    assert (tmp_path / "a" / "traces.jsonl").read_bytes() == (tmp_path / "b" / "traces.jsonl").read_bytes()


def test_replay_of_changed_problems_is_infra_failure(tmp_path, bench, fake_swipl, capsys):
    problems, script = bench
    transcript = tmp_path / "transcript.jsonl"
    common = ["--interpreter", fake_swipl]
    run(["run", *common, "--problems", str(problems), "--script", str(script),
         "--record", str(transcript), "--out", str(tmp_path / "a")], capsys)
    changed = tmp_path / "changed.jsonl"
    changed.write_text(problems.read_text().replace("What is 1 + 1?", "What is one plus one?"))
    code, _, err = run(["replay", *common, "--problems", str(changed), "--transcript", str(transcript),
                        "--out", str(tmp_path / "b")], capsys)
    assert code == 3 and "ReplayMismatch" in err


def test_missing_interpreter_exit_code(tmp_path, bench, capsys):
    problems, script = bench
    code, _, err = run(["run", "--problems", str(problems), "--script", str(script),
                        "--interpreter", str(tmp_path / "absent"), "--out", str(tmp_path / "o")], capsys)
    assert code == 3 and "not found" in err


def test_usage_errors(tmp_path, bench, fake_swipl, capsys):
    problems, _ = bench
    assert run(["run", "--problems", str(problems), "--interpreter", fake_swipl,
                "--out", str(tmp_path / "o")], capsys)[0] == 2
    assert run(["run", "--script", "x", "--out", "o"], capsys)[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_config_precedence(tmp_path):
    cfg_file = tmp_path / "cfg.json"
    cfg_file.write_text(json.dumps({"problems": "a.jsonl", "script": "s.jsonl", "out": "o",
                                    "workers": 4, "timeout_ms": 100}))
    ns = argparse.Namespace(config=str(cfg_file), workers=2)
    cfg = resolve_run_config(ns)
    assert cfg["workers"] == 2 and cfg["timeout_ms"] == 100
    assert cfg["max_iterations"] == RUN_DEFAULTS["max_iterations"] == 3
    cfg_file.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(UsageError):
        resolve_run_config(argparse.Namespace(config=str(cfg_file)))


def test_compare(tmp_path, bench, fake_swipl, capsys):
    problems, script = bench
    for name in ("a", "b"):
        run(["run", "--problems", str(problems), "--script", str(script), "--interpreter", fake_swipl,
             "--out", str(tmp_path / name)], capsys)
    code, stdout, _ = run(["compare", str(tmp_path / "a"), str(tmp_path / "b")], capsys)
    assert code == 0 and stdout.startswith("b=0 c=0 p=1")


def test_classify_commands(tmp_path, capsys):
    err = tmp_path / "err.txt"
    err.write_text("ERROR: /x/program.pl:4:7: Syntax error: Operator expected\n")
    code, stdout, _ = run(["classify", str(err)], capsys)
    assert code == 0 and stdout.strip() == "SYNTAX_OPERATOR_EXPECTED line=4"
    err.write_text("")
    out = tmp_path / "out.txt"
    out.write_text("17\n")
    assert run(["classify", str(err), "--stdout-file", str(out), "--exit-code", "0",
                "--produced", "17", "--gold", "18"], capsys)[1].strip() == "WRONG_ANSWER"
    code, stdout, _ = run(["classify", "--corpus", str(RESOURCES / "golden_corpus.jsonl")], capsys)
    assert code == 0 and "FAIL" not in stdout


def test_mix_and_stats(tmp_path, capsys):
    kb = tmp_path / "kb.jsonl"
    solve = tmp_path / "solve.json"
    kb.write_text("".join(json.dumps({**KB_ENTRY, "input": f"{KB_ENTRY['input']} {i}"}) + "\n" for i in range(20)))
    solve.write_text(json.dumps([{**SOLVE_ENTRY, "input": f"v{i}"} for i in range(30)]))
    out = tmp_path / "mix"
    code, _, _ = run(["mix", "--kb", str(kb), "--solve", str(solve), "--out", str(out), "--skip-qa", "--seed", "5"], capsys)
    assert code == 0
    assert len(read_jsonl(out / "cocktail.jsonl")) == 50
    assert (len(read_jsonl(out / "train.jsonl")), len(read_jsonl(out / "val.jsonl"))) == (45, 5)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 5 and manifest["qa"] == "skipped"
    code, stdout, _ = run(["stats", str(kb)], capsys)
    assert code == 0 and json.loads(stdout)["tasks"] == {"KB": 20, "SOLVE": 0}
