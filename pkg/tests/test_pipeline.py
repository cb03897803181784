import json

import pytest

from neuroprolog.backends import ScriptedBackend, ScriptEntry
from neuroprolog.core import ExactNumber, Problem
from neuroprolog.diagnostics import ErrorClass
from neuroprolog.executor import InterpreterMissing
from neuroprolog.pipeline import (FinalStatus, OutcomeKind, read_traces, run_benchmark,
                                  solve_problem, write_timings, write_traces)
from neuroprolog.prompts import PromptKind

from conftest import sim_program
from scenarios import run_scenarios

PROBLEM = Problem("p1", "What is 6 * 3?", ExactNumber.parse("18"))


def script(*responses, pid="p1"):
    return ScriptedBackend(ScriptEntry(pid, i, r) for i, r in enumerate(responses, 1))


def test_first_try_success(simulated):
    t = solve_problem(PROBLEM, script(sim_program("answer=18")), simulated)
    assert t.final_status is FinalStatus.SOLVED and t.iterations_used == 1
    assert t.attempts[0].outcome.kind is OutcomeKind.SUCCESS_CORRECT
    assert t.first_diagnosis is None


def test_repair_after_error(simulated):
    t = solve_problem(PROBLEM, script(sim_program("zero_divisor"), sim_program("answer=18")), simulated)
    assert [a.prompt_kind for a in t.attempts] == [PromptKind.INITIAL, PromptKind.REPAIR]
    assert t.first_diagnosis.error_class is ErrorClass.DOMAIN_DIVIDE_BY_ZERO
    assert "DOMAIN_DIVIDE_BY_ZERO" in t.attempts[1].prompt
    assert t.attempts[0].program.source in t.attempts[1].prompt
    assert t.solved


def test_budget_exhausted(simulated):
    bad = sim_program("answer=17")
    t = solve_problem(PROBLEM, script(bad, bad, bad), simulated, k=3)
    assert t.final_status is FinalStatus.FAILED and t.iterations_used == 3
    assert t.final_diagnosis.error_class is ErrorClass.WRONG_ANSWER
    assert simulated.calls == 3


def test_unextractable_response_consumes_attempt(simulated):
    t = solve_problem(PROBLEM, script("I am not sure.", sim_program("answer=18")), simulated)
    assert t.attempts[0].program is None and t.attempts[0].execution is None
    assert t.attempts[0].outcome.diagnosis.error_class is ErrorClass.UNKNOWN_ERROR
    assert "I am not sure." in t.attempts[1].prompt
    assert simulated.calls == 1


def test_backend_failure_is_infrastructure(simulated):
    t = solve_problem(PROBLEM, script(sim_program("zero_divisor")), simulated, k=3)
    assert t.infra_error and "ScriptMiss" in t.infra_error
    assert t.iterations_used == 1


def test_interpreter_missing_is_infrastructure():
    def broken(program):
        raise InterpreterMissing("gone")

    t = solve_problem(PROBLEM, script(sim_program("answer=18")), broken)
    assert t.infra_error.startswith("InterpreterMissing") and not t.attempts


def test_gold_free_mode(simulated):
    p = Problem("p1", "What is 6 * 3?", None)
    t = solve_problem(p, script(sim_program("answer=99")), simulated)
    assert t.solved and t.attempts[0].outcome.kind is OutcomeKind.SUCCESS_UNVERIFIED


def test_k_validation(simulated):
    with pytest.raises(ValueError):
        solve_problem(PROBLEM, script(), simulated, k=0)


def test_trace_round_trip(tmp_path, simulated):
    t = solve_problem(PROBLEM, script(sim_program("operator_expected"), sim_program("answer=18")), simulated)
    path = tmp_path / "traces.jsonl"
    write_traces([t], path)
    back = read_traces(path)[0]
    assert back.to_dict() == t.to_dict()
    row = json.loads(path.read_text())
    assert row["schema_version"] == 1
    assert "duration_ms" not in path.read_text()
    write_timings([t], tmp_path / "timings.jsonl")
    assert len((tmp_path / "timings.jsonl").read_text().splitlines()) == 2


def test_run_benchmark_sorts_and_counts(simulated):
    problems = [Problem(f"q{i}", f"Question {i}?", ExactNumber.parse(str(i))) for i in (3, 1, 2)]
    entries = [ScriptEntry(p.id, 1, sim_program(f"answer={p.gold_answer}")) for p in problems]
    res = run_benchmark(problems, ScriptedBackend(entries), simulated, workers=3)
    assert [t.problem.id for t in res.traces] == ["q1", "q2", "q3"]
    assert res.valid and not res.infra_failures
    with pytest.raises(ValueError):
        run_benchmark([], ScriptedBackend([]), simulated)


def test_randomized_scenarios(golden, simulated):
    assert run_scenarios(200, seed=7, golden_rows=golden, simulated=simulated) == []


def test_scenario_checker_catches_violations(simulated):
    from dataclasses import replace

    from scenarios import check_trace

    t = solve_problem(PROBLEM, script(sim_program("zero_divisor"), sim_program("answer=18")), simulated)
    assert check_trace(t, 3, ["DOMAIN_DIVIDE_BY_ZERO", "correct"]) == []
    assert check_trace(replace(t, attempts=t.attempts[:1]), 3, ["DOMAIN_DIVIDE_BY_ZERO", "correct"])
    assert check_trace(t, 3, ["INSTANTIATION_ERROR", "correct"])
