import json
from pathlib import Path

import pytest

from neuroprolog import ExecutorConfig, RawExecution, find_interpreter
from neuroprolog.diagnostics import load_golden_corpus

FIXTURES = Path(__file__).parent / "fixtures"
RESOURCES = Path(__file__).parents[1] / "src" / "neuroprolog" / "resources"

INTERPRETER = find_interpreter()

needs_interpreter = pytest.mark.skipif(INTERPRETER is None, reason="no SWI-Prolog interpreter available")


@pytest.fixture(scope="session")
def interpreter():
    if INTERPRETER is None:
        pytest.skip("no SWI-Prolog interpreter available")
    return INTERPRETER


@pytest.fixture
def exe_cfg(interpreter, tmp_path):
    return ExecutorConfig(interpreter, 5000, workdir_root=str(tmp_path / "ws"))


@pytest.fixture(scope="session")
def golden():
    return load_golden_corpus(RESOURCES / "golden_corpus.jsonl")


KB_ENTRY = {
    "instruction": "[KNOWLEDGE] Generate Prolog code that encodes the given mathematical concept",
    "input": ("Learn about combinations. A combination is an unordered selection of objects. "
              "The number of ways to choose r objects from n objects (without regard to order) "
              "is C(n,r) = n!/(r!(n-r)!), also written as nCr. Example: Choose 3 students from 10: "
              "C(10,3) = 120."),
    "output": """:- use_module(library(clpq)).

factorial(0, 1).
factorial(N, Result) :-
    integer(N), N > 0,
    N1 is N - 1, factorial(N1, F1),
    Result is N * F1.

combination_count(N, R, C) :-
    integer(N), integer(R), N >= R, R >= 0,
    factorial(N, NFactorial),
    factorial(R, RFactorial),
    NMinusR is N - R,
    factorial(NMinusR, NMinusRFac),
    C is NFactorial / (RFactorial * NMinusRFac).

solve(Result) :- Result = ok.
""",
}

SOLVE_ENTRY = {
    "instruction": "[SOLVE] Generate correct Prolog code that solves the given math problem",
    "input": ("In a race with 8 runners, how many different ways can the top 3 positions "
              "(gold, silver, bronze) be awarded? Round to 2 decimal places."),
    "output": """:- use_module(library(clpq)).

factorial(0, 1).
factorial(N, Result) :-
    integer(N), N > 0,
    N1 is N - 1, factorial(N1, F1),
    Result is N * F1.

permutation_count(N, R, P) :-
    integer(N), integer(R), N >= R, R >= 0,
    factorial(N, NFactorial),
    NMinusR is N - R,
    factorial(NMinusR, DenomFac),
    P is NFactorial / DenomFac.

solve(Result) :-
    N = 8, R = 3,
    permutation_count(N, R, Ways),
    Result is round(Ways * 100) / 100.
""",
}


class SimulatedInterpreter:
    """Stands in for SWI-Prolog in tests that exercise loop logic, not Prolog.

    A program containing ``% sim: NAME`` replays the golden-corpus record
    NAME; ``% sim: answer=X`` prints X cleanly.
    """

    def __init__(self, golden_rows):
        self.records = {r["name"]: r for r in golden_rows}
        self.calls = 0

    def __call__(self, program):
        self.calls += 1
        tag = next((ln.split("% sim:", 1)[1].strip()
                    for ln in program.source.splitlines() if "% sim:" in ln), None)
        if tag is None:
            return RawExecution("", "ERROR: no simulation tag", 1, 1.0, False)
        if tag.startswith("answer="):
            return RawExecution(tag[len("answer="):] + "\n", "", 0, 1.0, False)
        rec = self.records[tag]
        return RawExecution(rec["stdout"], rec["stderr"], rec["exit_code"], 1.0, rec["timed_out"])


def sim_program(tag: str, note: str = "") -> str:
    return (":- use_module(library(clpq)).\n:- initialization(main).\n"
            f"% sim: {tag}\n% {note}\nmain :- halt.\n")


@pytest.fixture
def simulated(golden):
    return SimulatedInterpreter(golden)


def read_jsonl(path):
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
