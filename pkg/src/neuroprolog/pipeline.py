"""The execution-guided loop: generate, execute, classify, repair, for up to k attempts."""

from __future__ import annotations

import enum
import functools
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

from .backends import Backend, BackendError, DecodingParams, prompt_digest
from .core import DEFAULT_TOLERANCE, ExactNumber, PrologProgram, Problem, RawExecution, parse_answer
from .diagnostics import Diagnosis, ErrorClass, classify, execution_failed
from .executor import ExecutorConfig, InterpreterMissing, SpawnFailure, execute
from .prompts import ExtractionFailed, PromptKind, extract_program, initial_prompt, repair_prompt

log = logging.getLogger(__name__)

DEFAULT_MAX_ITERATIONS = 3
TRACE_SCHEMA_VERSION = 1

Executor = Callable[[PrologProgram], RawExecution]


def make_executor(cfg: ExecutorConfig) -> Executor:
    return functools.partial(execute, cfg=cfg)


class OutcomeKind(str, enum.Enum):
    SUCCESS_CORRECT = "SuccessCorrect"
    SUCCESS_WRONG = "SuccessWrong"
    # clean execution with no gold answer to check against
    SUCCESS_UNVERIFIED = "SuccessUnverified"
    ERROR = "Error"


class FinalStatus(str, enum.Enum):
    SOLVED = "Solved"
    FAILED = "Failed"


@dataclass(frozen=True)
class Outcome:
    kind: OutcomeKind
    produced: ExactNumber | None = None
    diagnosis: Diagnosis | None = None

    @property
    def solved(self) -> bool:
        return self.kind in (OutcomeKind.SUCCESS_CORRECT, OutcomeKind.SUCCESS_UNVERIFIED)

    @property
    def executed_cleanly(self) -> bool:
        return self.kind is not OutcomeKind.ERROR


@dataclass(frozen=True)
class Attempt:
    index: int
    prompt_kind: PromptKind
    prompt: str
    response: str
    program: PrologProgram | None
    execution: RawExecution | None
    outcome: Outcome

    def to_dict(self) -> dict:
        o = self.outcome
        return {
            "index": self.index,
            "prompt_kind": self.prompt_kind.value,
            "prompt_digest": prompt_digest(self.prompt),
            "prompt": self.prompt,
            "response": self.response,
            "program": self.program.source if self.program else None,
            # wall-clock duration is kept out of traces so reruns are byte-identical
            "execution": self.execution.to_dict(with_timing=False) if self.execution else None,
            "outcome": o.kind.value,
            "produced": o.produced.original_text if o.produced else None,
            "diagnosis": o.diagnosis.to_dict() if o.diagnosis else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> Attempt:
        response = d.get("response", "")
        return cls(
            index=d["index"],
            prompt_kind=PromptKind(d["prompt_kind"]),
            prompt=d.get("prompt", ""),
            response=response,
            program=PrologProgram(d["program"], response) if d.get("program") else None,
            execution=RawExecution.from_dict(d["execution"]) if d.get("execution") else None,
            outcome=Outcome(
                OutcomeKind(d["outcome"]),
                ExactNumber.parse(d["produced"]) if d.get("produced") else None,
                Diagnosis.from_dict(d["diagnosis"]) if d.get("diagnosis") else None,
            ),
        )


@dataclass(frozen=True)
class ProblemTrace:
    problem: Problem
    attempts: tuple[Attempt, ...]
    final_status: FinalStatus
    infra_error: str | None = None

    @property
    def iterations_used(self) -> int:
        return len(self.attempts)

    @property
    def solved(self) -> bool:
        return self.final_status is FinalStatus.SOLVED

    @property
    def first_diagnosis(self) -> Diagnosis | None:
        return next((a.outcome.diagnosis for a in self.attempts if a.outcome.diagnosis), None)

    @property
    def final_diagnosis(self) -> Diagnosis | None:
        return self.attempts[-1].outcome.diagnosis if self.attempts else None

    def to_dict(self) -> dict:
        p = self.problem
        return {
            "schema_version": TRACE_SCHEMA_VERSION,
            "problem": {"id": p.id, "question": p.question,
                        "gold_answer": p.gold_answer.original_text if p.gold_answer else None},
            "attempts": [a.to_dict() for a in self.attempts],
            "final_status": self.final_status.value,
            "iterations_used": self.iterations_used,
            "infra_error": self.infra_error,
        }

    @classmethod
    def from_dict(cls, d: dict) -> ProblemTrace:
        if d.get("schema_version") != TRACE_SCHEMA_VERSION:
            raise ValueError(f"unsupported trace schema version {d.get('schema_version')!r}")
        p = d["problem"]
        gold = ExactNumber.parse(p["gold_answer"]) if p.get("gold_answer") else None
        return cls(
            problem=Problem(p["id"], p["question"], gold),
            attempts=tuple(Attempt.from_dict(a) for a in d["attempts"]),
            final_status=FinalStatus(d["final_status"]),
            infra_error=d.get("infra_error"),
        )


def _evaluate(raw: RawExecution, gold: ExactNumber | None, tol: float) -> Outcome:
    produced = None if execution_failed(raw) else parse_answer(raw.stdout)
    diag = classify(raw, produced, gold, tol)
    if diag is None:
        kind = OutcomeKind.SUCCESS_CORRECT if gold is not None else OutcomeKind.SUCCESS_UNVERIFIED
        return Outcome(kind, produced)
    if diag.error_class is ErrorClass.WRONG_ANSWER:
        return Outcome(OutcomeKind.SUCCESS_WRONG, produced, diag)
    return Outcome(OutcomeKind.ERROR, None, diag)


def solve_problem(problem: Problem, backend: Backend, executor: Executor,
                  k: int = DEFAULT_MAX_ITERATIONS, params: DecodingParams = DecodingParams(),
                  tol: float = DEFAULT_TOLERANCE) -> ProblemTrace:
    """Run the generate/execute/repair loop for one problem.

    Attempt 1 uses the initial prompt; every later attempt is a self-contained
    repair prompt built from the previous attempt's program and diagnosis.
    Backend or interpreter-launch failures end the trace with ``infra_error``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    attempts: list[Attempt] = []
    previous: str | None = None
    diag: Diagnosis | None = None
    for i in range(1, k + 1):
        if i == 1:
            bundle = initial_prompt(problem.question, problem.id)
        else:
            bundle = repair_prompt(problem.question, previous, diag, problem.id, i)
        try:
            response = backend.generate(bundle, params)
        except BackendError as exc:
            log.warning("backend failure on %s attempt %d: %s", problem.id, i, exc)
            return ProblemTrace(problem, tuple(attempts), FinalStatus.FAILED, f"{type(exc).__name__}: {exc}")
        try:
            program = extract_program(response)
        except ExtractionFailed as exc:
            diag = Diagnosis(ErrorClass.UNKNOWN_ERROR, None, f"no Prolog program in response: {exc}")
            attempts.append(Attempt(i, bundle.kind, bundle.text, response, None, None,
                                    Outcome(OutcomeKind.ERROR, None, diag)))
            previous = response
            continue
        try:
            raw = executor(program)
        except (InterpreterMissing, SpawnFailure) as exc:
            return ProblemTrace(problem, tuple(attempts), FinalStatus.FAILED, f"{type(exc).__name__}: {exc}")
        outcome = _evaluate(raw, problem.gold_answer, tol)
        attempts.append(Attempt(i, bundle.kind, bundle.text, response, program, raw, outcome))
        if outcome.solved:
            return ProblemTrace(problem, tuple(attempts), FinalStatus.SOLVED)
        previous, diag = program.source, outcome.diagnosis
    return ProblemTrace(problem, tuple(attempts), FinalStatus.FAILED)


@dataclass
class RunResult:
    traces: list[ProblemTrace]
    k: int
    meta: dict = field(default_factory=dict)

    @property
    def valid(self) -> bool:
        return any(t.infra_error is None for t in self.traces)

    @property
    def infra_failures(self) -> list[ProblemTrace]:
        return [t for t in self.traces if t.infra_error is not None]


def run_benchmark(problems: Iterable[Problem], backend: Backend, executor: Executor,
                  k: int = DEFAULT_MAX_ITERATIONS, workers: int = 1,
                  params: DecodingParams = DecodingParams(),
                  tol: float = DEFAULT_TOLERANCE) -> RunResult:
    problems = list(problems)
    if not problems:
        raise ValueError("problem set is empty")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    solve = functools.partial(solve_problem, backend=backend, executor=executor,
                              k=k, params=params, tol=tol)
    if workers == 1:
        traces = [solve(p) for p in problems]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            traces = list(pool.map(solve, problems))
    traces.sort(key=lambda t: t.problem.id)
    return RunResult(traces, k)


def write_traces(traces: Iterable[ProblemTrace], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for t in traces:
            fh.write(json.dumps(t.to_dict(), sort_keys=True, ensure_ascii=False) + "\n")


def read_traces(path: str | Path) -> list[ProblemTrace]:
    with open(path, encoding="utf-8") as fh:
        return [ProblemTrace.from_dict(json.loads(line)) for line in fh if line.strip()]


def write_timings(traces: Iterable[ProblemTrace], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for t in traces:
            for a in t.attempts:
                if a.execution is not None:
                    fh.write(json.dumps({"problem_id": t.problem.id, "attempt": a.index,
                                         "duration_ms": round(a.execution.duration_ms, 3)}) + "\n")
