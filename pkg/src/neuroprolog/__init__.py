"""Execution-guided Prolog program synthesis for math word problems.

A language model writes a Prolog program, SWI-Prolog runs it, failures are
classified into a fixed error taxonomy, and the model gets a targeted
repair prompt, for up to ``k`` attempts per problem.
"""

from .backends import (BackendUnavailable, DecodingParams, RecordingBackend, RemoteBackend,
                       ReplayBackend, ReplayMismatch, ScriptedBackend, ScriptEntry, ScriptMiss)
from .core import ExactNumber, Problem, PrologProgram, RawExecution, answers_equal, load_problems, parse_answer
from .diagnostics import (Diagnosis, ErrorClass, RepairGuidance, classify, classify_error, extract_line_number,
                          repair_strategy)
from .executor import (ExecutorConfig, InterpreterMissing, SpawnFailure, check_interpreter, execute, find_interpreter,
                       parse_only)
from .metrics import RunReport, SignificanceResult, compute_metrics, efficiency, error_distribution, mcnemar
from .pipeline import ProblemTrace, make_executor, run_benchmark, solve_problem
from .prompts import ExtractionFailed, PromptBundle, extract_program, initial_prompt, repair_prompt

__version__ = "0.1.0"

__all__ = [
    "BackendUnavailable",
    "DecodingParams",
    "Diagnosis",
    "ErrorClass",
    "ExactNumber",
    "ExecutorConfig",
    "ExtractionFailed",
    "InterpreterMissing",
    "Problem",
    "ProblemTrace",
    "PrologProgram",
    "PromptBundle",
    "RawExecution",
    "RecordingBackend",
    "RemoteBackend",
    "RepairGuidance",
    "ReplayBackend",
    "ReplayMismatch",
    "RunReport",
    "ScriptEntry",
    "ScriptMiss",
    "ScriptedBackend",
    "SignificanceResult",
    "SpawnFailure",
    "answers_equal",
    "check_interpreter",
    "classify",
    "classify_error",
    "compute_metrics",
    "efficiency",
    "error_distribution",
    "execute",
    "extract_line_number",
    "extract_program",
    "find_interpreter",
    "initial_prompt",
    "load_problems",
    "make_executor",
    "mcnemar",
    "parse_only",
    "parse_answer",
    "repair_prompt",
    "repair_strategy",
    "run_benchmark",
    "solve_problem",
]
