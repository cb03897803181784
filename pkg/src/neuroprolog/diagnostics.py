"""Interpreter-failure classification and the repair-strategy lookup table.

Classification is a prioritised chain of case-insensitive substring tests
over the interpreter's stderr: syntax, then type, then domain, then
instantiation, with UNKNOWN_ERROR as the fallback. Each family has a gate
(entering the family) and ordered refinements; the first matching family
wins even when later families also match.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass
from pathlib import Path

from .core import DEFAULT_TOLERANCE, ExactNumber, RawExecution, answers_equal, parse_answer


class ErrorClass(str, enum.Enum):
    SYNTAX_OPERATOR_EXPECTED = "SYNTAX_OPERATOR_EXPECTED"
    SYNTAX_UNEXPECTED_EOF = "SYNTAX_UNEXPECTED_EOF"
    SYNTAX_UNEXPECTED_TOKEN = "SYNTAX_UNEXPECTED_TOKEN"
    SYNTAX_ERROR = "SYNTAX_ERROR"
    TYPE_NOT_EVALUABLE = "TYPE_NOT_EVALUABLE"
    TYPE_NUMBER_EXPECTED = "TYPE_NUMBER_EXPECTED"
    TYPE_CALLABLE_EXPECTED = "TYPE_CALLABLE_EXPECTED"
    TYPE_ERROR = "TYPE_ERROR"
    DOMAIN_DIVIDE_BY_ZERO = "DOMAIN_DIVIDE_BY_ZERO"
    DOMAIN_NEGATIVE_SQRT = "DOMAIN_NEGATIVE_SQRT"
    DOMAIN_FACTORIAL_NEGATIVE = "DOMAIN_FACTORIAL_NEGATIVE"
    DOMAIN_ERROR = "DOMAIN_ERROR"
    INSTANTIATION_ERROR = "INSTANTIATION_ERROR"
    WRONG_ANSWER = "WRONG_ANSWER"
    UNKNOWN_ERROR = "UNKNOWN_ERROR"
    # outside the core taxonomy; a run that never terminates needs a class
    TIMEOUT = "TIMEOUT"

    @property
    def family(self) -> str:
        return self.value.split("_", 1)[0]

    def __str__(self) -> str:
        return self.value


# classes with targeted guidance; the generic fallbacks and TIMEOUT get broader advice
SPECIFIC_CLASSES = frozenset({
    ErrorClass.SYNTAX_OPERATOR_EXPECTED, ErrorClass.SYNTAX_UNEXPECTED_EOF,
    ErrorClass.SYNTAX_UNEXPECTED_TOKEN, ErrorClass.TYPE_NOT_EVALUABLE,
    ErrorClass.TYPE_NUMBER_EXPECTED, ErrorClass.TYPE_CALLABLE_EXPECTED,
    ErrorClass.DOMAIN_DIVIDE_BY_ZERO, ErrorClass.DOMAIN_NEGATIVE_SQRT,
    ErrorClass.DOMAIN_FACTORIAL_NEGATIVE, ErrorClass.INSTANTIATION_ERROR,
    ErrorClass.WRONG_ANSWER,
})


@dataclass(frozen=True)
class Diagnosis:
    error_class: ErrorClass
    line: int | None
    raw_message: str

    def to_dict(self) -> dict:
        return {"class": self.error_class.value, "line": self.line, "raw_message": self.raw_message}

    @classmethod
    def from_dict(cls, d: dict) -> Diagnosis:
        return cls(ErrorClass(d["class"]), d.get("line"), d.get("raw_message", ""))


@dataclass(frozen=True)
class RepairGuidance:
    error_class: ErrorClass
    description: str
    fix_instruction: str


_SYNTAX = "Syntax error (parser failure)"
_TYPE = "Type error (semantic mismatch)"
_DOMAIN = "Domain error (runtime constraint violation)"

_GUIDANCE = {
    ErrorClass.SYNTAX_OPERATOR_EXPECTED: (
        f"{_SYNTAX}. Example violation: X Y instead of X + Y",
        "Insert the appropriate operator (+, -, *, /) between terms. "
        "Check arithmetic expression syntax."),
    ErrorClass.SYNTAX_UNEXPECTED_EOF: (
        f"{_SYNTAX}. Example violation: Unclosed parenthesis: solve(X",
        "Check bracket/parenthesis matching. Ensure all clauses end with period."),
    ErrorClass.SYNTAX_UNEXPECTED_TOKEN: (
        f"{_SYNTAX}. Example violation: Invalid character in code",
        "Remove invalid characters. Review Prolog syntax rules for special symbols."),
    ErrorClass.SYNTAX_ERROR: (
        f"{_SYNTAX}. The interpreter could not parse the program",
        "Review the reported line for malformed clauses. Ensure every clause ends "
        "with a period and every bracket is closed."),
    ErrorClass.TYPE_NOT_EVALUABLE: (
        f"{_TYPE}. Example violation: X is foo + 3 (atom in arithmetic)",
        "Ensure all arithmetic expressions contain only numbers or numeric variables. "
        "Replace atoms with numeric values."),
    ErrorClass.TYPE_NUMBER_EXPECTED: (
        f"{_TYPE}. Example violation: Non-numeric term in numeric context",
        "Verify that all variables used in calculations are properly instantiated "
        "with numbers before arithmetic operations."),
    ErrorClass.TYPE_CALLABLE_EXPECTED: (
        f"{_TYPE}. Example violation: Malformed predicate call",
        "Check predicate syntax and argument structure. Ensure predicates are properly defined."),
    ErrorClass.TYPE_ERROR: (
        f"{_TYPE}. A term of the wrong type reached a built-in",
        "Check that every argument has the type the predicate expects. "
        "Use numbers in arithmetic and atoms or compound terms as goals."),
    ErrorClass.DOMAIN_DIVIDE_BY_ZERO: (
        f"{_DOMAIN}. Example violation: {{ X = 10 / 0 }}",
        "Add guard condition: Denom =\\= 0 before division. Handle edge case explicitly."),
    ErrorClass.DOMAIN_NEGATIVE_SQRT: (
        f"{_DOMAIN}. Example violation: sqrt(-5)",
        "Ensure arguments to sqrt/1 are non-negative. Add constraint: X >= 0."),
    ErrorClass.DOMAIN_FACTORIAL_NEGATIVE: (
        f"{_DOMAIN}. Example violation: factorial(-3, F)",
        "Add base case check: N >= 0. Factorial undefined for negative integers."),
    ErrorClass.DOMAIN_ERROR: (
        f"{_DOMAIN}. An argument fell outside the domain of an operation",
        "Check the valid range of every arithmetic argument and add guard "
        "conditions for edge cases."),
    ErrorClass.INSTANTIATION_ERROR: (
        "Instantiation error (unbound variable). Example violation: "
        "Using unbound variable in arithmetic",
        "Ensure all variables are bound before arithmetic evaluation. "
        "Check predicate ordering to guarantee proper instantiation flow."),
    ErrorClass.WRONG_ANSWER: (
        "Logical error (incorrect semantics). Execution succeeds but the answer "
        "does not match the expected value",
        "Review problem constraints and reasoning chain. Verify operator precedence "
        "and intermediate calculations. Check unit conversions."),
    ErrorClass.UNKNOWN_ERROR: (
        "Unclassified error. The interpreter reported a failure outside the known categories",
        "Read the error message carefully, make sure every predicate you call is "
        "defined, and follow the required program format exactly."),
    ErrorClass.TIMEOUT: (
        "Timeout. The program did not terminate within the time limit",
        "Remove unbounded recursion or loops. Make sure main/0 prints the result "
        "and calls halt."),
}


def repair_strategy(error_class: ErrorClass) -> RepairGuidance:
    description, fix = _GUIDANCE[ErrorClass(error_class)]
    return RepairGuidance(ErrorClass(error_class), description, fix)


# (gate patterns, [(refinement patterns, class), ...], fallback class)
# Each pattern tuple matches if ANY member occurs; a member that is itself a
# tuple needs ALL of its phrases. The SWI-Prolog phrasing
# aliases sit next to the canonical pattern they stand in for.
_CHAIN = [
    (("syntax error", "parsing error"), [
        (("operator expected",), ErrorClass.SYNTAX_OPERATOR_EXPECTED),
        (("unexpected eof", "unexpected end of file", "end of file in"),
         ErrorClass.SYNTAX_UNEXPECTED_EOF),
        (("unexpected token", "illegal character"), ErrorClass.SYNTAX_UNEXPECTED_TOKEN),
    ], ErrorClass.SYNTAX_ERROR),
    (("type error", "is not a function"), [
        (("not evaluable", "evaluable expected", "is not a function"),
         ErrorClass.TYPE_NOT_EVALUABLE),
        (("number expected", "integer expected"),
         ErrorClass.TYPE_NUMBER_EXPECTED),
        (("callable expected",), ErrorClass.TYPE_CALLABLE_EXPECTED),
    ], ErrorClass.TYPE_ERROR),
    (("domain error", "evaluation error"), [
        (("division by zero", "zero_divisor"), ErrorClass.DOMAIN_DIVIDE_BY_ZERO),
        (("negative sqrt", "domain error(sqrt", "domain_error(sqrt"),
         ErrorClass.DOMAIN_NEGATIVE_SQRT),
        ((("factorial", "negative"),), ErrorClass.DOMAIN_FACTORIAL_NEGATIVE),
    ], ErrorClass.DOMAIN_ERROR),
    (("instantiation error", "not sufficiently instantiated"), [], ErrorClass.INSTANTIATION_ERROR),
]

_QUOTES = str.maketrans("", "", "`'‘’")


def _hit(msg: str, patterns) -> bool:
    return any(all(q in msg for q in p) if isinstance(p, tuple) else p in msg
               for p in patterns)


def _normalise(stderr: str) -> str:
    # SWI quotes type names (`callable' expected); drop the quotes so the
    # plain phrases match
    return stderr.lower().translate(_QUOTES)


_FILE_LINE = re.compile(r"[\w./\\-]+\.\w+:(\d+)")
_AT_LINE = re.compile(r"\bat line (\d+)", re.IGNORECASE)


def extract_line_number(stderr: str) -> int | None:
    """First ``file.ext:N`` or ``at line N`` location, preferring ERROR lines."""
    error_lines = [ln for ln in stderr.splitlines() if "error" in ln.lower()]
    for text in ("\n".join(error_lines), stderr):
        hits = [m for rx in (_FILE_LINE, _AT_LINE) for m in rx.finditer(text)]
        if hits:
            return int(min(hits, key=lambda m: m.start()).group(1))
    return None


def execution_failed(raw: RawExecution) -> bool:
    """True when the interpreter reported an error (or the run never finished)."""
    if raw.timed_out or raw.exit_code != 0:
        return True
    return any(ln.lstrip().startswith("ERROR") for ln in raw.stderr.splitlines())


def classify_error(raw: RawExecution) -> Diagnosis:
    """Map a failed execution to an error class; the order of tests is the priority."""
    if raw.timed_out:
        return Diagnosis(ErrorClass.TIMEOUT, None, "execution timed out")
    msg = _normalise(raw.stderr)
    line = extract_line_number(raw.stderr)
    message = raw.stderr.strip()
    for gate, refinements, fallback in _CHAIN:
        if _hit(msg, gate):
            for patterns, cls in refinements:
                if _hit(msg, patterns):
                    return Diagnosis(cls, line, message)
            return Diagnosis(fallback, line, message)
    return Diagnosis(ErrorClass.UNKNOWN_ERROR, line, message)


def classify(raw: RawExecution, produced: ExactNumber | None, gold: ExactNumber | None,
             tol: float = DEFAULT_TOLERANCE) -> Diagnosis | None:
    """Outcome of one attempt: ``None`` for a correct answer, otherwise the diagnosis.

    With ``gold=None`` (no reference answer) a clean execution counts as success.
    """
    if execution_failed(raw):
        return classify_error(raw)
    if gold is None:
        return None
    if produced is None:
        return Diagnosis(ErrorClass.WRONG_ANSWER, None,
                         f"unparseable output: {raw.stdout.strip()!r}; expected {gold}")
    if answers_equal(produced, gold, tol):
        return None
    return Diagnosis(ErrorClass.WRONG_ANSWER, None, f"produced {produced}; expected {gold}")


def load_golden_corpus(path: str | Path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def classify_record(rec: dict) -> ErrorClass | None:
    """Classify one golden-corpus record ({stderr, stdout, exit_code, timed_out, ...})."""
    timed_out = bool(rec.get("timed_out", False))
    raw = RawExecution(rec.get("stdout", ""), rec.get("stderr", ""),
                       None if timed_out else int(rec.get("exit_code", 0)), 0.0, timed_out)
    gold = rec.get("gold")
    if rec.get("produced") is not None:
        produced = ExactNumber.parse(str(rec["produced"]))
    else:
        produced = parse_answer(raw.stdout)
    diag = classify(raw, produced, ExactNumber.parse(str(gold)) if gold is not None else None)
    return diag.error_class if diag else None
