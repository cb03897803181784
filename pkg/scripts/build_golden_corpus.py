"""Regenerate the classifier golden corpus.

Records tagged ``"source": "swipl"`` are captured by running small programs
through the local interpreter; ``"synthetic"`` records hold hand-written
stderr for wordings this interpreter version does not produce (and for
priority collisions between families).

    python scripts/build_golden_corpus.py [OUT]
"""

import json
import sys
from pathlib import Path

from neuroprolog import ExecutorConfig, PrologProgram, execute, find_interpreter

MAIN = ":- initialization(main).\n"

PROGRAMS = [
    ("operator_expected", "SYNTAX_OPERATOR_EXPECTED",
     MAIN + 'main :- X is 1 + a(b, format("~w~n", [X]), halt.\n'),
    ("unexpected_eof", "SYNTAX_UNEXPECTED_EOF",
     MAIN + 'main :- solve(X), format("~w~n", [X]), halt.\nsolve(X) :- X is (1 + 2'),
    ("operand_expected", "SYNTAX_ERROR",
     MAIN + "main :- X = [1,2,,3], halt.\n"),
    ("not_a_function", "TYPE_NOT_EVALUABLE",
     MAIN + 'main :- X is foo + 3, format("~w~n", [X]), halt.\n'),
    ("integer_expected", "TYPE_NUMBER_EXPECTED",
     MAIN + "main :- atom_length(abc, foo), halt.\n"),
    ("callable_expected", "TYPE_CALLABLE_EXPECTED",
     MAIN + "main :- call(1), halt.\n"),
    ("clpq_expression_expected", "TYPE_ERROR",
     ":- use_module(library(clpq)).\n" + MAIN + 'main :- {X = foo + 3}, format("~w~n", [X]), halt.\n'),
    ("zero_divisor", "DOMAIN_DIVIDE_BY_ZERO",
     MAIN + 'solve(X) :- X is 1/0.\nmain :- solve(X), format("~w~n", [X]), halt.\n'),
    ("factorial_negative", "DOMAIN_FACTORIAL_NEGATIVE",
     MAIN + "factorial(N, _) :- N < 0, throw(error(domain_error(factorial_argument, negative(N)), factorial/2)).\n"
     'main :- factorial(-3, F), format("~w~n", [F]), halt.\n'),
    ("length_negative", "DOMAIN_ERROR",
     MAIN + "main :- length(_, -1), halt.\n"),
    ("sqrt_undefined", "DOMAIN_ERROR",
     MAIN + 'main :- X is sqrt(-5), format("~w~n", [X]), halt.\n'),
    ("unbound_arithmetic", "INSTANTIATION_ERROR",
     MAIN + 'main :- X is _ + 3, format("~w~n", [X]), halt.\n'),
    ("unknown_procedure", "UNKNOWN_ERROR",
     MAIN + "main :- foo(1), halt.\n"),
    ("wrong_answer", "WRONG_ANSWER",
     ":- use_module(library(clpq)).\n" + MAIN + 'main :- {R = 40 + 1}, format("~w~n", [R]), halt.\n'),
    ("unparseable_output", "WRONG_ANSWER",
     MAIN + 'main :- format("the answer is forty-two~n"), halt.\n'),
    ("correct_answer", "OK",
     ":- use_module(library(clpq)).\n" + MAIN + 'main :- {R = 40 + 2}, format("~w~n", [R]), halt.\n'),
    ("correct_rational", "OK",
     ":- use_module(library(clpq)).\n" + MAIN + 'main :- {R = 7 / 2}, format("~w~n", [R]), halt.\n'),
]

GOLD = {"wrong_answer": "42", "unparseable_output": "42", "correct_answer": "42", "correct_rational": "3.5"}

SYNTHETIC = [
    ("plain_operator_expected", "SYNTAX_OPERATOR_EXPECTED", "Syntax error: Operator expected", 1),
    ("plain_unexpected_eof", "SYNTAX_UNEXPECTED_EOF", "foo.pl:4: Syntax error: Unexpected EOF", 1),
    ("unexpected_token", "SYNTAX_UNEXPECTED_TOKEN", "foo.pl:2: Syntax error: Unexpected token '@'", 1),
    ("parsing_error", "SYNTAX_ERROR", "Parsing error near line 5", 1),
    ("not_evaluable", "TYPE_NOT_EVALUABLE", "Type error: foo/0 is not evaluable", 1),
    ("evaluable_expected", "TYPE_NOT_EVALUABLE",
     "ERROR: is/2: Type error: `evaluable' expected, found `foo/0' (a compound)", 1),
    ("number_expected", "TYPE_NUMBER_EXPECTED", "Type error: `number' expected, found `abc' (an atom)", 1),
    ("division_by_zero", "DOMAIN_DIVIDE_BY_ZERO",
     "Arithmetic: evaluation error: zero_divisor / domain error: division by zero", 1),
    ("negative_sqrt", "DOMAIN_NEGATIVE_SQRT", "Domain error: negative sqrt argument -5", 1),
    ("domain_error_sqrt", "DOMAIN_NEGATIVE_SQRT", "error: domain error(sqrt, -5)", 1),
    ("instantiation_error", "INSTANTIATION_ERROR", "ERROR: x.pl:3: instantiation error", 1),
    ("bare_failure", "UNKNOWN_ERROR", "Killed", 137),
    # priority collisions: the earlier family wins
    ("syntax_beats_type", "SYNTAX_OPERATOR_EXPECTED",
     "x.pl:3: Syntax error: Operator expected\nType error: `callable' expected", 1),
    ("operator_beats_eof", "SYNTAX_OPERATOR_EXPECTED",
     "Syntax error: Operator expected\nSyntax error: Unexpected EOF", 1),
    ("type_beats_domain", "TYPE_NUMBER_EXPECTED",
     "Type error: `number' expected\nDomain error: division by zero", 1),
    ("domain_beats_instantiation", "DOMAIN_DIVIDE_BY_ZERO",
     "Domain error: division by zero\nArguments are not sufficiently instantiated (instantiation error)", 1),
    ("sqrt_beats_factorial", "DOMAIN_NEGATIVE_SQRT",
     "Domain error: negative sqrt in factorial of a negative", 1),
    ("syntax_beats_instantiation", "SYNTAX_ERROR",
     "Syntax error: Illegal start of term\ninstantiation error", 1),
]


def main(out: Path) -> None:
    cfg = ExecutorConfig(find_interpreter(), 5000)
    rows = []
    for name, expected, src in PROGRAMS:
        raw = execute(PrologProgram(src, src), cfg)
        rows.append({"name": name, "source": "swipl", "program": src,
                     "stdout": raw.stdout, "stderr": raw.stderr, "exit_code": raw.exit_code,
                     "timed_out": raw.timed_out, "gold": GOLD.get(name, "42"),
                     "expected_class": expected})
    for name, expected, stderr, code in SYNTHETIC:
        rows.append({"name": name, "source": "synthetic", "stdout": "", "stderr": stderr,
                     "exit_code": code, "timed_out": False, "gold": "42", "expected_class": expected})
    rows.append({"name": "timeout", "source": "synthetic", "stdout": "", "stderr": "",
                 "exit_code": None, "timed_out": True, "gold": "42", "expected_class": "TIMEOUT"})
    out.write_text("".join(json.dumps(r, sort_keys=True) + "\n" for r in rows), encoding="utf-8")
    print(f"wrote {len(rows)} records to {out}")


if __name__ == "__main__":
    default = Path(__file__).resolve().parents[1] / "src" / "neuroprolog" / "resources" / "golden_corpus.jsonl"
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else default)
