import pytest
from hypothesis import given, strategies as st

from neuroprolog.diagnostics import Diagnosis, ErrorClass, repair_strategy
from neuroprolog.prompts import (INIT_DIRECTIVE, ExtractionFailed, PromptBundle, PromptKind,
                                 extract_program, initial_prompt, repair_prompt)

from conftest import FIXTURES

QUESTION = "Janet has 3 apples and buys 4 more. How many apples does she have?"
CODE = ":- use_module(library(clpq)).\nsolve(R) :- { R = 3 + 4 }.\n"


def test_initial_prompt_matches_transcription():
    ref = (FIXTURES / "initial_prompt_transcription.txt").read_text(encoding="utf-8")
    p = initial_prompt(QUESTION, "p1")
    assert p.text == ref.replace("<QUESTION>", QUESTION)
    assert p.text.startswith("Generate ONLY valid Prolog code")
    assert (p.kind, p.attempt, p.problem_id) == (PromptKind.INITIAL, 1, "p1")


@pytest.mark.parametrize("line", [7, None])
def test_repair_prompt_matches_transcription(line):
    ref = (FIXTURES / "repair_prompt_transcription.txt").read_text(encoding="utf-8")
    cls = ErrorClass.DOMAIN_DIVIDE_BY_ZERO
    g = repair_strategy(cls)
    p = repair_prompt(QUESTION, CODE, Diagnosis(cls, line, "zero_divisor"), "p1", 3)
    header = f"ERROR [Line {line}]" if line is not None else "ERROR"
    expected = (ref.replace("ERROR [Line {line_num}]", header)
                .replace("{error_type}", cls.value)
                .replace("{error_description}", g.description)
                .replace("{fix_instruction}", g.fix_instruction)
                .replace("{previous_code}", CODE)
                .replace("{question}", QUESTION))
    assert p.text == expected
    assert "Generate CORRECTED Prolog code" in p.text
    assert (p.kind, p.attempt) == (PromptKind.REPAIR, 3)


def test_repair_prompt_is_self_contained():
    p = repair_prompt(QUESTION, CODE, Diagnosis(ErrorClass.WRONG_ANSWER, None, ""), "p", 2)
    assert QUESTION in p.text and CODE in p.text


def test_placeholders_in_values_are_not_expanded():
    tricky = "What is {question} plus {previous_code}?"
    p = repair_prompt(tricky, "x :- {error_type}.", Diagnosis(ErrorClass.TYPE_ERROR, 1, ""), "p", 2)
    assert tricky in p.text and "x :- {error_type}." in p.text


def test_bundle_attempt_invariants():
    with pytest.raises(ValueError):
        PromptBundle("t", PromptKind.INITIAL, "p", 2)
    with pytest.raises(ValueError):
        PromptBundle("t", PromptKind.REPAIR, "p", 1)
    with pytest.raises(ValueError):
        initial_prompt("  ")


PROGRAM = """:- use_module(library(clpq)).
:- initialization(main).

solve(Result) :-
    { Result = 3 + 4 }.

main :-
    solve(Result),
    format("~w~n", [Result]),
    halt.
"""


def test_extract_bare_program():
    assert extract_program(PROGRAM).source == PROGRAM


def test_extract_from_fence_with_prose():
    resp = f"Here is the program.\n```prolog\n{PROGRAM}```\nThis prints the answer."
    assert extract_program(resp).source == PROGRAM


def test_extract_takes_last_fence():
    old = "```prolog\n:- initialization(main).\nmain :- halt.\n```"
    resp = old + "\nActually, better:\n```prolog\n" + PROGRAM + "```"
    assert extract_program(resp).source == PROGRAM


def test_extract_trims_preamble_and_trailer():
    resp = "Sure! Let me write it:\n" + PROGRAM + "\nThe answer will be printed to stdout.\n"
    assert extract_program(resp).source == PROGRAM


def test_extract_appends_initialization():
    body = ":- use_module(library(clpq)).\nmain :- X is 2 + 2, write(X), nl, halt.\n"
    src = extract_program(body).source
    assert src.rstrip().endswith(INIT_DIRECTIVE)


def test_extract_unterminated_fence():
    assert extract_program("```prolog\n" + PROGRAM).source == PROGRAM


@pytest.mark.parametrize("resp", ["", "   ", "I cannot solve this problem.", "```\n```"])
def test_extract_failures(resp):
    with pytest.raises(ExtractionFailed):
        extract_program(resp)


prose = st.sampled_from(["", "Here is the code.", "Sure thing! This should work.\n",
                         "Explanation: we add numbers.\n"])


@given(prose, prose, st.booleans())
def test_extract_idempotent(before, after, fenced):
    resp = f"{before}\n```prolog\n{PROGRAM}```\n{after}" if fenced else f"{before}\n{PROGRAM}\n{after}"
    once = extract_program(resp).source
    assert extract_program(once).source == once
    assert once == PROGRAM
