"""Prompt rendering and program extraction from raw model responses."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .core import PrologProgram
from .diagnostics import Diagnosis, repair_strategy


class ExtractionFailed(ValueError):
    pass


class PromptKind(str, enum.Enum):
    INITIAL = "Initial"
    REPAIR = "Repair"


@dataclass(frozen=True)
class PromptBundle:
    text: str
    kind: PromptKind
    problem_id: str
    attempt: int

    def __post_init__(self):
        if self.kind is PromptKind.INITIAL and self.attempt != 1:
            raise ValueError("initial prompts are always attempt 1")
        if self.kind is PromptKind.REPAIR and self.attempt < 2:
            raise ValueError("repair prompts start at attempt 2")


@lru_cache(maxsize=None)
def load_template(name: str) -> str:
    return resources.files("neuroprolog").joinpath("resources", name).read_text(encoding="utf-8")


_PLACEHOLDER = re.compile(r"\{(question|line_info|error_type|error_description|fix_instruction|previous_code)\}")


def _render(template: str, **values: str) -> str:
    # single pass, so placeholder-like text inside the values is left alone
    return _PLACEHOLDER.sub(lambda m: values[m.group(1)], template)


def initial_prompt(question: str, problem_id: str = "") -> PromptBundle:
    if not question.strip():
        raise ValueError("question must be non-empty")
    text = _render(load_template("initial_prompt.txt"), question=question)
    return PromptBundle(text, PromptKind.INITIAL, problem_id, 1)


def repair_prompt(question: str, previous_source: str, diag: Diagnosis,
                  problem_id: str = "", attempt: int = 2) -> PromptBundle:
    guide = repair_strategy(diag.error_class)
    text = _render(
        load_template("repair_prompt.txt"),
        line_info=f" [Line {diag.line}]" if diag.line is not None else "",
        error_type=diag.error_class.value,
        error_description=guide.description,
        fix_instruction=guide.fix_instruction,
        previous_code=previous_source,
        question=question,
    )
    return PromptBundle(text, PromptKind.REPAIR, problem_id, attempt)


_FENCE = re.compile(r"```[^\n`]*\n(.*?)```", re.DOTALL)
_OPEN_FENCE = re.compile(r"^\s*```[^\n`]*\n")
_PROSE_LINE = re.compile(r"^[A-Z][^()\[\]{}=%<>]*[.!?]$")
INIT_DIRECTIVE = ":- initialization(main)."


def _first_directive(text: str) -> int | None:
    for m in re.finditer(r":-", text):
        start = text.rfind("\n", 0, m.start()) + 1
        before = text[start:m.start()].strip()
        if not before or before[-1] in ":.!?,":
            return m.start()
    return None


def _is_prose(line: str) -> bool:
    s = line.strip()
    return (not line.startswith((" ", "\t")) and s.count(" ") >= 2
            and ":-" not in s and bool(_PROSE_LINE.match(s)))


def extract_program(response: str) -> PrologProgram:
    """Pull a Prolog program out of a model response.

    Takes the last fenced block if any, drops prose before the first directive
    and after the last clause, and appends the initialization directive when
    the model left it out.
    """
    if not response.strip():
        raise ExtractionFailed("empty response")
    blocks = _FENCE.findall(response)
    text = blocks[-1] if blocks else _OPEN_FENCE.sub("", response).replace("```", "")
    if ":-" not in text:
        raise ExtractionFailed("no ':-' directive in response")
    start = _first_directive(text)
    if start is not None:
        text = text[start:]
    lines = text.rstrip().splitlines()
    # drop trailing prose, then anything after the last clause-final period
    while lines and (not lines[-1].strip() or _is_prose(lines[-1])):
        lines.pop()
    text = "\n".join(lines)
    end = max(text.rfind(".\n"), text.rfind(". "), text.rfind(".\t"))
    if not text.endswith(".") and end >= 0:
        text = text[:end + 1]
    source = text.strip()
    if not source:
        raise ExtractionFailed("nothing left after trimming")
    if "initialization(main" not in source:
        source += "\n" + INIT_DIRECTIVE
    return PrologProgram(source + "\n", response)
