"""Domain types shared across the harness, plus answer parsing and comparison."""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable

DEFAULT_TOLERANCE = 1e-4

_RATIONAL = re.compile(r"^([+-]?\d+)\s*(?:rdiv|/|r)\s*(\d+)$")
_PAREN_NEG = re.compile(r"^-\s*\((.*)\)$")


@dataclass(frozen=True)
class ExactNumber:
    """A finite numeric answer kept as an exact rational, with the text it came from."""

    value: Fraction
    original_text: str

    def __post_init__(self):
        if not isinstance(self.value, Fraction):
            object.__setattr__(self, "value", Fraction(self.value))

    @classmethod
    def parse(cls, text: str) -> ExactNumber | None:
        s = text.strip().replace(",", "").replace("_", "")
        if not s:
            return None
        m = _PAREN_NEG.match(s)
        sign = 1
        if m:
            sign, s = -1, m.group(1).strip()
        m = _RATIONAL.match(s)
        if m:
            den = int(m.group(2))
            if den == 0:
                return None
            return cls(sign * Fraction(int(m.group(1)), den), text.strip())
        if s.startswith("$"):
            s = s[1:]
        try:
            f = float(s)
        except ValueError:
            return None
        if not math.isfinite(f):
            return None
        # Fraction(str) keeps decimal literals exact ("0.1" is 1/10, not the float)
        return cls(sign * Fraction(s), text.strip())

    def __float__(self) -> float:
        return float(self.value)

    def __str__(self) -> str:
        return self.original_text

    def canonical(self) -> str:
        """Shortest decimal rendering: integers without a point, others as floats."""
        if self.value.denominator == 1:
            return str(self.value.numerator)
        return repr(float(self.value))


@dataclass(frozen=True)
class Problem:
    id: str
    question: str
    gold_answer: ExactNumber | None

    def __post_init__(self):
        if not self.id:
            raise ValueError("problem id must be non-empty")
        if not self.question or not self.question.strip():
            raise ValueError(f"problem {self.id!r}: question must be non-empty")


@dataclass(frozen=True)
class PrologProgram:
    source: str
    extracted_from: str

    def __post_init__(self):
        if not self.source.strip():
            raise ValueError("program source must be non-empty")


@dataclass(frozen=True)
class RawExecution:
    stdout: str
    stderr: str
    exit_code: int | None
    duration_ms: float
    timed_out: bool

    def __post_init__(self):
        if self.timed_out and self.exit_code is not None:
            raise ValueError("a timed-out execution carries no exit code")
        if not self.timed_out and self.exit_code is None:
            raise ValueError("a completed execution must carry an exit code")

    def to_dict(self, with_timing: bool = True) -> dict:
        d = {
            "stdout": self.stdout,
            "stderr": self.stderr,
            "exit_code": self.exit_code,
            "timed_out": self.timed_out,
        }
        if with_timing:
            d["duration_ms"] = self.duration_ms
        return d

    @classmethod
    def from_dict(cls, d: dict) -> RawExecution:
        return cls(
            stdout=d.get("stdout", ""),
            stderr=d.get("stderr", ""),
            exit_code=d.get("exit_code"),
            duration_ms=float(d.get("duration_ms", 0.0)),
            timed_out=bool(d.get("timed_out", False)),
        )


def parse_answer(stdout: str) -> ExactNumber | None:
    """Parse the last non-empty line of program output as a number."""
    lines = [ln for ln in stdout.splitlines() if ln.strip()]
    if not lines:
        return None
    return ExactNumber.parse(lines[-1])


def answers_equal(a: ExactNumber, b: ExactNumber, tol: float = DEFAULT_TOLERANCE) -> bool:
    if tol < 0:
        raise ValueError("tolerance must be non-negative")
    # decimal tolerance taken from its repr so 1e-4 means exactly 1/10000
    return abs(a.value - b.value) <= Fraction(repr(float(tol)))


def parse_gold(answer: str) -> ExactNumber:
    """Gold answers are bare numbers or GSM8K rationales ending in ``#### N``."""
    text = str(answer)
    if "####" in text:
        text = text.rsplit("####", 1)[1]
    num = ExactNumber.parse(text)
    if num is None:
        raise ValueError(f"unparseable gold answer: {answer!r}")
    return num


def load_problems(path: str | Path, gold_free: bool = False) -> list[Problem]:
    """Read JSONL problems; ``gold_free`` ignores any answers and leaves gold unset."""
    problems = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
            pid = str(obj.get("id", ""))
            if pid in seen:
                raise ValueError(f"{path}:{lineno}: duplicate problem id {pid!r}")
            seen.add(pid)
            gold = None
            if not gold_free:
                if "answer" not in obj:
                    raise ValueError(f"{path}:{lineno}: missing 'answer'")
                gold = parse_gold(obj["answer"])
            problems.append(Problem(pid, obj.get("question", ""), gold))
    return problems


def dump_problems(problems: Iterable[Problem], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in problems:
            rec = {"id": p.id, "question": p.question,
                   "answer": p.gold_answer.original_text if p.gold_answer else ""}
            fh.write(json.dumps(rec) + "\n")
