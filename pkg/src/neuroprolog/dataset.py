"""KB/SOLVE corpus loading, two-stage QA, cocktail mixing and train/val splitting."""

from __future__ import annotations

import enum
import hashlib
import json
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from statistics import mean
from typing import Sequence

from .core import PrologProgram, parse_answer
from .diagnostics import Diagnosis, classify_error, execution_failed
from .executor import ExecutorConfig, execute, parse_only

KB_PREFIX = "[KNOWLEDGE]"
SOLVE_PREFIX = "[SOLVE]"
KB_INSTRUCTION = "[KNOWLEDGE] Generate Prolog code that encodes the given mathematical concept"
SOLVE_INSTRUCTION = "[SOLVE] Generate correct Prolog code that solves the given math problem"

QA_TIMEOUT_MS = 5000

HARNESS = """
:- initialization(main).
main :- solve(Result), format("~w~n", [Result]), halt.
"""


class EmptyCorpus(ValueError):
    pass


class Task(str, enum.Enum):
    KB = "KB"
    SOLVE = "SOLVE"


@dataclass(frozen=True)
class CorpusEntry:
    task: Task
    instruction: str
    input: str
    output: str

    def __post_init__(self):
        prefix = KB_PREFIX if self.task is Task.KB else SOLVE_PREFIX
        if not self.instruction.startswith(prefix):
            raise ValueError(f"{self.task.value} instruction must start with {prefix}")
        if not self.output.strip():
            raise ValueError("output must be non-empty")

    @classmethod
    def from_dict(cls, d: dict) -> CorpusEntry:
        instruction = d["instruction"]
        if instruction.startswith(KB_PREFIX):
            task = Task.KB
        elif instruction.startswith(SOLVE_PREFIX):
            task = Task.SOLVE
        else:
            raise ValueError(f"instruction has no task prefix: {instruction[:40]!r}")
        return cls(task, instruction, d.get("input", ""), d["output"])

    def to_dict(self) -> dict:
        return {"task": self.task.value, "instruction": self.instruction,
                "input": self.input, "output": self.output}


def load_corpus(path: str | Path) -> list[CorpusEntry]:
    """Read a JSON array or JSON Lines file of {instruction, input, output} records."""
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("["):
        rows = json.loads(text)
    else:
        rows = [json.loads(line) for line in text.splitlines() if line.strip()]
    return [CorpusEntry.from_dict(r) for r in rows]


def write_corpus(entries: Sequence[CorpusEntry], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for e in entries:
            fh.write(json.dumps(e.to_dict(), ensure_ascii=False) + "\n")


@dataclass(frozen=True)
class QaVerdict:
    entry_index: int
    parse_ok: bool
    executed_ok: bool
    deterministic: bool
    answer_format_ok: bool
    duration_ms: float
    failure_detail: Diagnosis | None = None
    output: str | None = None

    @property
    def passed(self) -> bool:
        return self.parse_ok and self.executed_ok and self.deterministic and self.answer_format_ok

    def to_dict(self) -> dict:
        d = asdict(self)
        d["failure_detail"] = self.failure_detail.to_dict() if self.failure_detail else None
        d["passed"] = self.passed
        return d


def with_harness(source: str) -> str:
    """Append a main/halt driver for solve/1 unless the program brings its own."""
    if "initialization(main" in source:
        return source
    return source.rstrip() + "\n" + HARNESS


def _answer_line(stdout: str) -> str | None:
    lines = [ln.strip() for ln in stdout.splitlines() if ln.strip()]
    return lines[-1] if lines else None


def validate_entry(entry: CorpusEntry, cfg: ExecutorConfig, index: int = 0) -> QaVerdict:
    """Stage 1 parses without executing; only parseable programs reach stage 2."""
    program = PrologProgram(entry.output, entry.output)
    parsed = parse_only(program, cfg)
    if execution_failed(parsed):
        return QaVerdict(index, False, False, False, False, parsed.duration_ms, classify_error(parsed))
    runnable = PrologProgram(with_harness(entry.output), entry.output)
    first = execute(runnable, cfg)
    if execution_failed(first):
        return QaVerdict(index, True, False, False, False, first.duration_ms, classify_error(first))
    second = execute(runnable, cfg)
    deterministic = not execution_failed(second) and second.stdout == first.stdout
    answer = _answer_line(first.stdout)
    format_ok = answer == "ok" or parse_answer(first.stdout) is not None
    return QaVerdict(index, True, True, deterministic, format_ok, first.duration_ms, None, answer)


def validate_corpus(entries: Sequence[CorpusEntry], cfg: ExecutorConfig,
                    workers: int = 1) -> list[QaVerdict]:
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda ie: validate_entry(ie[1], cfg, ie[0]), enumerate(entries)))


@dataclass(frozen=True)
class MixSpec:
    lambda_kb: float
    lambda_solve: float
    seed: int = 0
    split_ratio: float = 0.9

    def __post_init__(self):
        if self.lambda_kb < 0 or self.lambda_solve < 0:
            raise ValueError("task weights must be non-negative")
        if abs(self.lambda_kb + self.lambda_solve - 1.0) > 1e-9:
            raise ValueError("task weights must sum to 1")
        if not 0 < self.split_ratio < 1:
            raise ValueError("split_ratio must lie in (0, 1)")

    @classmethod
    def natural(cls, n_kb: int, n_solve: int, seed: int = 0, split_ratio: float = 0.9) -> MixSpec:
        total = n_kb + n_solve
        if total == 0:
            raise EmptyCorpus("both corpora are empty")
        return cls(n_kb / total, n_solve / total, seed, split_ratio)


def corpus_digest(entries: Sequence[CorpusEntry]) -> str:
    h = hashlib.sha256()
    for e in entries:
        h.update(json.dumps(e.to_dict(), sort_keys=True, ensure_ascii=False).encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()


def _draw(entries: Sequence[CorpusEntry], count: int, rng: random.Random) -> list[CorpusEntry]:
    # whole shuffled passes: no entry repeats until every entry has been used
    out: list[CorpusEntry] = []
    while len(out) < count:
        batch = list(entries)
        rng.shuffle(batch)
        out.extend(batch[:count - len(out)])
    return out


def mix_cocktail(kb: Sequence[CorpusEntry], solve: Sequence[CorpusEntry], spec: MixSpec,
                 total: int | None = None) -> tuple[list[CorpusEntry], dict]:
    """Interleave KB and SOLVE entries so the KB share equals ``spec.lambda_kb``.

    ``total`` defaults to the combined corpus size, so natural proportions
    emit every entry exactly once.
    """
    if total is None:
        total = len(kb) + len(solve)
    n_kb = round(spec.lambda_kb * total)
    n_solve = total - n_kb
    if (n_kb and not kb) or (n_solve and not solve) or total == 0:
        raise EmptyCorpus("a corpus with non-zero weight is empty")
    rng = random.Random(spec.seed)
    mixed = _draw(kb, n_kb, rng) + _draw(solve, n_solve, rng)
    rng.shuffle(mixed)
    manifest = {
        "seed": spec.seed,
        "lambda_kb": spec.lambda_kb,
        "lambda_solve": spec.lambda_solve,
        "counts": {"kb_source": len(kb), "solve_source": len(solve),
                   "kb_emitted": n_kb, "solve_emitted": n_solve, "total": total},
        "source_digests": {"kb": corpus_digest(kb), "solve": corpus_digest(solve)},
        "output_digest": corpus_digest(mixed),
    }
    return mixed, manifest


def mix_curriculum(kb: Sequence[CorpusEntry], solve: Sequence[CorpusEntry],
                   schedule: Sequence[float], seed: int = 0) -> list[list[CorpusEntry]]:
    """One mix per epoch, with the KB weight for epoch i taken from ``schedule[i]``."""
    return [mix_cocktail(kb, solve, MixSpec(lam, 1.0 - lam, seed + epoch))[0]
            for epoch, lam in enumerate(schedule)]


def split_train_val(entries: Sequence, ratio: float = 0.9, seed: int = 0) -> tuple[list, list]:
    if not 0 < ratio < 1:
        raise ValueError("ratio must lie in (0, 1)")
    shuffled = list(entries)
    random.Random(seed).shuffle(shuffled)
    cut = round(ratio * len(shuffled))
    return shuffled[:cut], shuffled[cut:]


def corpus_stats(entries: Sequence[CorpusEntry]) -> dict:
    n = len(entries)
    tasks = {t.value: sum(e.task is t for e in entries) for t in Task}
    if not n:
        return {"count": 0, "tasks": tasks, "mean_input_chars": None, "mean_output_chars": None,
                "mean_prolog_lines": None, "clpq_usage_rate": None}
    return {
        "count": n,
        "tasks": tasks,
        "mean_input_chars": mean(len(e.input) for e in entries),
        "mean_output_chars": mean(len(e.output) for e in entries),
        "mean_prolog_lines": mean(sum(1 for ln in e.output.splitlines() if ln.strip())
                                  for e in entries),
        "clpq_usage_rate": 100.0 * sum("library(clpq)" in e.output for e in entries) / n,
    }
