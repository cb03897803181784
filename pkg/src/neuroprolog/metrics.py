"""Run-level metrics, error distributions and paired significance testing.

Counts are kept as integers and turned into percentages through exact
fractions; rounding happens only when a report is written out.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .diagnostics import ErrorClass
from .pipeline import ProblemTrace

EXACT_LIMIT = 50


class IdMismatch(ValueError):
    pass


def _pct(num: int, den: int) -> float | None:
    return float(Fraction(100 * num, den)) if den else None


@dataclass(frozen=True)
class ErrorDistribution:
    histogram: dict[ErrorClass, int]
    shares: dict[ErrorClass, float]
    fixability: dict[ErrorClass, float]
    first_error_counts: dict[ErrorClass, int]


@dataclass(frozen=True)
class RunReport:
    n: int
    infra_failures: int
    accuracy: float | None
    executability: float | None
    first_try: float | None
    correction_rate: float | None
    avg_iterations: float | None
    efficiency: float | None
    # correctness-based variants: attempt 1 correct / initially-wrong later solved
    first_try_correct: float | None
    correction_rate_correct: float | None
    error_histogram: dict[ErrorClass, int] = field(default_factory=dict)
    fixability: dict[ErrorClass, float] = field(default_factory=dict)
    counts: dict[str, int] = field(default_factory=dict)

    @property
    def valid(self) -> bool:
        return self.n > 0


def efficiency(accuracy: float, exec_rate: float, avg_iter: float) -> float:
    """Correct-answer throughput: accuracy scaled by execution rate, per iteration."""
    if avg_iter < 1:
        raise ValueError("average iterations must be >= 1")
    return accuracy * (exec_rate / 100.0) / avg_iter


def executability_identity(first_try: float, correction_rate: float) -> float:
    """Executability implied by first-try success and correction rate."""
    return first_try + (100.0 - first_try) * correction_rate / 100.0


def error_distribution(traces: Sequence[ProblemTrace]) -> ErrorDistribution:
    scored = [t for t in traces if t.infra_error is None]
    hist = Counter(t.final_diagnosis.error_class for t in scored
                   if not t.solved and t.final_diagnosis is not None)
    failed = sum(hist.values())
    first = Counter()
    fixed = Counter()
    for t in scored:
        d = t.first_diagnosis
        if d is None:
            continue
        first[d.error_class] += 1
        if t.solved:
            fixed[d.error_class] += 1
    order = list(ErrorClass)
    return ErrorDistribution(
        histogram={c: hist[c] for c in order if hist[c]},
        shares={c: _pct(hist[c], failed) for c in order if hist[c]},
        fixability={c: _pct(fixed[c], first[c]) for c in order if first[c]},
        first_error_counts={c: first[c] for c in order if first[c]},
    )


def compute_metrics(traces: Sequence[ProblemTrace]) -> RunReport:
    """Aggregate one run. Infrastructure-failed traces are reported but not scored."""
    scored = [t for t in traces if t.infra_error is None]
    infra = len(traces) - len(scored)
    n = len(scored)
    solved = sum(t.solved for t in scored)
    executable = sum(any(a.outcome.executed_cleanly for a in t.attempts) for t in scored)
    first_ok = sum(t.attempts[0].outcome.executed_cleanly for t in scored)
    first_correct = sum(t.attempts[0].outcome.solved for t in scored)
    initial_failures = n - first_ok
    recovered = sum(
        any(a.outcome.executed_cleanly for a in t.attempts[1:])
        for t in scored if not t.attempts[0].outcome.executed_cleanly)
    initially_wrong = n - first_correct
    repaired = sum(t.solved for t in scored if not t.attempts[0].outcome.solved)
    iterations = sum(t.iterations_used for t in scored)

    accuracy = _pct(solved, n)
    exec_rate = _pct(executable, n)
    avg_iter = float(Fraction(iterations, n)) if n else None
    eff = efficiency(accuracy, exec_rate, avg_iter) if n else None
    dist = error_distribution(scored)
    return RunReport(
        n=n,
        infra_failures=infra,
        accuracy=accuracy,
        executability=exec_rate,
        first_try=_pct(first_ok, n),
        correction_rate=_pct(recovered, initial_failures),
        avg_iterations=avg_iter,
        efficiency=eff,
        first_try_correct=_pct(first_correct, n),
        correction_rate_correct=_pct(repaired, initially_wrong),
        error_histogram=dist.histogram,
        fixability=dist.fixability,
        counts={"solved": solved, "executable": executable, "first_try": first_ok,
                "initial_failures": initial_failures, "recovered": recovered,
                "first_try_correct": first_correct, "repaired": repaired,
                "iterations": iterations},
    )


@dataclass(frozen=True)
class SignificanceResult:
    b: int
    c: int
    p_value: float
    marker: str
    exact: bool


def significance_marker(p: float) -> str:
    if p < 0.01:
        return "‡"
    if p < 0.05:
        return "†"
    return ""


def mcnemar_test(b: int, c: int) -> SignificanceResult:
    """McNemar's test on discordant counts: exact binomial below 50 pairs, else chi-square."""
    if b < 0 or c < 0:
        raise ValueError("discordant counts must be non-negative")
    n = b + c
    if n == 0:
        return SignificanceResult(b, c, 1.0, "", True)
    if n < EXACT_LIMIT:
        tail = sum(math.comb(n, i) for i in range(max(b, c), n + 1))
        p = float(min(Fraction(1), Fraction(2 * tail, 2 ** n)))
        exact = True
    else:
        stat = max(0, abs(b - c) - 1) ** 2 / n
        # chi-square with one degree of freedom
        p = min(1.0, math.erfc(math.sqrt(stat / 2.0)))
        exact = False
    return SignificanceResult(b, c, p, significance_marker(p), exact)


def mcnemar(traces_a: Sequence[ProblemTrace], traces_b: Sequence[ProblemTrace]) -> SignificanceResult:
    """Compare two runs over the same problems; b counts A-only solves, c counts B-only."""
    a = {t.problem.id: t for t in traces_a}
    b = {t.problem.id: t for t in traces_b}
    if set(a) != set(b):
        only_a = sorted(set(a) - set(b))[:5]
        only_b = sorted(set(b) - set(a))[:5]
        raise IdMismatch(f"runs cover different problems (only in A: {only_a}, only in B: {only_b})")
    b_count = c_count = 0
    for pid, ta in a.items():
        tb = b[pid]
        if ta.infra_error or tb.infra_error:
            continue
        if ta.solved and not tb.solved:
            b_count += 1
        elif tb.solved and not ta.solved:
            c_count += 1
    return mcnemar_test(b_count, c_count)


def _fmt(x: float | None, digits: int = 2) -> str:
    return "" if x is None else f"{x:.{digits}f}"


CSV_FIELDS = ["n", "infra_failures", "accuracy", "executability", "first_try", "correction_rate",
              "avg_iterations", "efficiency", "first_try_correct", "correction_rate_correct"]


def report_csv(report: RunReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    w.writerow([report.n, report.infra_failures] + [_fmt(getattr(report, f)) for f in CSV_FIELDS[2:]])
    return buf.getvalue()


def report_markdown(report: RunReport, label: str = "run", sig: SignificanceResult | None = None) -> str:
    sig_cell = "---" if sig is None else (sig.marker or "")
    lines = [
        "| Config | Acc. (%) | Exec. (%) | 1st-Try (%) | Corr. (%) | Avg Iter | Sig. |",
        "|---|---|---|---|---|---|---|",
        f"| {label} | {_fmt(report.accuracy)} | {_fmt(report.executability)} | "
        f"{_fmt(report.first_try, 1)} | {_fmt(report.correction_rate, 1)} | "
        f"{_fmt(report.avg_iterations)} | {sig_cell} |",
        "",
        f"Scored problems: {report.n}; infrastructure failures: {report.infra_failures}; "
        f"efficiency: {_fmt(report.efficiency)}",
        f"Correctness-based first-try: {_fmt(report.first_try_correct, 1)}; "
        f"correction: {_fmt(report.correction_rate_correct, 1)}",
    ]
    return "\n".join(lines) + "\n"


def histogram_jsonl(traces: Sequence[ProblemTrace]) -> str:
    dist = error_distribution(traces)
    rows = []
    for cls in ErrorClass:
        if cls in dist.histogram or cls in dist.first_error_counts:
            rows.append({
                "class": cls.value,
                "final_count": dist.histogram.get(cls, 0),
                "final_share": None if cls not in dist.shares else round(dist.shares[cls], 4),
                "first_error_count": dist.first_error_counts.get(cls, 0),
                "fixability": None if cls not in dist.fixability else round(dist.fixability[cls], 4),
            })
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in rows)


def write_reports(traces: Sequence[ProblemTrace], out_dir: str | Path, label: str = "run") -> RunReport:
    out = Path(out_dir)
    report = compute_metrics(traces)
    (out / "report.csv").write_text(report_csv(report), encoding="utf-8")
    (out / "report.md").write_text(report_markdown(report, label), encoding="utf-8")
    (out / "histogram.jsonl").write_text(histogram_jsonl(traces), encoding="utf-8")
    return report
