"""Command-line entry point: ``neuroprolog <command> ...``.

Exit status: 0 when a command completed (whatever the model scored),
2 for usage/configuration/IO problems, 3 when infrastructure failed
(interpreter missing, backend unreachable for some problems).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import backends as bk
from .core import RawExecution, ExactNumber, load_problems
from .dataset import MixSpec, corpus_stats, load_corpus, mix_cocktail, split_train_val, validate_corpus, write_corpus
from .diagnostics import classify, classify_record, load_golden_corpus
from .executor import DEFAULT_TIMEOUT_MS, ExecutorConfig, InterpreterMissing, check_interpreter, find_interpreter
from .metrics import IdMismatch, mcnemar, write_reports
from .pipeline import DEFAULT_MAX_ITERATIONS, make_executor, read_traces, run_benchmark, write_timings, write_traces

log = logging.getLogger("neuroprolog")

EXIT_OK, EXIT_USAGE, EXIT_INFRA = 0, 2, 3

RUN_DEFAULTS = {
    "problems": None,
    "backend": "scripted",
    "script": None,
    "base_url": "http://localhost:8000/v1",
    "model": None,
    "max_iterations": DEFAULT_MAX_ITERATIONS,
    "timeout_ms": DEFAULT_TIMEOUT_MS,
    "workers": 1,
    "out": None,
    "interpreter": None,
    "gold_free": False,
    "record": None,
    "replay": None,
    "max_tokens": bk.DEFAULT_MAX_TOKENS,
    "temperature": 0.0,
}


class UsageError(Exception):
    pass


def _interpreter(path: str | None) -> str:
    found = path or find_interpreter()
    if not found:
        raise InterpreterMissing("no Prolog interpreter found: install SWI-Prolog (`swipl`), "
                                 "set NEUROPROLOG_SWIPL, or pass --interpreter")
    return found


def resolve_run_config(args: argparse.Namespace) -> dict:
    """Merge flags over the config file over defaults."""
    cfg = dict(RUN_DEFAULTS)
    if getattr(args, "config", None):
        try:
            file_cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        unknown = set(file_cfg) - set(cfg)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(file_cfg)
    for key in RUN_DEFAULTS:
        val = getattr(args, key, None)
        if val is not None and val is not False:
            cfg[key] = val
    if cfg["replay"]:
        cfg["backend"] = "replay"
    for key in ("problems", "out"):
        if not cfg[key]:
            raise UsageError(f"--{key} is required")
    if cfg["max_iterations"] < 1:
        raise UsageError("--max-iterations must be >= 1")
    if cfg["workers"] < 1:
        raise UsageError("--workers must be >= 1")
    if cfg["backend"] == "scripted" and not cfg["script"]:
        raise UsageError("the scripted backend needs --script")
    if cfg["backend"] == "remote" and not cfg["model"]:
        raise UsageError("the remote backend needs --model")
    if cfg["backend"] == "replay" and not cfg["replay"]:
        raise UsageError("the replay backend needs --replay TRANSCRIPT")
    return cfg


def _make_backend(cfg: dict):
    kind = cfg["backend"]
    if kind == "scripted":
        backend = bk.ScriptedBackend.from_file(cfg["script"])
    elif kind == "remote":
        backend = bk.RemoteBackend(cfg["base_url"], cfg["model"])
    elif kind == "replay":
        backend = bk.ReplayBackend.from_file(cfg["replay"])
    else:
        raise UsageError(f"unknown backend {kind!r}")
    if cfg["record"]:
        backend = bk.RecordingBackend(backend, cfg["record"])
    return backend


def cmd_run(args: argparse.Namespace) -> int:
    cfg = resolve_run_config(args)
    exe_cfg = ExecutorConfig(_interpreter(cfg["interpreter"]), int(cfg["timeout_ms"]))
    banner = check_interpreter(exe_cfg)
    log.info("interpreter: %s", banner)
    try:
        problems = load_problems(cfg["problems"], gold_free=cfg["gold_free"])
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    if not problems:
        raise UsageError(f"{cfg['problems']}: no problems")
    params = bk.DecodingParams(float(cfg["temperature"]), int(cfg["max_tokens"]))
    backend = _make_backend(cfg)
    result = run_benchmark(problems, backend, make_executor(exe_cfg), k=int(cfg["max_iterations"]),
                           workers=int(cfg["workers"]), params=params)
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    write_traces(result.traces, out / "traces.jsonl")
    write_timings(result.traces, out / "timings.jsonl")
    (out / "config.json").write_text(json.dumps(cfg, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    report = write_reports(result.traces, out, label=Path(cfg["problems"]).stem)
    print((out / "report.md").read_text(encoding="utf-8"), end="")
    if not report.valid:
        print("run invalid: every problem failed for infrastructure reasons", file=sys.stderr)
    if result.infra_failures:
        print(f"{len(result.infra_failures)} problem(s) hit infrastructure failures; "
              f"first: {result.infra_failures[0].infra_error}", file=sys.stderr)
        return EXIT_INFRA
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    try:
        a = read_traces(Path(args.run_a) / "traces.jsonl")
        b = read_traces(Path(args.run_b) / "traces.jsonl")
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    try:
        res = mcnemar(a, b)
    except IdMismatch as exc:
        print(f"IdMismatch: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"b={res.b} c={res.c} p={res.p_value:.6g} sig={res.marker or '-'} "
          f"({'exact binomial' if res.exact else 'chi-square'})")
    return EXIT_OK


def cmd_classify(args: argparse.Namespace) -> int:
    if args.corpus:
        rows = load_golden_corpus(args.corpus)
        agree = 0
        for i, rec in enumerate(rows):
            got = classify_record(rec)
            got_name = got.value if got else "OK"
            ok = got_name == rec["expected_class"]
            agree += ok
            print(f"{'PASS' if ok else 'FAIL'} {i:3d} expected={rec['expected_class']} got={got_name}")
        print(f"agreement {agree}/{len(rows)}")
        return EXIT_OK if agree == len(rows) else 1
    if not args.stderr_file:
        raise UsageError("classify needs STDERR_FILE or --corpus")
    try:
        stderr = Path(args.stderr_file).read_text(encoding="utf-8")
        stdout = Path(args.stdout_file).read_text(encoding="utf-8") if args.stdout_file else ""
    except OSError as exc:
        raise UsageError(str(exc)) from exc
    exit_code = None if args.timed_out else (args.exit_code if args.exit_code is not None else 1)
    raw = RawExecution(stdout, stderr, exit_code, 0.0, args.timed_out)
    produced = ExactNumber.parse(args.produced) if args.produced is not None else None
    gold = ExactNumber.parse(args.gold) if args.gold is not None else None
    diag = classify(raw, produced, gold)
    if diag is None:
        print("OK")
    else:
        print(diag.error_class.value + (f" line={diag.line}" if diag.line is not None else ""))
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    entries = _load_corpus(args.corpus)
    cfg = ExecutorConfig(_interpreter(args.interpreter), args.timeout_ms)
    check_interpreter(cfg)
    verdicts = validate_corpus(entries, cfg, workers=args.workers)
    lines = "".join(json.dumps(v.to_dict(), sort_keys=True) + "\n" for v in verdicts)
    if args.out:
        Path(args.out).write_text(lines, encoding="utf-8")
    else:
        sys.stdout.write(lines)
    passed = sum(v.passed for v in verdicts)
    print(f"QA passed {passed}/{len(verdicts)}", file=sys.stderr)
    return EXIT_OK


def _load_corpus(path):
    try:
        return load_corpus(path)
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"{path}: {exc}") from exc


def cmd_mix(args: argparse.Namespace) -> int:
    kb, solve = _load_corpus(args.kb), _load_corpus(args.solve)
    if not args.skip_qa:
        cfg = ExecutorConfig(_interpreter(args.interpreter), args.timeout_ms)
        check_interpreter(cfg)
        for name, entries in (("kb", kb), ("solve", solve)):
            bad = [v.entry_index for v in validate_corpus(entries, cfg, args.workers) if not v.passed]
            if bad:
                print(f"{name} corpus: {len(bad)} entries fail QA (indices {bad[:10]}); "
                      f"fix them or pass --skip-qa", file=sys.stderr)
                return 1
    if args.lambda_kb is None:
        spec = MixSpec.natural(len(kb), len(solve), args.seed, args.split)
    else:
        spec = MixSpec(args.lambda_kb, 1.0 - args.lambda_kb, args.seed, args.split)
    mixed, manifest = mix_cocktail(kb, solve, spec, total=args.total)
    train, val = split_train_val(mixed, spec.split_ratio, spec.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_corpus(mixed, out / "cocktail.jsonl")
    write_corpus(train, out / "train.jsonl")
    write_corpus(val, out / "val.jsonl")
    manifest["split"] = {"ratio": spec.split_ratio, "train": len(train), "val": len(val)}
    manifest["qa"] = "skipped" if args.skip_qa else "passed"
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                                       encoding="utf-8")
    print(f"wrote {len(mixed)} records ({len(train)} train / {len(val)} val) to {out}")
    return EXIT_OK


def cmd_stats(args: argparse.Namespace) -> int:
    print(json.dumps(corpus_stats(_load_corpus(args.corpus)), indent=2, sort_keys=True))
    return EXIT_OK


def _add_run_options(p: argparse.ArgumentParser, backend_choice: bool = True) -> None:
    p.add_argument("--config", help="JSON file with run options (flags take precedence)")
    p.add_argument("--problems", help="JSON Lines problem set {id, question, answer}")
    if backend_choice:
        p.add_argument("--backend", choices=["scripted", "remote", "replay"])
    p.add_argument("--script", help="scripted backend: JSON Lines {problem_id, attempt, response}")
    p.add_argument("--base-url", help="remote backend: OpenAI-compatible base URL")
    p.add_argument("--model", help="remote backend: model name")
    p.add_argument("--max-iterations", type=int)
    p.add_argument("--timeout-ms", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--interpreter", help="path to swipl (default: $NEUROPROLOG_SWIPL or PATH)")
    p.add_argument("--gold-free", action="store_true", default=None,
                   help="no gold answers: clean executions count as solved")
    p.add_argument("--max-tokens", type=int)
    p.add_argument("--temperature", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="neuroprolog",
                                     description="Execution-guided Prolog generation harness")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the benchmark loop")
    _add_run_options(p)
    p.add_argument("--record", help="append every backend call to this transcript")
    p.add_argument("--replay", help="serve responses from this transcript")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("record", help="run against the remote backend and record a transcript")
    _add_run_options(p, backend_choice=False)
    p.add_argument("--transcript", required=True)
    p.set_defaults(func=lambda a: cmd_run(_alias(a, backend="remote", record=a.transcript)))

    p = sub.add_parser("replay", help="rerun a recorded session from its transcript")
    _add_run_options(p, backend_choice=False)
    p.add_argument("--transcript", required=True)
    p.set_defaults(func=lambda a: cmd_run(_alias(a, backend="replay", replay=a.transcript)))

    p = sub.add_parser("compare", help="McNemar test between two run directories")
    p.add_argument("run_a")
    p.add_argument("run_b")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("classify", help="classify interpreter stderr (debugging aid)")
    p.add_argument("stderr_file", nargs="?")
    p.add_argument("--stdout-file")
    p.add_argument("--exit-code", type=int)
    p.add_argument("--timed-out", action="store_true")
    p.add_argument("--produced")
    p.add_argument("--gold")
    p.add_argument("--corpus", help="check a golden corpus file instead")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("validate-dataset", help="two-stage QA over a KB/SOLVE corpus")
    p.add_argument("corpus")
    p.add_argument("--out", help="QA report (JSON Lines); stdout if omitted")
    p.add_argument("--interpreter")
    p.add_argument("--timeout-ms", type=int, default=DEFAULT_TIMEOUT_MS)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("mix", help="build a cocktail training file and 90/10 split")
    p.add_argument("--kb", required=True)
    p.add_argument("--solve", required=True)
    p.add_argument("--lambda-kb", type=float, help="KB share (default: natural proportions)")
    p.add_argument("--total", type=int, help="records to emit (default: both corpora combined)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--split", type=float, default=0.9)
    p.add_argument("--out", required=True)
    p.add_argument("--skip-qa", action="store_true")
    p.add_argument("--interpreter")
    p.add_argument("--timeout-ms", type=int, default=DEFAULT_TIMEOUT_MS)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_mix)

    p = sub.add_parser("stats", help="corpus statistics")
    p.add_argument("corpus")
    p.set_defaults(func=cmd_stats)
    return parser


def _alias(args: argparse.Namespace, **overrides) -> argparse.Namespace:
    for k, v in overrides.items():
        setattr(args, k, v)
    return args


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InterpreterMissing as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFRA


if __name__ == "__main__":
    sys.exit(main())
