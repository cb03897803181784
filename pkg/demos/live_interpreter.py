"""Run Prolog through the sandboxed executor, and the parse-only check used by dataset QA."""

import sys

from neuroprolog import ExecutorConfig, PrologProgram, classify_error, execute, find_interpreter, parse_only

exe = find_interpreter()
if exe is None:
    sys.exit("no Prolog interpreter found")
cfg = ExecutorConfig(exe, timeout_ms=5000)

src = """:- use_module(library(clpq)).
:- initialization(main).
solve(Result) :- { Result = 7 / 2 + 1 / 3 }.
main :- solve(R), format("~w~n", [R]), halt.
"""
raw = execute(PrologProgram(src, ""), cfg)
print(repr(raw.stdout), raw.exit_code, f"{raw.duration_ms:.0f} ms")  # CLP(Q) keeps the rational: 23r6

# drop the period that ends solve/1
broken = src.replace("1 / 3 }.", "1 / 3 }")
raw = parse_only(PrologProgram(broken, ""), cfg)
print(classify_error(raw))

# an endless loop is cut off at the timeout
loop = ":- initialization(main).\nmain :- repeat, fail.\n"
raw = execute(PrologProgram(loop, ""), ExecutorConfig(exe, timeout_ms=3000))
print(raw.timed_out, raw.exit_code, classify_error(raw).error_class)
