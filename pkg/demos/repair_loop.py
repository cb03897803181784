"""The generate/execute/repair loop with a scripted model and a real interpreter.

Needs SWI-Prolog: either ``swipl`` on PATH, $NEUROPROLOG_SWIPL, or the
bundled wasm build (``cd tools/swipl-wasm && npm install``).
"""

import sys

from neuroprolog import (ExactNumber, ExecutorConfig, Problem, ScriptedBackend, ScriptEntry,
                         find_interpreter, make_executor, solve_problem)

exe = find_interpreter()
if exe is None:
    sys.exit("no Prolog interpreter found")

problem = Problem("apples", "Janet has 3 bags with 4 apples each and eats 2. How many are left?",
                  ExactNumber.parse("10"))

# attempt 1 forgets a comma, attempt 2 divides by zero, attempt 3 gets it right.
# Inside { } CLP(Q) simply fails on a zero divisor, so the bad division uses is/2.
first = """:- use_module(library(clpq)).
:- initialization(main).
solve(Result) :-
    Bags = 3, Each = 4
    { Result = Bags * Each - 2 }.
main :- solve(R), format("~w~n", [R]), halt.
"""
second = first.replace("Each = 4\n", "Each = 4, Eaten is 2 / 0,\n")
third = second.replace("Eaten is 2 / 0", "Eaten = 2").replace("- 2 }", "- Eaten }")
backend = ScriptedBackend([ScriptEntry("apples", 1, first),
                           ScriptEntry("apples", 2, "Here is the fix:\n```prolog\n" + second + "```"),
                           ScriptEntry("apples", 3, third)])

trace = solve_problem(problem, backend, make_executor(ExecutorConfig(exe)), k=3)
for a in trace.attempts:
    d = a.outcome.diagnosis
    print(a.index, a.prompt_kind.value, a.outcome.kind.value, d.error_class.value if d else a.outcome.produced)

print(trace.final_status.value, "after", trace.iterations_used, "attempts")

# the repair prompt carries the previous program and the diagnosis
print(trace.attempts[1].prompt.splitlines()[0])
