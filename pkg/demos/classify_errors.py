"""Walk real SWI-Prolog failures through the error taxonomy."""

from neuroprolog import RawExecution, classify_error, repair_strategy

samples = {
    "missing comma": "ERROR: program.pl:6:25: Syntax error: Operator expected",
    "truncated file": "ERROR: program.pl:9: Syntax error: Unexpected end of file",
    "divide by zero": "Warning: goal (initialization) raised exception:\nERROR: Arithmetic: evaluation error: zero_divisor",
    "made-up function": "ERROR: Arithmetic: evaluable total/0 does not exist\nERROR: is not a function",
    "unbound variable": "ERROR: Arguments are not sufficiently instantiated",
    # two families in one message: syntax outranks instantiation
    "both": "ERROR: Arguments are not sufficiently instantiated\nERROR: program.pl:2: Syntax error: Illegal start of term",
}

for label, stderr in samples.items():
    d = classify_error(RawExecution("", stderr, 1, 0.0, False))
    print(f"{label:18s} -> {d.error_class.value:26s} line={d.line}")

g = repair_strategy("DOMAIN_DIVIDE_BY_ZERO")
print()
print(g.description)
print(g.fix_instruction)

# a run that never terminates gets its own class
print(classify_error(RawExecution("", "", None, 5000.0, True)).error_class)
