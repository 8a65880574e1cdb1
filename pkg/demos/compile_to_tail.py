"""Compile a program to the tail-recursive core and compare traces.

The translation turns every instruction into a recursive equation whose
calls sit in tail position; an await becomes a self-polling definition
and a pause becomes a guard on a reserved signal that is never emitted.
The compiled image must produce the same outputs as the source on every
input word.
"""

import itertools

from sltk.cps import cps_program
from sltk.semantics import run_trace
from sltk.syntax import parse_program
from sltk.tailcore import print_tail_program, run_trace_tail

SOURCE = """
(input s1 s2)
(output s3 s4)
(run (seq (await s1) (emit s3) pause (emit s4)))
"""


def subsets(signals):
    out = []
    for k in range(len(signals) + 1):
        out.extend(frozenset(c) for c in itertools.combinations(signals, k))
    return out


def main():
    program = parse_program(SOURCE)
    result = cps_program(program)
    print("compiled image with its index notes:\n")
    print(print_tail_program(result.program, index_notes=result.notes))

    words = itertools.product(subsets(("s1", "s2")), repeat=3)
    count = 0
    for word in words:
        src = [o for _, o in run_trace(program, list(word))]
        tgt = [o for _, o in run_trace_tail(result.program, list(word))]
        assert src == tgt, word
        count += 1
    print(f"source and image agree on all {count} length-3 input words")


if __name__ == "__main__":
    main()
