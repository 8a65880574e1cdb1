"""From a finite machine to a program and back again.

A monotonic Mealy machine becomes a tail program whose states are
definitions: each instant the running definition reads the wires that
are up, raises its output wires, pauses, and branches to the next state.
Extracting a machine from that program gives back something trace
equivalent to the original.
"""

from sltk.mealy import (
    MonotonicMealy,
    mealy_to_program,
    mealy_trace_equiv,
    print_mealy,
    program_to_mealy,
    validate_mealy,
)
from sltk.tailcore import print_tail_program, run_trace_tail


def latch():
    """One input wire; the output goes up with it and then stays up."""
    states = ("idle", "lit")
    next_state = {}
    output = {}
    for q in states:
        for X in (frozenset(), frozenset({1})):
            lit = q == "lit" or 1 in X
            next_state[(q, X)] = "lit" if lit else "idle"
            output[(q, X)] = frozenset({1}) if lit else frozenset()
    return MonotonicMealy(states, "idle", 1, 1, next_state, output)


def main():
    machine = latch()
    validate_mealy(machine)
    print("machine:\n")
    print(print_mealy(machine))

    program = mealy_to_program(machine)
    print("as a program:\n")
    print(print_tail_program(program))

    word = [frozenset(), frozenset({"i1"}), frozenset(), frozenset()]
    trace = run_trace_tail(program, word)
    print("program trace:", [sorted(o) for _, o in trace])

    extracted = program_to_mealy(program)
    verdict = mealy_trace_equiv(machine, extracted)
    print("round trip equivalent:", bool(verdict))


if __name__ == "__main__":
    main()
