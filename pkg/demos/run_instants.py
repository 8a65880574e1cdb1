"""Run a small program instant by instant and watch signals propagate.

A relay waits for s1, answers on s3, rests one instant, and starts over.
Broadcast makes the emission visible in the same instant it is requested;
the rest instant shows up as an empty output line.
"""

from sltk.semantics import Runner
from sltk.syntax import canonicalize, parse_program, print_thread

RELAY = """
(input s1 s2)
(output s3 s4)
(def (Copy a b) (seq (await a) (emit b) pause (call Copy a b)))
(run (call Copy s1 s3))
"""


def show(title, inputs, result):
    print(f"{title}: inputs={sorted(inputs)} outputs={sorted(result.outputs)}")


def main():
    program = parse_program(RELAY)
    runner = Runner(program)

    instants = [frozenset(), frozenset({"s1"}), frozenset({"s1"}),
                frozenset(), frozenset({"s1"})]
    for k, inputs in enumerate(instants, start=1):
        result = runner.run_instant(inputs)
        show(f"instant {k}", inputs, result)

    print("\nresidual threads after the last instant:")
    for t in canonicalize(runner.threads, program.interface):
        print(" ", print_thread(t))


if __name__ == "__main__":
    main()
