"""The two static analyses side by side.

The first analysis asks whether any definition can call itself again in
the same instant (an instantaneous loop would make an instant run
forever). The second asks whether recursive calls can pile up unbounded
evaluation context, which is what keeps the compiled equation table
finite.
"""

from sltk.analysis import check_bounded, check_reactivity
from sltk.syntax import parse_program

INSTANT_LOOP = """
(input s1)
(output s2)
(def (A a) (seq (await a) (call A a)))
(run (call A s1))
"""

TWO_STAGE = """
(input s1 s2)
(output s3 s4)
(def (A a b c d) (seq (watch a (call B a b c d)) (emit d) (call A a b c d)))
(def (B a b c d) (seq (await b) (emit c) pause (call B a b c d)))
(run (call A s1 s2 s3 s4))
"""

CONTEXT_GROWTH = """
(input s1)
(output s2)
(def (A) (seq pause (call A) (call B)))
(def (B) pause)
(run (call A))
"""

GUARDED = """
(input s1)
(output s2)
(def (A c) (watch c (seq pause (thread (call A c)))))
(run (call A s1))
"""


def verdict_line(label, verdict):
    if verdict:
        print(f"  {label}: accept")
    else:
        print(f"  {label}: reject, cycle {verdict.render()}")


def main():
    print("reactivity (can an instant run forever?)")
    verdict_line("await-then-recurse",
                 check_reactivity(parse_program(INSTANT_LOOP)))
    two_stage = parse_program(TWO_STAGE)
    verdict_line("two-stage system at depth 0",
                 check_reactivity(two_stage, unfold_depth=0))
    verdict_line("two-stage system at depth 1",
                 check_reactivity(two_stage, unfold_depth=1))

    print("\nbounded contexts (does the compiled table stay finite?)")
    verdict_line("call followed by more work",
                 check_bounded(parse_program(CONTEXT_GROWTH)))
    verdict_line("recursion behind a spawned thread",
                 check_bounded(parse_program(GUARDED)))


if __name__ == "__main__":
    main()
