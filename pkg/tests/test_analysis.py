import random
from collections import Counter

from sltk.analysis import (
    EMPTY,
    SUSPENDS,
    CallResult,
    bounded_call,
    call_of,
    call_of_context,
    check_bounded,
    check_reactivity,
)
from sltk.cps import cps_program
from sltk.semantics import decompose, plug, run_trace
from sltk.syntax import (
    Await,
    Call,
    Emit,
    New,
    Pause,
    Spawn,
    Watch,
    parse_program,
    seq_of,
)

from .corpus import SOURCE_TEXTS, source_corpus


AB_SYSTEM = """
(input s1)
(output s2)
(def (A) (seq (call B) (call A)))
(def (B) pause)
(run (call A))
"""


def test_call_values_of_the_ab_system():
    p = parse_program(AB_SYSTEM)
    assert call_of(p.defs["A"].body) == CallResult.of(
        Counter({"A": 1, "B": 1}), False)
    assert call_of(p.defs["B"].body) == SUSPENDS


def test_ab_system_rejected_without_unfolding():
    p = parse_program(AB_SYSTEM)
    verdict = check_reactivity(p, unfold_depth=0)
    assert not verdict
    assert "A" in verdict.cycle


def test_ab_system_accepted_after_one_unfolding():
    p = parse_program(AB_SYSTEM)
    assert check_reactivity(p, unfold_depth=1)


def test_call_of_basic_shapes():
    assert call_of(Emit("s")) == EMPTY
    assert call_of(Await("s")) == EMPTY
    assert call_of(Pause()) == SUSPENDS
    assert call_of(Call("A", ())) == CallResult.of(Counter({"A": 1}), False)
    assert call_of(Watch("s", Call("A", ()))) == \
        CallResult.of(Counter({"A": 1}), False)
    assert call_of(New("x", Pause())) == SUSPENDS


def test_spawn_discards_the_suspension_flag():
    assert call_of(Spawn(Pause())) == EMPTY
    assert call_of(Spawn(seq_of(Pause(), Call("A", ())))) == EMPTY
    assert call_of(Spawn(Call("A", ()))) == \
        CallResult.of(Counter({"A": 1}), False)


def test_suspension_hides_the_rest_of_a_sequence():
    t = seq_of(Pause(), Call("A", ()))
    assert call_of(t) == SUSPENDS
    t2 = seq_of(Call("A", ()), Pause())
    assert call_of(t2) == CallResult.of(Counter({"A": 1}), True)


def test_then_is_associative():
    results = [
        EMPTY,
        SUSPENDS,
        CallResult.of(Counter({"A": 1}), False),
        CallResult.of(Counter({"A": 1}), True),
        CallResult.of(Counter({"B": 2}), False),
        CallResult.of(Counter({"B": 1}), True),
        CallResult.of(Counter({"A": 1, "B": 1}), False),
        CallResult.of(Counter({"A": 2, "B": 1}), True),
    ]
    for x in results:
        for y in results:
            for z in results:
                assert x.then(y).then(z) == x.then(y.then(z))


def test_call_of_respects_plugging():
    # call_of(E[t]) == call_of(t).then(call_of_context(E))
    rng = random.Random(7)
    bodies = []
    for _, p in source_corpus():
        bodies.extend(p.all_threads())
    for body in bodies:
        split = decompose(body)
        if split is None:
            continue
        frames, redex = split
        assert plug(frames, redex) == body
        assert call_of(body) == call_of(redex).then(call_of_context(frames))
    fillers = [Pause(), Call("Z", ()), Emit("x"), seq_of(Pause(), Call("Z", ()))]
    for _ in range(200):
        body = rng.choice(bodies)
        split = decompose(body)
        if split is None:
            continue
        frames, _ = split
        t = rng.choice(fillers)
        assert call_of(plug(frames, t)) == \
            call_of(t).then(call_of_context(frames))


def test_reactivity_accepts_the_corpus():
    for name, p in source_corpus():
        assert check_reactivity(p), name


def test_reactivity_probe_on_accepted_programs():
    rng = random.Random(3)
    for name, p in source_corpus()[:6]:
        assert check_reactivity(p), name
        inputs = [frozenset(s for s in ("s1", "s2") if rng.random() < 0.4)
                  for _ in range(20)]
        trace = run_trace(p, inputs, fuel=10 ** 6)
        assert len(trace) == 20


def test_reactivity_rejects_an_instantaneous_loop():
    p = parse_program("""
(input s1)
(output s2)
(def (D a) (seq (emit a) (call D a)))
(run (call D s2))
""")
    verdict = check_reactivity(p, unfold_depth=3)
    assert not verdict
    assert verdict.cycle == ("D",)
    assert verdict.render() == "D > D"


# ---------------------------------------------------------------------------
# bounded evaluation contexts


THREAD_GUARDED = """
(input s1)
(output s2)
(def (A c) (watch c (seq pause (thread (call A c)))))
(run (call A s1))
"""

PAUSE_THEN_TAIL = """
(input s1)
(output s2)
(def (A) (seq pause (call A) (call B)))
(def (B) 0)
(run (call A))
"""

WATCH_AROUND_CALL = """
(input s1)
(output s2)
(def (A c) (watch c (seq pause (call A c))))
(run (call A s1))
"""


def test_bounded_labels_distinguish_contexts():
    p = parse_program(PAUSE_THEN_TAIL)
    labels = bounded_call(p.defs["A"].body, "e")
    assert labels == frozenset({("A", "k"), ("B", "e")})


def test_bounded_accepts_spawned_recursion():
    assert check_bounded(parse_program(THREAD_GUARDED))


def test_bounded_accepts_loop_sugar():
    p = parse_program(SOURCE_TEXTS["loop_beat"])
    assert check_bounded(p)


def test_bounded_accepts_par_sugar():
    p = parse_program(SOURCE_TEXTS["par_join"])
    assert check_bounded(p)


def test_bounded_rejects_growing_sequence():
    verdict = check_bounded(parse_program(PAUSE_THEN_TAIL))
    assert not verdict
    assert "A" in verdict.cycle


def test_bounded_rejects_recursion_under_watch():
    verdict = check_bounded(parse_program(WATCH_AROUND_CALL))
    assert not verdict
    assert "A" in verdict.cycle


def test_bounded_accepts_the_corpus():
    for name, p in source_corpus():
        assert check_bounded(p), name


def test_accepted_programs_compile_to_finite_tables():
    for text in (THREAD_GUARDED, SOURCE_TEXTS["loop_beat"],
                 SOURCE_TEXTS["par_join"]):
        p = parse_program(text)
        assert check_bounded(p)
        result = cps_program(p, index_limit=20000)
        assert len(result.program.defs) < 20000


def test_strict_cycle_needs_the_nonempty_label():
    # the same shape with the call spawned instead is fine
    fixed = parse_program("""
(input s1)
(output s2)
(def (A c) (watch c (seq pause (thread (call A c)))))
(run (call A s1))
""")
    assert check_bounded(fixed)
