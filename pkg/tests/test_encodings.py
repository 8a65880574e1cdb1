import pytest

from sltk.analysis import Accept, check_bounded, check_reactivity
from sltk.cps import cps_program
from sltk.encodings import (
    CounterMachine,
    Dec,
    Inc,
    TestZero,
    encode_counter_machine,
    encode_pushdown,
    parse_machine,
    print_machine,
    run_machine,
)
from sltk.errors import ParseError, SLError
from sltk.semantics import Runner
from sltk.tailcore import check_reactivity_tail

from .corpus import seeded


HALTING = CounterMachine(
    states=("q0", "q1", "q2", "q3", "q4", "qh"),
    init="q0",
    halt="qh",
    instrs={
        "q0": Inc(1, "q1"),
        "q1": Inc(1, "q2"),
        "q2": Dec(1, "q3"),
        "q3": Dec(1, "q4"),
        "q4": TestZero(1, "qh", "q0"),
    },
)

LOOPING = CounterMachine(
    states=("q0", "q1", "qh"),
    init="q0",
    halt="qh",
    instrs={
        "q0": Inc(1, "q1"),
        "q1": TestZero(1, "qh", "q0"),
    },
)


def first_halt(program, limit, fuel=10**6):
    """Instant index of the first halt emission, or None within limit."""
    runner = Runner(program, fuel=fuel)
    for k in range(limit):
        if "halt" in runner.run_instant(frozenset()).outputs:
            return k
    return None


def random_machine(rng, n_states=4):
    states = tuple(f"q{k}" for k in range(n_states)) + ("qh",)
    instrs = {"q0": Inc(rng.choice((1, 2)), rng.choice(states))}
    for q in states[1:-1]:
        kind = rng.choice(("inc", "inc", "dec", "tz", "tz"))
        counter = rng.choice((1, 2))
        if kind == "tz":
            instrs[q] = TestZero(counter, rng.choice((states[-1],) + states),
                                 rng.choice(states))
        elif kind == "inc":
            instrs[q] = Inc(counter, rng.choice(states))
        else:
            instrs[q] = Dec(counter, rng.choice(states))
    return CounterMachine(states, "q0", "qh", instrs).validate()


def test_reference_interpreter():
    assert run_machine(HALTING) == (True, 5)
    halted, steps = run_machine(LOOPING, max_steps=50)
    assert not halted and steps == 50

    blocked = CounterMachine(("q0", "qh"), "q0", "qh",
                             {"q0": Dec(1, "qh")})
    assert run_machine(blocked) == (False, 0)

    tz_empty = CounterMachine(("q0", "qh"), "q0", "qh",
                              {"q0": TestZero(1, "qh", "q0")})
    assert run_machine(tz_empty) == (True, 1)


def test_machine_validation():
    with pytest.raises(SLError):
        CounterMachine(("q0", "qh"), "q0", "qh", {}).validate()
    with pytest.raises(SLError):
        CounterMachine(("q0", "qh"), "q0", "qh",
                       {"q0": Inc(1, "q1"), "qh": Inc(1, "q0")}).validate()
    with pytest.raises(SLError):
        CounterMachine(("q0", "qh"), "q0", "qh",
                       {"q0": Inc(1, "missing")}).validate()
    with pytest.raises(SLError):
        CounterMachine(("q0", "qh"), "q0", "qh",
                       {"q0": Inc(3, "qh")}).validate()
    assert HALTING.counters_used() == {1}
    mixed = CounterMachine(("q0", "q1", "qh"), "q0", "qh",
                           {"q0": Inc(2, "q1"), "q1": Dec(1, "qh")})
    assert mixed.validate().counters_used() == {1, 2}


def test_machine_text_round_trip():
    text = print_machine(HALTING)
    back = parse_machine(text)
    assert (set(back.states), back.init, back.halt, back.instrs) == \
        (set(HALTING.states), HALTING.init, HALTING.halt, HALTING.instrs)

    commented = """
# two states, halts immediately when the counter is empty
init q0
halt qh

state q0: tz c1 -> qh q0
"""
    m = parse_machine(commented)
    assert m.instrs == {"q0": TestZero(1, "qh", "q0")}

    with pytest.raises(ParseError):
        parse_machine("init q0\nhalt qh\nstate q0: hop c1 -> qh")
    with pytest.raises(ParseError):
        parse_machine("init q0\nhalt qh\nstate q0: tz c1 -> qh")
    with pytest.raises(ParseError):
        parse_machine("init q0\nhalt qh\nstate q0: inc c1 -> qh q0")
    with pytest.raises(ParseError):
        parse_machine("state q0: inc c1 -> q0")


def test_halting_machine_emits_halt_within_bound():
    program = encode_counter_machine(HALTING)
    assert program.outputs == ("halt",)
    assert first_halt(program, 200) == 13


def test_looping_machine_stays_silent():
    assert first_halt(encode_counter_machine(LOOPING), 200) is None


def test_dec_on_empty_counter_blocks():
    blocked = CounterMachine(("q0", "qh"), "q0", "qh",
                             {"q0": Dec(1, "qh")})
    assert first_halt(encode_counter_machine(blocked), 60) is None


def test_tz_on_empty_counter_halts_immediately():
    tz_empty = CounterMachine(("q0", "qh"), "q0", "qh",
                              {"q0": TestZero(1, "qh", "q0")})
    assert first_halt(encode_counter_machine(tz_empty), 20) == 1
    assert first_halt(encode_pushdown(tz_empty), 20) == 1


def test_pushdown_encoding_matches_single_counter():
    assert first_halt(encode_pushdown(HALTING), 200) == 13

    two_counter = CounterMachine(("q0", "q1", "qh"), "q0", "qh",
                                 {"q0": Inc(2, "q1"),
                                  "q1": Dec(2, "qh")})
    with pytest.raises(SLError):
        encode_pushdown(two_counter)


def test_encodings_pass_both_static_analyses():
    for encode in (encode_counter_machine, encode_pushdown):
        program = encode(HALTING)
        assert isinstance(check_reactivity(program, unfold_depth=1), Accept)
        assert isinstance(check_bounded(program), Accept)
        image = cps_program(program).program
        assert len(image.defs) == 23
        assert isinstance(check_reactivity_tail(image), Accept)


def test_random_machines_agree_with_reference():
    rng = seeded(402)
    outcomes = {"halt": 0, "silent": 0}
    for _ in range(12):
        machine = random_machine(rng)
        halted, steps = run_machine(machine, max_steps=10_000)
        if halted and steps > 20:
            continue
        budget = 10 * max(steps, 1) + 20 if halted else 60
        k = first_halt(encode_counter_machine(machine), budget)
        assert (k is not None) == halted, print_machine(machine)
        outcomes["halt" if halted else "silent"] += 1
    assert outcomes["halt"] >= 3 and outcomes["silent"] >= 3
