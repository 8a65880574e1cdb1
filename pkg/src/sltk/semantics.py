"""Small-step semantics for source programs: instants, scheduling, traces.

A thread decomposes uniquely into an evaluation context and a redex. One
reduction rewrites the redex, possibly extending the shared signal
environment (emission, fresh-name allocation) or spawning new threads. An
instant runs threads until all are suspended, then the end-of-instant
rewrite turns the suspended multiset into the next instant's program.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .errors import (
    ArityMismatchError,
    ConfluenceViolationError,
    FuelExhaustedError,
    NotSuspendedError,
    StateExplosionError,
    UnboundIdentifierError,
    UnboundSignalError,
    UndeclaredSignalError,
)
from .syntax import (
    NIL,
    Await,
    Call,
    Emit,
    New,
    Nil,
    Pause,
    Program,
    Seq,
    Spawn,
    Watch,
    canonicalize,
    canonicalize_with_renaming,
    free_signals,
    next_gen_index,
    print_thread,
    seq_of,
    substitute,
)

DETERMINISTIC = "deterministic"
RANDOM = "random"
DEFAULT_FUEL = 10 ** 6


class Env:
    """Signal environment: a finite map plus a fresh-name reservoir.

    Names at or beyond the counter are undefined; fresh() moves one of them
    into the map (absent), which is how signal generation gets a name no
    other thread can mention.
    """

    __slots__ = ("defined", "counter")

    def __init__(self, defined, counter):
        self.defined = dict(defined)
        self.counter = counter

    def fresh(self):
        name = f"%g{self.counter}"
        self.counter += 1
        while name in self.defined:
            name = f"%g{self.counter}"
            self.counter += 1
        self.defined[name] = False
        return name

    def present(self, signal):
        try:
            return self.defined[signal]
        except KeyError:
            raise UnboundSignalError(signal) from None

    def emit(self, signal):
        if signal not in self.defined:
            raise UnboundSignalError(signal)
        self.defined[signal] = True

    def copy(self):
        return Env(self.defined, self.counter)


@dataclass(frozen=True)
class SeqAfter:
    """Context frame [.];rest."""

    rest: object


@dataclass(frozen=True)
class WatchFrame:
    """Context frame watch s [.]."""

    signal: str


def decompose(t):
    """Split a thread into (context frames, redex), or None when terminated.

    Frames are listed outermost first. The split is unique; a sequence whose
    head is itself a sequence is malformed and rejected.
    """
    frames = []
    while True:
        if isinstance(t, Nil):
            if frames:
                raise ValueError("terminated thread under a context")
            return None
        if isinstance(t, Seq):
            first = t.first
            if isinstance(first, Nil):
                return tuple(frames), t
            if isinstance(first, Seq):
                raise ValueError("sequence not right-associated")
            if isinstance(first, Watch) and not isinstance(first.body, Nil):
                frames.append(SeqAfter(t.rest))
                frames.append(WatchFrame(first.signal))
                t = first.body
                continue
            frames.append(SeqAfter(t.rest))
            return tuple(frames), first
        if isinstance(t, Watch):
            if isinstance(t.body, Nil):
                return tuple(frames), t
            frames.append(WatchFrame(t.signal))
            t = t.body
            continue
        return tuple(frames), t


def plug(frames, t):
    """Rebuild a thread from context frames and a hole filler."""
    for f in reversed(frames):
        if isinstance(f, WatchFrame):
            t = Watch(f.signal, t)
        else:
            t = seq_of(t, f.rest)
    return t


def try_step(t, env, defs):
    """One reduction of a single thread, or None when it cannot move now.

    On success returns (thread', spawned threads); emission and generation
    update env in place.
    """
    d = decompose(t)
    if d is None:
        return None
    frames, redex = d
    if isinstance(redex, Seq):
        return plug(frames, redex.rest), ()
    if isinstance(redex, Emit):
        env.emit(redex.signal)
        return plug(frames, NIL), ()
    if isinstance(redex, Watch):
        return plug(frames, NIL), ()
    if isinstance(redex, New):
        g = env.fresh()
        return plug(frames, substitute(redex.body, {redex.bound: g})), ()
    if isinstance(redex, Call):
        dfn = defs.get(redex.ident)
        if dfn is None:
            raise UnboundIdentifierError(redex.ident)
        if len(dfn.params) != len(redex.args):
            raise ArityMismatchError(
                f"{redex.ident} takes {len(dfn.params)} signals")
        body = substitute(dfn.body, dict(zip(dfn.params, redex.args)))
        return plug(frames, body), ()
    if isinstance(redex, Await):
        if env.present(redex.signal):
            return plug(frames, NIL), ()
        return None
    if isinstance(redex, Spawn):
        return plug(frames, NIL), (redex.body,)
    if isinstance(redex, Pause):
        return None
    raise TypeError(f"not a redex: {redex!r}")


def can_step(t, env, defs):
    """Pure runnability test: suspended threads are terminated, blocked on an
    absent signal, or paused for the instant."""
    d = decompose(t)
    if d is None:
        return False
    _, redex = d
    if isinstance(redex, Await):
        return env.present(redex.signal)
    if isinstance(redex, Pause):
        return False
    return True


def _floor(t, env):
    if isinstance(t, Nil):
        return NIL
    if isinstance(t, Seq):
        return Seq(_floor(t.first, env), t.rest)
    if isinstance(t, Await):
        return t
    if isinstance(t, Pause):
        return NIL
    if isinstance(t, Watch):
        if env.present(t.signal):
            return NIL
        return Watch(t.signal, _floor(t.body, env))
    raise NotSuspendedError(print_thread(t))


def end_of_instant(threads, env, defs=None):
    """Rewrite a fully suspended multiset into the next instant's program."""
    if defs is not None:
        for t in threads:
            if can_step(t, env, defs):
                raise NotSuspendedError(print_thread(t))
    return tuple(_floor(t, env) for t in threads)


def run_threads(threads, policy, rng, fuel, try_step_fn, can_step_fn):
    """Drive a thread list to suspension under a scheduling policy.

    The deterministic policy always steps the lowest-index runnable thread;
    the random policy draws uniformly among runnable threads. Spawned
    threads append at the end of the list.
    """
    threads = list(threads)
    steps = 0
    if policy == DETERMINISTIC:
        while True:
            out = None
            for i, t in enumerate(threads):
                out = try_step_fn(t)
                if out is not None:
                    break
            if out is None:
                return threads, steps
            if steps >= fuel:
                raise FuelExhaustedError(steps)
            t2, spawned = out
            threads[i] = t2
            threads.extend(spawned)
            steps += 1
    if policy == RANDOM:
        while True:
            runnable = [i for i, t in enumerate(threads) if can_step_fn(t)]
            if not runnable:
                return threads, steps
            if steps >= fuel:
                raise FuelExhaustedError(steps)
            i = runnable[rng.randrange(len(runnable))]
            out = try_step_fn(threads[i])
            t2, spawned = out
            threads[i] = t2
            threads.extend(spawned)
            steps += 1
    raise ValueError(f"unknown policy: {policy}")


@dataclass(frozen=True)
class InstantResult:
    outputs: frozenset
    residual: tuple
    steps: int


def _env_domain(program, threads):
    dom = set(program.inputs) | set(program.outputs)
    for t in threads:
        dom |= free_signals(t)
    for d in program.defs.values():
        dom |= {s for s in free_signals(d.body) - set(d.params)
                if s.startswith("%")}
    return dom


class Runner:
    """Runs a program instant by instant, carrying the fresh-name counter."""

    def __init__(self, program, policy=DETERMINISTIC, seed=0, fuel=DEFAULT_FUEL):
        self.program = program
        self.policy = policy
        self.rng = random.Random(seed)
        self.fuel = fuel
        self.gen_counter = next_gen_index(program)
        self.threads = list(program.initial)

    def run_instant(self, inputs=frozenset()):
        inputs = frozenset(inputs)
        extra = inputs - set(self.program.inputs)
        if extra:
            raise UndeclaredSignalError(
                "not input signals: " + " ".join(sorted(extra)))
        dom = _env_domain(self.program, self.threads)
        env = Env({s: s in inputs for s in dom}, self.gen_counter)
        defs = self.program.defs
        threads, steps = run_threads(
            self.threads, self.policy, self.rng, self.fuel,
            lambda t: try_step(t, env, defs),
            lambda t: can_step(t, env, defs))
        self.gen_counter = env.counter
        outputs = frozenset(
            s for s in self.program.outputs if env.defined.get(s, False))
        residual = end_of_instant(threads, env)
        self.threads = list(residual)
        return InstantResult(outputs, residual, steps)


def run_trace(program, input_sets, policy=DETERMINISTIC, seed=0,
              fuel=DEFAULT_FUEL):
    """Run one instant per input set; return the (inputs, outputs) trace."""
    runner = Runner(program, policy=policy, seed=seed, fuel=fuel)
    trace = []
    for k, inputs in enumerate(input_sets):
        try:
            res = runner.run_instant(inputs)
        except FuelExhaustedError as e:
            e.instant = k
            raise
        trace.append((frozenset(inputs), res.outputs))
    return trace


def canonical_residual(program, threads):
    return canonicalize(threads, program.interface)


# ---------------------------------------------------------------------------
# reachable-state exploration and the one-step diamond


def _state_key(program, threads, env):
    canon, m = canonicalize_with_renaming(threads, program.interface)
    live = set(program.interface)
    for t in threads:
        live |= free_signals(t)
    items = tuple(sorted(
        (m.get(s, s), v) for s, v in env.defined.items() if s in live))
    return tuple(print_thread(t) for t in canon), items


def _successors(threads, env, defs):
    out = []
    for i, t in enumerate(threads):
        env2 = env.copy()
        r = try_step(t, env2, defs)
        if r is None:
            continue
        t2, spawned = r
        nxt = list(threads)
        nxt[i] = t2
        nxt.extend(spawned)
        out.append((i, tuple(nxt), env2))
    return out


def check_strong_confluence(program, max_states=5000, max_instants=2,
                            fuel=DEFAULT_FUEL):
    """Exhaustively check the one-step diamond on every reachable state.

    Explores all scheduling choices within an instant, and every input subset
    at each instant boundary, up to max_instants. Two distinct successors of
    a state must rejoin in at most one step each, up to renaming. Returns the
    number of states examined.
    """
    defs = program.defs
    input_subsets = _subsets(program.inputs)
    start_counter = next_gen_index(program)

    def boundary_states(threads, instants_left):
        out = []
        for inputs in input_subsets:
            dom = _env_domain(program, threads)
            env = Env({s: s in inputs for s in dom}, start_counter)
            out.append((threads, env, instants_left))
        return out

    queue = list(boundary_states(tuple(program.initial), max_instants - 1))
    seen = {}
    examined = 0
    while queue:
        threads, env, instants_left = queue.pop()
        key = _state_key(program, threads, env)
        if seen.get(key, -1) >= instants_left:
            continue
        seen[key] = instants_left
        examined += 1
        if examined > max_states:
            raise StateExplosionError(max_states)
        succ = _successors(threads, env, defs)
        for i, (ia, ta, ea) in enumerate(succ):
            for ib, tb, eb in succ[i + 1:]:
                _check_diamond(program, defs, (ia, ta, ea), (ib, tb, eb))
        if succ:
            for _, t2, e2 in succ:
                queue.append((t2, e2, instants_left))
        else:
            residual = end_of_instant(threads, env, defs)
            if instants_left > 0:
                queue.extend(boundary_states(residual, instants_left - 1))
    return examined


def _check_diamond(program, defs, a, b):
    ia, ta, ea = a
    ib, tb, eb = b
    ka = _state_key(program, ta, ea)
    kb = _state_key(program, tb, eb)
    if ka == kb:
        return
    ra = _step_index(ta, ea, defs, ib)
    rb = _step_index(tb, eb, defs, ia)
    if ra is not None and rb is not None:
        if _state_key(program, *ra) == _state_key(program, *rb):
            return
    for _, t2, e2 in _successors(ta, ea, defs):
        k2 = _state_key(program, t2, e2)
        for _, t3, e3 in _successors(tb, eb, defs):
            if k2 == _state_key(program, t3, e3):
                return
    raise ConfluenceViolationError(
        "diamond failed to close from "
        + " | ".join(print_thread(t) for t in ta))


def _step_index(threads, env, defs, i):
    env2 = env.copy()
    r = try_step(threads[i], env2, defs)
    if r is None:
        return None
    t2, spawned = r
    nxt = list(threads)
    nxt[i] = t2
    nxt.extend(spawned)
    return tuple(nxt), env2


def _subsets(names):
    names = list(names)
    out = [frozenset()]
    for n in names:
        out += [s | {n} for s in out]
    return out
