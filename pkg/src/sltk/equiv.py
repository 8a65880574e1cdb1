"""Program equivalence through a process calculus presentation.

Tail programs are recast as parallel compositions of processes with four
kinds of moves: a process may emit a signal (an output action that never
consumes the emission), test a signal (an input action that fires the
guard and re-emits the tested signal), synchronize an emitter with a test
(an internal move), or unfold a definition call (also internal). Signal
generation becomes a binder that blocks actions on the bound name.

On top of the transition system the module provides the end-of-instant
rewrite, the three suspension predicates, an equivalence checker with
three modes (exact greatest-fixed-point refinement, trace comparison which
is equal to the exact relation for this confluent language, and a bounded
game that can only distinguish), and a diamond-property check for the
transition system itself.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from . import _canon
from .errors import (
    FuelExhaustedError,
    NotFiniteStateError,
    StateExplosionError,
)
from .tailcore import (
    BIte,
    BLeaf,
    TailProgram,
    TCall,
    TEmit,
    TNew,
    TNil,
    TPresent,
    TSpawn,
    tail_free_signals,
    tail_substitute,
    PAUSE_SIGNAL,
)


class Proc:
    __slots__ = ()


@dataclass(frozen=True)
class PNil(Proc):
    pass


@dataclass(frozen=True)
class PEmit(Proc):
    signal: str


@dataclass(frozen=True)
class PPresent(Proc):
    signal: str
    then: Proc
    branch: object


@dataclass(frozen=True)
class PPar(Proc):
    left: Proc
    right: Proc


@dataclass(frozen=True)
class PNu(Proc):
    bound: str
    body: Proc


@dataclass(frozen=True)
class PCall(Proc):
    ident: str
    args: tuple


@dataclass(frozen=True)
class PBLeaf:
    proc: Proc


@dataclass(frozen=True)
class PBIte:
    signal: str
    then: object
    other: object


PNIL = PNil()


# ---------------------------------------------------------------------------
# conversion and structural helpers


def tail_to_proc(t):
    if isinstance(t, TNil):
        return PNIL
    if isinstance(t, TEmit):
        return PPar(PEmit(t.signal), tail_to_proc(t.next))
    if isinstance(t, TSpawn):
        return PPar(tail_to_proc(t.spawned), tail_to_proc(t.next))
    if isinstance(t, TNew):
        return PNu(t.bound, tail_to_proc(t.body))
    if isinstance(t, TPresent):
        return PPresent(t.signal, tail_to_proc(t.then),
                        _branch_to_proc(t.branch))
    if isinstance(t, TCall):
        return PCall(t.ident, t.args)
    raise TypeError(f"not a tail thread: {t!r}")


def _branch_to_proc(b):
    if isinstance(b, BLeaf):
        return PBLeaf(tail_to_proc(b.tail))
    return PBIte(b.signal, _branch_to_proc(b.then), _branch_to_proc(b.other))


def print_proc(p):
    if isinstance(p, PNil):
        return "0"
    if isinstance(p, PEmit):
        return f"(emit {p.signal})"
    if isinstance(p, PPresent):
        return f"(present {p.signal} {print_proc(p.then)} " \
               f"{print_pbranch(p.branch)})"
    if isinstance(p, PPar):
        return f"(par {print_proc(p.left)} {print_proc(p.right)})"
    if isinstance(p, PNu):
        return f"(nu {p.bound} {print_proc(p.body)})"
    if isinstance(p, PCall):
        return "(call " + " ".join((p.ident,) + p.args) + ")"
    raise TypeError(f"not a process: {p!r}")


def print_pbranch(b):
    if isinstance(b, PBLeaf):
        return print_proc(b.proc)
    return f"(ite {b.signal} {print_pbranch(b.then)} " \
           f"{print_pbranch(b.other)})"


def proc_occurrences(p):
    out = []

    def walk(p):
        if isinstance(p, PNil):
            return
        if isinstance(p, PEmit):
            out.append(p.signal)
        elif isinstance(p, PPresent):
            out.append(p.signal)
            walk(p.then)
            walkb(p.branch)
        elif isinstance(p, PPar):
            walk(p.left)
            walk(p.right)
        elif isinstance(p, PNu):
            out.append(p.bound)
            walk(p.body)
        elif isinstance(p, PCall):
            out.extend(p.args)

    def walkb(b):
        if isinstance(b, PBLeaf):
            walk(b.proc)
        else:
            out.append(b.signal)
            walkb(b.then)
            walkb(b.other)

    walk(p)
    return out


def proc_rename_all(p, mapping):
    if isinstance(p, PNil):
        return p
    if isinstance(p, PEmit):
        return PEmit(mapping.get(p.signal, p.signal))
    if isinstance(p, PPresent):
        return PPresent(mapping.get(p.signal, p.signal),
                        proc_rename_all(p.then, mapping),
                        _pbranch_rename(p.branch, mapping))
    if isinstance(p, PPar):
        return PPar(proc_rename_all(p.left, mapping),
                    proc_rename_all(p.right, mapping))
    if isinstance(p, PNu):
        return PNu(mapping.get(p.bound, p.bound),
                   proc_rename_all(p.body, mapping))
    if isinstance(p, PCall):
        return PCall(p.ident, tuple(mapping.get(a, a) for a in p.args))
    raise TypeError(f"not a process: {p!r}")


def _pbranch_rename(b, mapping):
    if isinstance(b, PBLeaf):
        return PBLeaf(proc_rename_all(b.proc, mapping))
    return PBIte(mapping.get(b.signal, b.signal),
                 _pbranch_rename(b.then, mapping),
                 _pbranch_rename(b.other, mapping))


def proc_substitute(p, mapping, fresh=None):
    if fresh is None:
        avoid = set(mapping.values()) | set(mapping)
        fresh = _canon.name_supply("%r", avoid)
    if isinstance(p, (PNil, PEmit, PCall)):
        return proc_rename_all(p, mapping)
    if isinstance(p, PPresent):
        return PPresent(mapping.get(p.signal, p.signal),
                        proc_substitute(p.then, mapping, fresh),
                        _pbranch_substitute(p.branch, mapping, fresh))
    if isinstance(p, PPar):
        return PPar(proc_substitute(p.left, mapping, fresh),
                    proc_substitute(p.right, mapping, fresh))
    if isinstance(p, PNu):
        bound, body = p.bound, p.body
        clash = any(bound == v for k, v in mapping.items()
                    if k != v and k in free_proc_signals(body))
        if clash:
            bound = next(fresh)
            body = proc_substitute(body, {p.bound: bound}, fresh)
        inner = {k: v for k, v in mapping.items() if k != bound}
        return PNu(bound, proc_substitute(body, inner, fresh))
    raise TypeError(f"not a process: {p!r}")


def _pbranch_substitute(b, mapping, fresh):
    if isinstance(b, PBLeaf):
        return PBLeaf(proc_substitute(b.proc, mapping, fresh))
    return PBIte(mapping.get(b.signal, b.signal),
                 _pbranch_substitute(b.then, mapping, fresh),
                 _pbranch_substitute(b.other, mapping, fresh))


def free_proc_signals(p):
    if isinstance(p, PNil):
        return frozenset()
    if isinstance(p, PEmit):
        return frozenset((p.signal,))
    if isinstance(p, PPresent):
        return free_proc_signals(p.then) | _pbranch_free(p.branch) | \
            {p.signal}
    if isinstance(p, PPar):
        return free_proc_signals(p.left) | free_proc_signals(p.right)
    if isinstance(p, PNu):
        return free_proc_signals(p.body) - {p.bound}
    if isinstance(p, PCall):
        return frozenset(p.args)
    raise TypeError(f"not a process: {p!r}")


def _pbranch_free(b):
    if isinstance(b, PBLeaf):
        return free_proc_signals(b.proc)
    return _pbranch_free(b.then) | _pbranch_free(b.other) | {b.signal}


def proc_freshen_apart(p, supply):
    if isinstance(p, (PNil, PEmit, PCall)):
        return p
    if isinstance(p, PPresent):
        return PPresent(p.signal, proc_freshen_apart(p.then, supply),
                        _pbranch_freshen(p.branch, supply))
    if isinstance(p, PPar):
        return PPar(proc_freshen_apart(p.left, supply),
                    proc_freshen_apart(p.right, supply))
    if isinstance(p, PNu):
        g = next(supply)
        body = proc_substitute(p.body, {p.bound: g})
        return PNu(g, proc_freshen_apart(body, supply))
    raise TypeError(f"not a process: {p!r}")


def _pbranch_freshen(b, supply):
    if isinstance(b, PBLeaf):
        return PBLeaf(proc_freshen_apart(b.proc, supply))
    return PBIte(b.signal, _pbranch_freshen(b.then, supply),
                 _pbranch_freshen(b.other, supply))


class _ProcOps:
    occurrences = staticmethod(proc_occurrences)
    rename = staticmethod(proc_rename_all)
    freshen = staticmethod(proc_freshen_apart)
    show = staticmethod(print_proc)


# ---------------------------------------------------------------------------
# multiset states


def flatten(p, out=None):
    """Split a process into its top level parallel components, dropping
    terminated ones."""
    if out is None:
        out = []
    if isinstance(p, PPar):
        flatten(p.left, out)
        flatten(p.right, out)
    elif not isinstance(p, PNil):
        out.append(p)
    return out


def par_of(items):
    if not items:
        return PNIL
    p = items[0]
    for it in items[1:]:
        p = PPar(p, it)
    return p


def _dedup_emits(items):
    seen = set()
    out = []
    for p in items:
        if isinstance(p, PEmit):
            if p.signal in seen:
                continue
            seen.add(p.signal)
        out.append(p)
    return out


def emitted_set(items):
    """Signals whose emission is visible at the top level (rule out)."""
    S = set()
    for p in items:
        if isinstance(p, PEmit):
            S.add(p.signal)
        elif isinstance(p, PNu):
            S |= emitted_set(flatten(p.body)) - {p.bound}
    return S


def select_pbranch(b, S):
    while isinstance(b, PBIte):
        b = b.then if b.signal in S else b.other
    return b.proc


def floor_items(items, S):
    """End of instant: drop emissions, fire no guard, pick branches by the
    final emitted set, scoped under binders."""
    out = []
    for p in items:
        out.extend(_floor_member(p, S))
    return out


def _floor_member(p, S):
    if isinstance(p, (PEmit, PNil)):
        return []
    if isinstance(p, PPresent):
        if p.signal in S:
            raise ValueError(f"not suspended: present {p.signal} under "
                             f"emitted {sorted(S)}")
        return [select_pbranch(p.branch, S)]
    if isinstance(p, PNu):
        inner = flatten(p.body)
        S2 = (S - {p.bound}) | ({p.bound} & emitted_set(inner))
        floored = floor_items(inner, S2)
        if not floored:
            return []
        return [PNu(p.bound, par_of(floored))]
    raise ValueError(f"not suspended: {print_proc(p)}")


# ---------------------------------------------------------------------------
# transitions of a state


def _member_steps(p, defs):
    """Moves of one parallel component: (action, replacement items)."""
    if isinstance(p, PEmit):
        return [(("out", p.signal), [p])]
    if isinstance(p, PPresent):
        return [(("in", p.signal), flatten(p.then) + [PEmit(p.signal)])]
    if isinstance(p, PCall):
        dfn = defs[p.ident]
        body = tail_substitute(dfn.body, dict(zip(dfn.params, p.args)))
        return [(("tau", None), flatten(tail_to_proc(body)))]
    if isinstance(p, PNu):
        inner = flatten(p.body)
        out = []
        for action, items2 in _multiset_steps(inner, defs):
            if action[1] == p.bound:
                continue
            out.append((action, [PNu(p.bound, par_of(items2))]))
        return out
    if isinstance(p, PNil):
        return []
    raise TypeError(f"not a process: {p!r}")


def _multiset_steps(items, defs):
    per = [_member_steps(p, defs) for p in items]
    out = []
    for i, steps in enumerate(per):
        for action, repl in steps:
            out.append((action, items[:i] + repl + items[i + 1:]))
    for i, si in enumerate(per):
        for ai, ri in si:
            if ai[0] != "out":
                continue
            for j, sj in enumerate(per):
                if i == j:
                    continue
                for aj, rj in sj:
                    if aj == ("in", ai[1]):
                        new = list(items)
                        new[i:i + 1] = ri
                        if j > i:
                            shift = j + len(ri) - 1
                        else:
                            shift = j
                        new[shift:shift + 1] = rj
                        out.append((("tau", None), new))
    return out


# ---------------------------------------------------------------------------
# reachable state space


class Space:
    """Canonical reachable states of one tail program viewed as processes.

    States are interned canonical multisets; transitions, suspension,
    barbs, instant boundaries and emission contexts are computed on demand
    and cached by state id.
    """

    def __init__(self, program, universe, state_limit=50_000):
        self.defs = program.defs
        self.universe = tuple(sorted(universe))
        self.interface = set(universe) | {PAUSE_SIGNAL}
        self.state_limit = state_limit
        self._ids = {}
        self._items = []
        self._tau = {}
        self._ins = {}
        self._weak = {}

    def intern(self, items):
        flat = []
        for p in items:
            flatten(p, flat)
        flat = _dedup_emits(flat)
        canonical, _ = _canon.canonical_multiset(flat, self.interface,
                                                 _ProcOps)
        sid = self._ids.get(canonical)
        if sid is None:
            if len(self._items) >= self.state_limit:
                raise StateExplosionError(self.state_limit)
            sid = len(self._items)
            self._ids[canonical] = sid
            self._items.append(canonical)
        return sid

    def items(self, sid):
        return self._items[sid]

    def show(self, sid):
        return " | ".join(print_proc(p) for p in self._items[sid]) or "0"

    def _steps(self, sid):
        return _multiset_steps(list(self._items[sid]), self.defs)

    def tau(self, sid):
        hit = self._tau.get(sid)
        if hit is None:
            hit = tuple(sorted({self.intern(items)
                                for a, items in self._steps(sid)
                                if a[0] == "tau"}))
            self._tau[sid] = hit
        return hit

    def ins(self, sid):
        hit = self._ins.get(sid)
        if hit is None:
            table = {}
            for a, items in self._steps(sid):
                if a[0] == "in" and a[1] in self.universe:
                    table.setdefault(a[1], set()).add(self.intern(items))
            hit = {s: tuple(sorted(v)) for s, v in table.items()}
            self._ins[sid] = hit
        return hit

    def barbs(self, sid):
        return frozenset(emitted_set(list(self._items[sid])))

    def suspended(self, sid):
        return not self.tau(sid)

    def weak_tau(self, sid):
        hit = self._weak.get(sid)
        if hit is None:
            seen = {sid}
            queue = [sid]
            while queue:
                cur = queue.pop()
                for nxt in self.tau(cur):
                    if nxt not in seen:
                        seen.add(nxt)
                        queue.append(nxt)
            hit = frozenset(seen)
            self._weak[sid] = hit
        return hit

    def converges(self, sid):
        return any(self.suspended(x) for x in self.weak_tau(sid))

    def l_converges(self, sid):
        """Reachability of a suspended state through arbitrary actions."""
        seen = {sid}
        queue = [sid]
        while queue:
            cur = queue.pop()
            if self.suspended(cur):
                return True
            nxts = set(self.tau(cur))
            for targets in self.ins(cur).values():
                nxts.update(targets)
            for nxt in nxts:
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        return False

    def eoi(self, sid):
        if not self.suspended(sid):
            raise ValueError("end of instant on a running state")
        items = list(self._items[sid])
        S = emitted_set(items)
        return self.intern(floor_items(items, S))

    def with_emits(self, sid, signals):
        items = list(self._items[sid]) + [PEmit(s) for s in sorted(signals)]
        return self.intern(items)

    def weak_in(self, sid, signal):
        out = set()
        for mid in self.weak_tau(sid):
            for tgt in self.ins(mid).get(signal, ()):
                out |= self.weak_tau(tgt)
        return frozenset(out)


def space_for(program, universe=None, state_limit=50_000):
    if universe is None:
        universe = program_universe(program)
    return Space(program, universe, state_limit)


def program_universe(program):
    names = set(program.inputs) | set(program.outputs)
    for t in program.initial:
        names |= tail_free_signals(t)
    for d in program.defs.values():
        names |= tail_free_signals(d.body) - set(d.params)
    names.discard(PAUSE_SIGNAL)
    return frozenset(n for n in names if not n.startswith("%"))


# ---------------------------------------------------------------------------
# suspension report


@dataclass(frozen=True)
class SuspensionReport:
    now: bool
    weak: bool
    labelled: bool


def suspension(program, state_limit=50_000):
    sp = space_for(program, state_limit=state_limit)
    seed = sp.intern([tail_to_proc(t) for t in program.initial])
    return SuspensionReport(sp.suspended(seed), sp.converges(seed),
                            sp.l_converges(seed))


# ---------------------------------------------------------------------------
# equivalence checking


@dataclass(frozen=True)
class Equivalent:
    def __bool__(self):
        return True


@dataclass(frozen=True)
class Distinguished:
    witness: tuple

    def __bool__(self):
        return False

    def render(self):
        return " then ".join(self.witness)


@dataclass(frozen=True)
class Inconclusive:
    depth: int

    def __bool__(self):
        return False


def _subsets(names):
    names = sorted(names)
    out = [frozenset()]
    for s in names:
        out = out + [x | {s} for x in out]
    return sorted(out, key=lambda x: (len(x), sorted(x)))


def _show_set(S):
    return "{" + ",".join(sorted(S)) + "}"


class _Refinement:
    """Greatest fixed point of the bisimulation conditions over the cross
    product of two reachable state spaces."""

    def __init__(self, sp1, sp2, universe):
        self.sp1 = sp1
        self.sp2 = sp2
        self.subsets = _subsets(universe)

    def close(self, space, seed):
        seen = {seed}
        queue = deque([seed])
        while queue:
            sid = queue.popleft()
            succs = set(space.tau(sid))
            for targets in space.ins(sid).values():
                succs.update(targets)
            for S in self.subsets:
                succs.add(space.with_emits(sid, S))
            if space.suspended(sid):
                succs.add(space.eoi(sid))
            for nxt in succs:
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        return seen

    def run(self, seed1, seed2):
        states1 = sorted(self.close(self.sp1, seed1))
        states2 = sorted(self.close(self.sp2, seed2))
        alive = {(a, b) for a in states1 for b in states2}
        self.reasons = {}
        changed = True
        while changed:
            changed = False
            for pair in sorted(alive):
                reason = self._violation(pair, alive)
                if reason is not None:
                    alive.discard(pair)
                    self.reasons[pair] = reason
                    changed = True
        if (seed1, seed2) in alive:
            return Equivalent()
        return Distinguished(self._witness((seed1, seed2)))

    def _violation(self, pair, alive):
        r = self._directional(pair, alive, forward=True)
        if r is not None:
            return r
        return self._directional(pair, alive, forward=False)

    def _directional(self, pair, alive, forward):
        a, b = pair
        spP, spQ = (self.sp1, self.sp2) if forward else (self.sp2, self.sp1)
        p, q = (a, b) if forward else (b, a)

        def live(x, y):
            return ((x, y) if forward else (y, x)) in alive

        def dead_pair(x, y):
            return (x, y) if forward else (y, x)

        for p2 in spP.tau(p):
            if not any(live(p2, q2) for q2 in spQ.weak_tau(q)):
                return ("internal step", dead_pair(p2, q))
        if spP.converges(p):
            for s in sorted(spP.barbs(p)):
                if not any(s in spQ.barbs(q2) and live(p, q2)
                           for q2 in spQ.weak_tau(q)):
                    return (f"emitted {s} observable", None)
        for S in self.subsets:
            pS = spP.with_emits(p, S)
            if not spP.suspended(pS):
                continue
            qS = spQ.with_emits(q, S)
            candidates = [q2 for q2 in spQ.weak_tau(qS)
                          if spQ.suspended(q2)]
            if not candidates:
                return (f"context emits {_show_set(S)}, no suspension",
                        None)
            pE = spP.eoi(pS)
            ok = any(live(pS, q2) and live(pE, spQ.eoi(q2))
                     for q2 in candidates)
            if not ok:
                q2 = candidates[0]
                if not live(pS, q2):
                    return (f"context emits {_show_set(S)}",
                            dead_pair(pS, q2))
                return (f"context emits {_show_set(S)}, instant ends",
                        dead_pair(pE, spQ.eoi(q2)))
        for s, targets in sorted(spP.ins(p).items()):
            for p2 in targets:
                matched = any(live(p2, q2) for q2 in spQ.weak_in(q, s))
                if not matched:
                    matched = any(
                        live(p2, spQ.with_emits(q2, {s}))
                        for q2 in spQ.weak_tau(q))
                if not matched:
                    return (f"input {s}",
                            dead_pair(p2, spQ.with_emits(q, {s})))
        return None

    def _witness(self, pair):
        chain = []
        seen = set()
        while pair in self.reasons and pair not in seen:
            seen.add(pair)
            label, nxt = self.reasons[pair]
            chain.append(label)
            if nxt is None:
                break
            pair = nxt
        return tuple(chain)


# ---------------------------------------------------------------------------
# trace mode


def _instant_step(space, sid, inputs, fuel=100_000, pick_last=False):
    cur = space.with_emits(sid, inputs)
    steps = 0
    while not space.suspended(cur):
        succ = space.tau(cur)
        cur = succ[-1] if pick_last else succ[0]
        steps += 1
        if steps > fuel:
            raise FuelExhaustedError(steps)
    outputs = space.barbs(cur)
    return outputs, space.eoi(cur)


def _trace_game(sp1, seed1, sp2, seed2, universe, depth=None):
    subsets = _subsets(universe)
    start = (seed1, seed2)
    seen = {start}
    queue = deque([(start, ())])
    while queue:
        (a, b), word = queue.popleft()
        if depth is not None and len(word) >= depth:
            continue
        for I in subsets:
            o1, n1 = _instant_step(sp1, a, I)
            o2, n2 = _instant_step(sp2, b, I)
            if o1 != o2:
                labels = tuple(f"inputs {_show_set(X)}" for X in word)
                labels += (f"inputs {_show_set(I)} emit "
                           f"{_show_set(o1)} versus {_show_set(o2)}",)
                return Distinguished(labels)
            nxt = (n1, n2)
            if nxt not in seen:
                seen.add(nxt)
                queue.append((nxt, word + (I,)))
    if depth is not None:
        return Inconclusive(depth)
    return Equivalent()


# ---------------------------------------------------------------------------
# entry point


def _calls_cyclic(program):
    edges = {}
    for name, d in program.defs.items():
        acc = set()

        def walk(t):
            if isinstance(t, TEmit):
                walk(t.next)
            elif isinstance(t, TNew):
                walk(t.body)
            elif isinstance(t, TSpawn):
                walk(t.spawned)
                walk(t.next)
            elif isinstance(t, TPresent):
                walk(t.then)
                walkb(t.branch)
            elif isinstance(t, TCall):
                acc.add(t.ident)

        def walkb(b):
            if isinstance(b, BLeaf):
                walk(b.tail)
            else:
                walkb(b.then)
                walkb(b.other)

        walk(d.body)
        edges[name] = acc
    color = {}

    def visit(u):
        color[u] = 1
        for v in edges.get(u, ()):
            c = color.get(v)
            if c == 1 or (c is None and visit(v)):
                return True
        color[u] = 2
        return False

    return any(visit(u) for u in edges if u not in color)


def _has_new(program):
    from .mealy import _contains_new
    return any(_contains_new(t) for t in program.all_tails())


EXACT = "exact"
TRACE = "trace"
BOUNDED = "bounded"


def bisim_check(p1, p2, mode=EXACT, depth=8, state_limit=50_000):
    """Decide equivalence of two tail programs.

    exact runs the greatest-fixed-point refinement when the definition
    tables are call-acyclic; with recursion but no signal generation it
    falls back to trace comparison, which coincides with the labelled
    relation for this language; with both it refuses. trace compares
    instant machines directly. bounded plays the trace game for `depth`
    instants and never certifies equivalence.
    """
    universe = sorted(program_universe(p1) | program_universe(p2))
    sp1 = Space(p1, universe, state_limit)
    sp2 = Space(p2, universe, state_limit)
    seed1 = sp1.intern([tail_to_proc(t) for t in p1.initial])
    seed2 = sp2.intern([tail_to_proc(t) for t in p2.initial])
    if mode == BOUNDED:
        return _trace_game(sp1, seed1, sp2, seed2, universe, depth=depth)
    if mode == TRACE:
        return _trace_game(sp1, seed1, sp2, seed2, universe)
    if mode != EXACT:
        raise ValueError(f"unknown mode: {mode}")
    acyclic = not _calls_cyclic(p1) and not _calls_cyclic(p2)
    if acyclic:
        return _Refinement(sp1, sp2, universe).run(seed1, seed2)
    if not _has_new(p1) and not _has_new(p2):
        return _trace_game(sp1, seed1, sp2, seed2, universe)
    raise NotFiniteStateError(
        "definitions are recursive and generate signals; "
        "use trace or bounded mode")


# ---------------------------------------------------------------------------
# diamond property of the transition system


@dataclass(frozen=True)
class ConfluenceOk:
    states: int

    def __bool__(self):
        return True


@dataclass(frozen=True)
class ConfluenceViolation:
    state: str
    detail: str

    def __bool__(self):
        return False


def confluence_check(program, depth=6, state_limit=50_000):
    """Explore the transition system and verify, at every visited state:
    the one-step diamond for every pair of moves, that emissions are
    self-loops, that barbs persist across moves, and that an input leaves
    the received signal observable."""
    universe = program_universe(program)
    sp = Space(program, universe, state_limit)
    seed = sp.intern([tail_to_proc(t) for t in program.initial])
    seen = {seed: 0}
    queue = deque([seed])
    while queue:
        sid = queue.popleft()
        level = seen[sid]
        moves = []
        for action, items in _multiset_steps(list(sp.items(sid)), sp.defs):
            if action[0] == "in" and action[1] not in universe:
                continue
            tgt = sp.intern(items)
            moves.append((action, tgt))
            if action[0] == "out" and tgt != sid:
                return ConfluenceViolation(
                    sp.show(sid), f"emission moved the state: {action[1]}")
            if not (sp.barbs(sid) <= sp.barbs(tgt)):
                return ConfluenceViolation(
                    sp.show(sid), f"barb lost across {action}")
            if action[0] == "in" and action[1] not in sp.barbs(tgt):
                return ConfluenceViolation(
                    sp.show(sid), f"input {action[1]} left no emission")
        succ_map = {}
        for action, tgt in moves:
            succ_map.setdefault(action, set()).add(tgt)
        for i in range(len(moves)):
            for j in range(i + 1, len(moves)):
                a1, t1 = moves[i]
                a2, t2 = moves[j]
                if t1 == t2:
                    continue
                rejoin1 = {sp.intern(items) for action, items
                           in _multiset_steps(list(sp.items(t1)), sp.defs)
                           if action == a2}
                rejoin2 = {sp.intern(items) for action, items
                           in _multiset_steps(list(sp.items(t2)), sp.defs)
                           if action == a1}
                if not (rejoin1 & rejoin2):
                    return ConfluenceViolation(
                        sp.show(sid),
                        f"no rejoin for {a1} and {a2}")
        if level < depth:
            for _, tgt in moves:
                if tgt not in seen:
                    seen[tgt] = level + 1
                    queue.append(tgt)
    return ConfluenceOk(len(seen))
