"""The tail recursive core language.

Threads here never sequence arbitrary statements. Each constructor carries
its continuation directly (prefix form), recursion happens only through
identifier calls in tail position, and the only branching point is
`present`, whose else branch runs at the end of the instant as a
conditional tree over the signals that were emitted.

Concrete syntax mirrors the source language:

    program   := decl*
    decl      := (input name*) | (output name*)
               | (def (ident param*) texpr) | (run texpr)
    texpr     := 0
               | (emit! sig texpr)
               | (new sig texpr)
               | (thread! texpr texpr)     ; spawned thread, then continuation
               | (present sig texpr branch)
               | (call ident sig*)
    branch    := texpr | (ite sig branch branch)

`pause` and `await` are library constructors over this grammar, not AST
nodes. The pause constructor guards on the reserved signal `%pause`, which
no program may emit, so the guard suspends every instant and the branch
picks the continuation; this avoids wrapping a generator around every
pause and keeps images of the translation free of `new`.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from . import _canon
from .errors import (
    ArityMismatchError,
    FuelExhaustedError,
    NotSuspendedError,
    ParseError,
    UnboundIdentifierError,
    UndeclaredSignalError,
)
from .semantics import (
    DEFAULT_FUEL,
    DETERMINISTIC,
    Env,
    InstantResult,
    run_threads,
)
from .syntax import (
    GENERATED_PREFIX,
    SAtom,
    SList,
    _read_forms,
)

PAUSE_SIGNAL = "%pause"


class Tail:
    __slots__ = ()


@dataclass(frozen=True)
class TNil(Tail):
    __slots__ = ()

    def __repr__(self):
        return "TNil()"


@dataclass(frozen=True)
class TEmit(Tail):
    signal: str
    next: Tail


@dataclass(frozen=True)
class TNew(Tail):
    bound: str
    body: Tail


@dataclass(frozen=True)
class TSpawn(Tail):
    spawned: Tail
    next: Tail


@dataclass(frozen=True)
class TPresent(Tail):
    signal: str
    then: Tail
    branch: "Branch"


@dataclass(frozen=True)
class TCall(Tail):
    ident: str
    args: tuple


class Branch:
    __slots__ = ()


@dataclass(frozen=True)
class BLeaf(Branch):
    tail: Tail


@dataclass(frozen=True)
class BIte(Branch):
    signal: str
    then: Branch
    other: Branch


TNIL = TNil()


def pause_prefix(branch):
    """pause.b: suspend for exactly one instant, then run the branch."""
    return TPresent(PAUSE_SIGNAL, TNIL, branch)


def await_prefix(signal, cont, fresh_ident, define):
    """await s.t: a recursive guard that waits for s across instants.

    Emits one definition through `define(name, params, body)` and returns
    the call that enters it.
    """
    params = tuple(sorted((tail_free_signals(cont) | {signal})
                          - {PAUSE_SIGNAL}))
    name = fresh_ident()
    body = TPresent(signal, cont, BLeaf(TCall(name, params)))
    define(name, params, body)
    return TCall(name, params)


# ---------------------------------------------------------------------------
# structural helpers


def tail_free_signals(t):
    if isinstance(t, TNil):
        return frozenset()
    if isinstance(t, TEmit):
        return tail_free_signals(t.next) | {t.signal}
    if isinstance(t, TNew):
        return tail_free_signals(t.body) - {t.bound}
    if isinstance(t, TSpawn):
        return tail_free_signals(t.spawned) | tail_free_signals(t.next)
    if isinstance(t, TPresent):
        return branch_free_signals(t.branch) | tail_free_signals(t.then) | {t.signal}
    if isinstance(t, TCall):
        return frozenset(t.args)
    raise TypeError(f"not a tail thread: {t!r}")


def branch_free_signals(b):
    if isinstance(b, BLeaf):
        return tail_free_signals(b.tail)
    return branch_free_signals(b.then) | branch_free_signals(b.other) | {b.signal}


def tail_substitute(t, mapping, fresh=None):
    """Capture-avoiding signal substitution."""
    if fresh is None:
        avoid = set(mapping.values()) | set(mapping)
        fresh = _canon.name_supply("%r", avoid)
    if isinstance(t, TNil):
        return t
    if isinstance(t, TEmit):
        return TEmit(mapping.get(t.signal, t.signal),
                     tail_substitute(t.next, mapping, fresh))
    if isinstance(t, TNew):
        clash = any(t.bound == v for k, v in mapping.items()
                    if k != v and k in tail_free_signals(t.body))
        bound, body = t.bound, t.body
        if clash:
            bound = next(fresh)
            body = tail_substitute(body, {t.bound: bound}, fresh)
        inner = {k: v for k, v in mapping.items() if k != bound}
        return TNew(bound, tail_substitute(body, inner, fresh))
    if isinstance(t, TSpawn):
        return TSpawn(tail_substitute(t.spawned, mapping, fresh),
                      tail_substitute(t.next, mapping, fresh))
    if isinstance(t, TPresent):
        return TPresent(mapping.get(t.signal, t.signal),
                        tail_substitute(t.then, mapping, fresh),
                        branch_substitute(t.branch, mapping, fresh))
    if isinstance(t, TCall):
        return TCall(t.ident, tuple(mapping.get(a, a) for a in t.args))
    raise TypeError(f"not a tail thread: {t!r}")


def branch_substitute(b, mapping, fresh=None):
    if fresh is None:
        avoid = set(mapping.values()) | set(mapping)
        fresh = _canon.name_supply("%r", avoid)
    if isinstance(b, BLeaf):
        return BLeaf(tail_substitute(b.tail, mapping, fresh))
    return BIte(mapping.get(b.signal, b.signal),
                branch_substitute(b.then, mapping, fresh),
                branch_substitute(b.other, mapping, fresh))


def tail_signal_occurrences(t):
    """Every signal occurrence in pre-order, binders included."""
    out = []

    def walk_t(t):
        if isinstance(t, TNil):
            return
        if isinstance(t, TEmit):
            out.append(t.signal)
            walk_t(t.next)
        elif isinstance(t, TNew):
            out.append(t.bound)
            walk_t(t.body)
        elif isinstance(t, TSpawn):
            walk_t(t.spawned)
            walk_t(t.next)
        elif isinstance(t, TPresent):
            out.append(t.signal)
            walk_t(t.then)
            walk_b(t.branch)
        elif isinstance(t, TCall):
            out.extend(t.args)

    def walk_b(b):
        if isinstance(b, BLeaf):
            walk_t(b.tail)
        else:
            out.append(b.signal)
            walk_b(b.then)
            walk_b(b.other)

    walk_t(t)
    return out


def tail_freshen_apart(t, supply):
    """Rename every bound signal to a fresh name from the supply."""
    if isinstance(t, (TNil, TCall)):
        return t
    if isinstance(t, TEmit):
        return TEmit(t.signal, tail_freshen_apart(t.next, supply))
    if isinstance(t, TNew):
        g = next(supply)
        body = tail_substitute(t.body, {t.bound: g})
        return TNew(g, tail_freshen_apart(body, supply))
    if isinstance(t, TSpawn):
        return TSpawn(tail_freshen_apart(t.spawned, supply),
                      tail_freshen_apart(t.next, supply))
    if isinstance(t, TPresent):
        return TPresent(t.signal, tail_freshen_apart(t.then, supply),
                        branch_freshen_apart(t.branch, supply))
    raise TypeError(f"not a tail thread: {t!r}")


def branch_freshen_apart(b, supply):
    if isinstance(b, BLeaf):
        return BLeaf(tail_freshen_apart(b.tail, supply))
    return BIte(b.signal, branch_freshen_apart(b.then, supply),
                branch_freshen_apart(b.other, supply))


# ---------------------------------------------------------------------------
# printing


def print_tail(t):
    if isinstance(t, TNil):
        return "0"
    if isinstance(t, TEmit):
        return f"(emit! {t.signal} {print_tail(t.next)})"
    if isinstance(t, TNew):
        return f"(new {t.bound} {print_tail(t.body)})"
    if isinstance(t, TSpawn):
        return f"(thread! {print_tail(t.spawned)} {print_tail(t.next)})"
    if isinstance(t, TPresent):
        return (f"(present {t.signal} {print_tail(t.then)}"
                f" {print_branch(t.branch)})")
    if isinstance(t, TCall):
        return "(call " + " ".join((t.ident,) + t.args) + ")"
    raise TypeError(f"not a tail thread: {t!r}")


def print_branch(b):
    if isinstance(b, BLeaf):
        return print_tail(b.tail)
    return f"(ite {b.signal} {print_branch(b.then)} {print_branch(b.other)})"


@dataclass(frozen=True)
class TailDef:
    name: str
    params: tuple
    body: Tail


@dataclass
class TailProgram:
    inputs: tuple
    outputs: tuple
    defs: dict
    initial: tuple

    @property
    def interface(self):
        return frozenset(self.inputs) | frozenset(self.outputs)

    def all_tails(self):
        for d in self.defs.values():
            yield d.body
        yield from self.initial


def print_tail_program(p, index_notes=None):
    lines = []
    lines.append("(input" + "".join(" " + s for s in p.inputs) + ")")
    lines.append("(output" + "".join(" " + s for s in p.outputs) + ")")
    if index_notes:
        for note in index_notes:
            lines.append(f"#index {note}")
    for d in p.defs.values():
        head = " ".join((d.name,) + d.params)
        lines.append(f"(def ({head}) {print_tail(d.body)})")
    for t in p.initial:
        lines.append(f"(run {print_tail(t)})")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# parsing

_KEYWORDS = {"0", "emit!", "new", "thread!", "present", "ite", "call"}


def _atom(form, what):
    if not isinstance(form, SAtom):
        raise ParseError(f"expected {what}", form.line, form.col)
    return form.value


def _check_signal(name, form, scope):
    if name.startswith("%"):
        return name
    if name not in scope:
        raise ParseError(f"signal not in scope: {name}", form.line, form.col)
    return name


def _parse_tail(form, scope, def_arities):
    if isinstance(form, SAtom):
        if form.value == "0":
            return TNIL
        raise ParseError(f"expected a tail thread, got {form.value!r}",
                         form.line, form.col)
    if not form.items:
        raise ParseError("empty form", form.line, form.col)
    head = _atom(form.items[0], "keyword")
    rest = form.items[1:]
    if head == "emit!":
        if len(rest) != 2:
            raise ParseError("emit! takes a signal and a continuation",
                             form.line, form.col)
        s = _check_signal(_atom(rest[0], "signal"), rest[0], scope)
        if s == PAUSE_SIGNAL:
            raise ParseError(f"{PAUSE_SIGNAL} is reserved and never emitted",
                             rest[0].line, rest[0].col)
        return TEmit(s, _parse_tail(rest[1], scope, def_arities))
    if head == "new":
        if len(rest) != 2:
            raise ParseError("new takes a signal and a body",
                             form.line, form.col)
        s = _atom(rest[0], "signal")
        if s == PAUSE_SIGNAL:
            raise ParseError(f"cannot bind {PAUSE_SIGNAL}",
                             rest[0].line, rest[0].col)
        return TNew(s, _parse_tail(rest[1], scope | {s}, def_arities))
    if head == "thread!":
        if len(rest) != 2:
            raise ParseError("thread! takes a spawned thread and a "
                             "continuation", form.line, form.col)
        return TSpawn(_parse_tail(rest[0], scope, def_arities),
                      _parse_tail(rest[1], scope, def_arities))
    if head == "present":
        if len(rest) != 3:
            raise ParseError("present takes a signal, a thread and a branch",
                             form.line, form.col)
        s = _check_signal(_atom(rest[0], "signal"), rest[0], scope)
        return TPresent(s, _parse_tail(rest[1], scope, def_arities),
                        _parse_branch(rest[2], scope, def_arities))
    if head == "call":
        if not rest:
            raise ParseError("call needs an identifier", form.line, form.col)
        ident = _atom(rest[0], "identifier")
        if ident not in def_arities:
            raise UnboundIdentifierError(ident)
        args = tuple(_check_signal(_atom(a, "signal"), a, scope)
                     for a in rest[1:])
        if len(args) != def_arities[ident]:
            raise ArityMismatchError(
                f"{ident} takes {def_arities[ident]} arguments, "
                f"got {len(args)}")
        return TCall(ident, args)
    raise ParseError(f"unknown tail form: {head}", form.line, form.col)


def _parse_branch(form, scope, def_arities):
    if isinstance(form, SList) and form.items and \
            isinstance(form.items[0], SAtom) and form.items[0].value == "ite":
        if len(form.items) != 4:
            raise ParseError("ite takes a signal and two branches",
                             form.line, form.col)
        s = _check_signal(_atom(form.items[1], "signal"), form.items[1], scope)
        return BIte(s, _parse_branch(form.items[2], scope, def_arities),
                    _parse_branch(form.items[3], scope, def_arities))
    return BLeaf(_parse_tail(form, scope, def_arities))


def parse_tail_program(text):
    # lines starting with # carry compilation notes; they are comments here
    text = "\n".join("" if line.lstrip().startswith("#") else line
                     for line in text.splitlines())
    forms = _read_forms(text)
    inputs = []
    outputs = []
    def_forms = []
    run_forms = []
    for form in forms:
        if not isinstance(form, SList) or not form.items or \
                not isinstance(form.items[0], SAtom):
            raise ParseError("expected a declaration", form.line, form.col)
        head = form.items[0].value
        if head == "input":
            inputs.extend(_atom(f, "signal") for f in form.items[1:])
        elif head == "output":
            outputs.extend(_atom(f, "signal") for f in form.items[1:])
        elif head == "def":
            def_forms.append(form)
        elif head == "run":
            run_forms.append(form)
        else:
            raise ParseError(f"unknown declaration: {head}",
                             form.line, form.col)
    interface = set(inputs) | set(outputs)
    def_arities = {}
    headers = []
    for form in def_forms:
        if len(form.items) != 3 or not isinstance(form.items[1], SList) \
                or not form.items[1].items:
            raise ParseError("def takes a header and a body",
                             form.line, form.col)
        header = form.items[1]
        name = _atom(header.items[0], "identifier")
        params = tuple(_atom(f, "signal") for f in header.items[1:])
        if name in def_arities:
            raise ParseError(f"duplicate definition: {name}",
                             header.line, header.col)
        def_arities[name] = len(params)
        headers.append((name, params, form.items[2]))
    defs = {}
    for name, params, body_form in headers:
        scope = set(params) | interface
        defs[name] = TailDef(name, params,
                             _parse_tail(body_form, scope, def_arities))
    initial = []
    for form in run_forms:
        if len(form.items) != 2:
            raise ParseError("run takes one thread", form.line, form.col)
        initial.append(_parse_tail(form.items[1], interface, def_arities))
    if not initial:
        raise ParseError("program has no (run ...) threads", 0, 0)
    return TailProgram(tuple(inputs), tuple(outputs), defs, tuple(initial))


# ---------------------------------------------------------------------------
# execution


def try_step_tail(t, env, defs):
    """One reduction at the root; returns (t', spawned) or None."""
    if isinstance(t, TNil):
        return None
    if isinstance(t, TEmit):
        env.emit(t.signal)
        return t.next, []
    if isinstance(t, TNew):
        g = env.fresh()
        return tail_substitute(t.body, {t.bound: g}), []
    if isinstance(t, TCall):
        dfn = defs[t.ident]
        return tail_substitute(dfn.body, dict(zip(dfn.params, t.args))), []
    if isinstance(t, TSpawn):
        return t.next, [t.spawned]
    if isinstance(t, TPresent):
        if env.present(t.signal):
            return t.then, []
        return None
    raise TypeError(f"not a tail thread: {t!r}")


def can_step_tail(t, env, defs):
    if isinstance(t, TNil):
        return False
    if isinstance(t, TPresent):
        return env.present(t.signal)
    return True


def select_branch(b, env):
    """Evaluate a conditional tree against the instant's final environment."""
    while isinstance(b, BIte):
        b = b.then if env.present(b.signal) else b.other
    return b.tail


def end_of_instant_tail(threads, env, defs=None):
    out = []
    for t in threads:
        if isinstance(t, TNil):
            out.append(t)
        elif isinstance(t, TPresent) and not env.present(t.signal):
            out.append(select_branch(t.branch, env))
        else:
            raise NotSuspendedError(print_tail(t))
    return tuple(out)


def tail_next_gen_index(p):
    best = 0
    names = set(p.interface)
    for t in p.all_tails():
        names.update(tail_signal_occurrences(t))
    for d in p.defs.values():
        names.update(d.params)
    for name in names:
        if name.startswith(GENERATED_PREFIX):
            digits = name[len(GENERATED_PREFIX):]
            if digits.isdigit():
                best = max(best, int(digits) + 1)
    return best


def _tail_env_domain(program, threads):
    dom = set(program.inputs) | set(program.outputs) | {PAUSE_SIGNAL}
    for t in threads:
        dom |= tail_free_signals(t)
    for d in program.defs.values():
        dom |= {s for s in tail_free_signals(d.body) - set(d.params)
                if s.startswith("%")}
    return dom


class TailRunner:
    """Instant-by-instant execution of a tail program."""

    def __init__(self, program, policy=DETERMINISTIC, seed=0,
                 fuel=DEFAULT_FUEL):
        self.program = program
        self.policy = policy
        self.rng = random.Random(seed)
        self.fuel = fuel
        self.gen_counter = tail_next_gen_index(program)
        self.threads = list(program.initial)

    def run_instant(self, inputs=frozenset()):
        inputs = frozenset(inputs)
        extra = inputs - set(self.program.inputs)
        if extra:
            raise UndeclaredSignalError(
                "not input signals: " + " ".join(sorted(extra)))
        dom = _tail_env_domain(self.program, self.threads)
        env = Env({s: s in inputs for s in dom}, self.gen_counter)
        defs = self.program.defs
        threads, steps = run_threads(
            self.threads, self.policy, self.rng, self.fuel,
            lambda t: try_step_tail(t, env, defs),
            lambda t: can_step_tail(t, env, defs))
        self.gen_counter = env.counter
        outputs = frozenset(
            s for s in self.program.outputs if env.defined.get(s, False))
        residual = end_of_instant_tail(threads, env)
        self.threads = list(residual)
        return InstantResult(outputs, residual, steps)


def run_trace_tail(program, input_sets, policy=DETERMINISTIC, seed=0,
                   fuel=DEFAULT_FUEL):
    runner = TailRunner(program, policy=policy, seed=seed, fuel=fuel)
    trace = []
    for k, inputs in enumerate(input_sets):
        try:
            res = runner.run_instant(inputs)
        except FuelExhaustedError as e:
            e.instant = k
            raise
        trace.append((frozenset(inputs), res.outputs))
    return trace


# ---------------------------------------------------------------------------
# canonical forms


class _TailOps:
    @staticmethod
    def occurrences(t):
        return tail_signal_occurrences(t)

    @staticmethod
    def rename(t, mapping):
        return tail_substitute(t, mapping)

    @staticmethod
    def freshen(t, supply):
        return tail_freshen_apart(t, supply)

    @staticmethod
    def show(t):
        return print_tail(t)


def canonicalize_tail(threads, interface):
    canonical, _ = _canon.canonical_multiset(list(threads), interface,
                                             _TailOps)
    return canonical


def tail_alpha_key(t):
    """A string identifying t up to renaming of bound signals."""
    supply = _canon.name_supply("%k", set())
    return print_tail(tail_freshen_apart(t, supply))


# ---------------------------------------------------------------------------
# reactivity for tail programs

from .analysis import Accept, Reject, _find_cycle  # noqa: E402


def _instant_calls(t, acc):
    """Identifiers reachable from t without crossing an instant boundary."""
    if isinstance(t, TNil):
        return
    if isinstance(t, TEmit):
        _instant_calls(t.next, acc)
    elif isinstance(t, TNew):
        _instant_calls(t.body, acc)
    elif isinstance(t, TSpawn):
        _instant_calls(t.spawned, acc)
        _instant_calls(t.next, acc)
    elif isinstance(t, TPresent):
        _instant_calls(t.then, acc)
    elif isinstance(t, TCall):
        acc.add(t.ident)


def check_reactivity_tail(program):
    """Accept when no within-instant call chain can revisit an identifier.

    Branches of present run only after the instant ends, so they never
    contribute; everything else may unfold in the same instant.
    """
    edges = {}
    for name, d in program.defs.items():
        acc = set()
        _instant_calls(d.body, acc)
        edges[name] = acc
    roots = set()
    for t in program.initial:
        _instant_calls(t, roots)
    for r in roots - set(edges):
        edges[r] = set()
    cycle = _find_cycle(edges)
    if cycle:
        return Reject(tuple(cycle))
    return Accept()
