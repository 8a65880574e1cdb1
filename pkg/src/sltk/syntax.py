"""Source language: syntax trees, parser, printer, desugaring, canonical forms.

Concrete syntax is s-expressions, one declaration per top-level form:

    (input a b)
    (output o)
    (def (A x) (seq (emit x) (call A x)))
    (run (call A a))

Threads use the core keywords seq, emit, new, thread, await, watch, call and
pause, plus the derived forms loop, now, present and par which the parser
expands into the core constructors. Comments run from ; to end of line.

Names starting with % are reserved for generated signals (%gN from the fresh
counter). Sequential composition associates to the right; the smart
constructor seq_of maintains that invariant everywhere trees are rebuilt.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import _canon
from .errors import (
    ArityMismatchError,
    ParseError,
    UnboundIdentifierError,
    UndeclaredSignalError,
)

GENERATED_PREFIX = "%g"


class Thread:
    """Base class for source thread expressions."""

    __slots__ = ()


@dataclass(frozen=True)
class Nil(Thread):
    def __repr__(self):
        return "Nil()"


@dataclass(frozen=True)
class Seq(Thread):
    """T1;T2. Invariant: first is never itself a Seq (right association)."""

    first: Thread
    rest: Thread


@dataclass(frozen=True)
class Emit(Thread):
    signal: str


@dataclass(frozen=True)
class New(Thread):
    """Signal generation: nu s T."""

    bound: str
    body: Thread


@dataclass(frozen=True)
class Spawn(Thread):
    """thread T: run T as a separate thread of the program."""

    body: Thread


@dataclass(frozen=True)
class Await(Thread):
    signal: str


@dataclass(frozen=True)
class Watch(Thread):
    """watch s T: abort the residual of T if s is present at instant end."""

    signal: str
    body: Thread


@dataclass(frozen=True)
class Call(Thread):
    ident: str
    args: tuple[str, ...] = ()


@dataclass(frozen=True)
class Pause(Thread):
    pass


NIL = Nil()
PAUSE = Pause()


def seq_of(first, rest):
    """Sequential composition keeping the right-association invariant."""
    while isinstance(first, Seq):
        rest = Seq(first.rest, rest) if not isinstance(first.rest, Seq) \
            else seq_of(first.rest, rest)
        first = first.first
    return Seq(first, rest)


def seq_all(threads):
    """Right-nested sequence of a non-empty list of threads."""
    acc = threads[-1]
    for t in reversed(threads[:-1]):
        acc = seq_of(t, acc)
    return acc


def free_signals(t):
    if isinstance(t, (Nil, Pause)):
        return frozenset()
    if isinstance(t, (Emit, Await)):
        return frozenset((t.signal,))
    if isinstance(t, Seq):
        return free_signals(t.first) | free_signals(t.rest)
    if isinstance(t, New):
        return free_signals(t.body) - {t.bound}
    if isinstance(t, Spawn):
        return free_signals(t.body)
    if isinstance(t, Watch):
        return free_signals(t.body) | {t.signal}
    if isinstance(t, Call):
        return frozenset(t.args)
    raise TypeError(f"not a thread: {t!r}")


def signal_occurrences(t):
    """Yield every signal name in t, bound or free, in pre-order."""
    if isinstance(t, (Nil, Pause)):
        return
    elif isinstance(t, (Emit, Await)):
        yield t.signal
    elif isinstance(t, Seq):
        yield from signal_occurrences(t.first)
        yield from signal_occurrences(t.rest)
    elif isinstance(t, New):
        yield t.bound
        yield from signal_occurrences(t.body)
    elif isinstance(t, Spawn):
        yield from signal_occurrences(t.body)
    elif isinstance(t, Watch):
        yield t.signal
        yield from signal_occurrences(t.body)
    elif isinstance(t, Call):
        yield from t.args
    else:
        raise TypeError(f"not a thread: {t!r}")


def rename_all(t, m):
    """Apply a name map to every occurrence, bound and free alike."""
    if not m or isinstance(t, (Nil, Pause)):
        return t
    if isinstance(t, Emit):
        return Emit(m.get(t.signal, t.signal))
    if isinstance(t, Await):
        return Await(m.get(t.signal, t.signal))
    if isinstance(t, Seq):
        return Seq(rename_all(t.first, m), rename_all(t.rest, m))
    if isinstance(t, New):
        return New(m.get(t.bound, t.bound), rename_all(t.body, m))
    if isinstance(t, Spawn):
        return Spawn(rename_all(t.body, m))
    if isinstance(t, Watch):
        return Watch(m.get(t.signal, t.signal), rename_all(t.body, m))
    if isinstance(t, Call):
        return Call(t.ident, tuple(m.get(a, a) for a in t.args))
    raise TypeError(f"not a thread: {t!r}")


def _pick_fresh(avoid):
    k = 0
    while f"%r{k}" in avoid:
        k += 1
    return f"%r{k}"


def substitute(t, sub):
    """Capture-avoiding substitution of signal names for free signal names."""
    if not sub or isinstance(t, (Nil, Pause)):
        return t
    if isinstance(t, Emit):
        return Emit(sub.get(t.signal, t.signal))
    if isinstance(t, Await):
        return Await(sub.get(t.signal, t.signal))
    if isinstance(t, Seq):
        return Seq(substitute(t.first, sub), substitute(t.rest, sub))
    if isinstance(t, Spawn):
        return Spawn(substitute(t.body, sub))
    if isinstance(t, Watch):
        return Watch(sub.get(t.signal, t.signal), substitute(t.body, sub))
    if isinstance(t, Call):
        return Call(t.ident, tuple(sub.get(a, a) for a in t.args))
    if isinstance(t, New):
        inner = {k: v for k, v in sub.items() if k != t.bound}
        relevant = {k: v for k, v in inner.items() if k in free_signals(t.body)}
        if not relevant:
            return t
        if t.bound in relevant.values():
            avoid = set(relevant.values()) | free_signals(t.body) | set(relevant)
            fresh = _pick_fresh(avoid)
            return New(fresh, substitute(t.body, {**relevant, t.bound: fresh}))
        return New(t.bound, substitute(t.body, relevant))
    raise TypeError(f"not a thread: {t!r}")


def freshen_apart(t, supply):
    """Rename every binder to a fresh name from the supply."""
    if isinstance(t, (Nil, Pause, Emit, Await, Call)):
        return t
    if isinstance(t, Seq):
        return Seq(freshen_apart(t.first, supply), freshen_apart(t.rest, supply))
    if isinstance(t, Spawn):
        return Spawn(freshen_apart(t.body, supply))
    if isinstance(t, Watch):
        return Watch(t.signal, freshen_apart(t.body, supply))
    if isinstance(t, New):
        fresh = next(supply)
        body = substitute(t.body, {t.bound: fresh})
        return New(fresh, freshen_apart(body, supply))
    raise TypeError(f"not a thread: {t!r}")


# ---------------------------------------------------------------------------
# printing


def print_thread(t):
    if isinstance(t, Nil):
        return "0"
    if isinstance(t, Pause):
        return "pause"
    if isinstance(t, Emit):
        return f"(emit {t.signal})"
    if isinstance(t, Await):
        return f"(await {t.signal})"
    if isinstance(t, Seq):
        parts = []
        cur = t
        while isinstance(cur, Seq):
            parts.append(print_thread(cur.first))
            cur = cur.rest
        parts.append(print_thread(cur))
        return "(seq " + " ".join(parts) + ")"
    if isinstance(t, New):
        names = []
        cur = t
        while isinstance(cur, New):
            names.append(cur.bound)
            cur = cur.body
        return "(new " + " ".join(names) + " " + print_thread(cur) + ")"
    if isinstance(t, Spawn):
        return f"(thread {print_thread(t.body)})"
    if isinstance(t, Watch):
        return f"(watch {t.signal} {print_thread(t.body)})"
    if isinstance(t, Call):
        if t.args:
            return "(call " + " ".join((t.ident,) + t.args) + ")"
        return f"(call {t.ident})"
    raise TypeError(f"not a thread: {t!r}")


@dataclass
class Definition:
    """A recursive thread definition A(params) = body.

    Invariant: free signals of body are contained in params.
    """

    name: str
    params: tuple[str, ...]
    body: Thread


@dataclass
class Program:
    """A source program: interface, definitions and initial thread multiset."""

    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    defs: dict[str, Definition]
    initial: tuple[Thread, ...]

    @property
    def interface(self):
        return frozenset(self.inputs) | frozenset(self.outputs)

    def all_threads(self):
        for d in self.defs.values():
            yield d.body
        yield from self.initial


def print_program(p):
    lines = ["(input " + " ".join(p.inputs) + ")" if p.inputs else "(input)"]
    lines.append("(output " + " ".join(p.outputs) + ")" if p.outputs else "(output)")
    for d in p.defs.values():
        head = " ".join((d.name,) + d.params)
        lines.append(f"(def ({head}) {print_thread(d.body)})")
    for t in p.initial:
        lines.append(f"(run {print_thread(t)})")
    return "\n".join(lines) + "\n"


def next_gen_index(p):
    """First %g index not used anywhere in the program."""
    best = 0
    names = set()
    for t in p.all_threads():
        names.update(signal_occurrences(t))
    for name in names:
        if name.startswith(GENERATED_PREFIX):
            tail = name[len(GENERATED_PREFIX):]
            if tail.isdigit():
                best = max(best, int(tail) + 1)
    return best


# ---------------------------------------------------------------------------
# canonical forms


class _ThreadOps:
    occurrences = staticmethod(signal_occurrences)
    rename = staticmethod(rename_all)
    freshen = staticmethod(freshen_apart)
    show = staticmethod(print_thread)


def canonicalize(threads, interface):
    """Canonical form of a thread multiset: generated and local names become
    %g0, %g1, ... while interface names stay fixed. Two multisets get equal
    canonical forms exactly when one is a renaming of the other."""
    result, _ = _canon.canonical_multiset(threads, interface, _ThreadOps)
    return result


def canonicalize_with_renaming(threads, interface):
    return _canon.canonical_multiset(threads, interface, _ThreadOps)


# ---------------------------------------------------------------------------
# desugaring of the derived instructions


def expand_now(body, gensym):
    """now T = nu s (emit s);(watch s T) with s fresh."""
    s = gensym()
    return New(s, seq_of(Emit(s), Watch(s, body)))


def expand_pause_table1(gensym):
    """pause = nu s (now (await s))."""
    s = gensym()
    return New(s, expand_now(Await(s), gensym))


def expand_present(signal, then_branch, else_branch, gensym, pause):
    """present s T1 T2 as two racing watcher threads and a completion await.

    The then watcher runs T1 within the instant s arrives; the else watcher
    survives the instant only if s stays absent and runs T2 in the next one.
    Both signal completion on a fresh signal the main thread awaits.
    """
    done = gensym()
    then_watcher = expand_now(
        seq_of(Await(signal), Spawn(seq_of(then_branch, Emit(done)))), gensym)
    else_watcher = Watch(
        signal, seq_of(pause(), Spawn(seq_of(else_branch, Emit(done)))))
    return New(done, seq_all([
        Spawn(then_watcher), Spawn(else_watcher), Await(done)]))


def expand_par(left, right, gensym, pause, define_loop):
    """T1 || T2: run both under watch guards and join on their termination."""
    t1done = gensym()
    t2done = gensym()
    kill1 = gensym()
    kill2 = gensym()
    beacon1 = define_loop(seq_of(Emit(t1done), pause()))
    beacon2 = define_loop(seq_of(Emit(t2done), pause()))
    body = seq_all([
        Spawn(Watch(kill1, seq_of(left, beacon1))),
        Spawn(Watch(kill2, seq_of(right, beacon2))),
        Await(t1done), Emit(kill1), Await(t2done), Emit(kill2)])
    return New(t1done, New(t2done, New(kill1, New(kill2, body))))


# ---------------------------------------------------------------------------
# tokenizer and reader


KEYWORDS = {"seq", "emit", "new", "thread", "await", "watch", "call", "pause",
            "loop", "now", "present", "par", "0"}
DECL_KEYWORDS = {"input", "output", "def", "run"}


@dataclass
class SAtom:
    value: str
    line: int
    col: int


@dataclass
class SList:
    items: list
    line: int
    col: int


def _tokenize(text):
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
        elif c in " \t\r":
            col += 1
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c in "()":
            yield (c, c, line, col)
            col += 1
            i += 1
        else:
            start = i
            start_col = col
            while i < n and text[i] not in " \t\r\n();":
                i += 1
                col += 1
            yield ("atom", text[start:i], line, start_col)


def _read_forms(text):
    forms = []
    stack = []
    for kind, value, line, col in _tokenize(text):
        if kind == "(":
            stack.append(SList([], line, col))
        elif kind == ")":
            if not stack:
                raise ParseError("unmatched )", line, col)
            done = stack.pop()
            (stack[-1].items if stack else forms).append(done)
        else:
            node = SAtom(value, line, col)
            (stack[-1].items if stack else forms).append(node)
    if stack:
        raise ParseError("unclosed (", stack[-1].line, stack[-1].col)
    return forms


def _atom(form, what):
    if not isinstance(form, SAtom):
        raise ParseError(f"expected {what}", form.line, form.col)
    return form.value


def _check_name(name, form, what="signal"):
    if name in KEYWORDS or name in DECL_KEYWORDS:
        raise ParseError(f"keyword used as {what}: {name}", form.line, form.col)
    return name


# ---------------------------------------------------------------------------
# parser


class _ProgramBuilder:
    def __init__(self, pause_mode):
        self.defs = {}
        self.reserved_names = set()
        self.gen_counter = 0
        self.pause_mode = pause_mode

    def gensym(self):
        name = f"{GENERATED_PREFIX}{self.gen_counter}"
        self.gen_counter += 1
        return name

    def pause(self):
        if self.pause_mode == "table1":
            return expand_pause_table1(self.gensym)
        return PAUSE

    def fresh_def_name(self, base):
        k = 0
        while f"{base}{k}" in self.reserved_names or f"{base}{k}" in self.defs:
            k += 1
        name = f"{base}{k}"
        self.reserved_names.add(name)
        return name

    def define_loop(self, body):
        params = tuple(sorted(free_signals(body)))
        name = self.fresh_def_name("L")
        self.defs[name] = Definition(name, params, None)
        self.defs[name].body = seq_of(body, Call(name, params))
        return Call(name, params)


def _parse_thread(form, builder, scope, def_arities):
    if isinstance(form, SAtom):
        if form.value == "0":
            return NIL
        if form.value == "pause":
            return builder.pause()
        raise ParseError(f"unknown thread: {form.value}", form.line, form.col)
    if not form.items:
        raise ParseError("empty form", form.line, form.col)
    head = _atom(form.items[0], "keyword")
    args = form.items[1:]

    def sub(f, extra=frozenset()):
        return _parse_thread(f, builder, scope | extra, def_arities)

    def signal(f):
        name = _check_name(_atom(f, "signal"), f)
        if name not in scope:
            raise UndeclaredSignalError(
                f"{f.line}:{f.col}: signal {name} is not declared or bound")
        return name

    if head == "seq":
        if len(args) < 2:
            raise ParseError("seq needs at least two threads", form.line, form.col)
        return seq_all([sub(f) for f in args])
    if head == "emit":
        if len(args) != 1:
            raise ParseError("emit takes one signal", form.line, form.col)
        return Emit(signal(args[0]))
    if head == "await":
        if len(args) != 1:
            raise ParseError("await takes one signal", form.line, form.col)
        return Await(signal(args[0]))
    if head == "new":
        if len(args) < 2:
            raise ParseError("new takes signals and a body", form.line, form.col)
        names = [_check_name(_atom(f, "signal"), f) for f in args[:-1]]
        body = sub(args[-1], frozenset(names))
        for name in reversed(names):
            body = New(name, body)
        return body
    if head == "thread":
        if not args:
            raise ParseError("thread takes at least one body", form.line, form.col)
        spawns = [Spawn(sub(f)) for f in args]
        return seq_all(spawns) if len(spawns) > 1 else spawns[0]
    if head == "watch":
        if len(args) != 2:
            raise ParseError("watch takes a signal and a body", form.line, form.col)
        return Watch(signal(args[0]), sub(args[1]))
    if head == "call":
        if not args:
            raise ParseError("call needs an identifier", form.line, form.col)
        ident = _check_name(_atom(args[0], "identifier"), args[0], "identifier")
        if ident not in def_arities:
            raise UnboundIdentifierError(
                f"{args[0].line}:{args[0].col}: no definition for {ident}")
        actuals = tuple(signal(f) for f in args[1:])
        if len(actuals) != def_arities[ident]:
            raise ArityMismatchError(
                f"{args[0].line}:{args[0].col}: {ident} takes "
                f"{def_arities[ident]} signals, got {len(actuals)}")
        return Call(ident, actuals)
    if head == "loop":
        if len(args) != 1:
            raise ParseError("loop takes one body", form.line, form.col)
        return builder.define_loop(sub(args[0]))
    if head == "now":
        if len(args) != 1:
            raise ParseError("now takes one body", form.line, form.col)
        return expand_now(sub(args[0]), builder.gensym)
    if head == "present":
        if len(args) != 3:
            raise ParseError("present takes a signal and two branches",
                             form.line, form.col)
        return expand_present(signal(args[0]), sub(args[1]), sub(args[2]),
                              builder.gensym, builder.pause)
    if head == "par":
        if len(args) != 2:
            raise ParseError("par takes two threads", form.line, form.col)
        return expand_par(sub(args[0]), sub(args[1]), builder.gensym,
                          builder.pause, builder.define_loop)
    raise ParseError(f"unknown thread form: {head}", form.line, form.col)


def parse_program(text, pause_mode="primitive"):
    """Parse and desugar a source program.

    pause_mode selects the meaning of the pause keyword: "primitive" keeps it
    as a core constructor, "table1" expands the derived form.
    """
    if pause_mode not in ("primitive", "table1"):
        raise ValueError(f"unknown pause mode: {pause_mode}")
    forms = _read_forms(text)
    inputs, outputs = [], []
    raw_defs = []
    raw_runs = []
    for form in forms:
        if not isinstance(form, SList) or not form.items:
            raise ParseError("expected a declaration", form.line, form.col)
        head = _atom(form.items[0], "declaration keyword")
        if head == "input" or head == "output":
            target = inputs if head == "input" else outputs
            for f in form.items[1:]:
                target.append(_check_name(_atom(f, "signal"), f))
        elif head == "def":
            if len(form.items) != 3 or not isinstance(form.items[1], SList) \
                    or not form.items[1].items:
                raise ParseError("def takes (name params...) and a body",
                                 form.line, form.col)
            sig = form.items[1]
            name = _check_name(_atom(sig.items[0], "identifier"), sig.items[0],
                               "identifier")
            params = tuple(_check_name(_atom(f, "signal"), f)
                           for f in sig.items[1:])
            if len(set(params)) != len(params):
                raise ParseError(f"duplicate parameter in {name}",
                                 sig.line, sig.col)
            raw_defs.append((name, params, form.items[2], form))
        elif head == "run":
            if len(form.items) != 2:
                raise ParseError("run takes one thread", form.line, form.col)
            raw_runs.append(form.items[1])
        else:
            raise ParseError(f"unknown declaration: {head}", form.line, form.col)

    decl = inputs + outputs
    if len(set(decl)) != len(decl):
        raise ParseError("duplicate interface signal", 1, 1)
    if not raw_runs:
        raise ParseError("program has no (run ...) declaration", 1, 1)

    builder = _ProgramBuilder(pause_mode)
    builder.reserved_names = {name for name, _, _, _ in raw_defs}
    if len(builder.reserved_names) != len(raw_defs):
        raise ParseError("duplicate definition", 1, 1)
    arities = {name: len(params) for name, params, _, _ in raw_defs}

    def all_arities():
        d = dict(arities)
        d.update({n: len(dd.params) for n, dd in builder.defs.items()})
        return d

    parsed_defs = {}
    for name, params, body_form, form in raw_defs:
        body = _parse_thread(body_form, builder, frozenset(params), all_arities())
        parsed_defs[name] = Definition(name, params, body)
    interface = frozenset(decl)
    initial = tuple(_parse_thread(f, builder, interface, all_arities())
                    for f in raw_runs)

    defs = dict(parsed_defs)
    defs.update(builder.defs)
    for d in defs.values():
        extra = free_signals(d.body) - set(d.params)
        if extra:
            raise UndeclaredSignalError(
                f"definition {d.name} uses undeclared signals: "
                + " ".join(sorted(extra)))
    return Program(tuple(inputs), tuple(outputs), defs, initial)
