"""Operational semantics of typed models and explicit state-space exploration.

A state is a control stack plus the global store.  Each stack frame is a
program point (node id) together with the values of exactly the local
variables that program point can still read, so two frames that can only
behave the same way are equal.  Silent steps (guards, calls, store access)
never show up as transitions: they are resolved while computing the visible
successors and when a new state is settled.
"""

from __future__ import annotations

import os
import re
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional

from .data import (
    Binary, EvaluationError, Expr, Index, ListLit, ListSort, Lit, NatSort, Quant,
    Rat, RatSort, RangeError, SurgeError, Unary, Var, eval_expr, render_value,
)
from .speclang import (
    Act, Call, Choice, Cond, Delta, ReadGlobal, Seq, Skip, Sum, Term, TypedModel,
    WriteGlobal,
)
from .syntax import ParseError, Parser, literal_value


class TransitionLabel(NamedTuple):
    name: str
    args: tuple = ()

    def __str__(self):
        if not self.args:
            return self.name
        return f"{self.name}(" + ", ".join(render_value(a) for a in self.args) + ")"


class State(NamedTuple):
    stack: tuple     # ((node id, env values), ...) top first
    store: tuple     # one value per global declaration


class LimitExceeded(SurgeError):
    def __init__(self, message: str, partial: "Lts"):
        super().__init__(message)
        self.partial = partial


class FormatError(SurgeError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class ExploreLimits:
    max_states: Optional[int] = None
    max_transitions: Optional[int] = None
    max_depth: Optional[int] = None

    def __post_init__(self):
        for name in ("max_states", "max_transitions", "max_depth"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive")


# ---------------------------------------------------------------------------
# compilation of process terms

ACT, DELTA, SEQ, CHOICE, COND, CALL, SUM, READ, WRITE = range(9)


class Node:
    __slots__ = ("id", "kind", "free", "a", "b", "c", "d")

    def __init__(self, kind):
        self.kind = kind
        self.free = ()
        self.a = self.b = self.c = self.d = None


def _range_check(sort):
    if isinstance(sort, NatSort) and sort.bound is not None:
        return sort.contains
    if isinstance(sort, RatSort) and sort.admissible is not None:
        return sort.contains
    if isinstance(sort, ListSort):
        return sort.contains
    return None


class _Compiler:
    def __init__(self, tm: TypedModel):
        self.tm = tm
        self.nodes: list = []
        self.gindex = {n: i for i, n in enumerate(tm.global_names)}
        self.bodies: dict = {}

    def new(self, kind) -> Node:
        n = Node(kind)
        n.id = len(self.nodes)
        self.nodes.append(n)
        return n

    def run(self):
        tm = self.tm
        delta = self.new(DELTA)
        # process bodies first so calls can link to them
        for p in tm.proc_list:
            self.bodies[p.name] = None
        pending = []
        for p in tm.proc_list:
            scope = {n for n, _ in p.params}
            self.bodies[p.name] = self.term(p.body, scope, pending)
        for node, name in pending:
            node.b = self.bodies[name]
        init = self.term(tm.init, set(), pending)
        for node, name in pending:
            node.b = self.bodies[name]
        return self.nodes, init, delta

    def expr(self, e: Expr, scope: set):
        return compile_expr(e, scope, self.gindex)

    def term(self, t: Term, scope: set, pending) -> Node:
        if isinstance(t, (Act, Skip)):
            n = self.new(ACT)
            name = "skip" if isinstance(t, Skip) else t.name
            args = [] if isinstance(t, Skip) else [self.expr(a, scope) for a in t.args]
            n.a = name
            n.b = tuple(f for f, _ in args)
            n.free = _union(fv for _, fv in args)
            if not args:
                label = TransitionLabel(name)
                n.c = label
            return n
        if isinstance(t, Delta):
            return self.new(DELTA)
        if isinstance(t, Seq):
            n = self.new(SEQ)
            n.a = self.term(t.left, scope, pending)
            n.b = self.term(t.right, scope, pending)
            n.free = _union([n.a.free, n.b.free])
            return n
        if isinstance(t, Choice):
            n = self.new(CHOICE)
            kids = []
            for part in _flatten_choice(t):
                kids.append(self.term(part, scope, pending))
            n.a = tuple(kids)
            n.free = _union(k.free for k in kids)
            return n
        if isinstance(t, Cond):
            n = self.new(COND)
            g, gfv = self.expr(t.guard, scope)
            n.a = g
            n.b = self.term(t.then, scope, pending)
            n.c = None if t.orelse is None else self.term(t.orelse, scope, pending)
            n.free = _union([gfv, n.b.free, n.c.free if n.c else ()])
            n.d = t.guard
            return n
        if isinstance(t, Call):
            n = self.new(CALL)
            info = self.tm.procs[t.name]
            args = [self.expr(a, scope) for a in t.args]
            n.a = tuple((pname, f, _range_check(ps))
                        for (pname, ps), (f, _) in zip(info.params, args))
            pending.append((n, t.name))
            n.free = _union(fv for _, fv in args)
            n.c = t.name
            return n
        if isinstance(t, Sum):
            n = self.new(SUM)
            body = self.term(t.body, scope | {t.var}, pending)
            n.a = t.var
            n.b = tuple(t.sort.values())
            n.c = body
            n.free = tuple(sorted(set(body.free) - {t.var}))
            return n
        if isinstance(t, ReadGlobal):
            n = self.new(READ)
            body = self.term(t.body, scope | {t.bound}, pending)
            n.a = self.gindex[t.var]
            n.b = t.bound
            n.c = body
            n.free = tuple(sorted(set(body.free) - {t.bound}))
            return n
        if isinstance(t, WriteGlobal):
            n = self.new(WRITE)
            f, fv = self.expr(t.value, scope)
            n.a = self.gindex[t.var]
            n.b = f
            n.c = _range_check(self.tm.signature.globals[t.var])
            n.d = t.var
            n.free = fv
            return n
        raise TypeError(t)


def _flatten_choice(t):
    if isinstance(t, Choice):
        return _flatten_choice(t.left) + _flatten_choice(t.right)
    return [t]


def _union(parts) -> tuple:
    out = set()
    for p in parts:
        out.update(p)
    return tuple(sorted(out))


# -- expressions to closures -------------------------------------------------

def compile_expr(e: Expr, scope: set, gindex: dict):
    """Return (fn(loc, store) -> value, free local names)."""
    fv = set()
    fn = _cx(e, scope, gindex, fv)
    return fn, tuple(sorted(fv))


def _cx(e, scope, gindex, fv):
    if isinstance(e, Lit):
        v = e.value
        return lambda loc, st: v
    if isinstance(e, Var):
        name = e.name
        if name in scope:
            fv.add(name)
            return lambda loc, st: loc[name]
        gi = gindex[name]
        return lambda loc, st: st[gi]
    if isinstance(e, Unary):
        f = _cx(e.arg, scope, gindex, fv)
        if e.op == "!":
            return lambda loc, st: not f(loc, st)
        if e.op == "-":
            return lambda loc, st: Rat(-f(loc, st).num)
        return lambda loc, st: len(f(loc, st))
    if isinstance(e, Index):
        fs = _cx(e.seq, scope, gindex, fv)
        fi = _cx(e.index, scope, gindex, fv)

        def index(loc, st, e=e):
            seq, i = fs(loc, st), fi(loc, st)
            if i >= len(seq):
                from .data import IndexOutOfRange
                raise IndexOutOfRange(f"index {i} out of range for length {len(seq)}", e)
            return seq[i]
        return index
    if isinstance(e, ListLit):
        fs = [_cx(x, scope, gindex, fv) for x in e.items]
        return lambda loc, st: tuple(f(loc, st) for f in fs)
    if isinstance(e, Binary):
        l = _cx(e.left, scope, gindex, fv)
        r = _cx(e.right, scope, gindex, fv)
        op = e.op
        if op == "&&":
            return lambda loc, st: l(loc, st) and r(loc, st)
        if op == "||":
            return lambda loc, st: l(loc, st) or r(loc, st)
        if op == "=>":
            return lambda loc, st: (not l(loc, st)) or r(loc, st)
        if op == "==":
            return lambda loc, st: l(loc, st) == r(loc, st)
        if op == "!=":
            return lambda loc, st: l(loc, st) != r(loc, st)
        if op == "<":
            return lambda loc, st: l(loc, st) < r(loc, st)
        if op == "<=":
            return lambda loc, st: l(loc, st) <= r(loc, st)
        if op == ">":
            return lambda loc, st: l(loc, st) > r(loc, st)
        if op == ">=":
            return lambda loc, st: l(loc, st) >= r(loc, st)

        def arith(loc, st, e=e):
            a, b = l(loc, st), r(loc, st)
            if isinstance(a, Rat):
                return Rat(a.num + b.num if op == "+" else a.num - b.num)
            v = a + b if op == "+" else a - b
            if v < 0:
                raise RangeError(f"Nat result {v} is negative", e)
            return v
        return arith
    if isinstance(e, Quant):
        # rare in models: defer to the reference interpreter
        inner = set(scope) - {n for n, _ in e.binders}
        from .data import free_vars
        names = free_vars(e)
        for n in names:
            if n in inner:
                fv.add(n)
        locals_ = [n for n in names if n in inner]
        globals_ = [(n, gindex[n]) for n in names if n not in inner and n in gindex]

        def quant(loc, st, e=e):
            env = {n: loc[n] for n in locals_}
            env.update((n, st[i]) for n, i in globals_)
            return eval_expr(e, env)
        return quant
    raise TypeError(e)


# ---------------------------------------------------------------------------
# the engine

class Engine:
    """Compiled model: initial state and visible successors."""

    def __init__(self, tm: TypedModel):
        self.tm = tm
        self.nodes, self.init_node, self.delta = _Compiler(tm).run()

    # -- helpers -----------------------------------------------------------
    def _frames(self, stack):
        k = None
        nodes = self.nodes
        for nid, env in reversed(stack):
            n = nodes[nid]
            k = ((n, dict(zip(n.free, env))), k)
        return k

    def _settle(self, k, store) -> State:
        nodes_delta = self.delta
        while k is not None:
            (n, loc), rest = k
            kind = n.kind
            if kind == SEQ:
                k = ((n.a, loc), ((n.b, loc), rest))
            elif kind == COND:
                if n.a(loc, store):
                    k = ((n.b, loc), rest)
                elif n.c is not None:
                    k = ((n.c, loc), rest)
                else:
                    return State(((nodes_delta.id, ()),), store)
            elif kind == CALL:
                k = ((n.b, self._bind(n, loc, store)), rest)
            elif kind == READ:
                loc2 = dict(loc)
                loc2[n.b] = store[n.a]
                k = ((n.c, loc2), rest)
            elif kind == WRITE:
                store = self._write(n, loc, store)
                k = rest
            elif kind == DELTA:
                return State(((n.id, ()),), store)
            else:
                break
        stack = []
        while k is not None:
            (n, loc), k = k
            stack.append((n.id, tuple(loc[v] for v in n.free)))
        return State(tuple(stack), store)

    def _bind(self, n, loc, store):
        out = {}
        for pname, f, check in n.a:
            v = f(loc, store)
            if check is not None and not check(v):
                raise RangeError(f"argument {pname}={render_value(v)} of `{n.c}` "
                                 f"outside its declared sort")
            out[pname] = v
        return out

    def _write(self, n, loc, store):
        v = n.b(loc, store)
        if n.c is not None and not n.c(v):
            raise RangeError(f"value {render_value(v)} outside the sort of global `{n.d}`")
        i = n.a
        return store[:i] + (v,) + store[i + 1:]

    def _steps(self, n, loc, store, k, out):
        kind = n.kind
        if kind == ACT:
            label = n.c
            if label is None:
                label = TransitionLabel(n.a, tuple(f(loc, store) for f in n.b))
            out.append((label, k, store))
        elif kind == SEQ:
            self._steps(n.a, loc, store, ((n.b, loc), k), out)
        elif kind == CHOICE:
            for c in n.a:
                self._steps(c, loc, store, k, out)
        elif kind == COND:
            if n.a(loc, store):
                self._steps(n.b, loc, store, k, out)
            elif n.c is not None:
                self._steps(n.c, loc, store, k, out)
        elif kind == CALL:
            self._steps(n.b, self._bind(n, loc, store), store, k, out)
        elif kind == SUM:
            var, body = n.a, n.c
            for v in n.b:
                loc2 = dict(loc)
                loc2[var] = v
                self._steps(body, loc2, store, k, out)
        elif kind == READ:
            loc2 = dict(loc)
            loc2[n.b] = store[n.a]
            self._steps(n.c, loc2, store, k, out)
        elif kind == WRITE:
            store = self._write(n, loc, store)
            if k is not None:
                (n2, loc2), rest = k
                self._steps(n2, loc2, store, rest, out)

    # -- public ----------------------------------------------------------------
    def initial_state(self) -> State:
        return self._settle(((self.init_node, {}), None), tuple(self.tm.global_init))

    def successors(self, s: State) -> list:
        k = self._frames(s.stack)
        if k is None:
            return []
        (n, loc), rest = k
        raw = []
        try:
            self._steps(n, loc, s.store, rest, raw)
            return [(label, self._settle(k2, st)) for label, k2, st in raw]
        except EvaluationError as exc:
            # keep the specific error class, add the state for diagnosis
            raise type(exc)(f"{exc} (while expanding state {self.describe(s)})") from exc

    def describe(self, s: State) -> str:
        g = ", ".join(f"{n}={render_value(v)}" for n, v in zip(self.tm.global_names, s.store))
        frames = "; ".join(f"#{nid}{list(map(render_value, env))}" for nid, env in s.stack)
        return f"<{frames} | {g}>"


def initial_state(tm: TypedModel) -> State:
    return Engine(tm).initial_state()


def successors(tm: TypedModel, s: State, engine: Optional[Engine] = None) -> list:
    return (engine or Engine(tm)).successors(s)


# ---------------------------------------------------------------------------
# explicit LTS

class Lts:
    def __init__(self, initial: int, num_states: int, labels: list, transitions: list,
                 states: Optional[list] = None, complete: bool = True):
        self.initial = initial
        self.num_states = num_states
        self.labels = labels              # index -> TransitionLabel
        self.transitions = transitions    # (src, label index, dst)
        self.states = states
        self.complete = complete
        self._out = None

    @property
    def out(self) -> list:
        """Per state: list of (label index, target) in transition order."""
        if self._out is None:
            out = [[] for _ in range(self.num_states)]
            for s, a, t in self.transitions:
                out[s].append((a, t))
            self._out = out
        return self._out

    @property
    def deadlocks(self) -> list:
        return [s for s, succ in enumerate(self.out) if not succ]

    @property
    def num_transitions(self) -> int:
        return len(self.transitions)

    def label_text(self, idx: int) -> str:
        return str(self.labels[idx])

    def __repr__(self):
        return (f"Lts(states={self.num_states}, transitions={len(self.transitions)}, "
                f"initial={self.initial})")


def _default_workers() -> int:
    return os.cpu_count() or 1


def explore(tm: TypedModel, limits: ExploreLimits = ExploreLimits(), workers: int = 1,
            engine: Optional[Engine] = None) -> Lts:
    """Breadth-first reachability.  State numbering is BFS discovery order.

    Workers expand one BFS level concurrently; results are merged in frontier
    order, so numbering does not depend on the worker count.
    """
    eng = engine or Engine(tm)
    init = eng.initial_state()
    index = {init: 0}
    states = [init]
    label_index: dict = {}
    labels: list = []
    transitions: list = []
    frontier = [0]
    depth = 0
    pool = ThreadPoolExecutor(workers) if workers > 1 else None
    reason = None
    try:
        while frontier:
            if limits.max_depth is not None and depth >= limits.max_depth:
                reason = f"depth limit {limits.max_depth} reached"
                break
            batch = [states[i] for i in frontier]
            if pool is not None:
                chunk = max(1, len(batch) // (workers * 4))
                results = pool.map(eng.successors, batch, chunksize=chunk)
            else:
                results = map(eng.successors, batch)
            nxt = []
            for src, succ in zip(frontier, results):
                for label, t in succ:
                    li = label_index.get(label)
                    if li is None:
                        li = label_index[label] = len(labels)
                        labels.append(label)
                    ti = index.get(t)
                    if ti is None:
                        if limits.max_states is not None and len(states) >= limits.max_states:
                            reason = f"state limit {limits.max_states} reached"
                            break
                        ti = index[t] = len(states)
                        states.append(t)
                        nxt.append(ti)
                    transitions.append((src, li, ti))
                    if limits.max_transitions is not None and \
                            len(transitions) >= limits.max_transitions and reason is None:
                        reason = f"transition limit {limits.max_transitions} reached"
                if reason:
                    break
            if reason:
                break
            frontier = nxt
            depth += 1
    finally:
        if pool is not None:
            pool.shutdown()
    lts = Lts(0, len(states), labels, transitions, states, complete=reason is None)
    if reason:
        raise LimitExceeded(f"exploration stopped: {reason}", lts)
    return canonical_renumber(lts)


def canonical_renumber(lts: Lts) -> Lts:
    """Renumber states in BFS order from the initial state (transition order)."""
    order = [lts.initial]
    pos = {lts.initial: 0}
    q = deque([lts.initial])
    out = lts.out
    while q:
        s = q.popleft()
        for _, t in out[s]:
            if t not in pos:
                pos[t] = len(order)
                order.append(t)
                q.append(t)
    for s in range(lts.num_states):
        if s not in pos:
            pos[s] = len(order)
            order.append(s)
    if all(pos[s] == s for s in range(lts.num_states)):
        return lts
    transitions = []
    for s in order:
        for a, t in out[s]:
            transitions.append((pos[s], a, pos[t]))
    states = [lts.states[s] for s in order] if lts.states is not None else None
    return Lts(0, lts.num_states, lts.labels, transitions, states, lts.complete)


# ---------------------------------------------------------------------------
# text format

def export_lts(lts: Lts) -> str:
    lines = [f"lts {lts.initial} {len(lts.transitions)} {lts.num_states}"]
    rendered = [str(l) for l in lts.labels]
    for s, a, t in lts.transitions:
        lines.append(f'{s} "{rendered[a]}" {t}')
    return "\n".join(lines) + "\n"


_HEADER = re.compile(r"^lts\s+(\d+)\s+(\d+)\s+(\d+)\s*$")
_LINE = re.compile(r'^(\d+)\s+"([^"]*)"\s+(\d+)\s*$')


def parse_label(text: str, constructors=None) -> TransitionLabel:
    p = Parser(text)
    name = p.ident("action name")
    args = ()
    if p.accept("("):
        args = tuple(literal_value(e, constructors) for e in p.expr_list(")"))
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.describe(p.tok)}", ["end of label"])
    return TransitionLabel(name, args)


def import_lts(text: str, constructors=None) -> Lts:
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise FormatError("empty input", 1)
    m = _HEADER.match(lines[0])
    if not m:
        raise FormatError("expected header `lts <initial> <#transitions> <#states>`", 1)
    initial, ntrans, nstates = map(int, m.groups())
    if nstates == 0 or initial >= nstates:
        raise FormatError("initial state out of range", 1)
    body = lines[1:]
    if len(body) != ntrans:
        raise FormatError(f"header announces {ntrans} transitions, found {len(body)}",
                          len(lines))
    label_index, labels, transitions = {}, [], []
    for lineno, line in enumerate(body, start=2):
        m = _LINE.match(line)
        if not m:
            raise FormatError("expected `<src> \"<label>\" <dst>`", lineno)
        s, text_label, t = int(m.group(1)), m.group(2), int(m.group(3))
        if s >= nstates or t >= nstates:
            raise FormatError(f"state index out of range (#states = {nstates})", lineno)
        try:
            label = parse_label(text_label, constructors)
        except ParseError as exc:
            raise FormatError(f"bad label: {exc.bare}", lineno) from None
        li = label_index.get(label)
        if li is None:
            li = label_index[label] = len(labels)
            labels.append(label)
        transitions.append((s, li, t))
    return Lts(initial, nstates, labels, transitions)
