"""Model checking of core formulas on explicit LTSs.

`check_naive` is the reference: direct Knaster-Tarski iteration over state
sets.  The production path builds a boolean equation system (one variable
per reachable subformula/state pair) and solves it strongly connected
component by component.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field
from typing import Optional, Union

from .data import SurgeError
from .mucalc import (
    C_FALSE, C_TRUE, Core, Formula, core_binders, core_nodes, match_label,
    parse_formula, to_core,
)

DEFAULT_EQUATION_CAP = 10 ** 8


class CapacityExceeded(SurgeError):
    pass


class NotSafetyFragment(SurgeError):
    pass


class _Matcher:
    """Memoised pattern/label matching for one LTS."""

    def __init__(self, lts):
        self.lts = lts
        self.memo = {}

    def succ(self, pattern, s: int) -> list:
        out = []
        labels = self.lts.labels
        memo = self.memo
        for a, t in self.lts.out[s]:
            key = (pattern, a)
            hit = memo.get(key)
            if hit is None:
                hit = memo[key] = match_label(pattern, labels[a])
            if hit:
                out.append((a, t))
        return out


# ---------------------------------------------------------------------------
# reference evaluator

def check_naive(lts, f: Core, record: Optional[dict] = None) -> frozenset:
    """Denotation of `f`: the set of states where it holds.

    With `record` given, the last denotation computed for every node is
    stored there under the node's id.
    """
    m = _Matcher(lts)
    everything = frozenset(range(lts.num_states))

    def ev(n: Core, env: dict) -> frozenset:
        k = n.kind
        if k == "true":
            r = everything
        elif k == "false":
            r = frozenset()
        elif k == "var":
            r = env[id(n.binder)]
        elif k == "and":
            r = everything
            for c in n.children:
                r = r & ev(c, env)
        elif k == "or":
            r = frozenset()
            for c in n.children:
                r = r | ev(c, env)
        elif k == "box":
            inner = ev(n.body, env)
            r = frozenset(s for s in range(lts.num_states)
                          if all(t in inner for _, t in m.succ(n.pattern, s)))
        elif k == "dia":
            inner = ev(n.body, env)
            r = frozenset(s for s in range(lts.num_states)
                          if any(t in inner for _, t in m.succ(n.pattern, s)))
        else:
            approx = frozenset() if k == "mu" else everything
            while True:
                env[id(n)] = approx
                nxt = ev(n.body, env)
                if nxt == approx:
                    break
                approx = nxt
            del env[id(n)]
            r = approx
        if record is not None:
            record[id(n)] = r
        return r

    return ev(f, {})


# ---------------------------------------------------------------------------
# boolean equation systems

@dataclass
class Bes:
    """Equations X_i = op(operands) with op 'and' or 'or'.

    Constants are folded: an 'and' with no operands is true, an 'or' with no
    operands is false.  `block[i]` is the preorder index of the fixpoint
    binder governing variable i (-1 outside every binder) and `sign[i]` its
    kind.
    """
    ops: list = field(default_factory=list)
    operands: list = field(default_factory=list)
    sign: list = field(default_factory=list)
    block: list = field(default_factory=list)
    keys: list = field(default_factory=list)       # (node, state) per variable
    index: dict = field(default_factory=dict)      # (id(node), state) -> variable
    root: Optional[int] = None
    root_value: Optional[bool] = None              # set when the root folded to a constant

    def __len__(self):
        return len(self.ops)

    @property
    def num_blocks(self) -> int:
        return len({b for b in self.block if b >= 0})

    def lookup(self, node: Core, state: int):
        """Variable for (node, state), or the constant True/False."""
        while node.kind in ("var",):
            node = node.binder
        if node is C_TRUE or node.kind == "true":
            return True
        if node is C_FALSE or node.kind == "false":
            return False
        return self.index.get((id(node), state))


def _scopes(f: Core) -> dict:
    """Governing binder (as (preorder index, kind)) for every node."""
    order = {id(b): i for i, b in enumerate(core_binders(f))}
    scope = {}
    stack = [(f, (-1, "nu"))]
    while stack:
        n, cur = stack.pop()
        if id(n) in scope:
            continue
        if n.kind in ("mu", "nu"):
            cur = (order[id(n)], n.kind)
        scope[id(n)] = cur
        for c in n.children:
            stack.append((c, cur))
    return scope


def generate_bes(lts, f: Core, all_states: bool = False,
                 cap: int = DEFAULT_EQUATION_CAP) -> Bes:
    """Product of formula and LTS, restricted to pairs reachable from the root.

    With `all_states` every node is paired with every state, which gives
    one variable per (subterm, state) as the reference evaluator sees it.
    """
    bes = Bes()
    scope = _scopes(f)
    m = _Matcher(lts)
    pending = []

    def ref(n: Core, s: int):
        while n.kind == "var":
            n = n.binder
        if n.kind == "true":
            return True
        if n.kind == "false":
            return False
        key = (id(n), s)
        v = bes.index.get(key)
        if v is None:
            v = len(bes.ops)
            if v >= cap:
                raise CapacityExceeded(f"more than {cap} equations; use a smaller scenario")
            bes.index[key] = v
            bes.keys.append((n, s))
            bes.ops.append(None)
            bes.operands.append(None)
            b, kind = scope[id(n)]
            bes.block.append(b)
            bes.sign.append(kind)
            pending.append(v)
        return v

    def define(v):
        n, s = bes.keys[v]
        k = n.kind
        if k in ("and", "or"):
            refs = [ref(c, s) for c in n.children]
        elif k in ("box", "dia"):
            refs = [ref(n.body, t) for _, t in m.succ(n.pattern, s)]
            k = "and" if k == "box" else "or"
        else:       # mu / nu: the binder variable equals its body
            refs = [ref(n.body, s)]
            k = "and"
        absorbing = k == "or"        # a true operand decides an 'or'
        ops = []
        for r in refs:
            if r is True or r is False:
                if r is absorbing:
                    ops = None
                    break
                continue
            ops.append(r)
        if ops is None:               # decided: true for 'or', false for 'and'
            bes.ops[v] = "and" if absorbing else "or"
            bes.operands[v] = ()
        else:
            bes.ops[v] = k
            bes.operands[v] = tuple(dict.fromkeys(ops))

    if all_states:
        for n in core_nodes(f):
            if n.kind not in ("true", "false", "var"):
                for s in range(lts.num_states):
                    ref(n, s)
    root = ref(f, lts.initial)
    if root is True or root is False:
        bes.root_value = root
    else:
        bes.root = root
    while pending:
        define(pending.pop())
    return bes


# ---------------------------------------------------------------------------
# solving

def _sccs(n: int, operands: list) -> list:
    """Tarjan, iterative; components come out dependencies first."""
    index = [-1] * n
    low = [0] * n
    on = [False] * n
    stack, comps = [], []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on[root] = True
        while work:
            v, i = work[-1]
            ops = operands[v]
            if i < len(ops):
                work[-1] = (v, i + 1)
                w = ops[i]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on[w] = True
                    work.append((w, 0))
                elif on[w] and index[w] < low[v]:
                    low[v] = index[w]
                continue
            work.pop()
            if work:
                u = work[-1][0]
                if low[v] < low[u]:
                    low[u] = low[v]
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(comp)
    return comps


@dataclass
class SolveStats:
    iterations: int = 0
    components: int = 0
    mixed_components: int = 0


def solve_bes(bes: Bes, stats: Optional[SolveStats] = None) -> list:
    """Solution of every variable, as a list of booleans."""
    stats = stats if stats is not None else SolveStats()
    n = len(bes)
    value = [None] * n
    users = [[] for _ in range(n)]
    for v, ops in enumerate(bes.operands):
        for w in ops:
            users[w].append(v)
    for comp in _sccs(n, bes.operands):
        stats.components += 1
        signs = {bes.sign[v] for v in comp}
        if len(comp) == 1 and comp[0] not in bes.operands[comp[0]]:
            v = comp[0]
            vals = [value[w] for w in bes.operands[v]]
            value[v] = all(vals) if bes.ops[v] == "and" else any(vals)
            stats.iterations += 1
        elif len(signs) == 1:
            _solve_uniform(bes, comp, signs.pop() == "nu", value, users, stats)
        else:
            stats.mixed_components += 1
            _solve_nested(bes, comp, value, stats)
    return value


def _solve_uniform(bes, comp, greatest: bool, value, users, stats):
    """Counter-based propagation for a component of one fixpoint sign.

    Start every variable at the extreme value and flip it when enough
    operands have flipped: an 'and' flips (under nu) on its first false
    operand, an 'or' when all operands are false; dually under mu.
    """
    members = set(comp)
    start = greatest
    for v in comp:
        value[v] = start
    need = {}
    queue = []
    for v in comp:
        op = bes.ops[v]
        ops = bes.operands[v]
        # the 'weak' op flips on one operand, the 'strong' op needs all of them
        weak = (op == "and") if greatest else (op == "or")
        outside_flipped = sum(1 for w in ops if w not in members and value[w] is not start)
        if weak:
            need[v] = 1
        else:
            need[v] = len(ops)
        need[v] -= outside_flipped
        if need[v] <= 0 and (weak or True):
            # strong ops with no operands are already at the opposite extreme
            if weak and not ops:
                continue
            queue.append(v)
    flipped = set()
    while queue:
        v = queue.pop()
        if v in flipped:
            continue
        flipped.add(v)
        value[v] = not start
        stats.iterations += 1
        for u in users[v]:
            if u in members and u not in flipped:
                need[u] -= 1
                if need[u] <= 0:
                    queue.append(u)


def _solve_nested(bes, comp, value, stats):
    """Nested fixpoint iteration, outermost block first, inner blocks restarted."""
    by_block = {}
    for v in comp:
        by_block.setdefault(bes.block[v], []).append(v)
    order = sorted(by_block)

    def evaluate(v):
        vals = [value[w] for w in bes.operands[v]]
        return all(vals) if bes.ops[v] == "and" else any(vals)

    def solve_from(level):
        if level == len(order):
            return
        outer = by_block[order[level]]
        greatest = bes.sign[outer[0]] == "nu"
        for v in outer:
            value[v] = greatest
        while True:
            # fix the inner blocks from scratch for this approximation
            for inner_level in range(level + 1, len(order)):
                for v in by_block[order[inner_level]]:
                    value[v] = bes.sign[v] == "nu"
            solve_from(level + 1)
            changed = False
            # local Kleene step on this block (repeat until stable w.r.t. itself)
            while True:
                step = False
                for v in outer:
                    nv = evaluate(v)
                    stats.iterations += 1
                    if nv != value[v]:
                        value[v] = nv
                        step = changed = True
                if not step:
                    break
            if not changed:
                return

    solve_from(0)


# ---------------------------------------------------------------------------
# counterexamples

def in_safety_fragment(f: Core) -> bool:
    return all(n.kind in ("true", "false", "and", "box", "nu", "var") for n in core_nodes(f))


def extract_counterexample(lts, f: Core, bes: Bes, solution: list) -> list:
    """Shortest label sequence from the initial state to a violation.

    Paths are compared by length, then lexicographically by label text.
    """
    if not in_safety_fragment(f):
        raise NotSafetyFragment("counterexamples are produced for box/nu/and formulas only")

    def holds(n, s):
        r = bes.lookup(n, s)
        if r is True or r is False:
            return r
        if r is None:
            raise SurgeError("formula/state pair missing from the equation system")
        return solution[r]

    if holds(f, lts.initial):
        raise SurgeError("formula holds; there is no counterexample")
    m = _Matcher(lts)
    text = [str(l) for l in lts.labels]
    start = (id(f), lts.initial)
    nodes = {id(f): f}
    best = {start: (0, ())}
    heap = [(0, (), 0, f, lts.initial)]
    tie = 1
    while heap:
        length, names, _, n, s = heapq.heappop(heap)
        key = (id(n), s)
        if best.get(key, (length, names)) < (length, names):
            continue
        while n.kind == "var":
            n = n.binder
        if n.kind == "false":
            return [lts.labels[i] for i in _decode(names, lts, text)]
        steps = []
        if n.kind in ("and",):
            steps = [(c, s, None) for c in n.children]
        elif n.kind == "nu":
            steps = [(n.body, s, None)]
        elif n.kind == "box":
            steps = [(n.body, t, a) for a, t in m.succ(n.pattern, s)]
        for c, t, a in steps:
            if holds(c, t):
                continue
            nl = length + (a is not None)
            nn = names + ((text[a], a),) if a is not None else names
            ck = (id(c), t)
            cand = (nl, nn)
            if ck not in best or cand < best[ck]:
                best[ck] = cand
                nodes[id(c)] = c
                heapq.heappush(heap, (nl, nn, tie, c, t))
                tie += 1
    raise SurgeError("no violation reachable; inconsistent solution")


def _decode(names, lts, text):
    return [a for _, a in names]


# ---------------------------------------------------------------------------
# end-to-end

@dataclass
class VerificationResult:
    holds: bool
    counterexample: Optional[list] = None
    satisfying: Optional[frozenset] = None
    stats: dict = field(default_factory=dict)
    note: str = ""

    def trace_text(self) -> list:
        return [str(l) for l in self.counterexample or ()]


def check(lts, formula: Union[str, Formula, Core], signature=None, predicates=None,
          want_trace: bool = True, all_states: bool = False,
          cap: int = DEFAULT_EQUATION_CAP) -> VerificationResult:
    """Parse/expand as needed, build and solve the equation system."""
    t0 = time.perf_counter()
    if isinstance(formula, str):
        formula = parse_formula(formula, signature, predicates)
    if isinstance(formula, Formula):
        core = to_core(formula, signature, lts.labels)
    else:
        core = formula
    t1 = time.perf_counter()
    bes = generate_bes(lts, core, all_states=all_states, cap=cap)
    t2 = time.perf_counter()
    sstats = SolveStats()
    solution = solve_bes(bes, sstats)
    t3 = time.perf_counter()
    holds = bes.root_value if bes.root is None else solution[bes.root]
    result = VerificationResult(holds=holds)
    if all_states:
        result.satisfying = frozenset(
            s for s in range(lts.num_states)
            if _value(bes, solution, core, s))
    if not holds and want_trace:
        try:
            result.counterexample = extract_counterexample(lts, core, bes, solution)
        except NotSafetyFragment as exc:
            result.note = str(exc)
    result.stats = {
        "equations": len(bes),
        "blocks": bes.num_blocks,
        "components": sstats.components,
        "iterations": sstats.iterations,
        "formula_nodes": len(core_nodes(core)),
        "expand_seconds": round(t1 - t0, 6),
        "generate_seconds": round(t2 - t1, 6),
        "solve_seconds": round(t3 - t2, 6),
        "seconds": round(time.perf_counter() - t0, 6),
    }
    return result


def _value(bes, solution, node, s):
    r = bes.lookup(node, s)
    if r is True or r is False:
        return r
    return solution[r]


def replay(lts, trace: list) -> list:
    """States visited when following `trace` (any matching branch, BFS).

    Returns the list of state sets after each step; an empty set means the
    trace is not a path of the LTS.
    """
    want = [str(l) for l in trace]
    current = {lts.initial}
    out = [frozenset(current)]
    for name in want:
        nxt = set()
        for s in current:
            for a, t in lts.out[s]:
                if str(lts.labels[a]) == name:
                    nxt.add(t)
        current = nxt
        out.append(frozenset(current))
    return out
