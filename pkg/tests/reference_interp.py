"""Naive reference interpreter for typed models, kept apart from the engine.

Works directly on the process-term AST: a state is the continuation stack of
(term, environment) pairs plus the global store.  Silent operations (reads,
writes, conditions, calls) are resolved while computing the next visible
step, so the two interpreters may cut states at different points; compare
the resulting LTSs up to strong bisimilarity.
"""

from collections import deque

from surgecheck.data import eval_expr
from surgecheck.lts import TransitionLabel
from surgecheck.speclang import (
    Act, Call, Choice, Cond, Delta, ReadGlobal, Seq, Skip, Sum, WriteGlobal,
)


class RefModel:
    def __init__(self, tm):
        self.tm = tm
        self.consts = {n: v for n, (_, v) in tm.signature.constants.items()}
        self.gnames = list(tm.global_names)

    def env(self, local, store):
        e = dict(self.consts)
        e.update(zip(self.gnames, store))
        e.update(local)
        return e

    def steps(self, t, local, store, k):
        """List of (label, continuation, store) for term t followed by k."""
        if isinstance(t, Act):
            env = self.env(local, store)
            label = TransitionLabel(t.name, tuple(eval_expr(a, env) for a in t.args))
            return [(label, k, store)]
        if isinstance(t, Skip):
            return [(TransitionLabel("skip"), k, store)]
        if isinstance(t, Delta):
            return []
        if isinstance(t, Seq):
            return self.steps(t.left, local, store, ((t.right, local),) + k)
        if isinstance(t, Choice):
            return self.steps(t.left, local, store, k) + self.steps(t.right, local, store, k)
        if isinstance(t, Cond):
            if eval_expr(t.guard, self.env(local, store)):
                return self.steps(t.then, local, store, k)
            if t.orelse is not None:
                return self.steps(t.orelse, local, store, k)
            return []
        if isinstance(t, Call):
            proc = self.tm.procs[t.name]
            env = self.env(local, store)
            new = {p: eval_expr(a, env) for (p, _), a in zip(proc.params, t.args)}
            return self.steps(proc.body, new, store, k)
        if isinstance(t, Sum):
            out = []
            for v in t.sort.values():
                out += self.steps(t.body, {**local, t.var: v}, store, k)
            return out
        if isinstance(t, ReadGlobal):
            v = store[self.gnames.index(t.var)]
            return self.steps(t.body, {**local, t.bound: v}, store, k)
        if isinstance(t, WriteGlobal):
            i = self.gnames.index(t.var)
            v = eval_expr(t.value, self.env(local, store))
            store = store[:i] + (v,) + store[i + 1:]
            if not k:
                return []
            (t2, l2), rest = k[0], k[1:]
            return self.steps(t2, l2, store, rest)
        raise TypeError(t)

    def successors(self, state):
        k, store = state
        if not k:
            return []
        (t, local), rest = k[0], k[1:]
        out = []
        for label, k2, st in self.steps(t, dict(local), store, rest):
            out.append((label, (self._freeze(k2), st)))
        return out

    @staticmethod
    def _freeze(k):
        return tuple((t, tuple(sorted(l.items())) if isinstance(l, dict) else l) for t, l in k)

    def initial(self):
        return (((self.tm.init, ()),), tuple(self.tm.global_init))


def ref_explore(tm, max_states=10_000):
    """(initial, states, transitions) with transitions as (src, label, dst)."""
    m = RefModel(tm)
    init = m.initial()
    index = {init: 0}
    queue = deque([init])
    trans = []
    while queue:
        s = queue.popleft()
        for label, t in m.successors(s):
            if t not in index:
                if len(index) >= max_states:
                    raise RuntimeError("reference exploration too large")
                index[t] = len(index)
                queue.append(t)
            trans.append((index[s], label, index[t]))
    return 0, len(index), trans


def bisimilar(a, b) -> bool:
    """Strong bisimilarity of the initial states of two (init, n, transitions) triples."""
    (ia, na, ta), (ib, nb, tb) = a, b
    n = na + nb
    succ = [[] for _ in range(n)]
    for s, l, t in ta:
        succ[s].append((str(l), t))
    for s, l, t in tb:
        succ[na + s].append((str(l), na + t))
    block = [0] * n
    count = 1
    while True:
        sigs = {}
        new = []
        for s in range(n):
            sig = (block[s], frozenset((l, block[t]) for l, t in succ[s]))
            new.append(sigs.setdefault(sig, len(sigs)))
        if len(sigs) == count:
            return new[ia] == new[na + ib]
        block, count = new, len(sigs)
