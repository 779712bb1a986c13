"""Reference semantics and random instance generators used for cross-checking.

None of this is on the production path.  `regular_denotation` evaluates
formulas with regular modalities directly (product reachability with a
Thompson automaton) and `regular_holds` does the same lazily from one state
for fixpoint-free formulas, which scales to the full corpus.
"""

from __future__ import annotations

import random
from typing import Optional

from .lts import Lts, TransitionLabel
from .mucalc import (
    And, Box, Diamond, Exists, FFalse, Forall, FTrue, FVar, Implies, Mu, Not, Nu, Or,
    PAny, PNamed, PNot, PUnion, RAlt, RAtom, RSeq, RStar, Val, _Expander,
    _formula_guards, ground_pattern, match_label,
)
from .data import eval_expr


# ---------------------------------------------------------------------------
# automata for regular formulas

class Nfa:
    """Thompson automaton; edges carry grounded patterns or None (epsilon)."""

    def __init__(self):
        self.edges = []       # per node: list of (pattern or None, target)

    def node(self) -> int:
        self.edges.append([])
        return len(self.edges) - 1

    def closure(self, nodes) -> frozenset:
        seen = set(nodes)
        stack = list(nodes)
        while stack:
            q = stack.pop()
            for p, r in self.edges[q]:
                if p is None and r not in seen:
                    seen.add(r)
                    stack.append(r)
        return frozenset(seen)


def build_nfa(reg, env) -> tuple:
    nfa = Nfa()

    def go(r):
        if isinstance(r, RAtom):
            a, b = nfa.node(), nfa.node()
            nfa.edges[a].append((ground_pattern(r.pattern, env), b))
            return a, b
        if isinstance(r, RSeq):
            a1, b1 = go(r.left)
            a2, b2 = go(r.right)
            nfa.edges[b1].append((None, a2))
            return a1, b2
        if isinstance(r, RAlt):
            a, b = nfa.node(), nfa.node()
            for x in (r.left, r.right):
                xa, xb = go(x)
                nfa.edges[a].append((None, xa))
                nfa.edges[xb].append((None, b))
            return a, b
        a, b = nfa.node(), nfa.node()
        xa, xb = go(r.body)
        nfa.edges[a] += [(None, xa), (None, b)]
        nfa.edges[xb] += [(None, xa), (None, b)]
        return a, b

    start, accept = go(reg)
    return nfa, start, accept


def regular_reach(lts: Lts, reg, env, s: int) -> set:
    """States t such that some path s ->* t has a label word in L(reg)."""
    nfa, start, accept = build_nfa(reg, env)
    init = [(s, q) for q in nfa.closure([start])]
    seen = set(init)
    stack = list(init)
    out = set()
    while stack:
        t, q = stack.pop()
        if q == accept:
            out.add(t)
        for p, q2 in nfa.edges[q]:
            if p is None:
                continue
            for a, u in lts.out[t]:
                if match_label(p, lts.labels[a]):
                    for q3 in nfa.closure([q2]):
                        if (u, q3) not in seen:
                            seen.add((u, q3))
                            stack.append((u, q3))
    return out


# ---------------------------------------------------------------------------
# set-based reference (any formula, small LTSs)

def regular_denotation(lts: Lts, f, signature=None, env=None, fix=None) -> frozenset:
    env = env or {}
    fix = fix or {}
    everything = frozenset(range(lts.num_states))

    def go(g, env, fix):
        if isinstance(g, FTrue):
            return everything
        if isinstance(g, FFalse):
            return frozenset()
        if isinstance(g, Val):
            return everything if eval_expr(g.expr, env) else frozenset()
        if isinstance(g, FVar):
            return fix[g.name]
        if isinstance(g, And):
            return go(g.left, env, fix) & go(g.right, env, fix)
        if isinstance(g, Or):
            return go(g.left, env, fix) | go(g.right, env, fix)
        if isinstance(g, Implies):
            return (everything - go(g.left, env, fix)) | go(g.right, env, fix)
        if isinstance(g, Not):
            return everything - go(g.arg, env, fix)
        if isinstance(g, (Box, Diamond)):
            inner = go(g.body, env, fix)
            if isinstance(g, Box):
                return frozenset(s for s in everything
                                 if regular_reach(lts, g.reg, env, s) <= inner)
            return frozenset(s for s in everything
                             if regular_reach(lts, g.reg, env, s) & inner)
        if isinstance(g, (Mu, Nu)):
            approx = frozenset() if isinstance(g, Mu) else everything
            while True:
                inner = dict(fix)
                inner[g.var] = approx
                nxt = go(g.body, env, inner)
                if nxt == approx:
                    return approx
                approx = nxt
        if isinstance(g, (Forall, Exists)):
            result = everything if isinstance(g, Forall) else frozenset()
            for local in _instances(g, env, signature, lts):
                part = go(g.body, local, fix)
                result = result & part if isinstance(g, Forall) else result | part
            return result
        raise TypeError(g)

    return go(f, env, fix)


def _instances(g, env, signature, lts):
    kind = "forall" if isinstance(g, Forall) else "exists"
    ex = _Expander(signature, lts.labels, 4096)
    names = {n for n, _ in g.binders}
    guards = _formula_guards(kind, g.body)
    combos = [dict(env)]
    for name, sort in g.binders:
        combos = [dict(c, **{name: v}) for c in combos
                  for v in ex.domain(kind, name, sort, g.body, guards, names, c)]
    return combos


# ---------------------------------------------------------------------------
# lazy reference from one state (fixpoint-free formulas, large LTSs)

def regular_holds(lts: Lts, f, signature=None, state: Optional[int] = None) -> bool:
    memo = {}
    reach_memo = {}

    def env_key(env):
        return tuple(sorted((k, repr(v)) for k, v in env.items()))

    def reach(reg, env, s):
        key = (id(reg), env_key(env), s)
        r = reach_memo.get(key)
        if r is None:
            r = reach_memo[key] = regular_reach(lts, reg, env, s)
        return r

    def go(g, env, s):
        key = (id(g), env_key(env), s)
        if key in memo:
            return memo[key]
        if isinstance(g, FTrue):
            r = True
        elif isinstance(g, FFalse):
            r = False
        elif isinstance(g, Val):
            r = bool(eval_expr(g.expr, env))
        elif isinstance(g, And):
            r = go(g.left, env, s) and go(g.right, env, s)
        elif isinstance(g, Or):
            r = go(g.left, env, s) or go(g.right, env, s)
        elif isinstance(g, Implies):
            r = (not go(g.left, env, s)) or go(g.right, env, s)
        elif isinstance(g, Not):
            r = not go(g.arg, env, s)
        elif isinstance(g, Box):
            r = all(go(g.body, env, t) for t in sorted(reach(g.reg, env, s)))
        elif isinstance(g, Diamond):
            r = any(go(g.body, env, t) for t in sorted(reach(g.reg, env, s)))
        elif isinstance(g, Forall):
            r = all(go(g.body, e, s) for e in _instances(g, env, signature, lts))
        elif isinstance(g, Exists):
            r = any(go(g.body, e, s) for e in _instances(g, env, signature, lts))
        else:
            raise TypeError(f"lazy reference does not support {type(g).__name__}")
        memo[key] = r
        return r

    return go(f, {}, lts.initial if state is None else state)


# ---------------------------------------------------------------------------
# random instances

ALPHABET = ("a", "b", "c")


def random_lts(rng: random.Random, max_states: int = 50, alphabet=ALPHABET,
               density: float = 1.5) -> Lts:
    n = rng.randint(1, max_states)
    labels = [TransitionLabel(a, ()) for a in alphabet]
    trans = set()
    for _ in range(int(n * density)):
        trans.add((rng.randrange(n), rng.randrange(len(labels)), rng.randrange(n)))
    return Lts(0, n, labels, sorted(trans))


def random_pattern(rng: random.Random, alphabet=ALPHABET):
    r = rng.random()
    if r < 0.15:
        return PAny()
    if r < 0.3:
        return PNot((PNamed(rng.choice(alphabet)),))
    if r < 0.4:
        a, b = rng.sample(alphabet, 2)
        return PUnion((PNamed(a), PNamed(b)))
    return PNamed(rng.choice(alphabet))


def random_formula(rng: random.Random, depth: int = 6, alphabet=ALPHABET,
                   fixvars=(), allow_fix: bool = True):
    """Closed, monotone formula with single-step modalities."""
    if depth <= 1:
        opts = [FTrue(), FFalse()] + [FVar(x) for x in fixvars]
        return rng.choice(opts)
    r = rng.random()
    sub = lambda fv=fixvars: random_formula(rng, depth - 1, alphabet, fv, allow_fix)
    if r < 0.2:
        return And(sub(), sub())
    if r < 0.4:
        return Or(sub(), sub())
    if r < 0.6:
        return Box(RAtom(random_pattern(rng, alphabet)), sub())
    if r < 0.8:
        return Diamond(RAtom(random_pattern(rng, alphabet)), sub())
    if allow_fix and len(fixvars) < 3:
        name = f"X{len(fixvars)}"
        body = random_formula(rng, depth - 1, alphabet, fixvars + (name,), allow_fix)
        return (Mu if rng.random() < 0.5 else Nu)(name, body)
    return sub()


def random_regular(rng: random.Random, depth: int = 3, alphabet=ALPHABET):
    if depth <= 1 or rng.random() < 0.3:
        return RAtom(random_pattern(rng, alphabet))
    r = rng.random()
    if r < 0.35:
        return RSeq(random_regular(rng, depth - 1, alphabet), random_regular(rng, depth - 1, alphabet))
    if r < 0.6:
        return RAlt(random_regular(rng, depth - 1, alphabet), random_regular(rng, depth - 1, alphabet))
    return RStar(random_regular(rng, depth - 1, alphabet))


def random_star_formula(rng: random.Random, depth: int = 4, alphabet=ALPHABET):
    """Fixpoint-free formula whose modalities carry regular formulas with a star."""
    if depth <= 1:
        return rng.choice([FTrue(), FFalse()])
    r = rng.random()
    if r < 0.15:
        return And(random_star_formula(rng, depth - 1, alphabet),
                   random_star_formula(rng, depth - 1, alphabet))
    if r < 0.3:
        return Or(random_star_formula(rng, depth - 1, alphabet),
                  random_star_formula(rng, depth - 1, alphabet))
    reg = random_regular(rng, 3, alphabet)
    if not any(isinstance(x, RStar) for x in _regs(reg)):
        reg = RSeq(RStar(RAtom(random_pattern(rng, alphabet))), reg)
    body = random_star_formula(rng, depth - 1, alphabet)
    return (Box if rng.random() < 0.5 else Diamond)(reg, body)


def _regs(r):
    yield r
    if isinstance(r, (RSeq, RAlt)):
        yield from _regs(r.left)
        yield from _regs(r.right)
    elif isinstance(r, RStar):
        yield from _regs(r.body)
