"""Modal mu-calculus with regular action formulas and data quantifiers.

Three layers live here:

* the surface AST produced by `parse_formula` (frozen dataclasses, compared
  structurally, printable with `render_formula`);
* `expand_regular`, which rewrites regular modalities into single-step ones
  plus fixpoints;
* `expand_quantifiers`, which grounds data and produces a `Core` graph that
  the checker consumes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Optional

from .data import (
    EXPANSION_CAP, Apply, Binary, EnumSort, EnumVal, Expr, Index, ListLit, ListSort,
    Lit, NatSort, Quant, Rat, Sort, SortRef, SortTooLarge, SurgeError, Unary,
    UnboundedQuantifier, Var, conjuncts, enumerate_sort, eval_expr, free_vars,
    nat_bound, render_binders, render_expr, render_value, substitute,
)
from .signature import ExprChecker, ModelTypeError, Signature, UnknownName, check_bool
from .syntax import ParseError, Parser


class FormulaError(SurgeError):
    pass


class NonMonotone(FormulaError):
    def __init__(self, var: str):
        super().__init__(f"fixpoint variable `{var}` occurs under a negation")
        self.var = var


class UnknownAction(FormulaError):
    pass


# ---------------------------------------------------------------------------
# action patterns

@dataclass(frozen=True)
class Wildcard(Expr):
    pos: Any = None

    def __eq__(self, other):
        return isinstance(other, Wildcard)

    def __hash__(self):
        return 17


WILD = Wildcard()


@dataclass(frozen=True)
class PAny:
    pass


@dataclass(frozen=True)
class PNamed:
    name: str
    args: Optional[tuple] = None     # None matches any argument list


@dataclass(frozen=True)
class PNot:
    items: tuple                     # of PNamed


@dataclass(frozen=True)
class PUnion:
    items: tuple                     # empty union is `false`


# ---------------------------------------------------------------------------
# regular formulas

@dataclass(frozen=True)
class RAtom:
    pattern: Any


@dataclass(frozen=True)
class RSeq:
    left: Any
    right: Any


@dataclass(frozen=True)
class RAlt:
    left: Any
    right: Any


@dataclass(frozen=True)
class RStar:
    body: Any


# ---------------------------------------------------------------------------
# state formulas

class Formula:
    pass


@dataclass(frozen=True)
class FTrue(Formula):
    pass


@dataclass(frozen=True)
class FFalse(Formula):
    pass


@dataclass(frozen=True)
class Val(Formula):
    expr: Expr


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class Box(Formula):
    reg: Any
    body: Formula


@dataclass(frozen=True)
class Diamond(Formula):
    reg: Any
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    binders: tuple       # ((name, Sort), ...)
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    binders: tuple
    body: Formula


@dataclass(frozen=True)
class Mu(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Nu(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class FVar(Formula):
    name: str


# ---------------------------------------------------------------------------
# parsing

@dataclass
class Predicate:
    name: str
    params: tuple        # ((name, Sort), ...)
    body: Expr


class FormulaParser(Parser):
    KEYWORDS = Parser.KEYWORDS | {"mu", "nu", "val", "pred"}

    def __init__(self, text: str, filename: str = "<formula>"):
        super().__init__(text, filename)
        self.fixvars: list = []

    def applies_allowed(self) -> bool:
        return True

    # -- predicate section ---------------------------------------------------
    def predicates(self) -> dict:
        out = {}
        while self.at("pred"):
            t = self.tok
            self.i += 1
            name = self.ident("predicate name")
            self.expect("(")
            params = ()
            if not self.at(")"):
                params = self.binders()
            self.expect(")")
            self.expect("=")
            body = self.expr(True)
            self.expect(";")
            if name in out:
                self.error(f"predicate `{name}` defined twice", tok=t)
            out[name] = Predicate(name, params, body)
        return out

    # -- state formulas ----------------------------------------------------
    def formula(self) -> Formula:
        if self.at("forall", "exists"):
            kind = self.tok.text
            self.i += 1
            binders = self.binders()
            self.expect(".")
            body = self.formula()
            return Forall(binders, body) if kind == "forall" else Exists(binders, body)
        if self.at("mu", "nu"):
            kind = self.tok.text
            self.i += 1
            name = self.ident("fixpoint variable")
            self.expect(".")
            self.fixvars.append(name)
            try:
                body = self.formula()
            finally:
                self.fixvars.pop()
            return Mu(name, body) if kind == "mu" else Nu(name, body)
        left = self.f_or()
        if self.accept("=>"):
            return Implies(left, self.formula())
        return left

    def f_or(self) -> Formula:
        left = self.f_and()
        while self.accept("||"):
            left = Or(left, self.f_operand(self.f_and))
        return left

    def f_and(self) -> Formula:
        left = self.f_unary()
        while self.accept("&&"):
            left = And(left, self.f_operand(self.f_unary))
        return left

    def f_operand(self, rule):
        # binders extend to the right, so they may close an operator chain
        if self.at("forall", "exists", "mu", "nu"):
            return self.formula()
        return rule()

    def f_unary(self) -> Formula:
        if self.accept("!"):
            return Not(self.f_operand(self.f_unary))
        if self.accept("["):
            r = self.regular()
            self.expect("]")
            return Box(r, self.f_operand(self.f_unary))
        if self.at("<"):
            self.i += 1
            r = self.regular()
            self.expect(">")
            return Diamond(r, self.f_operand(self.f_unary))
        return self.f_atom()

    def f_atom(self) -> Formula:
        t = self.tok
        if self.accept("true"):
            return FTrue()
        if self.accept("false"):
            return FFalse()
        if self.accept("val"):
            self.expect("(")
            e = self.expr(True)
            self.expect(")")
            return Val(e)
        if self.accept("("):
            f = self.formula()
            self.expect(")")
            return f
        if t.kind == "id" and t.text not in self.KEYWORDS:
            self.i += 1
            if t.text not in self.fixvars:
                self.error(f"`{t.text}` is not a bound fixpoint variable", tok=t)
            return FVar(t.text)
        self.error(f"unexpected {self.describe(t)}", ["formula"])

    # -- regular formulas --------------------------------------------------
    def regular(self):
        left = self.r_seq()
        while self.accept("+"):
            left = RAlt(left, self.r_seq())
        return left

    def r_seq(self):
        left = self.r_star()
        while self.accept("."):
            left = RSeq(left, self.r_star())
        return left

    def r_star(self):
        r = self.r_atom()
        while self.accept("*"):
            r = RStar(r)
        return r

    def r_atom(self):
        if self.at("("):
            # either a bracketed regular formula or a bracketed action formula;
            # the regular rule subsumes the latter
            self.i += 1
            r = self.regular()
            self.expect(")")
            if self.at("||"):
                if not isinstance(r, RAtom):
                    self.error("`||` joins action formulas only")
                return RAtom(self.a_union_tail(r.pattern))
            return r
        return RAtom(self.action_formula())

    # -- action formulas ---------------------------------------------------
    def action_formula(self):
        return self.a_union_tail(self.a_unary())

    def a_union_tail(self, first):
        items = [first]
        while self.accept("||"):
            items.append(self.a_unary())
        if len(items) == 1:
            return first
        flat = []
        for p in items:
            flat.extend(p.items if isinstance(p, PUnion) else (p,))
        return PUnion(tuple(flat))

    def a_unary(self):
        if self.accept("!"):
            t = self.tok
            inner = self.a_atom()
            if isinstance(inner, PNamed):
                return PNot((inner,))
            if isinstance(inner, PUnion) and all(isinstance(p, PNamed) for p in inner.items):
                return PNot(inner.items)
            self.error("negation applies to action names only", tok=t)
        return self.a_atom()

    def a_atom(self):
        t = self.tok
        if self.accept("true"):
            return PAny()
        if self.accept("false"):
            return PUnion(())
        if self.accept("("):
            p = self.action_formula()
            self.expect(")")
            return p
        name = self.ident("action")
        if name in self.KEYWORDS:
            self.error(f"unexpected keyword {name!r}", ["action"], tok=t)
        if not self.accept("("):
            return PNamed(name, None)
        args = []
        if not self.at(")"):
            args.append(self.pattern_arg())
            while self.accept(","):
                args.append(self.pattern_arg())
        self.expect(")")
        return PNamed(name, tuple(args))

    def pattern_arg(self):
        if self.accept("_"):
            return WILD
        return self.expr(True)


def parse_formula(text: str, signature: Optional[Signature] = None,
                  predicates: Optional[Mapping[str, Predicate]] = None,
                  filename: str = "<formula>", resolve: bool = True) -> Formula:
    """Parse one formula, optionally preceded by `pred` definitions.

    With `resolve` set, identifiers inside data expressions are resolved
    (against `signature` when given, leniently otherwise), predicate macros
    are expanded and the result is checked for monotonicity.
    """
    p = FormulaParser(text, filename)
    preds = dict(predicates or {})
    preds.update(p.predicates())
    f = p.formula()
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.describe(p.tok)}", ["end of input"])
    check_monotone(f)
    if resolve:
        f = resolve_formula(f, signature, preds)
    return f


def parse_predicates(text: str, filename: str = "<predicates>") -> dict:
    p = FormulaParser(text, filename)
    out = p.predicates()
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.describe(p.tok)}", ["pred"])
    return out


# ---------------------------------------------------------------------------
# printing

def render_pattern(p, top: bool = True) -> str:
    if isinstance(p, PAny):
        return "true"
    if isinstance(p, PNamed):
        if p.args is None:
            return p.name
        return p.name + "(" + ", ".join("_" if isinstance(a, Wildcard) else render_expr(a)
                                        for a in p.args) + ")"
    if isinstance(p, PNot):
        if len(p.items) == 1:
            return "!" + render_pattern(p.items[0], False)
        return "!(" + " || ".join(render_pattern(x, False) for x in p.items) + ")"
    if isinstance(p, PUnion):
        if not p.items:
            return "false"
        s = " || ".join(render_pattern(x, False) for x in p.items)
        return s if top or len(p.items) == 1 else f"({s})"
    if isinstance(p, GPattern):
        return str(p)
    raise TypeError(p)


def render_regular(r, prec: int = 0) -> str:
    if isinstance(r, RAtom):
        p = r.pattern
        loose = ((isinstance(p, PUnion) and len(p.items) > 1) or isinstance(p, PNot))
        s = render_pattern(p, True)
        return f"({s})" if loose and prec > 0 else s
    if isinstance(r, RAlt):
        s = f"{render_regular(r.left, 1)} + {render_regular(r.right, 2)}"
        return f"({s})" if prec > 1 else s
    if isinstance(r, RSeq):
        s = f"{render_regular(r.left, 2)}.{render_regular(r.right, 3)}"
        return f"({s})" if prec > 2 else s
    if isinstance(r, RStar):
        return render_regular(r.body, 3) + "*"
    raise TypeError(r)


def render_formula(f: Formula, prec: int = 0) -> str:
    if isinstance(f, FTrue):
        return "true"
    if isinstance(f, FFalse):
        return "false"
    if isinstance(f, FVar):
        return f.name
    if isinstance(f, Val):
        return f"val({render_expr(f.expr)})"
    if isinstance(f, Not):
        return "!" + render_formula(f.arg, 4)
    if isinstance(f, Box):
        return f"[{render_regular(f.reg)}]" + render_formula(f.body, 4)
    if isinstance(f, Diamond):
        return f"<{render_regular(f.reg)}>" + render_formula(f.body, 4)
    if isinstance(f, (And, Or)):
        p, op = (3, "&&") if isinstance(f, And) else (2, "||")
        s = f"{render_formula(f.left, p)} {op} {render_formula(f.right, p + 1)}"
        return f"({s})" if prec > p else s
    if isinstance(f, Implies):
        s = f"{render_formula(f.left, 2)} => {render_formula(f.right, 1)}"
        return f"({s})" if prec > 1 else s
    if isinstance(f, (Forall, Exists)):
        kw = "forall" if isinstance(f, Forall) else "exists"
        s = f"{kw} {render_binders(f.binders)}. {render_formula(f.body)}"
        return f"({s})" if prec > 0 else s
    if isinstance(f, (Mu, Nu)):
        kw = "mu" if isinstance(f, Mu) else "nu"
        s = f"{kw} {f.var}. {render_formula(f.body)}"
        return f"({s})" if prec > 0 else s
    raise TypeError(f)


# ---------------------------------------------------------------------------
# static checks

_MODAL = (Box, Diamond, Mu, Nu, FVar)


def _walk(f: Formula):
    yield f
    for child in _children(f):
        yield from _walk(child)


def _children(f):
    if isinstance(f, (And, Or, Implies)):
        return (f.left, f.right)
    if isinstance(f, Not):
        return (f.arg,)
    if isinstance(f, (Box, Diamond, Forall, Exists, Mu, Nu)):
        return (f.body,)
    return ()


def val_closed(f: Formula) -> bool:
    """True when `f` is built from val/true/false with boolean connectives only."""
    return not any(isinstance(g, _MODAL) for g in _walk(f))


def check_monotone(f: Formula, negated: frozenset = frozenset(), bound=()) -> None:
    """Reject fixpoint variables under negation and negated modal subformulas."""
    if isinstance(f, FVar):
        if f.name in negated:
            raise NonMonotone(f.name)
        if f.name not in bound:
            raise FormulaError(f"unbound fixpoint variable `{f.name}`")
        return
    if isinstance(f, (Mu, Nu)):
        check_monotone(f.body, negated - {f.var}, bound + (f.var,))
        return
    if isinstance(f, (Not, Implies)):
        neg = f.arg if isinstance(f, Not) else f.left
        for g in _walk(neg):
            if isinstance(g, FVar) and g.name in bound:
                raise NonMonotone(g.name)
        if not val_closed(neg):
            raise FormulaError("negation is only supported over val/true/false subformulas")
        if isinstance(f, Implies):
            check_monotone(f.right, negated, bound)
        return
    for child in _children(f):
        check_monotone(child, negated, bound)


# ---------------------------------------------------------------------------
# resolution of data expressions

class _Resolver:
    def __init__(self, sig: Optional[Signature], preds: Mapping[str, Predicate]):
        self.sig = sig
        self.preds = preds
        macros = {n: (p.params, p.body) for n, p in preds.items()}
        self.checker = ExprChecker(sig, macros=macros) if sig is not None else None

    def sort(self, s: Sort) -> Sort:
        if self.sig is None:
            return s
        if isinstance(s, SortRef) and s.name not in self.sig.sorts:
            raise UnknownName(f"unknown sort `{s.name}`")
        return self.sig.resolve_sort(s)

    def expr(self, e: Expr, scope: dict, want_bool: bool = False):
        if self.checker is not None:
            if want_bool:
                return check_bool(self.checker, e, scope), None
            return self.checker.check(e, scope)
        return self._lenient(e, scope), None

    def _lenient(self, e, scope):
        if isinstance(e, Var):
            return e if e.name in scope else Lit(EnumVal("", e.name), e.pos)
        if isinstance(e, Apply):
            if e.name not in self.preds:
                raise UnknownName(f"unknown predicate `{e.name}`", e.pos)
            p = self.preds[e.name]
            if len(p.params) != len(e.args):
                raise ModelTypeError(f"`{e.name}` takes {len(p.params)} arguments", e.pos)
            body = substitute(p.body, {n: a for (n, _), a in zip(p.params, e.args)})
            return self._lenient(body, scope)
        if isinstance(e, Unary):
            return Unary(e.op, self._lenient(e.arg, scope), e.pos)
        if isinstance(e, Binary):
            return Binary(e.op, self._lenient(e.left, scope), self._lenient(e.right, scope), e.pos)
        if isinstance(e, Index):
            return Index(self._lenient(e.seq, scope), self._lenient(e.index, scope), e.pos)
        if isinstance(e, ListLit):
            return ListLit(tuple(self._lenient(x, scope) for x in e.items), e.pos)
        if isinstance(e, Quant):
            inner = dict(scope)
            inner.update(e.binders)
            return Quant(e.kind, e.binders, self._lenient(e.body, inner), e.pos)
        return e

    def pattern(self, p, scope):
        if isinstance(p, PNamed):
            decl = None
            if self.sig is not None:
                if p.name not in self.sig.actions:
                    raise UnknownAction(f"unknown action `{p.name}`")
                decl = self.sig.actions[p.name]
                if p.args is not None and len(p.args) != len(decl):
                    raise UnknownAction(
                        f"action `{p.name}` takes {len(decl)} arguments, pattern has {len(p.args)}")
            if p.args is None:
                return p
            args = []
            for k, a in enumerate(p.args):
                if isinstance(a, Wildcard):
                    args.append(a)
                    continue
                out, s = self.expr(a, scope)
                if decl is not None:
                    from .data import compatible
                    if not compatible(s, decl[k]):
                        raise ModelTypeError(
                            f"argument {k + 1} of `{p.name}` expects {decl[k]}, got {s}")
                args.append(out)
            return PNamed(p.name, tuple(args))
        if isinstance(p, PNot):
            return PNot(tuple(self.pattern(x, scope) for x in p.items))
        if isinstance(p, PUnion):
            return PUnion(tuple(self.pattern(x, scope) for x in p.items))
        return p

    def regular(self, r, scope):
        if isinstance(r, RAtom):
            return RAtom(self.pattern(r.pattern, scope))
        if isinstance(r, RSeq):
            return RSeq(self.regular(r.left, scope), self.regular(r.right, scope))
        if isinstance(r, RAlt):
            return RAlt(self.regular(r.left, scope), self.regular(r.right, scope))
        return RStar(self.regular(r.body, scope))

    def formula(self, f, scope):
        if isinstance(f, Val):
            return Val(self.expr(f.expr, scope, want_bool=True)[0])
        if isinstance(f, (Forall, Exists)):
            binders = tuple((n, self.sort(s)) for n, s in f.binders)
            inner = dict(scope)
            inner.update(binders)
            return type(f)(binders, self.formula(f.body, inner))
        if isinstance(f, (Box, Diamond)):
            return type(f)(self.regular(f.reg, scope), self.formula(f.body, scope))
        if isinstance(f, (And, Or, Implies)):
            return type(f)(self.formula(f.left, scope), self.formula(f.right, scope))
        if isinstance(f, Not):
            return Not(self.formula(f.arg, scope))
        if isinstance(f, (Mu, Nu)):
            return type(f)(f.var, self.formula(f.body, scope))
        return f


def resolve_formula(f: Formula, signature: Optional[Signature] = None,
                    predicates: Optional[Mapping[str, Predicate]] = None) -> Formula:
    return _Resolver(signature, predicates or {}).formula(f, {})


# ---------------------------------------------------------------------------
# regular expansion

def _fixvar_names(f) -> set:
    return {g.var for g in _walk(f) if isinstance(g, (Mu, Nu))} | \
           {g.name for g in _walk(f) if isinstance(g, FVar)}


def expand_regular(f: Formula) -> Formula:
    """Rewrite regular modalities into single-step modalities and fixpoints."""
    used = _fixvar_names(f)
    counter = itertools.count(1)

    def fresh():
        while True:
            name = f"R{next(counter)}"
            if name not in used:
                used.add(name)
                return name

    def box(r, phi):
        if isinstance(r, RAtom):
            return Box(r, phi)
        if isinstance(r, RSeq):
            return box(r.left, box(r.right, phi))
        if isinstance(r, RAlt):
            return And(box(r.left, phi), box(r.right, phi))
        x = fresh()
        return Nu(x, And(phi, box(r.body, FVar(x))))

    def dia(r, phi):
        if isinstance(r, RAtom):
            return Diamond(r, phi)
        if isinstance(r, RSeq):
            return dia(r.left, dia(r.right, phi))
        if isinstance(r, RAlt):
            return Or(dia(r.left, phi), dia(r.right, phi))
        x = fresh()
        return Mu(x, Or(phi, dia(r.body, FVar(x))))

    def go(g):
        if isinstance(g, Box):
            return box(g.reg, go(g.body))
        if isinstance(g, Diamond):
            return dia(g.reg, go(g.body))
        if isinstance(g, (And, Or, Implies)):
            return type(g)(go(g.left), go(g.right))
        if isinstance(g, Not):
            return Not(go(g.arg))
        if isinstance(g, (Forall, Exists)):
            return type(g)(g.binders, go(g.body))
        if isinstance(g, (Mu, Nu)):
            return type(g)(g.var, go(g.body))
        return g

    return go(f)


# ---------------------------------------------------------------------------
# grounded patterns and label matching

def _same_value(a, b) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, tuple):
        return len(a) == len(b) and all(_same_value(x, y) for x, y in zip(a, b))
    return a == b


class GPattern:
    """A pattern whose arguments are concrete values (or wildcards)."""

    __slots__ = ("kind", "name", "args", "items", "_key")

    def __init__(self, kind, name=None, args=None, items=()):
        self.kind = kind        # 'any' | 'named' | 'not' | 'union'
        self.name = name
        self.args = args
        self.items = items
        self._key = (kind, name, args if args is None else tuple(
            ("_",) if a is WILD else (type(a).__name__, a) for a in args),
            tuple(i._key for i in items))

    def __eq__(self, other):
        return isinstance(other, GPattern) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __str__(self):
        if self.kind == "any":
            return "true"
        if self.kind == "named":
            if self.args is None:
                return self.name
            return self.name + "(" + ", ".join(
                "_" if a is WILD else render_value(a) for a in self.args) + ")"
        if self.kind == "not":
            if len(self.items) == 1:
                return "!" + str(self.items[0])
            return "!(" + " || ".join(map(str, self.items)) + ")"
        if not self.items:
            return "false"
        return "(" + " || ".join(map(str, self.items)) + ")"

    __repr__ = __str__


G_ANY = GPattern("any")


def match_label(p: GPattern, label) -> bool:
    """Does the grounded pattern `p` accept the transition label?"""
    k = p.kind
    if k == "any":
        return True
    if k == "named":
        if label.name != p.name:
            return False
        if p.args is None:
            return True
        if len(p.args) != len(label.args):
            return False
        return all(a is WILD or _same_value(a, v) for a, v in zip(p.args, label.args))
    if k == "not":
        return not any(match_label(q, label) for q in p.items)
    return any(match_label(q, label) for q in p.items)


def ground_pattern(p, env: Mapping[str, Any]) -> GPattern:
    if isinstance(p, GPattern):
        return p
    if isinstance(p, PAny):
        return G_ANY
    if isinstance(p, PNamed):
        if p.args is None:
            return GPattern("named", p.name)
        args = tuple(WILD if isinstance(a, Wildcard) else eval_expr(a, env) for a in p.args)
        return GPattern("named", p.name, args)
    if isinstance(p, PNot):
        return GPattern("not", items=tuple(ground_pattern(x, env) for x in p.items))
    if isinstance(p, PUnion):
        return GPattern("union", items=tuple(ground_pattern(x, env) for x in p.items))
    raise TypeError(p)


# ---------------------------------------------------------------------------
# core formulas

class Core:
    """Node of a closed, quantifier-free, single-step formula.

    Nodes compare by identity.  Fixpoint variables point at their binder
    node, so the same name may be reused by unrelated binders.
    """

    __slots__ = ("kind", "children", "pattern", "name", "binder")

    def __init__(self, kind, children=(), pattern=None, name=None):
        self.kind = kind          # true false and or box dia mu nu var
        self.children = children
        self.pattern = pattern
        self.name = name
        self.binder = None        # for 'var': the mu/nu node

    @property
    def body(self):
        return self.children[0]

    def __repr__(self):
        return render_core(self)


C_TRUE = Core("true")
C_FALSE = Core("false")


def c_and(items) -> Core:
    out, seen = [], set()
    for x in items:
        if x is C_FALSE:
            return C_FALSE
        if x is C_TRUE or id(x) in seen:
            continue
        parts = x.children if x.kind == "and" else (x,)
        for y in parts:
            if id(y) not in seen:
                seen.add(id(y))
                out.append(y)
    if not out:
        return C_TRUE
    return out[0] if len(out) == 1 else Core("and", tuple(out))


def c_or(items) -> Core:
    out, seen = [], set()
    for x in items:
        if x is C_TRUE:
            return C_TRUE
        if x is C_FALSE or id(x) in seen:
            continue
        parts = x.children if x.kind == "or" else (x,)
        for y in parts:
            if id(y) not in seen:
                seen.add(id(y))
                out.append(y)
    if not out:
        return C_FALSE
    return out[0] if len(out) == 1 else Core("or", tuple(out))


def c_box(p: GPattern, body: Core) -> Core:
    return C_TRUE if body is C_TRUE else Core("box", (body,), pattern=p)


def c_dia(p: GPattern, body: Core) -> Core:
    return C_FALSE if body is C_FALSE else Core("dia", (body,), pattern=p)


def c_fix(kind: str, var: Core, body: Core) -> Core:
    """Close `body` under a fixpoint binding `var` (a fresh 'var' node)."""
    value = _const_under(body, {id(var): kind == "nu"})
    if value is not None:
        return C_TRUE if value else C_FALSE
    if body is var:
        return C_TRUE if kind == "nu" else C_FALSE
    node = Core(kind, (body,), name=var.name)
    var.binder = node
    return node


def _const_under(f: Core, assume: dict, memo=None) -> Optional[bool]:
    """Constant value of `f` when the variables in `assume` are fixed, if evident."""
    if memo is None:
        memo = {}
    key = id(f)
    if key in memo:
        return memo[key]
    memo[key] = None        # cycles through shared nodes: unknown
    k = f.kind
    if k == "true":
        r = True
    elif k == "false":
        r = False
    elif k == "var":
        r = assume.get(id(f))
    elif k in ("and", "or"):
        vals = [_const_under(c, assume, memo) for c in f.children]
        if k == "and":
            r = False if False in vals else (True if all(v is True for v in vals) else None)
        else:
            r = True if True in vals else (False if all(v is False for v in vals) else None)
    elif k == "box":
        r = True if _const_under(f.body, assume, memo) is True else None
    elif k == "dia":
        r = False if _const_under(f.body, assume, memo) is False else None
    else:
        # inner binder: by monotonicity the extreme assumption decides
        r = _const_under(f.body, assume, memo)
    memo[key] = r
    return r


def render_core(f: Core, prec: int = 0) -> str:
    k = f.kind
    if k in ("true", "false"):
        return k
    if k == "var":
        return f.name
    if k in ("and", "or"):
        p, op = (3, "&&") if k == "and" else (2, "||")
        s = f" {op} ".join(render_core(c, p + 1) for c in f.children)
        return f"({s})" if prec > p else s
    if k == "box":
        return f"[{_pat_text(f.pattern)}]" + render_core(f.body, 4)
    if k == "dia":
        return f"<{_pat_text(f.pattern)}>" + render_core(f.body, 4)
    s = f"{k} {f.name}. {render_core(f.body)}"
    return f"({s})" if prec > 0 else s


def _pat_text(p: GPattern) -> str:
    s = str(p)
    return s[1:-1] if p.kind == "union" and p.items else s


def core_size(f: Core) -> int:
    return len(core_nodes(f))


def core_nodes(f: Core) -> list:
    """Distinct nodes in preorder (shared nodes listed once)."""
    out, seen, stack = [], set(), [f]
    while stack:
        n = stack.pop()
        if id(n) in seen:
            continue
        seen.add(id(n))
        out.append(n)
        stack.extend(reversed(n.children))
    return out


def core_binders(f: Core) -> list:
    return [n for n in core_nodes(f) if n.kind in ("mu", "nu")]


def alternation_depth(f: Core) -> int:
    """Dependent alternation depth (0 for fixpoint-free formulas)."""
    binders = core_binders(f)
    if not binders:
        return 0
    free = {}

    def free_of(n):
        if id(n) in free:
            return free[id(n)]
        if n.kind == "var":
            r = frozenset((id(n.binder),))
        else:
            r = frozenset().union(*(free_of(c) for c in n.children)) if n.children else frozenset()
            if n.kind in ("mu", "nu"):
                r = r - {id(n)}
        free[id(n)] = r
        return r

    depth = {}

    def ad(b):
        if id(b) in depth:
            return depth[id(b)]
        best = 1
        for inner in core_binders(b.body):
            if id(b) in free_of(inner):
                d = ad(inner)
                best = max(best, d + 1 if inner.kind != b.kind else d)
        depth[id(b)] = best
        return best

    return max(ad(b) for b in binders)


# ---------------------------------------------------------------------------
# quantifier expansion

def _formula_guards(kind: str, body: Formula) -> list:
    """Boolean expressions that restrict quantified variables."""
    def vals(f):
        if isinstance(f, Val):
            return conjuncts(f.expr)
        if isinstance(f, And):
            return vals(f.left) + vals(f.right)
        return []
    if kind == "forall":
        return vals(body.left) if isinstance(body, Implies) else []
    return vals(body)


def _length_guard(var: str, guards: list, evaluate) -> Optional[int]:
    for g in guards:
        if isinstance(g, Binary) and g.op == "==":
            for a, b in ((g.left, g.right), (g.right, g.left)):
                if (isinstance(a, Unary) and a.op == "#" and a.arg == Var(var)
                        and var not in free_vars(b)):
                    try:
                        n = evaluate(b)
                    except SurgeError:
                        continue
                    if isinstance(n, int) and not isinstance(n, bool):
                        return n
    return None


def _pattern_positions(var: str, f) -> list:
    """(action, argument index) pairs where `var` is a whole pattern argument."""
    out = []

    def pat(p):
        if isinstance(p, PNamed) and p.args:
            for k, a in enumerate(p.args):
                if a == Var(var):
                    out.append((p.name, k))
        elif isinstance(p, (PNot, PUnion)):
            for x in p.items:
                pat(x)

    def reg(r):
        if isinstance(r, RAtom):
            pat(r.pattern)
        elif isinstance(r, (RSeq, RAlt)):
            reg(r.left)
            reg(r.right)
        elif isinstance(r, RStar):
            reg(r.body)

    def go(g):
        if isinstance(g, (Box, Diamond)):
            reg(g.reg)
        if isinstance(g, (Forall, Exists)) and var in {n for n, _ in g.binders}:
            return
        for c in _children(g):
            go(c)

    go(f)
    return out


class _Expander:
    def __init__(self, sig: Optional[Signature], alphabet, cap: int):
        self.sig = sig
        self.alphabet = list(alphabet) if alphabet is not None else None
        self.cap = cap
        self._matches = {}

    def occurs(self, p: GPattern) -> bool:
        if self.alphabet is None:
            return True
        hit = self._matches.get(p)
        if hit is None:
            hit = any(match_label(p, l) for l in self.alphabet)
            self._matches[p] = hit
        return hit

    def domain(self, kind, name, sort, body, guards, names, env):
        def evaluate(e):
            return eval_expr(e, env)
        if isinstance(sort, NatSort) and sort.bound is None:
            limit = nat_bound(name, guards, names, evaluate)
            if limit is None:
                raise UnboundedQuantifier(
                    f"quantifier over `{name}: Nat` needs a guard `{name} < k`")
            if limit > self.cap:
                raise SortTooLarge(f"bound {limit} on `{name}` exceeds the expansion cap {self.cap}")
            return list(range(max(limit, 0)))
        if isinstance(sort, ListSort) and not _sized(sort):
            sort = self.size_list(name, sort, body, guards, evaluate)
        if isinstance(sort, SortRef):
            return self.values_from_alphabet(name, sort, body)
        return enumerate_sort(sort, self.cap)

    def size_list(self, name, sort, body, guards, evaluate):
        if self.sig is not None:
            for act, k in _pattern_positions(name, body):
                decl = self.sig.actions.get(act)
                if decl and k < len(decl) and _sized(decl[k]):
                    return decl[k]
        n = _length_guard(name, guards, evaluate)
        if n is not None and _sized(sort.elem):
            return ListSort(sort.elem, n)
        raise SortTooLarge(f"cannot size `{name}: {sort}`; bind it in an action argument "
                           f"or guard it with `#{name} == k`")

    def values_from_alphabet(self, name, sort, body):
        if self.alphabet is None:
            raise UnknownName(f"unknown sort `{sort}` and no alphabet to draw values from")
        positions = _pattern_positions(name, body)
        if not positions:
            raise UnknownName(f"unknown sort `{sort}` for `{name}`")
        seen = {}
        for label in self.alphabet:
            for act, k in positions:
                if label.name == act and k < len(label.args):
                    v = label.args[k]
                    seen[(type(v).__name__, v)] = v
        return list(seen.values())

    # -- main walk ---------------------------------------------------------
    def run(self, f: Formula, env: dict, fix: dict) -> Core:
        if isinstance(f, FTrue):
            return C_TRUE
        if isinstance(f, FFalse):
            return C_FALSE
        if isinstance(f, Val):
            v = eval_expr(f.expr, env)
            if not isinstance(v, bool):
                raise ModelTypeError(f"val({render_expr(f.expr)}) is not boolean")
            return C_TRUE if v else C_FALSE
        if isinstance(f, FVar):
            return fix[f.name]
        if isinstance(f, And):
            left = self.run(f.left, env, fix)
            if left is C_FALSE:
                return C_FALSE
            return c_and((left, self.run(f.right, env, fix)))
        if isinstance(f, Or):
            left = self.run(f.left, env, fix)
            if left is C_TRUE:
                return C_TRUE
            return c_or((left, self.run(f.right, env, fix)))
        if isinstance(f, Implies):
            left = self._closed(f.left, env)
            return self.run(f.right, env, fix) if left else C_TRUE
        if isinstance(f, Not):
            return C_FALSE if self._closed(f.arg, env) else C_TRUE
        if isinstance(f, (Box, Diamond)):
            if not isinstance(f.reg, RAtom):
                raise FormulaError("regular modalities must be expanded first")
            p = ground_pattern(f.reg.pattern, env)
            is_box = isinstance(f, Box)
            if not self.occurs(p):
                return C_TRUE if is_box else C_FALSE
            body = self.run(f.body, env, fix)
            return c_box(p, body) if is_box else c_dia(p, body)
        if isinstance(f, (Mu, Nu)):
            kind = "mu" if isinstance(f, Mu) else "nu"
            var = Core("var", name=f.var)
            inner = dict(fix)
            inner[f.var] = var
            return c_fix(kind, var, self.run(f.body, env, inner))
        if isinstance(f, (Forall, Exists)):
            return self.quantifier(f, env, fix)
        raise TypeError(f)

    def _closed(self, f, env) -> bool:
        core = self.run(f, env, {})
        if core is C_TRUE:
            return True
        if core is C_FALSE:
            return False
        raise FormulaError("negated subformula is not val-closed")

    def quantifier(self, f, env, fix):
        kind = "forall" if isinstance(f, Forall) else "exists"
        names = [n for n, _ in f.binders]
        guards = _formula_guards(kind, f.body)
        # bind one variable at a time so later domains may depend on earlier values
        combos = [dict(env)]
        for name, sort in f.binders:
            nxt = []
            for local in combos:
                for v in self.domain(kind, name, sort, f.body, guards, set(names), local):
                    e = dict(local)
                    e[name] = v
                    nxt.append(e)
            combos = nxt
            if len(combos) > self.cap * self.cap:
                raise SortTooLarge(f"quantifier over {render_binders(f.binders)} is too large")
        parts = []
        for local in combos:
            c = self.run(f.body, local, fix)
            if kind == "forall":
                if c is C_FALSE:
                    return C_FALSE
            elif c is C_TRUE:
                return C_TRUE
            parts.append(c)
        return c_and(parts) if kind == "forall" else c_or(parts)


def _sized(s: Sort) -> bool:
    if isinstance(s, ListSort):
        return s.length is not None and _sized(s.elem)
    return not isinstance(s, SortRef)


def expand_quantifiers(f: Formula, signature: Optional[Signature] = None,
                       alphabet: Optional[Iterable] = None,
                       cap: int = EXPANSION_CAP) -> Core:
    """Ground a regular-free formula into a `Core` graph.

    When `alphabet` (the labels of the LTS) is given, modalities whose
    pattern matches no label are decided on the spot.
    """
    return _Expander(signature, alphabet, cap).run(f, {}, {})


def to_core(f: Formula, signature=None, alphabet=None, cap: int = EXPANSION_CAP) -> Core:
    """Full expansion pipeline: regular operators, then data."""
    return expand_quantifiers(expand_regular(f), signature, alphabet, cap)
