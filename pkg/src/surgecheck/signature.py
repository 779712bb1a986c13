"""Declarations visible to expressions, and static typing of expressions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from .data import (
    BOOL, NAT, RAT, Apply, Binary, BoolSort, EnumSort, EnumVal, Expr, Index,
    ListLit, ListSort, Lit, NatSort, Quant, Rat, RatSort, Sort, SortRef,
    SurgeError, TypeMismatch, Unary, Var, compatible, render_expr,
)


class ModelTypeError(SurgeError):
    def __init__(self, message: str, pos=None):
        if pos:
            message = f"{pos[0]}:{pos[1]}: {message}"
        super().__init__(message)
        self.pos = pos


class UnknownName(ModelTypeError):
    pass


class DuplicateName(ModelTypeError):
    pass


@dataclass
class Signature:
    sorts: dict = field(default_factory=dict)          # name -> Sort
    constructors: dict = field(default_factory=dict)   # name -> EnumVal
    actions: dict = field(default_factory=dict)        # name -> tuple of Sort
    constants: dict = field(default_factory=dict)      # name -> (Sort, value)
    globals: dict = field(default_factory=dict)        # name -> Sort

    def resolve_sort(self, s: Sort, pos=None) -> Sort:
        if isinstance(s, SortRef):
            if s.name not in self.sorts:
                raise UnknownName(f"unknown sort `{s.name}`", pos)
            return self.sorts[s.name]
        if isinstance(s, ListSort):
            return ListSort(self.resolve_sort(s.elem, pos), s.length)
        return s

    def declare_sort(self, name: str, s: Sort, pos=None):
        if name in self.sorts:
            raise DuplicateName(f"sort `{name}` declared twice", pos)
        self.sorts[name] = s
        if isinstance(s, EnumSort):
            for v in s.values():
                if v.name in self.constructors:
                    raise DuplicateName(f"constructor `{v.name}` declared twice", pos)
                self.constructors[v.name] = v

    def enum_sort(self, v: EnumVal) -> Sort:
        if v.sort in self.sorts:
            return self.sorts[v.sort]
        return EnumSort(v.sort, (v.name,))


def value_sort(v, sig: Signature) -> Sort:
    if isinstance(v, bool):
        return BOOL
    if isinstance(v, int):
        return NAT
    if isinstance(v, Rat):
        return RAT
    if isinstance(v, EnumVal):
        return sig.enum_sort(v)
    if isinstance(v, tuple):
        return ListSort(value_sort(v[0], sig) if v else BOOL, len(v))
    raise TypeError(v)


class ExprChecker:
    """Resolves identifiers and infers sorts.

    Resolution order for a bare identifier: local scope, global variable,
    constant (inlined as literal), enum constructor.  With `lenient` set,
    unknown identifiers become constructors of an unnamed sort; this is how
    formulas are read against an LTS that has no model source.
    """

    def __init__(self, sig: Signature, lenient: bool = False, macros=None):
        self.sig = sig
        self.lenient = lenient
        self.macros = macros or {}

    def check(self, e: Expr, scope: Mapping[str, Sort]) -> tuple:
        if isinstance(e, Lit):
            v = e.value
            return e, value_sort(v, self.sig)
        if isinstance(e, Var):
            name = e.name
            if name in scope:
                return e, scope[name]
            if name in self.sig.globals:
                return e, self.sig.globals[name]
            if name in self.sig.constants:
                s, v = self.sig.constants[name]
                return Lit(v, e.pos), s
            if name in self.sig.constructors:
                v = self.sig.constructors[name]
                return Lit(v, e.pos), self.sig.sorts[v.sort]
            if self.lenient:
                v = EnumVal("", name)
                return Lit(v, e.pos), EnumSort("", (name,))
            raise UnknownName(f"unknown identifier `{name}`", e.pos)
        if isinstance(e, Unary):
            arg, s = self.check(e.arg, scope)
            if e.op == "!":
                self._want(s, BOOL, e)
                return Unary("!", arg, e.pos), BOOL
            if e.op == "-":
                if not isinstance(s, RatSort):
                    raise ModelTypeError(f"unary minus needs Rat in `{render_expr(e)}`", e.pos)
                return Unary("-", arg, e.pos), RAT
            if not isinstance(s, ListSort):
                raise ModelTypeError(f"`#` needs a list in `{render_expr(e)}`", e.pos)
            return Unary("#", arg, e.pos), NAT
        if isinstance(e, Binary):
            return self._binary(e, scope)
        if isinstance(e, Index):
            seq, s = self.check(e.seq, scope)
            idx, si = self.check(e.index, scope)
            if not isinstance(s, ListSort):
                raise ModelTypeError(f"indexing a non-list in `{render_expr(e)}`", e.pos)
            self._want(si, NAT, e)
            if (isinstance(idx, Lit) and s.length is not None and idx.value >= s.length):
                raise ModelTypeError(f"index {idx.value} out of range in `{render_expr(e)}`", e.pos)
            return Index(seq, idx, e.pos), s.elem
        if isinstance(e, ListLit):
            if not e.items:
                raise ModelTypeError("empty list literal", e.pos)
            checked = [self.check(x, scope) for x in e.items]
            first = checked[0][1]
            for _, s in checked[1:]:
                if not compatible(first, s):
                    raise ModelTypeError(f"mixed element sorts in `{render_expr(e)}`", e.pos)
            return ListLit(tuple(x for x, _ in checked), e.pos), ListSort(first, len(checked))
        if isinstance(e, Quant):
            inner = dict(scope)
            binders = []
            for name, s in e.binders:
                rs = self.sig.resolve_sort(s, e.pos)
                inner[name] = rs
                binders.append((name, rs))
            body, sb = self.check(e.body, inner)
            self._want(sb, BOOL, e)
            return Quant(e.kind, tuple(binders), body, e.pos), BOOL
        if isinstance(e, Apply):
            if e.name not in self.macros:
                raise UnknownName(f"unknown predicate `{e.name}`", e.pos)
            params, body = self.macros[e.name]
            if len(params) != len(e.args):
                raise ModelTypeError(f"`{e.name}` takes {len(params)} arguments", e.pos)
            from .data import substitute
            expanded = substitute(body, {p: a for (p, _), a in zip(params, e.args)})
            return self.check(expanded, scope)
        raise TypeError(e)

    def _binary(self, e: Binary, scope):
        left, sl = self.check(e.left, scope)
        right, sr = self.check(e.right, scope)
        op = e.op
        out = Binary(op, left, right, e.pos)
        if op in ("&&", "||", "=>"):
            self._want(sl, BOOL, e)
            self._want(sr, BOOL, e)
            return out, BOOL
        if not compatible(sl, sr):
            raise ModelTypeError(f"operands of `{op}` have sorts {sl} and {sr} in `{render_expr(e)}`",
                                 e.pos)
        if op in ("==", "!="):
            return out, BOOL
        if not isinstance(sl, (NatSort, RatSort)):
            raise ModelTypeError(f"`{op}` needs Nat or Rat operands in `{render_expr(e)}`", e.pos)
        if op in ("<", "<=", ">", ">="):
            return out, BOOL
        return out, (NAT if isinstance(sl, NatSort) else RAT)

    @staticmethod
    def _want(got: Sort, want: Sort, e: Expr):
        if not compatible(got, want):
            raise ModelTypeError(f"expected {want} but found {got} in `{render_expr(e)}`",
                                 getattr(e, "pos", None))


def check_bool(checker: ExprChecker, e: Expr, scope) -> Expr:
    out, s = checker.check(e, scope)
    if not isinstance(s, BoolSort):
        raise ModelTypeError(f"expected Bool but found {s} in `{render_expr(e)}`", e.pos)
    return out
