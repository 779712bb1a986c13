"""Finite data universe: sorts, values and expressions.

Values are plain Python objects where possible:

    Bool  -> bool
    Nat   -> int (never negative)
    Rat   -> Rat (fixed point, denominator 100)
    enum  -> EnumVal
    List  -> tuple of values

Expressions are small frozen dataclasses.  Positions are kept for error
messages but never take part in equality.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field
from functools import total_ordering
from typing import Any, Iterable, Mapping, Optional, Union

EXPANSION_CAP = 4096
RAT_DENOMINATOR = 100


class SurgeError(Exception):
    """Base class for every error raised by the toolkit."""


class EvaluationError(SurgeError):
    def __init__(self, message: str, expr: Optional["Expr"] = None):
        if expr is not None:
            message = f"{message} in `{render_expr(expr)}`"
        super().__init__(message)
        self.expr = expr


class UnboundVariable(EvaluationError):
    pass


class TypeMismatch(EvaluationError):
    pass


class IndexOutOfRange(EvaluationError):
    pass


class RangeError(EvaluationError):
    """Arithmetic left the declared range of a sort (no wrap-around)."""


class SortTooLarge(SurgeError):
    pass


class UnboundedQuantifier(SurgeError):
    pass


# ---------------------------------------------------------------------------
# values

@total_ordering
@dataclass(frozen=True, slots=True)
class Rat:
    num: int

    def __lt__(self, other: "Rat") -> bool:
        return self.num < other.num

    def __str__(self) -> str:
        return f"{self.num}/{RAT_DENOMINATOR}"

    @classmethod
    def parse(cls, numerator: int, denominator: int) -> "Rat":
        if denominator <= 0 or RAT_DENOMINATOR % denominator:
            raise ValueError(f"denominator {denominator} does not divide {RAT_DENOMINATOR}")
        return cls(numerator * (RAT_DENOMINATOR // denominator))


@dataclass(frozen=True, slots=True)
class EnumVal:
    sort: str
    name: str
    index: int = field(default=-1, compare=False)

    def __lt__(self, other: "EnumVal") -> bool:
        return (self.index, self.name) < (other.index, other.name)

    def __str__(self) -> str:
        return self.name


Value = Union[bool, int, Rat, EnumVal, tuple]


def render_value(v: Value) -> str:
    if v is True:
        return "true"
    if v is False:
        return "false"
    if isinstance(v, tuple):
        return "[" + ", ".join(render_value(x) for x in v) + "]"
    return str(v)


def _encode(v: Value, out: bytearray) -> None:
    if isinstance(v, bool):
        out += b"B1" if v else b"B0"
    elif isinstance(v, int):
        out += b"N" + str(v).encode() + b";"
    elif isinstance(v, Rat):
        out += b"R" + str(v.num).encode() + b";"
    elif isinstance(v, EnumVal):
        out += b"E" + v.sort.encode() + b":" + v.name.encode() + b";"
    elif isinstance(v, tuple):
        out += b"L" + str(len(v)).encode() + b"("
        for x in v:
            _encode(x, out)
        out += b")"
    else:
        raise TypeError(f"not a value: {v!r}")


def hash_value(v: Value) -> int:
    """64-bit digest of the canonical encoding of `v` (stable across runs)."""
    buf = bytearray()
    _encode(v, buf)
    return int.from_bytes(hashlib.blake2b(bytes(buf), digest_size=8).digest(), "big")


# ---------------------------------------------------------------------------
# sorts

class Sort:
    def cardinality(self) -> Optional[int]:
        raise NotImplementedError

    def values(self) -> list:
        raise NotImplementedError

    def contains(self, v: Value) -> bool:
        raise NotImplementedError

    def is_sized(self) -> bool:
        return self.cardinality() is not None


@dataclass(frozen=True)
class BoolSort(Sort):
    def cardinality(self):
        return 2

    def values(self):
        return [False, True]

    def contains(self, v):
        return isinstance(v, bool)

    def __str__(self):
        return "Bool"


@dataclass(frozen=True)
class NatSort(Sort):
    bound: Optional[int] = None   # inclusive

    def cardinality(self):
        return None if self.bound is None else self.bound + 1

    def values(self):
        if self.bound is None:
            raise SortTooLarge("Nat without an upper bound cannot be enumerated")
        return list(range(self.bound + 1))

    def contains(self, v):
        return (isinstance(v, int) and not isinstance(v, bool) and v >= 0
                and (self.bound is None or v <= self.bound))

    def __str__(self):
        return "Nat" if self.bound is None else f"Nat({self.bound})"


@dataclass(frozen=True)
class RatSort(Sort):
    admissible: Optional[tuple] = None   # sorted tuple of Rat

    def cardinality(self):
        return None if self.admissible is None else len(self.admissible)

    def values(self):
        if self.admissible is None:
            raise SortTooLarge("Rat without an admissible value set cannot be enumerated")
        return list(self.admissible)

    def contains(self, v):
        return isinstance(v, Rat) and (self.admissible is None or v in self.admissible)

    def __str__(self):
        if self.admissible is None:
            return "Rat"
        return "Rat{" + ", ".join(str(r) for r in self.admissible) + "}"


@dataclass(frozen=True)
class EnumSort(Sort):
    name: str
    constructors: tuple

    def __post_init__(self):
        if len(set(self.constructors)) != len(self.constructors):
            raise ValueError(f"duplicate constructor in sort {self.name}")

    def cardinality(self):
        return len(self.constructors)

    def values(self):
        return [EnumVal(self.name, c, i) for i, c in enumerate(self.constructors)]

    def value(self, name: str) -> EnumVal:
        return EnumVal(self.name, name, self.constructors.index(name))

    def contains(self, v):
        return isinstance(v, EnumVal) and v.sort == self.name and v.name in self.constructors

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class ListSort(Sort):
    elem: Sort
    length: Optional[int] = None

    def cardinality(self):
        inner = self.elem.cardinality()
        if inner is None or self.length is None:
            return None
        return inner ** self.length

    def values(self):
        if self.length is None:
            raise SortTooLarge(f"{self} has no fixed length")
        return [tuple(p) for p in itertools.product(self.elem.values(), repeat=self.length)]

    def contains(self, v):
        return (isinstance(v, tuple) and (self.length is None or len(v) == self.length)
                and all(self.elem.contains(x) for x in v))

    def __str__(self):
        if self.length is None:
            return f"List({self.elem})"
        return f"List({self.elem}, {self.length})"


@dataclass(frozen=True)
class SortRef(Sort):
    """Unresolved reference to a declared sort name (parser output)."""
    name: str

    def __str__(self):
        return self.name


BOOL = BoolSort()
NAT = NatSort()
RAT = RatSort()


def enumerate_sort(s: Sort, cap: int = EXPANSION_CAP) -> list:
    n = s.cardinality()
    if n is None:
        raise SortTooLarge(f"sort {s} is not finite")
    if n > cap:
        raise SortTooLarge(f"sort {s} has {n} values, above the expansion cap {cap}")
    return s.values()


def compatible(a: Sort, b: Sort) -> bool:
    """Type compatibility: same kind, ignoring Nat bounds and Rat value sets."""
    if isinstance(a, ListSort) and isinstance(b, ListSort):
        if a.length is not None and b.length is not None and a.length != b.length:
            return False
        return compatible(a.elem, b.elem)
    if isinstance(a, EnumSort) and isinstance(b, EnumSort):
        return a.name == b.name
    return type(a) is type(b) and not isinstance(a, (ListSort, EnumSort))


def sort_of_value(v: Value) -> Sort:
    if isinstance(v, bool):
        return BOOL
    if isinstance(v, int):
        return NAT
    if isinstance(v, Rat):
        return RAT
    if isinstance(v, EnumVal):
        return EnumSort(v.sort, (v.name,)) if v.index < 0 else SortRef(v.sort)
    if isinstance(v, tuple):
        return ListSort(sort_of_value(v[0]) if v else BOOL, len(v))
    raise TypeError(v)


# ---------------------------------------------------------------------------
# expressions

@dataclass(frozen=True)
class Expr:
    pass


def _pos():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Lit(Expr):
    value: Any
    pos: Any = _pos()


@dataclass(frozen=True)
class Var(Expr):
    name: str
    pos: Any = _pos()


@dataclass(frozen=True)
class Unary(Expr):
    op: str            # '!', '-', '#'
    arg: Expr
    pos: Any = _pos()


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr
    pos: Any = _pos()


@dataclass(frozen=True)
class Index(Expr):
    seq: Expr
    index: Expr
    pos: Any = _pos()


@dataclass(frozen=True)
class ListLit(Expr):
    items: tuple
    pos: Any = _pos()


@dataclass(frozen=True)
class Quant(Expr):
    kind: str          # 'forall' | 'exists'
    binders: tuple     # ((name, Sort), ...)
    body: Expr
    pos: Any = _pos()


@dataclass(frozen=True)
class Apply(Expr):
    """Call of a predicate macro; only exists between parsing and expansion."""
    name: str
    args: tuple
    pos: Any = _pos()


BINARY_PREC = {
    "=>": 1, "||": 2, "&&": 3, "==": 4, "!=": 4,
    "<": 5, "<=": 5, ">": 5, ">=": 5, "+": 6, "-": 6,
}


def render_expr(e: Expr, prec: int = 0) -> str:
    if isinstance(e, Lit):
        s = render_value(e.value)
        if isinstance(e.value, Rat) and e.value.num < 0 and prec > 6:
            s = f"({s})"
        return s
    if isinstance(e, Var):
        return e.name
    if isinstance(e, ListLit):
        return "[" + ", ".join(render_expr(x) for x in e.items) + "]"
    if isinstance(e, Apply):
        return f"{e.name}(" + ", ".join(render_expr(x) for x in e.args) + ")"
    if isinstance(e, Unary):
        s = e.op + render_expr(e.arg, 7)
        return f"({s})" if prec > 7 else s
    if isinstance(e, Index):
        idx = render_expr(e.index, 9)
        if not isinstance(e.index, (Lit, Var)):
            idx = f"({render_expr(e.index)})"
        return render_expr(e.seq, 8) + "." + idx
    if isinstance(e, Binary):
        p = BINARY_PREC[e.op]
        if e.op == "=>":   # right associative
            s = f"{render_expr(e.left, p + 1)} => {render_expr(e.right, p)}"
        else:
            s = f"{render_expr(e.left, p)} {e.op} {render_expr(e.right, p + 1)}"
        return f"({s})" if prec > p else s
    if isinstance(e, Quant):
        s = f"{e.kind} {render_binders(e.binders)}. {render_expr(e.body)}"
        return f"({s})" if prec > 0 else s
    raise TypeError(e)


def render_binders(binders: Iterable) -> str:
    return ", ".join(f"{n}: {s}" for n, s in binders)


def free_vars(e: Expr) -> set:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Lit):
        return set()
    if isinstance(e, Unary):
        return free_vars(e.arg)
    if isinstance(e, Binary):
        return free_vars(e.left) | free_vars(e.right)
    if isinstance(e, Index):
        return free_vars(e.seq) | free_vars(e.index)
    if isinstance(e, (ListLit, Apply)):
        items = e.items if isinstance(e, ListLit) else e.args
        return set().union(*(free_vars(x) for x in items)) if items else set()
    if isinstance(e, Quant):
        return free_vars(e.body) - {n for n, _ in e.binders}
    raise TypeError(e)


def substitute(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Capture-avoiding enough for our use: binders shadow the mapping."""
    if not mapping:
        return e
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Lit):
        return e
    if isinstance(e, Unary):
        return Unary(e.op, substitute(e.arg, mapping), e.pos)
    if isinstance(e, Binary):
        return Binary(e.op, substitute(e.left, mapping), substitute(e.right, mapping), e.pos)
    if isinstance(e, Index):
        return Index(substitute(e.seq, mapping), substitute(e.index, mapping), e.pos)
    if isinstance(e, ListLit):
        return ListLit(tuple(substitute(x, mapping) for x in e.items), e.pos)
    if isinstance(e, Apply):
        return Apply(e.name, tuple(substitute(x, mapping) for x in e.args), e.pos)
    if isinstance(e, Quant):
        inner = {k: v for k, v in mapping.items() if k not in {n for n, _ in e.binders}}
        return Quant(e.kind, e.binders, substitute(e.body, inner), e.pos)
    raise TypeError(e)


def conjuncts(e: Expr) -> list:
    if isinstance(e, Binary) and e.op == "&&":
        return conjuncts(e.left) + conjuncts(e.right)
    return [e]


def guard_of(kind: str, body: Expr) -> list:
    """Conjuncts that may bound a quantified Nat variable.

    For `forall` this is the antecedent of a top-level implication, for
    `exists` the body itself.
    """
    if kind == "forall":
        if isinstance(body, Binary) and body.op == "=>":
            return conjuncts(body.left)
        return []
    return conjuncts(body)


def nat_bound(var: str, guards: list, bound_names: set, evaluate) -> Optional[int]:
    """Exclusive upper bound of `var` implied by `var < e` / `var <= e` guards.

    `evaluate` computes closed bound expressions; guards mentioning any of
    `bound_names` on the bounding side are ignored.
    """
    best = None
    for g in guards:
        if not isinstance(g, Binary):
            continue
        op, lhs, rhs = g.op, g.left, g.right
        if op in (">", ">=") :
            op, lhs, rhs = {">": "<", ">=": "<="}[op], rhs, lhs
        if op not in ("<", "<=") or lhs != Var(var):
            continue
        if free_vars(rhs) & bound_names:
            continue
        limit = evaluate(rhs)
        if isinstance(limit, bool) or not isinstance(limit, int):
            continue
        limit = limit + 1 if op == "<=" else limit
        best = limit if best is None else min(best, limit)
    return best


def quantifier_domains(kind: str, binders: tuple, body: Expr, evaluate,
                       cap: int = EXPANSION_CAP) -> list:
    """One value list per binder.  Unbounded Nat binders use the guard."""
    names = {n for n, _ in binders}
    guards = guard_of(kind, body)
    domains = []
    for name, sort in binders:
        if isinstance(sort, NatSort) and sort.bound is None:
            limit = nat_bound(name, guards, names, evaluate)
            if limit is None:
                raise UnboundedQuantifier(
                    f"quantifier over `{name}: Nat` needs a guard `{name} < k`")
            if limit > cap:
                raise SortTooLarge(f"bound {limit} on `{name}` exceeds the expansion cap {cap}")
            domains.append(list(range(max(limit, 0))))
        else:
            domains.append(enumerate_sort(sort, cap))
    return domains


# ---------------------------------------------------------------------------
# evaluation

def _need(v, kinds, e, what):
    if not isinstance(v, kinds) or (isinstance(v, bool) and bool not in _as_tuple(kinds)):
        raise TypeMismatch(f"expected {what}, got {render_value(v)}", e)
    return v


def _as_tuple(k):
    return k if isinstance(k, tuple) else (k,)


def eval_expr(e: Expr, env: Mapping[str, Value]) -> Value:
    """Reference interpreter for expressions."""
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise UnboundVariable(f"unbound variable `{e.name}`", e) from None
    if isinstance(e, Unary):
        v = eval_expr(e.arg, env)
        if e.op == "!":
            return not _need(v, bool, e, "Bool")
        if e.op == "-":
            return Rat(-_need(v, Rat, e, "Rat").num)
        if e.op == "#":
            return len(_need(v, tuple, e, "List"))
        raise TypeMismatch(f"unknown operator {e.op}", e)
    if isinstance(e, Binary):
        return _eval_binary(e, env)
    if isinstance(e, Index):
        seq = _need(eval_expr(e.seq, env), tuple, e, "List")
        i = eval_expr(e.index, env)
        if isinstance(i, bool) or not isinstance(i, int):
            raise TypeMismatch("list index must be Nat", e)
        if i >= len(seq):
            raise IndexOutOfRange(f"index {i} out of range for length {len(seq)}", e)
        return seq[i]
    if isinstance(e, ListLit):
        return tuple(eval_expr(x, env) for x in e.items)
    if isinstance(e, Quant):
        def closed(x):
            return eval_expr(x, env)
        domains = quantifier_domains(e.kind, e.binders, e.body, closed)
        names = [n for n, _ in e.binders]
        local = dict(env)
        want = e.kind == "exists"
        for combo in itertools.product(*domains):
            local.update(zip(names, combo))
            if _need(eval_expr(e.body, local), bool, e, "Bool") == want:
                return want
        return not want
    if isinstance(e, Apply):
        raise EvaluationError(f"unexpanded predicate `{e.name}`", e)
    raise TypeError(e)


def _eval_binary(e: Binary, env) -> Value:
    op = e.op
    if op in ("&&", "||", "=>"):
        a = _need(eval_expr(e.left, env), bool, e, "Bool")
        if op == "&&" and not a:
            return False
        if op == "||" and a:
            return True
        if op == "=>" and not a:
            return True
        return _need(eval_expr(e.right, env), bool, e, "Bool")
    a = eval_expr(e.left, env)
    b = eval_expr(e.right, env)
    if op == "==":
        _same_kind(a, b, e)
        return a == b
    if op == "!=":
        _same_kind(a, b, e)
        return a != b
    if op in ("<", "<=", ">", ">="):
        _numeric_pair(a, b, e)
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        return a >= b
    if op in ("+", "-"):
        _numeric_pair(a, b, e)
        if isinstance(a, Rat):
            return Rat(a.num + b.num if op == "+" else a.num - b.num)
        r = a + b if op == "+" else a - b
        if r < 0:
            raise RangeError(f"Nat result {r} is negative", e)
        return r
    raise TypeMismatch(f"unknown operator {op}", e)


def _same_kind(a, b, e):
    if isinstance(a, bool) != isinstance(b, bool) or type(a) is not type(b):
        raise TypeMismatch(f"cannot compare {render_value(a)} with {render_value(b)}", e)


def _numeric_pair(a, b, e):
    ok = (isinstance(a, Rat) and isinstance(b, Rat)) or (
        isinstance(a, int) and isinstance(b, int)
        and not isinstance(a, bool) and not isinstance(b, bool))
    if not ok:
        raise TypeMismatch(f"expected two Nat or two Rat operands, got "
                           f"{render_value(a)} and {render_value(b)}", e)
