"""The process specification language (`.sbm` files).

Grammar (informal)::

    model   := decl* 'init' term ';'
    decl    := 'sort' ID '=' ('struct' ID ('|' ID)* | sort) ';'
             | 'act' actdecl (',' actdecl)* ';'     actdecl := ID (',' ID)* [':' sort ('#' sort)*]
             | 'glob' ID ':' sort '=' expr ';'
             | 'const' ID ':' sort '=' expr ';'
             | 'proc' ID ['(' params ')'] '=' term ';'
    term    := seqc ('+' seqc)*
    seqc    := 'sum' ID ':' sort '.' seqc
             | 'read' ID 'as' ID '.' seqc
             | expr '->' seqc ['<>' seqc]
             | unit ['.' seqc]
    unit    := '(' term ')' | 'skip' | 'delta' | ID ':=' expr | ID ['(' args ')']

`.` binds tighter than `->  <>`, which binds tighter than `+`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

from .data import (
    BOOL, EnumSort, Expr, Lit, NatSort, RatSort, Sort, SortRef, compatible,
    eval_expr, free_vars, render_expr,
)
from .signature import (
    DuplicateName, ExprChecker, ModelTypeError, Signature, UnknownName, check_bool,
)
from .syntax import Backtrack, ParseError, Parser


# ---------------------------------------------------------------------------
# process terms

@dataclass(frozen=True)
class Term:
    pass


def _pos():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Act(Term):
    name: str
    args: tuple = ()
    pos: Any = _pos()


@dataclass(frozen=True)
class Skip(Term):
    pos: Any = _pos()


@dataclass(frozen=True)
class Delta(Term):
    pos: Any = _pos()


@dataclass(frozen=True)
class Seq(Term):
    left: Term
    right: Term
    pos: Any = _pos()


@dataclass(frozen=True)
class Choice(Term):
    left: Term
    right: Term
    pos: Any = _pos()


@dataclass(frozen=True)
class Cond(Term):
    guard: Expr
    then: Term
    orelse: Optional[Term] = None
    pos: Any = _pos()


@dataclass(frozen=True)
class Call(Term):
    name: str
    args: tuple = ()
    named: tuple = ()          # ((param, expr), ...) as written
    pos: Any = _pos()


@dataclass(frozen=True)
class Sum(Term):
    var: str
    sort: Sort
    body: Term
    pos: Any = _pos()


@dataclass(frozen=True)
class ReadGlobal(Term):
    var: str          # global variable
    bound: str        # local name bound to its current value
    body: Term
    pos: Any = _pos()


@dataclass(frozen=True)
class WriteGlobal(Term):
    var: str
    value: Expr
    pos: Any = _pos()


# ---------------------------------------------------------------------------
# declarations

@dataclass(frozen=True)
class SortDecl:
    name: str
    sort: Sort
    pos: Any = _pos()


@dataclass(frozen=True)
class ActDecl:
    names: tuple
    params: tuple = ()
    pos: Any = _pos()


@dataclass(frozen=True)
class GlobDecl:
    name: str
    sort: Sort
    init: Expr
    pos: Any = _pos()


@dataclass(frozen=True)
class ConstDecl:
    name: str
    sort: Sort
    value: Expr
    pos: Any = _pos()


@dataclass(frozen=True)
class ProcDecl:
    name: str
    params: tuple        # ((name, Sort), ...)
    body: Term
    pos: Any = _pos()


@dataclass(frozen=True)
class ModelSource:
    decls: tuple
    init: Term

    @property
    def procs(self):
        return [d for d in self.decls if isinstance(d, ProcDecl)]

    @property
    def sort_decls(self):
        return [d for d in self.decls if isinstance(d, SortDecl)]

    @property
    def action_names(self):
        return [n for d in self.decls if isinstance(d, ActDecl) for n in d.names]


# ---------------------------------------------------------------------------
# parser

class _Ref(Term):
    """Name application whose action/process nature is fixed after parsing."""

    def __init__(self, name, args, named, pos):
        self.name, self.args, self.named, self.pos = name, args, named, pos


class ModelParser(Parser):
    KEYWORDS = Parser.KEYWORDS | {"sort", "act", "proc", "init", "glob", "const",
                                  "sum", "read", "as", "skip", "delta", "struct"}

    def model(self) -> ModelSource:
        decls = []
        init = None
        while self.tok.kind != "eof":
            if self.at("init"):
                if init is not None:
                    self.error("second init clause")
                self.i += 1
                init = self.term()
                self.expect(";")
            elif self.at("sort"):
                decls.append(self.sort_decl())
            elif self.at("act"):
                decls.append(self.act_decl())
            elif self.at("glob", "const"):
                decls.append(self.value_decl())
            elif self.at("proc"):
                decls.append(self.proc_decl())
            else:
                self.error(f"unexpected {self.describe(self.tok)}",
                           ["'sort'", "'act'", "'glob'", "'const'", "'proc'", "'init'"])
        if init is None:
            self.error("missing init clause", ["'init'"])
        actions = {n for d in decls if isinstance(d, ActDecl) for n in d.names}
        fix = _RefFixer(actions)
        decls = [ProcDecl(d.name, d.params, fix(d.body), d.pos) if isinstance(d, ProcDecl) else d
                 for d in decls]
        return ModelSource(tuple(decls), fix(init))

    def sort_decl(self):
        pos = self.pos()
        self.expect("sort")
        name = self.ident("sort name")
        self.expect("=")
        if self.accept("struct"):
            cons = [self.ident("constructor")]
            while self.accept("|"):
                cons.append(self.ident("constructor"))
            self.expect(";")
            try:
                return SortDecl(name, EnumSort(name, tuple(cons)), pos)
            except ValueError as exc:
                self.error(str(exc))
        s = self.sort()
        self.expect(";")
        return SortDecl(name, s, pos)

    def act_decl(self):
        pos = self.pos()
        self.expect("act")
        names = [self.ident("action name")]
        while self.accept(","):
            names.append(self.ident("action name"))
        params = ()
        if self.accept(":"):
            ps = [self.sort()]
            while self.accept("#"):
                ps.append(self.sort())
            params = tuple(ps)
        self.expect(";")
        return ActDecl(tuple(names), params, pos)

    def value_decl(self):
        pos = self.pos()
        kind = self.tok.text
        self.i += 1
        name = self.ident()
        self.expect(":")
        s = self.sort()
        self.expect("=")
        e = self.expr()
        self.expect(";")
        return (GlobDecl if kind == "glob" else ConstDecl)(name, s, e, pos)

    def proc_decl(self):
        pos = self.pos()
        self.expect("proc")
        name = self.ident("process name")
        params = ()
        if self.accept("("):
            params = self.binders()
            self.expect(")")
        self.expect("=")
        body = self.term()
        self.expect(";")
        return ProcDecl(name, params, body, pos)

    # -- terms ---------------------------------------------------------------
    def term(self) -> Term:
        left = self.seqc()
        while self.at("+"):
            pos = self.pos()
            self.i += 1
            left = Choice(left, self.seqc(), pos)
        return left

    def seqc(self) -> Term:
        pos = self.pos()
        if self.accept("sum"):
            var = self.ident("variable")
            self.expect(":")
            s = self.sort()
            self.expect(".")
            return Sum(var, s, self.seqc(), pos)
        if self.accept("read"):
            g = self.ident("global variable")
            self.expect("as")
            x = self.ident("variable")
            self.expect(".")
            return ReadGlobal(g, x, self.seqc(), pos)
        guard = self.try_condition()
        if guard is not None:
            then = self.seqc()
            orelse = self.seqc() if self.accept("<>") else None
            return Cond(guard, then, orelse, pos)
        u = self.unit()
        if self.at("."):
            self.i += 1
            return Seq(u, self.seqc(), pos)
        return u

    def try_condition(self):
        start = self.i
        try:
            e = self.expr(allow_index=False)
        except ParseError:
            self.i = start
            return None
        if self.accept("->"):
            return e
        self.i = start
        return None

    def unit(self) -> Term:
        t = self.tok
        pos = (t.line, t.col)
        if self.accept("("):
            inner = self.term()
            self.expect(")")
            return inner
        if self.accept("skip"):
            return Skip(pos)
        if self.accept("delta"):
            return Delta(pos)
        if t.kind == "id" and t.text not in self.KEYWORDS:
            self.i += 1
            if self.accept(":="):
                return WriteGlobal(t.text, self.expr(allow_index=False), pos)
            args, named = (), ()
            if self.accept("("):
                args, named = self.call_args()
            return _Ref(t.text, args, named, pos)
        self.error(f"unexpected {self.describe(t)}", ["process term"])

    def call_args(self):
        args, named = [], []
        if self.accept(")"):
            return (), ()
        while True:
            if self.tok.kind == "id" and self.peek().text == "=" and self.peek().kind == "op":
                name = self.ident()
                self.expect("=")
                named.append((name, self.expr()))
            else:
                if named:
                    self.error("positional argument after named argument")
                args.append(self.expr())
            if not self.accept(","):
                break
        self.expect(")")
        return tuple(args), tuple(named)


class _RefFixer:
    def __init__(self, actions):
        self.actions = actions

    def __call__(self, t: Term) -> Term:
        if isinstance(t, _Ref):
            if t.name in self.actions:
                if t.named:
                    raise ParseError("actions take positional arguments only", *t.pos)
                return Act(t.name, t.args, t.pos)
            return Call(t.name, t.args, t.named, t.pos)
        if isinstance(t, (Seq, Choice)):
            return type(t)(self(t.left), self(t.right), t.pos)
        if isinstance(t, Cond):
            return Cond(t.guard, self(t.then), None if t.orelse is None else self(t.orelse), t.pos)
        if isinstance(t, Sum):
            return Sum(t.var, t.sort, self(t.body), t.pos)
        if isinstance(t, ReadGlobal):
            return ReadGlobal(t.var, t.bound, self(t.body), t.pos)
        return t


def parse_model(text: str, filename: str = "<input>") -> ModelSource:
    return ModelParser(text, filename).model()


# ---------------------------------------------------------------------------
# pretty printer

_P_CHOICE, _P_SEQC, _P_UNIT = 0, 1, 2


def _expr_paren(e: Expr) -> str:
    from .data import Var
    if isinstance(e, (Lit, Var)):
        return render_expr(e)
    return f"({render_expr(e)})"


def render_term(t: Term, prec: int = _P_CHOICE, indent: int = 0) -> str:
    if isinstance(t, Choice):
        s = f"{render_term(t.left, _P_CHOICE, indent)}\n{'  ' * indent}+ {render_term(t.right, _P_SEQC, indent)}"
        return s if prec <= _P_CHOICE else f"(\n{'  ' * (indent + 1)}{_reindent(s)}\n{'  ' * indent})"
    if isinstance(t, (Sum, ReadGlobal, Cond)):
        if isinstance(t, Sum):
            s = f"sum {t.var}: {t.sort} . {render_term(t.body, _P_SEQC, indent)}"
        elif isinstance(t, ReadGlobal):
            s = f"read {t.var} as {t.bound} . {render_term(t.body, _P_SEQC, indent)}"
        else:
            then = render_term(t.then, _P_SEQC, indent)
            if t.orelse is not None and _ends_open(t.then):
                then = f"({then})"
            s = f"({render_expr(t.guard)}) -> {then}"
            if t.orelse is not None:
                s += f" <> {render_term(t.orelse, _P_SEQC, indent)}"
        return s if prec <= _P_SEQC else f"({s})"
    if isinstance(t, Seq):
        # the left operand is a unit; a Cond/Sum/Read on the left needs parentheses
        s = f"{render_term(t.left, _P_UNIT, indent)} . {render_term(t.right, _P_SEQC, indent)}"
        return s if prec <= _P_SEQC else f"({s})"
    if isinstance(t, Act):
        return t.name + (_args(t.args) if t.args else "")
    if isinstance(t, Call):
        parts = [render_expr(a) for a in t.args] + [f"{n}={render_expr(e)}" for n, e in t.named]
        return t.name + (f"({', '.join(parts)})" if parts else "")
    if isinstance(t, Skip):
        return "skip"
    if isinstance(t, Delta):
        return "delta"
    if isinstance(t, WriteGlobal):
        return f"{t.var} := {_expr_paren(t.value)}"
    raise TypeError(t)


def _ends_open(t: Term) -> bool:
    """True if a following `<>` would be captured by `t`."""
    if isinstance(t, Cond):
        return t.orelse is None or _ends_open(t.orelse)
    if isinstance(t, Seq):
        return _ends_open(t.right)
    if isinstance(t, (Sum, ReadGlobal)):
        return _ends_open(t.body)
    return False


def _reindent(s: str) -> str:
    return s.replace("\n", "\n  ")


def _args(args) -> str:
    return "(" + ", ".join(render_expr(a) for a in args) + ")"


def pretty_print(m: ModelSource) -> str:
    out = []
    for d in m.decls:
        if isinstance(d, SortDecl):
            if isinstance(d.sort, EnumSort) and d.sort.name == d.name:
                out.append(f"sort {d.name} = struct {' | '.join(d.sort.constructors)};")
            else:
                out.append(f"sort {d.name} = {d.sort};")
        elif isinstance(d, ActDecl):
            s = "act " + ", ".join(d.names)
            if d.params:
                s += ": " + " # ".join(str(p) for p in d.params)
            out.append(s + ";")
        elif isinstance(d, GlobDecl):
            out.append(f"glob {d.name}: {d.sort} = {render_expr(d.init)};")
        elif isinstance(d, ConstDecl):
            out.append(f"const {d.name}: {d.sort} = {render_expr(d.value)};")
        elif isinstance(d, ProcDecl):
            head = d.name
            if d.params:
                head += "(" + ", ".join(f"{n}: {s}" for n, s in d.params) + ")"
            out.append(f"proc {head} =\n  {render_term(d.body, _P_CHOICE, 1)};")
    out.append(f"init {render_term(m.init)};")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# type checking

@dataclass
class ProcInfo:
    name: str
    index: int
    params: tuple        # ((name, resolved Sort), ...)
    body: Term           # checked; every Expr resolved


@dataclass
class TypedModel:
    signature: Signature
    procs: dict                  # name -> ProcInfo
    init: Term
    global_names: tuple
    global_init: tuple           # initial values, aligned with global_names
    source: ModelSource

    @property
    def proc_list(self):
        return sorted(self.procs.values(), key=lambda p: p.index)


class _Checker:
    def __init__(self, m: ModelSource):
        self.m = m
        self.sig = Signature()
        self.sig.actions["skip"] = ()
        self.exprs = ExprChecker(self.sig)
        self.proc_decls = {}

    def run(self) -> TypedModel:
        sig = self.sig
        globals_, inits = [], []
        for d in self.m.decls:
            if isinstance(d, SortDecl):
                s = d.sort if isinstance(d.sort, EnumSort) else sig.resolve_sort(d.sort, d.pos)
                self._fresh(d.name, d.pos)
                sig.declare_sort(d.name, s, d.pos)
            elif isinstance(d, ActDecl):
                for n in d.names:
                    if n in sig.actions:
                        raise DuplicateName(f"action `{n}` declared twice", d.pos)
                    sig.actions[n] = tuple(sig.resolve_sort(p, d.pos) for p in d.params)
            elif isinstance(d, (GlobDecl, ConstDecl)):
                self._fresh(d.name, d.pos)
                s = sig.resolve_sort(d.sort, d.pos)
                e, es = self.exprs.check(d.init if isinstance(d, GlobDecl) else d.value, {})
                if not compatible(es, s):
                    raise ModelTypeError(f"`{d.name}` declared {s} but initialised with {es}", d.pos)
                v = eval_expr(e, {})
                if not s.contains(v):
                    raise ModelTypeError(f"value {render_expr(e)} is outside sort {s}", d.pos)
                if isinstance(d, GlobDecl):
                    sig.globals[d.name] = s
                    globals_.append(d.name)
                    inits.append(v)
                else:
                    sig.constants[d.name] = (s, v)
            elif isinstance(d, ProcDecl):
                if d.name in self.proc_decls or d.name in sig.actions:
                    raise DuplicateName(f"process `{d.name}` declared twice", d.pos)
                params = tuple((n, sig.resolve_sort(s, d.pos)) for n, s in d.params)
                if len({n for n, _ in params}) != len(params):
                    raise DuplicateName(f"duplicate parameter in `{d.name}`", d.pos)
                self.proc_decls[d.name] = (d, params)
        procs = {}
        for idx, (name, (d, params)) in enumerate(self.proc_decls.items()):
            body = self.term(d.body, dict(params))
            procs[name] = ProcInfo(name, idx, params, body)
        init = self.term(self.m.init, {})
        tm = TypedModel(sig, procs, init, tuple(globals_), tuple(inits), self.m)
        _check_structure(tm)
        return tm

    def _fresh(self, name, pos):
        sig = self.sig
        if name in sig.sorts or name in sig.globals or name in sig.constants \
                or name in sig.constructors:
            raise DuplicateName(f"`{name}` declared twice", pos)

    def term(self, t: Term, scope: dict) -> Term:
        sig = self.sig
        if isinstance(t, Act):
            if t.name not in sig.actions:
                raise UnknownName(f"unknown action `{t.name}`", t.pos)
            params = sig.actions[t.name]
            if len(params) != len(t.args):
                raise ModelTypeError(f"action `{t.name}` takes {len(params)} arguments, "
                                     f"got {len(t.args)}", t.pos)
            return Act(t.name, self._args(t.args, params, scope, t.name), t.pos)
        if isinstance(t, (Skip, Delta)):
            return t
        if isinstance(t, (Seq, Choice)):
            return type(t)(self.term(t.left, scope), self.term(t.right, scope), t.pos)
        if isinstance(t, Cond):
            g = check_bool(self.exprs, t.guard, scope)
            return Cond(g, self.term(t.then, scope),
                        None if t.orelse is None else self.term(t.orelse, scope), t.pos)
        if isinstance(t, Call):
            if t.name not in self.proc_decls:
                raise UnknownName(f"unknown process or action `{t.name}`", t.pos)
            d, params = self.proc_decls[t.name]
            args = list(t.args)
            if t.named:
                given = dict(t.named)
                if len(given) != len(t.named):
                    raise ModelTypeError(f"repeated named argument in call of `{t.name}`", t.pos)
                names = [n for n, _ in params]
                for n in given:
                    if n not in names:
                        raise ModelTypeError(f"`{t.name}` has no parameter `{n}`", t.pos)
                rest = names[len(args):]
                missing = [n for n in rest if n not in given]
                if missing:
                    raise ModelTypeError(f"call of `{t.name}` misses {', '.join(missing)}", t.pos)
                args += [given[n] for n in rest]
            if len(args) != len(params):
                raise ModelTypeError(f"process `{t.name}` takes {len(params)} arguments, "
                                     f"got {len(args)}", t.pos)
            return Call(t.name, self._args(args, [s for _, s in params], scope, t.name), (), t.pos)
        if isinstance(t, Sum):
            s = sig.resolve_sort(t.sort, t.pos)
            if s.cardinality() is None:
                raise ModelTypeError(f"sum over infinite sort {s}", t.pos)
            return Sum(t.var, s, self.term(t.body, {**scope, t.var: s}), t.pos)
        if isinstance(t, ReadGlobal):
            if t.var not in sig.globals:
                raise UnknownName(f"unknown global variable `{t.var}`", t.pos)
            return ReadGlobal(t.var, t.bound,
                              self.term(t.body, {**scope, t.bound: sig.globals[t.var]}), t.pos)
        if isinstance(t, WriteGlobal):
            if t.var not in sig.globals:
                raise UnknownName(f"unknown global variable `{t.var}`", t.pos)
            e, s = self.exprs.check(t.value, scope)
            if not compatible(s, sig.globals[t.var]):
                raise ModelTypeError(f"assigning {s} to `{t.var}` of sort {sig.globals[t.var]}",
                                     t.pos)
            return WriteGlobal(t.var, e, t.pos)
        raise TypeError(t)

    def _args(self, args, sorts, scope, what):
        out = []
        for a, s in zip(args, sorts):
            e, es = self.exprs.check(a, scope)
            if not compatible(es, s):
                raise ModelTypeError(f"argument `{render_expr(a)}` of `{what}` has sort {es}, "
                                     f"expected {s}", getattr(a, "pos", None))
            out.append(e)
        return tuple(out)


def typecheck(m: ModelSource) -> TypedModel:
    return _Checker(m).run()


def load_model(text: str, filename: str = "<input>") -> TypedModel:
    return typecheck(parse_model(text, filename))


# ---------------------------------------------------------------------------
# structural checks: termination of sequence operands, guardedness,
# bounded control stack

def _calls(t: Term, pushed: bool, out: list):
    if isinstance(t, Call):
        out.append((t.name, pushed))
    elif isinstance(t, Seq):
        _calls(t.left, True, out)
        _calls(t.right, pushed, out)
    elif isinstance(t, Choice):
        _calls(t.left, pushed, out)
        _calls(t.right, pushed, out)
    elif isinstance(t, Cond):
        _calls(t.then, pushed, out)
        if t.orelse is not None:
            _calls(t.orelse, pushed, out)
    elif isinstance(t, (Sum, ReadGlobal)):
        _calls(t.body, pushed, out)


def _fix(procs, step):
    """Least fixpoint of a per-process boolean property."""
    val = {n: False for n in procs}
    changed = True
    while changed:
        changed = False
        for n, p in procs.items():
            if not val[n] and step(p.body, val):
                val[n] = changed = True
    return val


def _can_terminate(t, val):
    if isinstance(t, (Act, Skip, WriteGlobal)):
        return True
    if isinstance(t, Delta):
        return False
    if isinstance(t, Seq):
        return _can_terminate(t.left, val) and _can_terminate(t.right, val)
    if isinstance(t, Choice):
        return _can_terminate(t.left, val) or _can_terminate(t.right, val)
    if isinstance(t, Cond):
        return _can_terminate(t.then, val) or (t.orelse is not None and _can_terminate(t.orelse, val))
    if isinstance(t, Call):
        return val[t.name]
    return _can_terminate(t.body, val)


def _silent(t, val):
    """Can terminate without performing a visible action."""
    if isinstance(t, WriteGlobal):
        return True
    if isinstance(t, (Act, Skip, Delta)):
        return False
    if isinstance(t, Seq):
        return _silent(t.left, val) and _silent(t.right, val)
    if isinstance(t, Choice):
        return _silent(t.left, val) or _silent(t.right, val)
    if isinstance(t, Cond):
        return _silent(t.then, val) or (t.orelse is not None and _silent(t.orelse, val))
    if isinstance(t, Call):
        return val[t.name]
    return _silent(t.body, val)


def _unguarded(t, silent, out):
    if isinstance(t, Call):
        out.add(t.name)
    elif isinstance(t, Seq):
        _unguarded(t.left, silent, out)
        if _silent(t.left, silent):
            _unguarded(t.right, silent, out)
    elif isinstance(t, Choice):
        _unguarded(t.left, silent, out)
        _unguarded(t.right, silent, out)
    elif isinstance(t, Cond):
        _unguarded(t.then, silent, out)
        if t.orelse is not None:
            _unguarded(t.orelse, silent, out)
    elif isinstance(t, (Sum, ReadGlobal)):
        _unguarded(t.body, silent, out)


def _seq_lefts(t, out):
    if isinstance(t, Seq):
        out.append(t)
        _seq_lefts(t.left, out)
        _seq_lefts(t.right, out)
    elif isinstance(t, Choice):
        _seq_lefts(t.left, out)
        _seq_lefts(t.right, out)
    elif isinstance(t, Cond):
        _seq_lefts(t.then, out)
        if t.orelse is not None:
            _seq_lefts(t.orelse, out)
    elif isinstance(t, (Sum, ReadGlobal)):
        _seq_lefts(t.body, out)


def _reach(graph, start):
    seen, todo = set(), [start]
    while todo:
        n = todo.pop()
        for m in graph.get(n, ()):
            if m not in seen:
                seen.add(m)
                todo.append(m)
    return seen


def _check_structure(tm: TypedModel):
    procs = tm.procs
    term_ok = _fix(procs, _can_terminate)
    silent = _fix(procs, _silent)
    bodies = [(p.name, p.body) for p in procs.values()] + [("init", tm.init)]
    for owner, body in bodies:
        seqs = []
        _seq_lefts(body, seqs)
        for s in seqs:
            if not _can_terminate(s.left, term_ok):
                raise ModelTypeError(f"in `{owner}`: left operand of `.` can never terminate",
                                     s.pos)
    guard_graph = {}
    for p in procs.values():
        out = set()
        _unguarded(p.body, silent, out)
        guard_graph[p.name] = out
    for name in procs:
        if name in _reach(guard_graph, name):
            raise ModelTypeError(f"unguarded recursion through `{name}`", procs[name].body.pos)
    calls = {}
    pushes = []
    for p in procs.values():
        cs = []
        _calls(p.body, False, cs)
        calls[p.name] = {c for c, _ in cs}
        pushes += [(p.name, c) for c, pushed in cs if pushed]
    for src, dst in pushes:
        if src == dst or src in _reach(calls, dst):
            raise ModelTypeError(f"unbounded recursion: `{dst}` is called from `{src}` before a "
                                 f"sequential continuation and can reach `{src}` again")
