"""Tokenizer and the expression/sort grammar shared by models and formulas."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Optional

from .data import (
    BOOL, NAT, RAT, Apply, Binary, BoolSort, Index, ListLit, ListSort, Lit,
    NatSort, Quant, Rat, RatSort, Sort, SortRef, SurgeError, Unary, Var,
)


class ParseError(SurgeError):
    def __init__(self, message: str, line: int, col: int,
                 expected: Iterable[str] = (), filename: str = "<input>"):
        self.line, self.col = line, col
        self.expected = sorted(set(expected))
        self.filename = filename
        self.bare = message
        text = f"{filename}:{line}:{col}: {message}"
        if self.expected:
            text += " (expected " + ", ".join(self.expected) + ")"
        super().__init__(text)


@dataclass(frozen=True)
class Token:
    kind: str      # 'id', 'num', 'op', 'eof'
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>%[^\n]*)
  | (?P<num>\d+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op>:=|->|<>|=>|==|!=|<=|>=|&&|\|\||[-+*.,:;()\[\]{}<>!#=|/_])
""", re.VERBOSE)


def tokenize(text: str, filename: str = "<input>") -> list:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line,
                             pos - line_start + 1, filename=filename)
        kind = m.lastgroup
        if kind in ("id", "num", "op"):
            tok_text = m.group()
            if kind == "id" and tok_text == "_":
                kind = "op"
            tokens.append(Token(kind, tok_text, line, pos - line_start + 1))
        chunk = m.group()
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class Backtrack(Exception):
    pass


class Parser:
    """Recursive-descent base: token cursor plus expression and sort rules."""

    KEYWORDS = frozenset({"forall", "exists", "true", "false"})

    def __init__(self, text: str, filename: str = "<input>"):
        self.filename = filename
        self.toks = tokenize(text, filename)
        self.i = 0

    # -- cursor ----------------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("op", "id") and t.text in texts

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"unexpected {self.describe(self.tok)}", [repr(text)])
        t = self.tok
        self.i += 1
        return t

    def ident(self, what: str = "identifier") -> str:
        t = self.tok
        if t.kind != "id":
            self.error(f"unexpected {self.describe(t)}", [what])
        self.i += 1
        return t.text

    def number(self) -> int:
        t = self.tok
        if t.kind != "num":
            self.error(f"unexpected {self.describe(t)}", ["number"])
        self.i += 1
        return int(t.text)

    @staticmethod
    def describe(t: Token) -> str:
        return "end of input" if t.kind == "eof" else repr(t.text)

    def error(self, message: str, expected: Iterable[str] = (), tok: Optional[Token] = None):
        t = tok or self.tok
        raise ParseError(message, t.line, t.col, expected, self.filename)

    def pos(self):
        return (self.tok.line, self.tok.col)

    # -- sorts -------------------------------------------------------------
    def sort(self) -> Sort:
        name = self.ident("sort")
        if name == "Bool":
            return BOOL
        if name == "Nat":
            if self.accept("("):
                bound = self.number()
                self.expect(")")
                return NatSort(bound)
            return NAT
        if name == "Rat":
            if self.accept("{"):
                vals = [self.rat_literal()]
                while self.accept(","):
                    vals.append(self.rat_literal())
                self.expect("}")
                return RatSort(tuple(sorted(set(vals))))
            return RAT
        if name == "List":
            self.expect("(")
            elem = self.sort()
            length = None
            if self.accept(","):
                length = self.number()
            self.expect(")")
            return ListSort(elem, length)
        return SortRef(name)

    def rat_literal(self) -> Rat:
        neg = self.accept("-")
        e = self.expr_atom()
        if not isinstance(e, Lit) or not isinstance(e.value, Rat):
            self.error("expected a rational literal such as 350/100")
        return Rat(-e.value.num) if neg else e.value

    # -- expressions -------------------------------------------------------
    # `allow_index` is cleared where a '.' after an expression belongs to the
    # surrounding grammar (process sequencing); parentheses re-enable it.
    def expr(self, allow_index: bool = True):
        if self.at("forall", "exists"):
            pos = self.pos()
            kind = self.tok.text
            self.i += 1
            binders = self.binders()
            self.expect(".")
            body = self.expr(allow_index)
            return Quant(kind, binders, body, pos)
        return self.expr_binary(1, allow_index)

    def binders(self) -> tuple:
        out = []
        while True:
            names = [self.ident("variable")]
            while self.accept(","):
                names.append(self.ident("variable"))
            self.expect(":")
            s = self.sort()
            out.extend((n, s) for n in names)
            if not self.accept(","):
                return tuple(out)

    _LEVELS = {1: ("=>",), 2: ("||",), 3: ("&&",), 4: ("==", "!="),
               5: ("<", "<=", ">", ">="), 6: ("+", "-")}

    def expr_binary(self, level: int, allow_index: bool):
        if level > 6:
            return self.expr_unary(allow_index)
        left = self.expr_binary(level + 1, allow_index)
        ops = self._LEVELS[level]
        if level == 1:
            if self.tok.kind == "op" and self.tok.text == "=>":
                pos = self.pos()
                self.i += 1
                right = self.expr_quant_or(1, allow_index)
                return Binary("=>", left, right, pos)
            return left
        while self.tok.kind == "op" and self.tok.text in ops:
            if level == 5 and self.tok.text == "<" and self.comparison_blocked():
                break
            if level == 5 and self.tok.text == ">" and self.comparison_blocked():
                break
            # in process context a bare '+' is choice; arithmetic needs parentheses
            if level == 6 and self.tok.text == "+" and not allow_index:
                break
            pos = self.pos()
            op = self.tok.text
            self.i += 1
            right = self.expr_quant_or(level + 1, allow_index)
            left = Binary(op, left, right, pos)
        return left

    def comparison_blocked(self) -> bool:
        """Hook for grammars where '<' / '>' also delimit modalities."""
        return False

    def expr_quant_or(self, level: int, allow_index: bool):
        # a quantifier may appear as the right operand of any binary operator
        if self.at("forall", "exists"):
            return self.expr(allow_index)
        return self.expr_binary(level, allow_index)

    def expr_unary(self, allow_index: bool):
        if self.tok.kind == "op" and self.tok.text in ("!", "-", "#"):
            pos = self.pos()
            op = self.tok.text
            self.i += 1
            arg = self.expr_unary(allow_index)
            if op == "-" and isinstance(arg, Lit) and isinstance(arg.value, Rat):
                return Lit(Rat(-arg.value.num), pos)
            return Unary(op, arg, pos)
        return self.expr_postfix(allow_index)

    def expr_postfix(self, allow_index: bool):
        e = self.expr_atom()
        while allow_index and self.at(".") and self.peek().kind in ("num", "id") \
                and self.peek().text not in self.KEYWORDS:
            pos = self.pos()
            self.i += 1
            t = self.tok
            self.i += 1
            idx = Lit(int(t.text), pos) if t.kind == "num" else Var(t.text, pos)
            e = Index(e, idx, pos)
        return e

    def expr_atom(self):
        t = self.tok
        pos = (t.line, t.col)
        if t.kind == "num":
            self.i += 1
            n = int(t.text)
            if self.at("/") and self.peek().kind == "num":
                self.i += 1
                d = self.number()
                try:
                    return Lit(Rat.parse(n, d), pos)
                except ValueError as exc:
                    self.error(str(exc), tok=t)
            return Lit(n, pos)
        if t.kind == "id":
            if t.text == "true":
                self.i += 1
                return Lit(True, pos)
            if t.text == "false":
                self.i += 1
                return Lit(False, pos)
            if t.text in self.KEYWORDS:
                self.error(f"unexpected keyword {t.text!r}", ["expression"])
            self.i += 1
            if self.at("(") and self.applies_allowed():
                self.i += 1
                args = self.expr_list(")")
                return Apply(t.text, args, pos)
            return Var(t.text, pos)
        if self.accept("("):
            e = self.expr(True)
            self.expect(")")
            return e
        if self.accept("["):
            return ListLit(self.expr_list("]"), pos)
        self.error(f"unexpected {self.describe(t)}", ["expression"])

    def applies_allowed(self) -> bool:
        return False

    def expr_list(self, close: str) -> tuple:
        items = []
        if not self.accept(close):
            items.append(self.expr(True))
            while self.accept(","):
                items.append(self.expr(True))
            self.expect(close)
        return tuple(items)


def parse_expr(text: str):
    p = Parser(text)
    e = p.expr()
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.describe(p.tok)}", ["end of input"])
    return e


def parse_value(text: str, constructors=None):
    """Parse a literal value (used for LTS labels and scenario files)."""
    from .data import EnumVal, eval_expr
    e = parse_expr(text)
    return literal_value(e, constructors)


def literal_value(e, constructors=None):
    from .data import EnumVal
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Var):
        if constructors is not None and e.name in constructors:
            return constructors[e.name]
        return EnumVal("", e.name)
    if isinstance(e, ListLit):
        return tuple(literal_value(x, constructors) for x in e.items)
    raise ParseError("expected a literal value", *(e.pos or (0, 0)))
