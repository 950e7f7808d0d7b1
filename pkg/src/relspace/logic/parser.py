"""Recursive-descent parser for the ``.lp`` program grammar.

    #sort name = {c1, c2, f(sort1, sort2)}.   #sort step = 0..5.
    #sort child : parent [= {...}].
    #pred name(sort, ...).                    #const n = 3.
    head :- body.    :- body.    head :+ body.    fact.
"""
from __future__ import annotations

import re

from .terms import Atom, BinOp, Cmp, Const, Func, Lit, Program, ProgramError, Rule, SortDef, Var

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>%[^\n]*)
  | (?P<directive>\#[a-z]+)
  | (?P<int>\d+)
  | (?P<name>[a-z][A-Za-z0-9_]*)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<op>:-|:\+|\.\.|!=|<=|>=|==|[=<>(),.{}:+\-*])
    """,
    re.VERBOSE,
)

CMP_OPS = {"=", "==", "!=", "<", "<=", ">", ">="}


class _Tokens:
    def __init__(self, text: str):
        self.items: list[tuple[str, str, int, int]] = []
        line, start = 1, 0
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None:
                raise ProgramError(f"unexpected character {text[pos]!r}", line, pos - start + 1)
            kind = m.lastgroup
            if kind == "nl":
                line, start = line + 1, m.end()
            elif kind not in ("ws", "comment"):
                self.items.append((kind, m.group(), line, m.start() - start + 1))
            pos = m.end()
        self.items.append(("eof", "", line, pos - start + 1))
        self.i = 0

    def peek(self, k: int = 0):
        return self.items[min(self.i + k, len(self.items) - 1)]

    def next(self):
        tok = self.items[self.i]
        self.i = min(self.i + 1, len(self.items) - 1)
        return tok

    def at(self, value: str, k: int = 0) -> bool:
        kind, text, _, _ = self.peek(k)
        return kind in ("op", "directive") and text == value

    def expect(self, value: str):
        kind, text, line, col = self.next()
        if text != value or kind not in ("op", "directive"):
            shown = text or "end of input"
            raise ProgramError(f"expected {value!r} but found {shown!r}", line, col)

    def error(self, message: str):
        _, text, line, col = self.peek()
        raise ProgramError(f"{message} (found {text or 'end of input'!r})", line, col)


class _Parser:
    def __init__(self, text: str, program: Program | None):
        self.t = _Tokens(text)
        self.p = program.copy() if program is not None else Program()

    def run(self) -> Program:
        while self.t.peek()[0] != "eof":
            if self.t.peek()[0] == "directive":
                self.directive()
            else:
                self.p.rules.append(self.rule())
        _check(self.p)
        return self.p

    # ---- directives
    def directive(self):
        kind, text, line, col = self.t.next()
        if text == "#sort":
            self.sort_decl(line)
        elif text == "#pred":
            self.pred_decl()
        elif text == "#const":
            name = self.name()
            self.t.expect("=")
            self.p.consts[name] = self.int_value()
            self.t.expect(".")
        else:
            raise ProgramError(f"unknown directive {text}", line, col)

    def sort_decl(self, line):
        name = self.name()
        parent = None
        if self.t.at(":"):
            self.t.next()
            parent = self.name()
            if parent not in self.p.sorts:
                self.t.error(f"undeclared parent sort {parent!r}")
        sd = SortDef(name=name, parent=parent, line=line)
        if self.t.at("="):
            self.t.next()
            sd.items = self.sort_body()
        self.t.expect(".")
        if name in self.p.sorts:
            raise ProgramError(f"sort {name!r} declared twice", line)
        self.p.sorts[name] = sd

    def sort_body(self) -> list:
        if self.t.at("{"):
            self.t.next()
            items: list = []
            while not self.t.at("}"):
                items.extend(self.sort_item())
                if self.t.at(","):
                    self.t.next()
                elif not self.t.at("}"):
                    self.t.error("expected ',' or '}' in sort")
            self.t.next()
            return items
        return self.sort_item()

    def sort_item(self) -> list:
        kind, text, line, col = self.t.peek()
        if kind == "int" or (kind == "name" and text in self.p.consts) or self.t.at("-"):
            lo = self.int_value()
            if self.t.at(".."):
                self.t.next()
                hi = self.int_value()
                return list(range(lo, hi + 1))
            return [lo]
        if kind != "name":
            self.t.error("expected a constant in sort")
        self.t.next()
        if not self.t.at("("):
            return [text]
        self.t.next()
        args = [self.name()]
        while self.t.at(","):
            self.t.next()
            args.append(self.name())
        self.t.expect(")")
        if all(a in self.p.sorts for a in args):
            return [("@pattern", text, tuple(args))]
        return [(text,) + tuple(args)]

    def pred_decl(self):
        name = self.name()
        sorts: tuple = ()
        if self.t.at("("):
            self.t.next()
            sorts = (self.name(),)
            while self.t.at(","):
                self.t.next()
                sorts += (self.name(),)
            self.t.expect(")")
        for s in sorts:
            if s not in self.p.sorts:
                self.t.error(f"undeclared sort {s!r} in predicate {name}")
        self.t.expect(".")
        self.p.preds[name] = sorts

    def name(self) -> str:
        kind, text, line, col = self.t.next()
        if kind != "name":
            raise ProgramError(f"expected a name but found {text or 'end of input'!r}", line, col)
        return text

    def int_value(self) -> int:
        sign = 1
        if self.t.at("-"):
            self.t.next()
            sign = -1
        kind, text, line, col = self.t.next()
        if kind == "int":
            return sign * int(text)
        if kind == "name" and text in self.p.consts:
            return sign * self.p.consts[text]
        raise ProgramError(f"expected an integer but found {text!r}", line, col)

    # ---- rules
    def rule(self) -> Rule:
        line = self.t.peek()[2]
        head = None
        if not self.t.at(":-"):
            head = self.literal()
            if head.naf:
                raise ProgramError("default negation is not allowed in rule heads", line)
            head = head.atom
        if self.t.at("."):
            self.t.next()
            return Rule(head=head, line=line)
        kind = "regular"
        if self.t.at(":+"):
            if head is None:
                self.t.error("a consistency-restoring rule needs a head")
            kind = "cr"
        elif not self.t.at(":-"):
            self.t.error("expected ':-', ':+' or '.'")
        self.t.next()
        body, cmps = [], []
        if not self.t.at("."):
            while True:
                item = self.body_item()
                (cmps if isinstance(item, Cmp) else body).append(item)
                if self.t.at(","):
                    self.t.next()
                    continue
                break
        self.t.expect(".")
        if head is None and not body and not cmps:
            raise ProgramError("empty constraint", line)
        return Rule(head=head, body=tuple(body), cmps=tuple(cmps), kind=kind, line=line)

    def body_item(self):
        kind, text, _, _ = self.t.peek()
        if kind == "name" and text == "not" and (self.t.peek(1)[0] == "name" or self.t.at("-", 1)):
            return self.literal()
        if self.t.at("-") and self.t.peek(1)[0] == "name":
            return self.literal()
        left = self.term()
        if self.t.peek()[0] == "op" and self.t.peek()[1] in CMP_OPS:
            op = self.t.next()[1]
            op = "=" if op == "==" else op
            return Cmp(op, left, self.term())
        return Lit(self._as_atom(left, False))

    def literal(self) -> Lit:
        naf = False
        if self.t.peek()[:2] == ("name", "not"):
            self.t.next()
            naf = True
        neg = False
        if self.t.at("-"):
            self.t.next()
            neg = True
        return Lit(self._as_atom(self.primary(), neg), naf)

    def _as_atom(self, term, neg: bool) -> Atom:
        if isinstance(term, Const) and isinstance(term.value, str):
            return Atom(term.value, (), neg)
        if isinstance(term, Func):
            return Atom(term.name, term.args, neg)
        self.t.error("expected a literal")

    def term(self):
        left = self.primary()
        while self.t.at("+") or self.t.at("-") or self.t.at("*"):
            op = self.t.next()[1]
            left = BinOp(op, left, self.primary())
        return left

    def primary(self):
        kind, text, line, col = self.t.next()
        if kind == "int":
            return Const(int(text))
        if kind == "op" and text == "-" and self.t.peek()[0] == "int":
            return Const(-int(self.t.next()[1]))
        if kind == "var":
            return Var(text)
        if kind == "op" and text == "(":
            inner = self.term()
            self.t.expect(")")
            return inner
        if kind == "name":
            if text in self.p.consts and not self.t.at("("):
                return Const(self.p.consts[text])
            if self.t.at("("):
                self.t.next()
                args = [self.term()]
                while self.t.at(","):
                    self.t.next()
                    args.append(self.term())
                self.t.expect(")")
                return Func(text, tuple(args))
            return Const(text)
        raise ProgramError(f"unexpected token {text or 'end of input'!r}", line, col)


def _check(p: Program) -> None:
    if not p.sorted_mode:
        return
    for r in p.rules:
        atoms = ([r.head] if r.head is not None else []) + [b.atom for b in r.body]
        for a in atoms:
            if not a.args:
                continue
            if a.pred not in p.preds:
                raise ProgramError(f"undeclared predicate {a.pred}/{len(a.args)}", r.line)
            if len(p.preds[a.pred]) != len(a.args):
                raise ProgramError(
                    f"arity mismatch for {a.pred}: declared {len(p.preds[a.pred])}, used {len(a.args)}", r.line
                )


def parse_program(text: str, base: Program | None = None) -> Program:
    """Parse program text, optionally extending the declarations and rules of ``base``."""
    return _Parser(text, base).run()


def parse_rule(text: str, base: Program | None = None) -> Rule:
    p = _Parser(text, base)
    rule = p.rule()
    if p.t.peek()[0] != "eof":
        p.t.error("trailing input after rule")
    return rule
