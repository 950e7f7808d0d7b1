"""Abstract syntax for sorted logic programs.

Ground values are plain Python data: ``int`` for integers, ``str`` for
symbolic constants, and ``(name, arg, ...)`` tuples for function terms.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

GroundValue = Union[int, str, tuple]


class ProgramError(ValueError):
    """Malformed program text or an ill-sorted program."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        where = f" at line {line}, column {col}" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.col = col


@dataclass(frozen=True, slots=True)
class Const:
    value: GroundValue

    def __str__(self):
        return fmt_value(self.value)


@dataclass(frozen=True, slots=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True, slots=True)
class Func:
    name: str
    args: tuple

    def __str__(self):
        return f"{self.name}({','.join(str(a) for a in self.args)})"


@dataclass(frozen=True, slots=True)
class BinOp:
    op: str
    left: object
    right: object

    def __str__(self):
        return f"{self.left}{self.op}{self.right}"


Term = Union[Const, Var, Func, BinOp]


@dataclass(frozen=True, slots=True)
class Atom:
    pred: str
    args: tuple = ()
    neg: bool = False

    def __str__(self):
        s = ("-" if self.neg else "") + self.pred
        if self.args:
            s += "(" + ",".join(str(a) for a in self.args) + ")"
        return s

    def complement(self) -> "Atom":
        return Atom(self.pred, self.args, not self.neg)

    def variables(self) -> set[str]:
        out: set[str] = set()
        for a in self.args:
            out |= term_vars(a)
        return out


@dataclass(frozen=True, slots=True)
class Lit:
    atom: Atom
    naf: bool = False

    def __str__(self):
        return ("not " if self.naf else "") + str(self.atom)


@dataclass(frozen=True, slots=True)
class Cmp:
    op: str
    left: object
    right: object

    def __str__(self):
        return f"{self.left} {self.op} {self.right}"

    def variables(self) -> set[str]:
        return term_vars(self.left) | term_vars(self.right)


@dataclass(frozen=True)
class Rule:
    head: Atom | None
    body: tuple = ()
    cmps: tuple = ()
    kind: str = "regular"
    line: int = 0

    def __str__(self):
        parts = [str(b) for b in self.body] + [str(c) for c in self.cmps]
        head = str(self.head) if self.head is not None else ""
        if self.kind == "cr":
            return f"{head} :+ {', '.join(parts)}." if parts else f"{head} :+ ."
        if not parts:
            return f"{head}."
        return f"{head} :- {', '.join(parts)}." if head else f":- {', '.join(parts)}."

    def variables(self) -> set[str]:
        out = self.head.variables() if self.head is not None else set()
        for b in self.body:
            out |= b.atom.variables()
        for c in self.cmps:
            out |= c.variables()
        return out


@dataclass
class SortDef:
    name: str
    parent: str | None = None
    # literal elements: ground values, or ("@pattern", name, argsorts) for compound sorts
    items: list = field(default_factory=list)
    line: int = 0


@dataclass
class Program:
    sorts: dict[str, SortDef] = field(default_factory=dict)
    preds: dict[str, tuple[str, ...]] = field(default_factory=dict)
    consts: dict[str, int] = field(default_factory=dict)
    rules: list[Rule] = field(default_factory=list)

    @property
    def sorted_mode(self) -> bool:
        return bool(self.preds)

    def copy(self) -> "Program":
        return Program(dict(self.sorts), dict(self.preds), dict(self.consts), list(self.rules))

    def extend(self, rules) -> "Program":
        p = self.copy()
        p.rules.extend(rules)
        return p

    def sort_elements(self, name: str, _seen: tuple = ()) -> list:
        """All ground values of a sort, including those of its subsorts, in declaration order."""
        if name not in self.sorts:
            raise ProgramError(f"undeclared sort {name!r}")
        if name in _seen:
            raise ProgramError(f"cyclic sort definition through {name!r}")
        seen = _seen + (name,)
        out: list = []
        for item in self.sorts[name].items:
            if isinstance(item, tuple) and item and item[0] == "@pattern":
                _, fname, argsorts = item
                combos = [()]
                for s in argsorts:
                    combos = [c + (v,) for c in combos for v in self.sort_elements(s, seen)]
                out.extend((fname,) + c for c in combos)
            else:
                out.append(item)
        for child in self.sorts.values():
            if child.parent == name:
                out.extend(self.sort_elements(child.name, seen))
        return list(dict.fromkeys(out))

    def text(self) -> str:
        lines = []
        for s in self.sorts.values():
            head = f"#sort {s.name}" + (f" : {s.parent}" if s.parent else "")
            if s.items:
                elems = []
                for it in s.items:
                    if isinstance(it, tuple) and it and it[0] == "@pattern":
                        elems.append(f"{it[1]}({','.join(it[2])})")
                    else:
                        elems.append(fmt_value(it))
                head += " = {" + ", ".join(elems) + "}"
            lines.append(head + ".")
        for name, sorts in self.preds.items():
            lines.append(f"#pred {name}({', '.join(sorts)})." if sorts else f"#pred {name}.")
        lines.extend(str(r) for r in self.rules)
        return "\n".join(lines) + "\n"


def term_vars(t) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, Func):
        out: set[str] = set()
        for a in t.args:
            out |= term_vars(a)
        return out
    if isinstance(t, BinOp):
        return term_vars(t.left) | term_vars(t.right)
    return set()


def fmt_value(v: GroundValue) -> str:
    if isinstance(v, tuple):
        return f"{v[0]}({','.join(fmt_value(a) for a in v[1:])})"
    return str(v)


def fmt_atom(pred: str, args: tuple, neg: bool = False) -> str:
    s = ("-" if neg else "") + pred
    if args:
        s += "(" + ",".join(fmt_value(a) for a in args) + ")"
    return s


def value_term(v: GroundValue) -> Term:
    if isinstance(v, tuple):
        return Func(v[0], tuple(value_term(a) for a in v[1:]))
    return Const(v)


def rename_vars(rule: Rule, mapping: dict[str, str]) -> Rule:
    def t(x):
        if isinstance(x, Var):
            return Var(mapping.get(x.name, x.name))
        if isinstance(x, Func):
            return Func(x.name, tuple(t(a) for a in x.args))
        if isinstance(x, BinOp):
            return BinOp(x.op, t(x.left), t(x.right))
        return x

    def a(at):
        return Atom(at.pred, tuple(t(x) for x in at.args), at.neg)

    return Rule(
        head=a(rule.head) if rule.head is not None else None,
        body=tuple(Lit(a(b.atom), b.naf) for b in rule.body),
        cmps=tuple(Cmp(c.op, t(c.left), t(c.right)) for c in rule.cmps),
        kind=rule.kind,
        line=rule.line,
    )
