"""Sort-directed instantiation of programs into ground rules.

Every variable ranges over the sort of each argument position it
occupies; a substitution is kept only when every instantiated argument
belongs to its declared sort and every comparison holds. Programs
without predicate declarations are grounded over their Herbrand
universe instead.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .terms import (Atom, BinOp, Cmp, Const, Func, Lit, Program, ProgramError, Rule, Var, fmt_atom,
                    fmt_value, term_vars)

DEFAULT_LIMIT = 200_000
AUX_PREFIX = "aux__"
HERBRAND = "__herbrand"


class GroundingError(RuntimeError):
    pass


@dataclass(frozen=True, slots=True)
class GroundRule:
    head: int  # -1 for constraints
    pos: tuple
    neg: tuple
    kind: str = "regular"  # regular, cr, or consistency
    origin: int = -1


@dataclass
class GroundProgram:
    atoms: list[str] = field(default_factory=list)
    index: dict[str, int] = field(default_factory=dict)
    rules: list[GroundRule] = field(default_factory=list)
    source: list[Rule] = field(default_factory=list)

    def atom(self, text: str) -> int:
        i = self.index.get(text)
        if i is None:
            i = len(self.atoms)
            self.atoms.append(text)
            self.index[text] = i
        return i

    def add(self, head: str | None, pos=(), neg=(), kind="regular", origin=-1) -> None:
        h = self.atom(head) if head is not None else -1
        self.rules.append(GroundRule(h, tuple(self.atom(a) for a in pos), tuple(self.atom(a) for a in neg),
                                     kind, origin))

    def add_consistency(self) -> None:
        """Add ``:- p, -p`` for every complementary pair of atoms."""
        for text in list(self.atoms):
            if text.startswith("-") and text[1:] in self.index:
                self.rules.append(GroundRule(-1, (self.index[text[1:]], self.index[text]), (), "consistency"))

    def rule_text(self, r: GroundRule) -> str:
        body = [self.atoms[a] for a in r.pos] + ["not " + self.atoms[a] for a in r.neg]
        head = self.atoms[r.head] if r.head >= 0 else ""
        if r.kind == "cr":
            return f"{head} :+ {', '.join(body)}."
        if not body:
            return f"{head}."
        return f"{head} :- {', '.join(body)}." if head else f":- {', '.join(body)}."

    def text(self) -> str:
        return "\n".join(self.rule_text(r) for r in self.rules if r.kind != "consistency") + "\n"

    @property
    def regular_rules(self) -> list[GroundRule]:
        return [r for r in self.rules if r.kind != "cr"]


# ---------------------------------------------------------------- term evaluation

def evaluate(t, b: dict):
    if isinstance(t, Var):
        return b[t.name]
    if isinstance(t, Const):
        return t.value
    if isinstance(t, Func):
        return (t.name,) + tuple(evaluate(a, b) for a in t.args)
    left, right = evaluate(t.left, b), evaluate(t.right, b)
    if not (isinstance(left, int) and isinstance(right, int)):
        raise GroundingError(f"arithmetic on non-integer terms in {t}")
    if t.op == "+":
        return left + right
    if t.op == "-":
        return left - right
    return left * right


def compare(op: str, x, y) -> bool:
    if op == "=":
        return x == y
    if op == "!=":
        return x != y
    if not (isinstance(x, int) and isinstance(y, int)):
        raise GroundingError(f"ordering comparison {op} needs integers, got {fmt_value(x)} and {fmt_value(y)}")
    return {"<": x < y, "<=": x <= y, ">": x > y, ">=": x >= y}[op]


def _match(pattern, value, b: dict, bound: list) -> bool:
    if isinstance(pattern, Var):
        if pattern.name in b:
            return b[pattern.name] == value
        b[pattern.name] = value
        bound.append(pattern.name)
        return True
    if isinstance(pattern, Const):
        return pattern.value == value
    if isinstance(pattern, Func):
        if not (isinstance(value, tuple) and value[0] == pattern.name and len(value) == len(pattern.args) + 1):
            return False
        return all(_match(p, v, b, bound) for p, v in zip(pattern.args, value[1:]))
    return evaluate(pattern, b) == value


# ---------------------------------------------------------------- local variables under default negation

def rewrite_local_negation(program: Program) -> tuple[list[tuple[Rule, int]], dict[str, tuple]]:
    """Replace ``not p(X, Y)`` with a fresh ``not aux(X)`` when Y occurs nowhere else in the rule.

    Variables that appear in a comparison are not local.

    The auxiliary predicate is defined by ``aux(X) :- p(X, Y)``, which
    gives the negated literal the reading "there is no Y such that p(X, Y)".
    """
    out: list[tuple[Rule, int]] = []
    schemas: dict[str, tuple] = {}
    for ri, rule in enumerate(program.rules):
        body = list(rule.body)
        cmps = list(rule.cmps)
        extra: list[Rule] = []
        for k, lit in enumerate(body):
            if not lit.naf:
                continue
            elsewhere = rule.head.variables() if rule.head is not None else set()
            for j, other in enumerate(body):
                if j != k:
                    elsewhere |= other.atom.variables()
            for c in cmps:
                elsewhere |= c.variables()
            own = lit.atom.variables()
            local = own - elsewhere
            if not local:
                continue
            shared = sorted(own & elsewhere, key=lambda v: _first_position(lit.atom, v))
            name = f"{AUX_PREFIX}{ri}_{k}"
            if program.sorted_mode:
                schemas[name] = tuple(_var_sort(program, lit.atom, v, rule) for v in shared)
            aux = Atom(name, tuple(Var(v) for v in shared))
            extra.append(Rule(head=aux, body=(Lit(lit.atom),), line=rule.line))
            body[k] = Lit(aux, naf=True)
        out.append((Rule(rule.head, tuple(body), tuple(cmps), rule.kind, rule.line), ri))
        out.extend((r, ri) for r in extra)
    return out, schemas


def _first_position(atom: Atom, var: str) -> int:
    for i, a in enumerate(atom.args):
        if var in term_vars(a):
            return i
    return len(atom.args)


def _sort_within(program: Program, sort: str, term, var: str) -> str | None:
    """Sort of ``var`` inside ``term`` when ``term`` is read as an element of ``sort``."""
    if isinstance(term, Var):
        return sort if term.name == var else None
    if not isinstance(term, Func):
        return None
    for item in program.sorts[sort].items:
        if isinstance(item, tuple) and item and item[0] == "@pattern" and item[1] == term.name \
                and len(item[2]) == len(term.args):
            for argsort, arg in zip(item[2], term.args):
                found = _sort_within(program, argsort, arg, var)
                if found:
                    return found
    for child in program.sorts.values():
        if child.parent == sort:
            found = _sort_within(program, child.name, term, var)
            if found:
                return found
    return None


def _var_sort(program: Program, atom: Atom, var: str, rule: Rule) -> str:
    for i, a in enumerate(atom.args):
        found = _sort_within(program, program.preds[atom.pred][i], a, var)
        if found:
            return found
    raise ProgramError(f"cannot determine the sort of {var} under default negation", rule.line)


# ---------------------------------------------------------------- grounding

class _Sorts:
    def __init__(self, program: Program):
        self.program = program
        self.lists: dict[str, list] = {}
        self.sets: dict[str, set] = {}

    def get(self, name: str):
        if name not in self.lists:
            elems = self.program.sort_elements(name)
            if not elems:
                raise GroundingError(f"sort {name!r} has no constants")
            self.lists[name] = elems
            self.sets[name] = set(elems)
        return self.lists[name], self.sets[name]


def _herbrand(program: Program) -> list:
    seen: dict = {}

    def visit(t):
        if isinstance(t, Const):
            seen[t.value] = None
        elif isinstance(t, Func) and not term_vars(t):
            seen[evaluate(t, {})] = None
            for a in t.args:
                visit(a)
        elif isinstance(t, Func):
            for a in t.args:
                visit(a)

    for r in program.rules:
        atoms = ([r.head] if r.head is not None else []) + [b.atom for b in r.body]
        for a in atoms:
            for t in a.args:
                visit(t)
        for c in r.cmps:
            visit(c.left)
            visit(c.right)
    return list(seen)


def _plan_items(rule: Rule, schemas: dict, sorted_mode: bool, sorts: _Sorts, herbrand):
    """Order argument generators so each binds as much as possible as early as possible."""
    raw = []
    if sorted_mode:
        atoms = ([rule.head] if rule.head is not None else []) + [b.atom for b in rule.body]
        for a in atoms:
            sig = schemas.get(a.pred)
            if sig is None:
                if a.args:
                    raise ProgramError(f"undeclared predicate {a.pred}", rule.line)
                continue
            for t, s in zip(a.args, sig):
                raw.append((t, s))
    else:
        raw = [(Var(v), HERBRAND) for v in sorted(rule.variables())]
    raw = list(dict.fromkeys(raw))

    def domain(s):
        return herbrand if s == HERBRAND else sorts.get(s)

    ordered, bound = [], set()
    pending = raw[:]
    while pending:
        best, best_key = None, None
        for it in pending:
            t, s = it
            free = term_vars(t) - bound
            if free and isinstance(t, BinOp):
                continue
            key = (1 if free else 0, len(domain(s)[0]))
            if best_key is None or key < best_key:
                best, best_key = it, key
        if best is None:
            names = sorted(set().union(*(term_vars(t) for t, _ in pending)) - bound)
            raise ProgramError(f"cannot infer sorts for variables {', '.join(names)}", rule.line)
        pending.remove(best)
        ordered.append(best)
        bound |= term_vars(best[0])
    unsafe = rule.variables() - bound
    if unsafe:
        raise ProgramError(f"unsafe variables {', '.join(sorted(unsafe))}", rule.line)
    # attach each comparison to the first item after which all its variables are bound
    checks: list[list[Cmp]] = [[] for _ in range(len(ordered) + 1)]
    seen: set = set()
    for c in rule.cmps:
        if not c.variables():
            checks[0].append(c)
    for i, (t, _) in enumerate(ordered):
        seen |= term_vars(t)
        for c in rule.cmps:
            if c.variables() and c.variables() <= seen and not any(c in lst for lst in checks[: i + 1]):
                checks[i + 1].append(c)
    return [(t, domain(s)) for t, s in ordered], checks


def _substitutions(items, checks):
    b: dict = {}
    n = len(items)

    def rec(i):
        for c in checks[i]:
            if not compare(c.op, evaluate(c.left, b), evaluate(c.right, b)):
                return
        if i == n:
            yield b
            return
        t, (elems, elemset) = items[i]
        if not (term_vars(t) - b.keys()):
            if evaluate(t, b) in elemset:
                yield from rec(i + 1)
            return
        for v in elems:
            bound: list = []
            if _match(t, v, b, bound):
                yield from rec(i + 1)
            for name in bound:
                del b[name]

    yield from rec(0)


def _atom_text(a: Atom, b: dict) -> str:
    return fmt_atom(a.pred, tuple(evaluate(t, b) for t in a.args), a.neg)


def ground(program: Program, limit: int = DEFAULT_LIMIT) -> GroundProgram:
    """Instantiate every rule over all sort-consistent substitutions."""
    rules, aux = rewrite_local_negation(program)
    schemas = dict(program.preds)
    schemas.update(aux)
    sorts = _Sorts(program)
    herbrand = None
    if not program.sorted_mode:
        h = _herbrand(program)
        herbrand = (h, set(h))
    gp = GroundProgram(source=list(program.rules))
    seen: set = set()
    for rule, origin in rules:
        items, checks = _plan_items(rule, schemas, program.sorted_mode, sorts, herbrand)
        for b in _substitutions(items, checks):
            head = _atom_text(rule.head, b) if rule.head is not None else None
            pos = tuple(_atom_text(l.atom, b) for l in rule.body if not l.naf)
            neg = tuple(_atom_text(l.atom, b) for l in rule.body if l.naf)
            key = (head, pos, neg, rule.kind)
            if key in seen:
                continue
            seen.add(key)
            gp.add(head, pos, neg, rule.kind, origin)
            if len(gp.rules) > limit:
                raise GroundingError(f"ground program exceeds {limit} rules")
    gp.add_consistency()
    return gp


def ground_text(text: str, limit: int = DEFAULT_LIMIT) -> GroundProgram:
    from .parser import parse_program

    return ground(parse_program(text), limit)
