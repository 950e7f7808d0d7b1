"""Action descriptions and their translation into time-indexed logic programs.

A system description lists causal laws, state constraints and
executability conditions over fluents and actions. ``translate_al``
turns it, plus a history of observations and actions, into a program
over ``holds(F, I)`` and ``occurs(A, I)`` for steps ``0..horizon``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .parser import parse_program, parse_rule
from .terms import Atom, BinOp, Const, Func, Lit, Program, ProgramError, Rule, Var

STEP = "I"


@dataclass(frozen=True)
class CausalLaw:
    action: str
    effect: str
    conditions: tuple = ()


@dataclass(frozen=True)
class StateConstraint:
    head: str  # a fluent literal, or "" for a constraint
    body: tuple = ()


@dataclass(frozen=True)
class Executability:
    action: str
    conditions: tuple = ()


@dataclass
class SystemDescription:
    """Sorted signature plus the laws of a dynamic domain.

    ``inertial``, ``defined`` and ``open`` hold compound sort patterns
    such as ``"on(object, location)"``; ``actions`` likewise. Literals
    in laws are written in plain program syntax without a time argument.
    """

    signature: str
    inertial: tuple = ()
    defined: tuple = ()
    open: tuple = ()
    actions: tuple = ()
    causal_laws: list = field(default_factory=list)
    state_constraints: list = field(default_factory=list)
    executability: list = field(default_factory=list)
    static_rules: str = ""

    @property
    def fluent_preds(self) -> frozenset:
        return frozenset(_pattern_name(p) for p in self.inertial + self.defined + self.open)

    @property
    def action_names(self) -> frozenset:
        return frozenset(_pattern_name(p) for p in self.actions)


@dataclass
class History:
    observations: list = field(default_factory=list)  # (fluent text, bool, step)
    happened: list = field(default_factory=list)  # (action text, step)

    def initial(self, fluent: str, value: bool = True) -> "History":
        self.observations.append((fluent, value, 0))
        return self


def _pattern_name(p: str) -> str:
    return p.split("(", 1)[0].strip()


def _body_of(items) -> Rule:
    """Parse a comma-separated list of body items into a rule with an empty head."""
    if not items:
        return Rule(None)
    return parse_rule(":- " + ", ".join(items) + ".")


def _lit_atom(text: str) -> Atom:
    r = parse_rule(text.strip().rstrip(".") + ".")
    if r.body or r.cmps or r.head is None:
        raise ProgramError(f"expected a single literal, got {text!r}")
    return r.head


def _atom_term(a: Atom):
    return Func(a.pred, a.args) if a.args else Const(a.pred)


def _temporal(a: Atom, fluents, step) -> Atom:
    if a.pred in fluents:
        return Atom("holds", (_atom_term(a), step), a.neg)
    return a


def temporalize(rule: Rule, fluents, step=Var(STEP)) -> Rule:
    """Wrap every fluent literal of ``rule`` in ``holds(., step)``."""
    head = _temporal(rule.head, fluents, step) if rule.head is not None else None
    body = tuple(Lit(_temporal(b.atom, fluents, step), b.naf) for b in rule.body)
    return Rule(head, body, rule.cmps, rule.kind, rule.line)


def _next(step=Var(STEP)):
    return BinOp("+", step, Const(1))


def _sort_block(sd: SystemDescription, horizon: int) -> str:
    lines = [sd.signature, f"#sort step = 0..{horizon}.", "#sort boolean = {true, false}.", "#sort fluent."]
    for kind, pats in (("inertial_fluent", sd.inertial), ("defined_fluent", sd.defined),
                       ("open_fluent", sd.open)):
        if pats:
            lines.append(f"#sort {kind} : fluent = {{{', '.join(pats)}}}.")
    lines.append(f"#sort action = {{{', '.join(sd.actions)}}}.")
    lines += [
        "#pred holds(fluent, step).",
        "#pred occurs(action, step).",
        "#pred obs(fluent, boolean, step).",
        "#pred hpd(action, step).",
    ]
    if sd.inertial:
        lines.append("#pred is_inertial(inertial_fluent).")
    if sd.defined:
        lines.append("#pred is_defined(defined_fluent).")
    return "\n".join(lines) + "\n"


def law_rules(sd: SystemDescription) -> list[Rule]:
    """The time-indexed counterparts of the causal laws, state constraints and executability conditions."""
    fl = sd.fluent_preds
    i = Var(STEP)
    out = []
    for law in sd.causal_laws:
        cond = temporalize(_body_of(law.conditions), fl, i)
        eff = _temporal(_lit_atom(law.effect), fl, _next(i))
        occ = Lit(Atom("occurs", (_atom_term(_lit_atom(law.action)), i)))
        out.append(Rule(eff, (occ,) + cond.body, cond.cmps))
    for sc in sd.state_constraints:
        body = temporalize(_body_of(sc.body), fl, i)
        head = _temporal(_lit_atom(sc.head), fl, i) if sc.head else None
        out.append(Rule(head, body.body, body.cmps))
    for ex in sd.executability:
        body = temporalize(_body_of(ex.conditions), fl, i)
        head = Atom("occurs", (_atom_term(_lit_atom(ex.action)), i), neg=True)
        out.append(Rule(head, body.body, body.cmps))
    return out


GENERAL = """
is_inertial(F).
holds(F, I+1) :- is_inertial(F), holds(F, I), not -holds(F, I+1).
-holds(F, I+1) :- is_inertial(F), -holds(F, I), not holds(F, I+1).
"""
DEFINED_CWA = "is_defined(F).\n-holds(F, I) :- is_defined(F), not holds(F, I).\n"
HISTORY_RULES = """
-occurs(A, I) :- not occurs(A, I).
occurs(A, I) :- hpd(A, I).
holds(F, 0) :- obs(F, true, 0).
-holds(F, 0) :- obs(F, false, 0).
:- obs(F, true, I), -holds(F, I).
:- obs(F, false, I), holds(F, I).
"""
REPAIR_RULES = """
holds(F, 0) :+ is_inertial(F).
-holds(F, 0) :+ is_inertial(F).
"""

_TERM_RE = re.compile(r"^\s*([a-z][A-Za-z0-9_]*)")


def _check_history(sd: SystemDescription, history: History, horizon: int) -> None:
    fl, acts = sd.fluent_preds, sd.action_names
    for text, _, step in history.observations:
        m = _TERM_RE.match(text)
        if not m or m.group(1) not in fl:
            raise ProgramError(f"unknown fluent in history: {text}")
        if not 0 <= step <= horizon:
            raise ProgramError(f"observation step {step} outside 0..{horizon}")
    for text, step in history.happened:
        m = _TERM_RE.match(text)
        if not m or m.group(1) not in acts:
            raise ProgramError(f"unknown action in history: {text}")
        if not 0 <= step < horizon:
            raise ProgramError(f"action step {step} outside 0..{horizon - 1}")


def history_facts(history: History) -> list[str]:
    out = [f"obs({f.strip()}, {'true' if v else 'false'}, {s})." for f, v, s in history.observations]
    out += [f"hpd({a.strip()}, {s})." for a, s in history.happened]
    return out


def translate_al(sd: SystemDescription, history: History | None = None, horizon: int = 1,
                 repair: bool = True, extra_rules=()) -> Program:
    """Program describing every trajectory of length ``horizon`` consistent with ``history``.

    ``extra_rules`` are additional state constraints (rules without a
    time argument, e.g. learned axioms); they are temporalized.
    """
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    history = history or History()
    _check_history(sd, history, horizon)
    base = parse_program(_sort_block(sd, horizon))
    text = sd.static_rules + "\n"
    if sd.inertial:
        text += GENERAL
        if repair:
            text += REPAIR_RULES
    if sd.defined:
        text += DEFINED_CWA
    text += HISTORY_RULES + "\n".join(history_facts(history)) + "\n"
    prog = parse_program(text, base)
    fl = sd.fluent_preds
    prog.rules.extend(law_rules(sd))
    prog.rules.extend(temporalize(r, fl) for r in extra_rules)
    return prog
