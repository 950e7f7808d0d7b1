"""Iterative-deepening planning on top of the action-description translation."""
from __future__ import annotations

from dataclasses import dataclass

from .al import History, SystemDescription, temporalize, translate_al
from .grounder import ground
from .parser import parse_program, parse_rule
from .solver import SolveStats, answer_sets
from .terms import Atom, Lit, Rule, Var


class NoPlan(RuntimeError):
    """No plan reaches the goal within the horizon bound."""


@dataclass(frozen=True)
class Plan:
    steps: tuple  # ((action text, step), ...) ordered by step

    @property
    def actions(self) -> list[str]:
        return [a for a, _ in self.steps]

    def __len__(self):
        return len(self.steps)

    def __str__(self):
        return "[" + ", ".join(f"{a}@{i}" for a, i in self.steps) + "]"


HELPERS = """
success :- goal(I).
:- not success.
occurs(A, I) :- not -occurs(A, I), not goal(I), I < {n}.
:- occurs(A1, I), occurs(A2, I), A1 != A2.
something_happened(I) :- occurs(A, I).
:- goal(I), goal(I-1), J < I, not something_happened(J).
:- J < {n}, not goal(J), not something_happened(J).
"""


def goal_rule(goal, fluents) -> Rule:
    body = parse_rule(":- " + ", ".join(goal) + ".")
    t = temporalize(body, fluents)
    return Rule(Atom("goal", (Var("I"),)), t.body, t.cmps)


def _priority(text: str):
    # decide actions first, earliest step first
    if text.startswith("occurs("):
        return (0, int(text.rsplit(",", 1)[1][:-1]))
    return (1, 0)


def planning_program(sd: SystemDescription, history: History, goal, horizon: int, extra_rules=()):
    prog = translate_al(sd, history, horizon, repair=False, extra_rules=extra_rules)
    decl = parse_program("#pred goal(step).\n#pred something_happened(step).\n", prog)
    decl.rules.append(goal_rule(goal, sd.fluent_preds))
    return parse_program(HELPERS.format(n=horizon), decl)


def extract_plan(model) -> Plan:
    steps = []
    for lit in model.literals:
        if lit.startswith("occurs("):
            action, step = lit[len("occurs("):-1].rsplit(",", 1)
            steps.append((action, int(step)))
    return Plan(tuple(sorted(steps, key=lambda s: s[1])))


def plan(sd: SystemDescription, history: History, goal, max_horizon: int, extra_rules=(),
         stats: SolveStats | None = None) -> tuple[list[Plan], int]:
    """All plans of minimal length up to ``max_horizon``; returns ``(plans, horizon)``.

    ``goal`` is a list of fluent literals (without time argument).
    """
    if max_horizon < 0:
        raise ValueError("max_horizon must be non-negative")
    goal = list(goal)
    if not goal:
        raise ValueError("goal must contain at least one literal")
    for n in range(max_horizon + 1):
        gp = ground(planning_program(sd, history, goal, n, extra_rules))
        models = answer_sets(gp, priority=_priority, stats=stats)
        if models:
            plans = sorted({extract_plan(m) for m in models}, key=lambda p: [a for a, _ in p.steps])
            return plans, n
    raise NoPlan(f"no plan within {max_horizon} steps")
