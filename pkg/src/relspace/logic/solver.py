"""Stable-model computation over ground programs."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from . import _kernels
from .grounder import AUX_PREFIX, GroundProgram, GroundRule

BRUTE_FORCE_MAX_ATOMS = 16
DEFAULT_NODE_LIMIT = 5_000_000
_APPL = "appl__"
_NAPPL = "nappl__"


class SolverError(RuntimeError):
    """The search budget ran out before enumeration finished."""


class Inconsistent(RuntimeError):
    """No answer set exists even with every consistency-restoring rule applied."""


@dataclass(frozen=True)
class AnswerSet:
    literals: frozenset
    applied_cr: tuple = ()

    def __contains__(self, lit: str) -> bool:
        return lit in self.literals

    def visible(self) -> list[str]:
        return sorted(a for a in self.literals if not a.startswith((AUX_PREFIX, _APPL, _NAPPL)))

    def __str__(self):
        return "{" + ", ".join(self.visible()) + "}"


@dataclass
class SolveStats:
    atoms: int = 0
    rules: int = 0
    choices: int = 0
    backend: str = _kernels.BACKEND
    cr_budget: int = 0
    notes: list = field(default_factory=list)


def _sort_models(models: list[AnswerSet]) -> list[AnswerSet]:
    return sorted(models, key=lambda m: (len(m.literals), sorted(m.literals), m.applied_cr))


# ---------------------------------------------------------------- reduct and least model

def check_consistent(atoms: list[str], candidate) -> None:
    names = {atoms[a] if isinstance(a, int) else a for a in candidate}
    for lit in names:
        if lit.startswith("-") and lit[1:] in names:
            raise ValueError(f"inconsistent candidate: contains {lit[1:]} and {lit}")


def reduct(gp: GroundProgram, candidate) -> list[GroundRule]:
    """Gelfond-Lifschitz reduct of the regular rules with respect to ``candidate`` (atom texts)."""
    check_consistent(gp.atoms, candidate)
    cand = {gp.index[a] for a in candidate if a in gp.index}
    out = []
    for r in gp.rules:
        if r.kind == "cr":
            continue
        if any(a in cand for a in r.neg):
            continue
        out.append(GroundRule(r.head, r.pos, (), r.kind, r.origin))
    return out


def least_model(rules: list[GroundRule]) -> set[int] | None:
    """Least model of a positive program; ``None`` when a constraint fires."""
    model: set[int] = set()
    watch: dict[int, list[int]] = {}
    missing = []
    agenda = []
    for i, r in enumerate(rules):
        need = set(r.pos)
        missing.append(len(need))
        for a in need:
            watch.setdefault(a, []).append(i)
        if not need:
            agenda.append(i)
    while agenda:
        r = rules[agenda.pop()]
        if r.head < 0:
            return None
        if r.head in model:
            continue
        model.add(r.head)
        for i in watch.get(r.head, ()):
            missing[i] -= 1
            if missing[i] == 0:
                agenda.append(i)
    return model


def is_stable(gp: GroundProgram, candidate) -> bool:
    try:
        red = reduct(gp, candidate)
    except ValueError:
        return False
    lm = least_model(red)
    return lm is not None and {gp.atoms[a] for a in lm} == set(candidate)


def brute_force_answer_sets(gp: GroundProgram) -> list[AnswerSet]:
    """Check every subset of atoms against the stable-model condition (test oracle)."""
    n = len(gp.atoms)
    if n > BRUTE_FORCE_MAX_ATOMS:
        raise ValueError(f"brute force supports at most {BRUTE_FORCE_MAX_ATOMS} atoms, got {n}")
    out = []
    for size in range(n + 1):
        for combo in combinations(range(n), size):
            cand = [gp.atoms[a] for a in combo]
            if is_stable(gp, cand):
                out.append(AnswerSet(frozenset(cand)))
    return _sort_models(out)


# ---------------------------------------------------------------- search

def _simplify(n_atoms: int, rules: list[GroundRule]):
    """Drop rules that can never fire and default negations that always hold."""
    possible = [False] * n_atoms
    by_atom: dict[int, list[int]] = {}
    missing = []
    agenda = []
    for i, r in enumerate(rules):
        need = set(r.pos)
        missing.append(len(need))
        for a in need:
            by_atom.setdefault(a, []).append(i)
        if not need:
            agenda.append(i)
    while agenda:
        r = rules[agenda.pop()]
        if r.head < 0 or possible[r.head]:
            continue
        possible[r.head] = True
        for i in by_atom.get(r.head, ()):
            missing[i] -= 1
            if missing[i] == 0:
                agenda.append(i)
    kept = []
    for r in rules:
        if all(possible[a] for a in r.pos):
            kept.append(GroundRule(r.head, r.pos, tuple(a for a in r.neg if possible[a]), r.kind, r.origin))
    return possible, kept


def _search(gp: GroundProgram, rules: list[GroundRule], budget_atoms=(), budget_k=-1, max_models=0,
            node_limit=DEFAULT_NODE_LIMIT, priority=None, stats: SolveStats | None = None):
    possible, rules = _simplify(len(gp.atoms), rules)
    live = [a for a in range(len(gp.atoms)) if possible[a]]
    remap = {a: i for i, a in enumerate(live)}
    heads, starts, lits = [], [0], []
    for r in rules:
        heads.append(remap[r.head] if r.head >= 0 else -1)
        lits.extend(2 * remap[a] for a in r.pos)
        lits.extend(2 * remap[a] + 1 for a in r.neg)
        starts.append(len(lits))
    naf = sorted({lit >> 1 for lit in lits if lit & 1})
    if priority is not None:
        naf.sort(key=lambda i: (priority(gp.atoms[live[i]]), i))
    budget = [remap[a] for a in budget_atoms if a in remap]
    init = [2] * len(live)
    if stats is not None:
        stats.atoms, stats.rules, stats.choices = len(live), len(rules), len(naf)
    models, status = _kernels.enumerate_models(len(live), heads, starts, lits, naf, init, budget,
                                               budget_k, max_models, node_limit)
    if status == 2:
        raise SolverError(f"search exceeded {node_limit} decisions")
    return [{gp.atoms[live[i]] for i in m} for m in models], status


def answer_sets(gp: GroundProgram, max_models: int = 0, node_limit: int = DEFAULT_NODE_LIMIT,
                priority=None, stats: SolveStats | None = None) -> list[AnswerSet]:
    """All consistent stable models of the regular part of ``gp`` (CR rules ignored).

    Models are returned sorted by size, then lexicographically.
    """
    models, _ = _search(gp, gp.regular_rules, max_models=max_models, node_limit=node_limit,
                        priority=priority, stats=stats)
    return _sort_models([AnswerSet(frozenset(m)) for m in models])


def solve_with_cr(gp: GroundProgram, max_models: int = 0, node_limit: int = DEFAULT_NODE_LIMIT,
                  priority=None, stats: SolveStats | None = None) -> list[AnswerSet]:
    """Stable models, applying a cardinality-minimal set of CR rules only when needed."""
    plain = answer_sets(gp, max_models, node_limit, priority, stats)
    if plain:
        return plain
    cr = [i for i, r in enumerate(gp.rules) if r.kind == "cr"]
    if not cr:
        raise Inconsistent("program has no answer set and no consistency-restoring rules")
    ext = GroundProgram(list(gp.atoms), dict(gp.index), [r for r in gp.rules if r.kind != "cr"], gp.source)
    appl = {}
    for j, i in enumerate(cr):
        r = gp.rules[i]
        a = ext.atom(f"{_APPL}{j}")
        na = ext.atom(f"{_NAPPL}{j}")
        appl[a] = i
        ext.rules.append(GroundRule(a, (), (na,), "regular"))
        ext.rules.append(GroundRule(na, (), (a,), "regular"))
        ext.rules.append(GroundRule(r.head, r.pos + (a,), r.neg, "regular", r.origin))
    for k in range(1, len(cr) + 1):
        found, _ = _search(ext, ext.rules, budget_atoms=list(appl), budget_k=k, max_models=max_models,
                           node_limit=node_limit, priority=priority, stats=stats)
        if found:
            if stats is not None:
                stats.cr_budget = k
            out = []
            for m in found:
                used = tuple(sorted(gp.rule_text(gp.rules[appl[ext.index[t]]]) for t in m
                                    if t.startswith(_APPL)))
                lits = frozenset(t for t in m if not t.startswith((_APPL, _NAPPL)))
                out.append(AnswerSet(lits, used))
            return _sort_models(out)
    raise Inconsistent("no answer set even with all consistency-restoring rules applied")
