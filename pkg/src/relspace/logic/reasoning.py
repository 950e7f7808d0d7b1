"""Label inference for occlusion and stability from scene facts."""
from __future__ import annotations

from dataclasses import dataclass, field

from .grounder import GroundingError, ground
from .parser import parse_program
from .solver import AnswerSet, SolverError, answer_sets
from .terms import Program, ProgramError

POSITIVE, NEGATIVE, UNKNOWN = "positive", "negative", "unknown"
TASKS = {"occlusion": "occluded", "stability": "stable"}


@dataclass
class Inference:
    labels: dict
    models: list = field(default_factory=list)
    diagnosis: str = ""
    fired: set = field(default_factory=set)  # texts of source rules used in some answer set


def _fired(gp, models) -> set:
    out = set()
    for m in models:
        lits = m.literals
        for r in gp.rules:
            if r.origin < 0 or r.head < 0 or r.kind != "regular":
                continue
            if gp.atoms[r.head] in lits and all(gp.atoms[a] in lits for a in r.pos) \
                    and not any(gp.atoms[a] in lits for a in r.neg):
                out.add(str(gp.source[r.origin]))
    return out


def infer(program: Program, relation_facts, attribute_facts, task: str, structures=None,
          node_limit: int = 1_000_000) -> Inference:
    """Labels per object (occlusion) or per structure (stability) with supporting detail.

    ``structures`` maps a structure id to its member object ids; without
    it each object is its own structure.
    """
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}; expected one of {sorted(TASKS)}")
    pred = TASKS[task]
    objects = program.sort_elements("object")
    if task == "occlusion" or structures is None:
        groups = {o: [o] for o in objects}
    else:
        groups = dict(structures)
    facts = "\n".join(f.rstrip(".") + "." for f in list(relation_facts) + list(attribute_facts))
    try:
        full = parse_program(facts, program)
        gp = ground(full)
        models = answer_sets(gp, node_limit=node_limit)
    except (ProgramError, GroundingError, SolverError) as e:
        return Inference({g: UNKNOWN for g in groups}, diagnosis=f"{type(e).__name__}: {e}")
    if not models:
        return Inference({g: UNKNOWN for g in groups}, diagnosis="no answer set")

    def verdict(m: AnswerSet, members):
        if all(f"{pred}({o})" in m for o in members):
            return True
        if any(f"-{pred}({o})" in m for o in members):
            return False
        return None

    labels = {}
    for g, members in groups.items():
        vs = {verdict(m, members) for m in models}
        labels[g] = POSITIVE if vs == {True} else NEGATIVE if vs == {False} else UNKNOWN
    return Inference(labels, models, fired=_fired(gp, models))


def infer_labels(program: Program, relation_facts, attribute_facts, task: str, structures=None) -> dict:
    return infer(program, relation_facts, attribute_facts, task, structures).labels
