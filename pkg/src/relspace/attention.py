"""Select task-relevant axioms and the object subsets they talk about."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .logic.reasoning import TASKS
from .logic.terms import Const, Program

MAX_MEMBERS = 5


@dataclass(frozen=True)
class RegionOfInterest:
    members: tuple
    task: str
    triggers: tuple = ()
    bbox: tuple | None = None  # (lo xyz, hi xyz)

    def to_dict(self) -> dict:
        out = {"members": list(self.members), "task": self.task, "triggers": list(self.triggers)}
        if self.bbox is not None:
            out["bbox"] = [list(map(float, self.bbox[0])), list(map(float, self.bbox[1]))]
        return out


def _rules(program):
    return program.rules if isinstance(program, Program) else list(program)


def relevant_axioms(program, task: str) -> list:
    """Rules with ``stable``/``occluded`` (either polarity) in the head, for the given task."""
    pred = TASKS.get(task, task)
    return [r for r in _rules(program) if r.head is not None and r.head.pred == pred]


def body_relations(axioms, relation_names=None) -> set[str]:
    """Relation names and attribute predicates mentioned in axiom bodies."""
    out: set[str] = set()
    for r in axioms:
        for lit in r.body:
            a = lit.atom
            if a.pred == "obj_relation" and a.args:
                if isinstance(a.args[0], Const):
                    out.add(str(a.args[0].value))
                elif relation_names:
                    out.update(relation_names)
            else:
                out.add(a.pred)
    return out


def parse_relation(fact: str):
    """``obj_relation(rel,A,B)`` -> (rel, A, B); anything else -> None."""
    f = fact.strip().rstrip(".")
    if not f.startswith("obj_relation("):
        return None
    rel, a, b = (s.strip() for s in f[len("obj_relation("):-1].split(","))
    return rel, a, b


def extract_rois(scene_relations, relevant_relations, task: str, positions=None, boxes=None) -> list[RegionOfInterest]:
    """Connected components of the graph whose edges are relevant relation instances.

    ``positions`` (id -> xyz) chooses which members to keep when a
    component exceeds the size cap; ``boxes`` (id -> (lo, hi)) gives
    each region a bounding box.
    """
    relevant = set(relevant_relations)
    parent: dict = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    edges = []
    for fact in scene_relations:
        p = parse_relation(fact)
        if p is None or p[0] not in relevant or p[1] == p[2]:
            continue
        rel, a, b = p
        for x in (a, b):
            parent.setdefault(x, x)
        edges.append((a, b, f"obj_relation({rel},{a},{b})"))
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    comps: dict = {}
    for a, b, text in edges:
        comps.setdefault(find(a), []).append(text)
    out = []
    for root in sorted(comps):
        members = sorted(x for x in parent if find(x) == root)
        if len(members) > MAX_MEMBERS:
            members = _nearest(members, positions)
        keep = set(members)
        triggers = tuple(sorted({t for t in comps[root] if set(parse_relation(t)[1:]) <= keep}))
        out.append(RegionOfInterest(tuple(members), task, triggers, _union_box(members, boxes)))
    return out


def _nearest(members, positions):
    if positions is None:
        return members[:MAX_MEMBERS]
    pts = np.array([positions[m] for m in members], dtype=float)
    d = np.linalg.norm(pts - pts.mean(axis=0), axis=1)
    order = sorted(range(len(members)), key=lambda i: (d[i], members[i]))
    return sorted(members[i] for i in order[:MAX_MEMBERS])


def _union_box(members, boxes):
    if boxes is None:
        return None
    lo = np.min([boxes[m][0] for m in members], axis=0)
    hi = np.max([boxes[m][1] for m in members], axis=0)
    return tuple(lo.tolist()), tuple(hi.tolist())


def singleton(obj: str, task: str, boxes=None) -> RegionOfInterest:
    return RegionOfInterest((obj,), task, (), _union_box([obj], boxes))
