"""Reason first, then attend and learn only where reasoning fails."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import attention, learner
from .. import induction as ind
from ..grounding import Grounder, extract_relations
from ..logic import kb
from ..logic.reasoning import NEGATIVE, POSITIVE, UNKNOWN, infer
from ..scene import DISTANCE_RELATIONS, POSITION_RELATIONS, Scene, ground_truth, sample_scene_clouds

TASKS = ("occlusion", "stability")
UNDECIDED = "undecided"
RELATION_NAMES = set(POSITION_RELATIONS + DISTANCE_RELATIONS)


class StageError(RuntimeError):
    def __init__(self, stage: str, err: Exception):
        super().__init__(f"[{stage}] {type(err).__name__}: {err}")
        self.stage = stage


@dataclass
class Decision:
    value: bool | str  # True / False, or "undecided"
    source: str  # reasoning or learner


@dataclass
class PipelineResult:
    decisions: dict = field(default_factory=dict)  # (task, target) -> Decision
    rois: list = field(default_factory=list)  # (RegionOfInterest, triggering target, reason)
    learner_examples: list = field(default_factory=list)
    induction_examples: dict = field(default_factory=lambda: {t: [] for t in TASKS})
    diagnostics: dict = field(default_factory=dict)
    fired_axioms: set = field(default_factory=set)
    reasoned: dict = field(default_factory=dict)  # (task, target) -> reasoning label


def relation_facts(scene: Scene, source: str = "oracle", grounder: Grounder | None = None,
                   points_per_object: int = 500, noise: float = 0.0, seed: int = 0) -> list[str]:
    """Relation facts from exact geometry (``oracle``) or from sampled point clouds."""
    if source == "oracle":
        gt = ground_truth(scene, noise, seed)
        out = []
        for (a, b), (pos, dist) in gt.relations.items():
            out += [f"obj_relation({pos},{a},{b})", f"obj_relation({dist},{a},{b})"]
        return out
    if source in ("qsr", "msr", "combined"):
        clouds = sample_scene_clouds(scene, points_per_object)
        return extract_relations(scene, clouds, grounder, source)
    raise ValueError(f"unknown relation source {source!r}")


def scene_facts(scene: Scene, relations) -> list[str]:
    return kb.attribute_facts(scene) + kb.height_facts(scene.ids, relations)


def _targets(scene: Scene, task: str) -> dict:
    if task == "occlusion":
        return {o: [o] for o in scene.ids}
    return {sid: list(m) for sid, m in zip(scene.structure_ids(), scene.structures)}


def _truth(gt, task, target):
    return gt.occluded[target] if task == "occlusion" else gt.stable[target]


def _rois_for(scene, rel, program, task, members, boxes, positions):
    relevant = attention.body_relations(attention.relevant_axioms(program, task), RELATION_NAMES)
    rois = attention.extract_rois(rel, relevant & RELATION_NAMES, task, positions, boxes)
    hit = [r for r in rois if set(r.members) & set(members)]
    if hit:
        return hit
    fallback = sorted(members)[: attention.MAX_MEMBERS]
    return [attention.RegionOfInterest(tuple(fallback), task, (), attention._union_box(fallback, boxes))]


def run_pipeline(scene: Scene, axioms, model: learner.Model | None = None, mode: str = "test",
                 relations=None, relation_source: str = "oracle", grounder: Grounder | None = None,
                 truth=None) -> PipelineResult:
    """Label every object's occlusion and every structure's stability.

    In ``train`` mode reasoning mismatches against ``truth`` (computed
    from the scene when absent) also count as failures, and the regions
    around failures become learner and induction examples. In ``test``
    mode the learner fills gaps; without a model they stay undecided.
    """
    if mode not in ("train", "test"):
        raise ValueError(f"mode must be train or test, not {mode!r}")
    try:
        rel = list(relations) if relations is not None else relation_facts(scene, relation_source, grounder)
    except Exception as e:  # noqa: BLE001 - re-raised with a stage tag
        raise StageError("grounding", e) from e
    facts = scene_facts(scene, rel)
    axioms = list(axioms)
    try:
        program = kb.scene_program(scene.ids, axioms)
    except Exception as e:  # noqa: BLE001
        raise StageError("reasoning", e) from e
    gt = truth if truth is not None else (ground_truth(scene) if mode == "train" else None)
    boxes = {o.id: o.bbox() for o in scene.objects}
    positions = {o.id: np.asarray(o.position) for o in scene.objects}
    attrs = {o.id: o for o in scene.objects}
    res = PipelineResult()
    axiom_texts = {str(a) for a in axioms}
    seen_rois = set()
    for task in TASKS:
        targets = _targets(scene, task)
        inf = infer(program, rel, facts, task, targets if task == "stability" else None)
        if inf.diagnosis:
            res.diagnostics[task] = inf.diagnosis
        res.fired_axioms |= inf.fired & axiom_texts
        for target, members in targets.items():
            label = inf.labels[target]
            res.reasoned[(task, target)] = label
            reason = None
            if label == UNKNOWN:
                reason = "unknown"
            elif mode == "train" and (label == POSITIVE) != _truth(gt, task, target):
                reason = "mismatch"
            if reason is None:
                res.decisions[(task, target)] = Decision(label == POSITIVE, "reasoning")
                continue
            rois = _rois_for(scene, rel, program, task, members, boxes, positions)
            for roi in rois:
                res.rois.append((roi, target, reason))
            if mode == "train":
                for roi in rois:
                    key = (task, roi.members)
                    if key in seen_rois:
                        continue
                    seen_rois.add(key)
                    _collect(res, roi, task, rel, attrs, gt)
            res.decisions[(task, target)] = _predict(model, rois, task, target, rel, attrs)
    return res


def _collect(res, roi, task, rel, attrs, gt):
    rid = f"{task}:{','.join(roi.members)}"
    if task == "occlusion":
        ex = learner.make_example(roi, rel, attrs, occluded={m: gt.occluded[m] for m in roi.members}, roi=rid)
    else:
        ex = learner.make_example(roi, rel, attrs, stable=all(gt.object_stable[m] for m in roi.members), roi=rid)
    res.learner_examples.append(ex)
    for m in roi.members:
        if task == "occlusion":
            label = "occluded" if gt.occluded[m] else "not_occluded"
        else:
            label = "stable" if gt.object_stable[m] else "unstable"
        res.induction_examples[task].append(
            ind.RelationalExample(ind.describe(m, roi.members, rel, attrs), label, rid, m))


def _predict(model, rois, task, target, rel, attrs) -> Decision:
    if model is None:
        return Decision(UNDECIDED, "learner")
    roi = rois[0]
    probs, _ = learner.predict(model, learner.featurize_roi(roi, rel, attrs))
    if task == "stability":
        return Decision(bool(probs[learner.STABILITY] >= 0.5), "learner")
    members = sorted(roi.members)
    if target not in members:
        return Decision(UNDECIDED, "learner")
    return Decision(bool(probs[members.index(target)] >= 0.5), "learner")


def fill_gaps(result: PipelineResult, model: learner.Model, scene: Scene, relations) -> dict:
    """Decisions of a test-mode run without a model, with ``model`` filling the undecided targets."""
    attrs = {o.id: o for o in scene.objects}
    rois: dict = {}
    for roi, target, _ in result.rois:
        rois.setdefault((roi.task, target), []).append(roi)
    out = {}
    for key, d in result.decisions.items():
        if d.source == "learner" and key in rois:
            out[key] = _predict(model, rois[key], key[0], key[1], relations, attrs)
        else:
            out[key] = d
    return out


def reasoning_label_value(label: str):
    return {POSITIVE: True, NEGATIVE: False}.get(label)
