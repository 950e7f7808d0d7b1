"""File formats: scenes, ROI example records, and thin wrappers over the text dumps."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .. import induction as ind
from .. import learner
from ..grounding import VisualWordStore
from ..scene import GroundTruth, ObjectInstance, Scene, Vec3

SCENE_VERSION = 1


class FormatError(ValueError):
    pass


# ---------------------------------------------------------------- scenes

def scene_to_dict(scene: Scene, truth: GroundTruth | None = None) -> dict:
    out = {
        "relspace_scene": SCENE_VERSION,
        "arrangement": scene.arrangement,
        "seed": scene.seed,
        "structures": [list(s) for s in scene.structures],
        "objects": [
            {"id": o.id, "shape": o.shape, "size": o.size, "surface": o.surface, "color": o.color,
             "position": list(o.position), "yaw": o.yaw, "half_extents": list(o.half_extents)}
            for o in scene.objects
        ],
    }
    if truth is not None:
        out["ground_truth"] = {
            "occluded": truth.occluded,
            "stable": truth.stable,
            "object_stable": truth.object_stable,
            "relations": [[a, b, p, d] for (a, b), (p, d) in sorted(truth.relations.items())],
        }
    return out


def scene_from_dict(data: dict) -> tuple[Scene, GroundTruth | None]:
    if data.get("relspace_scene") != SCENE_VERSION:
        raise FormatError(f"unsupported scene version {data.get('relspace_scene')!r}")
    try:
        objects = tuple(
            ObjectInstance(o["id"], o["shape"], o["size"], o["surface"], o["color"], Vec3(*o["position"]),
                           float(o["yaw"]), Vec3(*o["half_extents"]))
            for o in data["objects"])
        scene = Scene(objects, data["arrangement"], int(data["seed"]),
                      tuple(tuple(s) for s in data["structures"]))
    except (KeyError, TypeError) as e:
        raise FormatError(f"malformed scene: {e}") from e
    gt = data.get("ground_truth")
    truth = None
    if gt is not None:
        truth = GroundTruth(dict(gt["occluded"]), dict(gt["stable"]), dict(gt["object_stable"]),
                            {(a, b): (p, d) for a, b, p, d in gt["relations"]})
    return scene, truth


def dumps_scene(scene: Scene, truth: GroundTruth | None = None) -> str:
    return json.dumps(scene_to_dict(scene, truth), sort_keys=True, indent=1) + "\n"


def loads_scene(text: str) -> tuple[Scene, GroundTruth | None]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"not JSON: {e}") from e
    if not isinstance(data, dict):
        raise FormatError("scene file must hold a JSON object")
    return scene_from_dict(data)


def scene_files(directory) -> list[Path]:
    return sorted(Path(directory).glob("*.json"))


# ---------------------------------------------------------------- ROI example records (JSON lines)

def roi_record(task: str, members, relation_facts, attributes, learner_example: learner.Example,
               induction_examples=()) -> dict:
    """One region with everything needed to rebuild its learner and induction examples."""
    members = sorted(members)
    keep = set(members)
    rels = [f for f in relation_facts if _pair(f) and set(_pair(f)) <= keep]
    attrs = {m: list(learner._attrs(attributes[m])) for m in members}
    return {
        "task": task,
        "roi": learner_example.roi,
        "members": members,
        "relations": rels,
        "attributes": attrs,
        "y": learner_example.y.tolist(),
        "mask": learner_example.mask.tolist(),
        "induction": [{"target": e.target, "label": e.label, "attributes": e.attributes}
                      for e in induction_examples],
    }


def _pair(fact):
    f = fact.strip().rstrip(".")
    if not f.startswith("obj_relation("):
        return None
    return tuple(s.strip() for s in f[len("obj_relation("):-1].split(",")[1:])


def learner_example(record: dict) -> learner.Example:
    x = learner.featurize_roi(record["members"], record["relations"],
                              {k: tuple(v) for k, v in record["attributes"].items()})
    return learner.Example(x, np.array(record["y"], dtype=float), np.array(record["mask"], dtype=float),
                           record.get("roi", ""))


def induction_examples(record: dict) -> list[ind.RelationalExample]:
    return [ind.RelationalExample(dict(e["attributes"]), e["label"], record.get("roi", ""), e["target"])
            for e in record.get("induction", [])]


def write_jsonl(path, records) -> None:
    with open(path, "w") as fh:
        for r in records:
            fh.write(json.dumps(r, sort_keys=True) + "\n")


def read_jsonl(path) -> list[dict]:
    out = []
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            if line.strip():
                try:
                    out.append(json.loads(line))
                except json.JSONDecodeError as e:
                    raise FormatError(f"{path}:{n}: {e}") from e
    return out


# ---------------------------------------------------------------- text dumps

def save_model(path, model: learner.Model) -> None:
    Path(path).write_text(model.dumps())


def load_model(path) -> learner.Model:
    return learner.Model.loads(Path(path).read_text())


def save_store(path, store: ind.AxiomStore) -> None:
    Path(path).write_text(store.dumps())


def load_store(path) -> ind.AxiomStore:
    return ind.AxiomStore.loads(Path(path).read_text())


def save_msr(path, store: VisualWordStore) -> None:
    Path(path).write_text(store.dumps())


def load_msr(path) -> VisualWordStore:
    return VisualWordStore.loads(Path(path).read_text())
