from relspace import attention as A
from relspace.logic import kb


def test_relevant_axioms_follow_the_task_head():
    axioms = kb.base_axioms()
    occ = A.relevant_axioms(axioms, "occlusion")
    stab = A.relevant_axioms(axioms, "stability")
    assert {str(r) for r in occ} == {str(kb.axiom("not_behind_visible")), str(kb.axiom("behind_occluded_default"))}
    assert len(stab) == 3 and not set(map(str, occ)) & set(map(str, stab))


def test_occlusion_only_attends_to_behind():
    assert A.body_relations([kb.axiom("not_behind_visible")]) == {"behind"}


def test_stability_axioms_mention_above_and_attributes():
    rels = A.body_relations(A.relevant_axioms(kb.base_axioms(), "stability"))
    assert {"above", "obj_surface", "obj_size"} <= rels
    assert "behind" not in rels


def test_variable_relation_expands_to_all_names():
    rule = kb.axiom("-occluded(A) :- obj_relation(R, A, B), obj_size(A, large).")
    assert A.body_relations([rule], ("left", "right")) >= {"left", "right", "obj_size"}


def test_regions_are_connected_components_of_relevant_edges():
    facts = ["obj_relation(behind,a,b)", "obj_relation(behind,c,d)", "obj_relation(left,b,c)",
             "obj_relation(behind,d,e)"]
    rois = A.extract_rois(facts, {"behind"}, "occlusion")
    assert [r.members for r in rois] == [("a", "b"), ("c", "d", "e")]
    assert rois[1].triggers == ("obj_relation(behind,c,d)", "obj_relation(behind,d,e)")


def test_irrelevant_relations_give_no_regions():
    assert A.extract_rois(["obj_relation(left,a,b)"], {"behind"}, "occlusion") == []


def test_large_components_keep_the_most_central_members():
    ids = [f"o{i}" for i in range(7)]
    facts = [f"obj_relation(above,{a},{b})" for a, b in zip(ids, ids[1:])]
    positions = {o: (float(i), 0.0, 0.0) for i, o in enumerate(ids)}
    (roi,) = A.extract_rois(facts, {"above"}, "stability", positions=positions)
    assert roi.members == ("o1", "o2", "o3", "o4", "o5")
    assert all(t.split(",")[1] in roi.members for t in roi.triggers)


def test_region_box_is_the_union_of_member_boxes():
    boxes = {"a": ((0, 0, 0), (1, 1, 1)), "b": ((2, -1, 0), (3, 0, 2))}
    (roi,) = A.extract_rois(["obj_relation(behind,a,b)"], {"behind"}, "occlusion", boxes=boxes)
    assert roi.bbox == ((0, -1, 0), (3, 1, 2))
    assert roi.to_dict()["bbox"] == [[0.0, -1.0, 0.0], [3.0, 1.0, 2.0]]
